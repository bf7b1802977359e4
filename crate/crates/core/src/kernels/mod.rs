//! Heat kernel, subordinated Green's function, Riesz kernel, kernel tables
//! with their on-disk cache, lattice convolution and the fractional Laplacian.

pub mod bessel;
pub mod cache;
pub mod convolve;
pub mod fractional;
pub mod green;
pub mod heat;
pub mod quadrature;
pub mod table;

pub use cache::{load_or_build, CacheKey, CacheStatus};
pub use convolve::{convolve, convolve_onto};
pub use fractional::{fractional_laplacian, heat_semigroup};
pub use green::{green_function, riesz_kernel, GreenEvaluator, KernelMethod};
pub use heat::{heat_kernel, heat_kernel_1d, heat_kernel_1d_profile, heat_kernel_spectral};
pub use quadrature::QuadratureSpec;
pub use table::{KernelKind, KernelTable};
