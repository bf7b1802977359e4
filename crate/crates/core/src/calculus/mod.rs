//! Discrete differential operators, the norms of `E_λ`, `W^{2,2}` and `E(Ω)`,
//! the potential `a`, and the nonlocal energy.

pub mod nonlocal;
pub mod norms;
pub mod operators;
pub mod potential;

pub use crate::field::Field;
pub use nonlocal::{check_exponent, hls_ratio, interpolation_check, nonlocal_energy, symmetric_hls_exponent};
pub use norms::{elambda_norm_sq, omega_norm_sq, w22_norm_sq};
pub use operators::{biharmonic, gradient_form, gradient_length, laplacian};
pub use potential::{PotentialProfile, PotentialSpec};
