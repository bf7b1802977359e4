//! Ground states of the discrete Choquard equation
//!
//! ```text
//! Δ²u − Δu + (1 + λa(x)) u = (R_α ∗ |u|^p) |u|^{p−2} u   on Z^N
//! ```
//!
//! with a deepening potential well `a`, and of its Dirichlet limit on the
//! well `Ω = {a = 0}`. `R_α` is the Green's function of the discrete
//! fractional Laplacian, obtained by subordinating the lattice heat kernel.
//!
//! The crate is layered bottom-up:
//!
//! * [`lattice`]: windows of `Z^N`, word metric, balls and boundaries;
//! * [`kernels`]: heat kernel, `R_α`, the Riesz kernel, kernel tables,
//!   convolution and the fractional Laplacian;
//! * [`calculus`]: `Δ`, `Γ`, `Δ²`, the norms and the nonlocal term;
//! * [`variational`]: energies, gradients and the Nehari manifold;
//! * [`solver`]: ground-state descent, the λ-sweep and diagnostics;
//! * [`verify`]: property suites that measure the constants behind the
//!   existence theory.

// `!(x > 0.0)` is used on purpose: it also rejects NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod calculus;
pub mod error;
pub mod field;
pub mod kernels;
pub mod lattice;
pub mod solver;
pub mod variational;
pub mod verify;

pub use error::{Error, Result};
pub use field::Field;
pub use kernels::{KernelKind, KernelMethod, KernelTable, QuadratureSpec};
pub use lattice::{LatticeWindow, Site, SiteSet, WindowShape};
