use std::path::PathBuf;

use thiserror::Error;

/// Errors raised by the lattice, kernel, variational and solver layers.
#[derive(Debug, Error)]
pub enum Error {
    /// Malformed arguments: dimension mismatches, negative radii, empty regions.
    #[error("invalid input: {0}")]
    InvalidInput(String),

    /// A model parameter outside its admissible range.
    #[error("invalid parameter: {0}")]
    Parameter(String),

    /// A point outside the domain of a kernel or functional.
    #[error("domain error: {0}")]
    Domain(String),

    /// The nonlocal term vanishes, so no positive multiple of the field lies on
    /// the Nehari manifold (single-site fields are the typical case).
    #[error("no Nehari projection: the nonlocal term D(u) vanishes")]
    NoProjection,

    /// A field is too far from the Nehari manifold for the requested operation.
    #[error("Nehari defect {defect:e} exceeds tolerance {tolerance:e}")]
    NehariDefect { defect: f64, tolerance: f64 },

    #[error("conjugate gradient stalled after {iterations} iterations (relative residual {residual:e})")]
    CgConvergence { iterations: usize, residual: f64 },

    #[error("initializer produced no field with a positive nonlocal term")]
    Initializer,

    #[error("descent stagnated at iteration {iteration} (dual residual {residual:e})")]
    Stagnation { iteration: usize, residual: f64 },

    #[error("iteration limit {iterations} reached (dual residual {residual:e})")]
    IterationLimit { iterations: usize, residual: f64 },

    #[error("probe inconclusive: {0}")]
    Inconclusive(String),

    #[error("kernel cache {path}: {reason}")]
    Cache { path: PathBuf, reason: String },

    #[error("parse error at line {line}: {reason}")]
    Parse { line: usize, reason: String },

    #[error("internal error: {0}")]
    Internal(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
