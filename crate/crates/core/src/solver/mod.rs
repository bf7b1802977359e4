//! Ground states by Nehari-projected descent, preconditioned by the
//! quadratic part of the energy.
//!
//! Each step takes the Riesz representative `r = A⁻¹J′(u)` of the derivative
//! in the energy inner product, moves to `u − s r`, and projects back onto
//! the Nehari manifold. The step `s` backtracks from `min(1, 2 s_prev)` until
//! the projected energy decreases by at least `c·s·‖J′(u)‖²_*`. At `s = 1`
//! the step is the normalised fixed-point map `u ↦ A⁻¹N(u)`.

mod cg;
mod diagnostics;
mod ground_state;
mod sweep;

pub use cg::{apply_quadratic_operator, cg_solve, dual_norm};
pub use diagnostics::{brezis_lieb_probe, ps_monitor, w22_inner, BrezisLiebRow, PsDiagnostics};
pub use ground_state::{
    ground_state, ground_state_detailed, Initializer, IterationRecord, RestartRecord, SolveResult, SolveStatus,
    SolverConfig,
};
pub use sweep::{lambda_sweep, ConvergenceReport, SweepRow, SweepVerdicts, LEVEL_SLACK};
