use crate::error::{Error, Result};
use crate::field::{dot, Field};
use crate::solver::SolverConfig;
use crate::variational::{ProblemSpec, QuadraticOperator};

/// Jacobi-preconditioned conjugate gradients for `A r = rhs` on the active
/// coordinates. The reported residual is the true one, `‖A r − rhs‖₂/‖rhs‖₂`;
/// when the recurrence drifts away from it the iteration restarts from the
/// current iterate.
pub(crate) fn pcg(op: &QuadraticOperator, rhs: &[f64], tol: f64, max_iterations: usize) -> Result<Vec<f64>> {
    let n = rhs.len();
    let rhs_norm = dot(rhs, rhs).sqrt();
    let mut x = vec![0.0; n];
    if rhs_norm == 0.0 {
        return Ok(x);
    }
    let inv_diag: Vec<f64> = op.diagonal().iter().map(|d| 1.0 / d).collect();
    let mut used = 0;
    let mut residual = 1.0;
    while used < max_iterations {
        let ax = op.apply(&x);
        let mut r: Vec<f64> = rhs.iter().zip(&ax).map(|(b, a)| b - a).collect();
        residual = dot(&r, &r).sqrt() / rhs_norm;
        if residual <= tol {
            return Ok(x);
        }
        let mut z: Vec<f64> = r.iter().zip(&inv_diag).map(|(a, b)| a * b).collect();
        let mut dir = z.clone();
        let mut rz = dot(&r, &z);
        while used < max_iterations {
            used += 1;
            let ad = op.apply(&dir);
            let curvature = dot(&dir, &ad);
            if !(curvature > 0.0) {
                break;
            }
            let step = rz / curvature;
            for ((xi, ri), (di, adi)) in x.iter_mut().zip(r.iter_mut()).zip(dir.iter().zip(&ad)) {
                *xi += step * di;
                *ri -= step * adi;
            }
            if dot(&r, &r).sqrt() <= 0.5 * tol * rhs_norm {
                break;
            }
            for ((zi, ri), d) in z.iter_mut().zip(&r).zip(&inv_diag) {
                *zi = ri * d;
            }
            let rz_next = dot(&r, &z);
            let beta = rz_next / rz;
            rz = rz_next;
            for (di, zi) in dir.iter_mut().zip(&z) {
                *di = zi + beta * *di;
            }
        }
    }
    let ax = op.apply(&x);
    let r: Vec<f64> = rhs.iter().zip(&ax).map(|(b, a)| b - a).collect();
    let last = dot(&r, &r).sqrt() / rhs_norm;
    if last <= tol {
        return Ok(x);
    }
    Err(Error::CgConvergence {
        iterations: used,
        residual: last.min(residual),
    })
}

/// `A·u` for `A = Δ² − Δ + (1 + λa)`, or its Dirichlet restriction to `Ω`.
pub fn apply_quadratic_operator(u: &Field, prob: &ProblemSpec) -> Result<Field> {
    let x = prob.active_values(u)?;
    prob.field_from_active(&prob.operator().apply(&x))
}

/// Solves `A r = rhs` to `cfg.cg_tol` relative residual.
pub fn cg_solve(rhs: &Field, prob: &ProblemSpec, cfg: &SolverConfig) -> Result<Field> {
    let b = prob.active_values(rhs)?;
    let r = pcg(prob.operator(), &b, cfg.cg_tol, cfg.cg_max_iterations)?;
    prob.field_from_active(&r)
}

/// `‖J′(u)‖_* = √(g·A⁻¹g)`, the norm of the derivative as a functional on the
/// energy space.
pub fn dual_norm(u: &Field, prob: &ProblemSpec, cfg: &SolverConfig) -> Result<f64> {
    let x = prob.active_values(u)?;
    let ev = prob.evaluate(&x);
    let g = prob.gradient(&x, &ev);
    let r = pcg(prob.operator(), &g, cfg.cg_tol, cfg.cg_max_iterations)?;
    Ok(dot(&g, &r).max(0.0).sqrt())
}
