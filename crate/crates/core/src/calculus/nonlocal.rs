//! The nonlocal Choquard term and the inequalities that control it.

use crate::error::{Error, Result};
use crate::field::{dot, lq_norm, Field};
use crate::kernels::convolve::convolve;
use crate::kernels::table::KernelTable;

/// Requires `p > (N + α)/N`.
pub fn check_exponent(p: f64, dim: usize, alpha: f64) -> Result<()> {
    let lower = (dim as f64 + alpha) / dim as f64;
    if !(p > lower && p.is_finite()) {
        return Err(Error::Parameter(format!("p = {p} must exceed (N + α)/N = {lower}")));
    }
    Ok(())
}

/// `|u|^p` sitewise.
pub fn abs_pow(u: &Field, p: f64) -> Field {
    u.map(|v| v.abs().powf(p))
}

/// `D(u) = Σ_x (K∗|u|^p)(x) |u(x)|^p`, diagonal excluded.
pub fn nonlocal_energy(u: &Field, kernel: &KernelTable, p: f64) -> Result<f64> {
    check_exponent(p, kernel.dim(), kernel.alpha())?;
    let a = abs_pow(u, p);
    let conv = convolve(kernel, &a, false)?;
    Ok(dot(conv.values(), a.values()))
}

/// `Σ (K∗u) v / (‖u‖_r ‖v‖_s)` for nonnegative `u, v`, with the HLS exponent
/// relation `1/r + 1/s + (N − α)/N = 2`.
pub fn hls_ratio(u: &Field, v: &Field, kernel: &KernelTable, r: f64, s: f64) -> Result<f64> {
    let n = kernel.dim() as f64;
    if !(r > 1.0 && s > 1.0) {
        return Err(Error::Parameter(format!("HLS exponents r = {r}, s = {s} must exceed 1")));
    }
    let defect = 1.0 / r + 1.0 / s + (n - kernel.alpha()) / n - 2.0;
    if defect.abs() > 1e-12 {
        return Err(Error::Parameter(format!(
            "1/r + 1/s + (N − α)/N = {} ≠ 2",
            defect + 2.0
        )));
    }
    if u.values().iter().chain(v.values()).any(|x| *x < 0.0) {
        return Err(Error::InvalidInput("HLS ratio needs nonnegative fields".into()));
    }
    let denom = lq_norm(u.values(), r) * lq_norm(v.values(), s);
    if denom == 0.0 {
        return Err(Error::Domain("HLS ratio of a zero field".into()));
    }
    let conv = convolve(kernel, u, false)?;
    Ok(conv.dot(v)? / denom)
}

/// HLS exponents `r = s` for the nonlocal term: `2N/(N + α)`.
pub fn symmetric_hls_exponent(dim: usize, alpha: f64) -> f64 {
    2.0 * dim as f64 / (dim as f64 + alpha)
}

/// Whether `‖u‖_t^t ≤ ‖u‖_s^s ‖u‖_∞^{t−s}` holds, up to round-off.
pub fn interpolation_check(u: &Field, s: f64, t: f64) -> Result<bool> {
    if !(1.0 <= s && s < t && t.is_finite()) {
        return Err(Error::Parameter(format!("need 1 ≤ s < t < ∞, got s = {s}, t = {t}")));
    }
    let sup = u.sup_norm();
    if sup == 0.0 {
        return Ok(true);
    }
    // Scale by the sup norm so both sides are O(1).
    let lhs: f64 = u.values().iter().map(|v| (v.abs() / sup).powf(t)).sum();
    let rhs: f64 = u.values().iter().map(|v| (v.abs() / sup).powf(s)).sum();
    Ok(lhs <= rhs * (1.0 + 1e-12))
}
