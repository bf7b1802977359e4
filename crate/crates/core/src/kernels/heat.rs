//! Heat kernel of the graph Laplacian on `Z^N`.
//!
//! The continuous-time simple random walk with unit jump rate per generator
//! factorises over coordinates, so `k_t(v) = Π_i e^{-2t} I_{v_i}(2t)`.

use std::f64::consts::PI;

use crate::error::{Error, Result};
use crate::kernels::bessel::{scaled_bessel_i, scaled_bessel_i_orders};

fn check_time(t: f64) -> Result<()> {
    if !(t >= 0.0 && t.is_finite()) {
        return Err(Error::InvalidInput(format!("heat time {t} must be finite and ≥ 0")));
    }
    Ok(())
}

/// One-dimensional kernel `e^{-2t} I_m(2t)`.
pub fn heat_kernel_1d(t: f64, m: i64) -> Result<f64> {
    check_time(t)?;
    Ok(scaled_bessel_i(m, 2.0 * t))
}

/// One-dimensional kernel for all offsets `0..=max_offset`.
pub fn heat_kernel_1d_profile(t: f64, max_offset: u32) -> Result<Vec<f64>> {
    check_time(t)?;
    Ok(scaled_bessel_i_orders(max_offset, 2.0 * t))
}

/// `k_t(v)` on `Z^N`, `N = v.len()`.
pub fn heat_kernel(t: f64, v: &[i32]) -> Result<f64> {
    check_time(t)?;
    if v.is_empty() {
        return Err(Error::InvalidInput("empty difference vector".into()));
    }
    Ok(v.iter().map(|&m| scaled_bessel_i(m as i64, 2.0 * t)).product())
}

/// Chernoff bound on the one-dimensional walk: `P(|X_t| ≥ d) ≤ 2 exp(-t·h(d/2t))`
/// with `h(x) = 2(x asinh x − √(1+x²) + 1)`.
pub fn walk_tail_bound(t: f64, d: f64) -> f64 {
    if d <= 0.0 {
        return 1.0;
    }
    if t == 0.0 {
        return 0.0;
    }
    let x = d / (2.0 * t);
    let rate = 2.0 * t * (x * x.asinh() - (1.0 + x * x).sqrt() + 1.0);
    (2.0 * (-rate).exp()).min(1.0)
}

/// Heat kernel of the discrete torus `(Z/LZ)^N` by its Fourier series:
/// `(1/L^N) Σ_θ e^{-tλ(θ)} cos(θ·v)` with `λ(θ) = Σ_i 2(1 − cos θ_i)`.
///
/// The symbol is a sum over coordinates, so the `L^N`-term sum factorises into
/// `N` one-dimensional sums; the value equals the periodisation
/// `Σ_{j∈Z^N} k_t(v + jL)` of the lattice kernel.
pub fn heat_kernel_spectral(t: f64, v: &[i32], torus_size: usize) -> Result<f64> {
    check_time(t)?;
    if v.is_empty() {
        return Err(Error::InvalidInput("empty difference vector".into()));
    }
    let extent = v.iter().map(|c| c.unsigned_abs() as usize).max().unwrap_or(0);
    if torus_size < 4 * extent.max(1) {
        return Err(Error::InvalidInput(format!(
            "torus size {torus_size} must be at least 4 × the offset extent {extent}"
        )));
    }
    let wrap = spectral_wraparound_bound(t, extent as f64, torus_size, v.len());
    if wrap > 1e-8 {
        log::warn!(
            "torus of size {torus_size} too small for t = {t}: wrap-around up to {wrap:.1e}"
        );
    }
    Ok(v.iter().map(|&m| torus_kernel_1d(t, m as i64, torus_size)).product())
}

pub(crate) fn torus_kernel_1d(t: f64, m: i64, torus_size: usize) -> f64 {
    let l = torus_size as f64;
    (0..torus_size)
        .map(|j| {
            let theta = 2.0 * PI * j as f64 / l;
            (-2.0 * t * (1.0 - theta.cos())).exp() * (theta * m as f64).cos()
        })
        .sum::<f64>()
        / l
}

/// Upper bound on the difference between the torus and lattice kernels at
/// offsets of magnitude ≤ `extent`.
pub fn spectral_wraparound_bound(t: f64, extent: f64, torus_size: usize, dim: usize) -> f64 {
    dim as f64 * walk_tail_bound(t, torus_size as f64 - extent)
}
