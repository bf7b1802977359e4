//! The Green's function `R_α` of the discrete fractional Laplacian, obtained by
//! subordinating the heat kernel,
//!
//! ```text
//! R_α(v) = (1/Γ(α/2)) ∫_0^∞ k_t(v) t^{α/2 - 1} dt,
//! ```
//!
//! and the lattice Riesz kernel `|v|^{α-N}`.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::kernels::bessel::scaled_bessel_i_orders;
use crate::kernels::heat::{torus_kernel_1d, walk_tail_bound};
use crate::kernels::quadrature::{QuadratureSpec, Segment, SubordinationRule};

/// How the heat kernel inside the subordination integral is evaluated.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum KernelMethod {
    /// Products of scaled Bessel functions.
    #[default]
    BesselProduct,
    /// Fourier series on a torus large enough that wrap-around is below
    /// round-off for `t ≤ T`. The tail `t > T`, where no torus is large
    /// enough, still uses Bessel products.
    TorusSpectral,
}

impl std::fmt::Display for KernelMethod {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            KernelMethod::BesselProduct => "bessel-product",
            KernelMethod::TorusSpectral => "torus-spectral",
        })
    }
}

impl std::str::FromStr for KernelMethod {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "bessel-product" => Ok(KernelMethod::BesselProduct),
            "torus-spectral" => Ok(KernelMethod::TorusSpectral),
            other => Err(Error::InvalidInput(format!("unknown kernel method {other:?}"))),
        }
    }
}

pub fn check_alpha(alpha: f64, dim: usize) -> Result<()> {
    if !(alpha > 0.0 && alpha < dim as f64) {
        return Err(Error::Parameter(format!(
            "alpha must lie in (0, N): got alpha = {alpha}, N = {dim}"
        )));
    }
    Ok(())
}

/// Subordination of the heat kernel for all offsets with sup norm ≤ `extent`.
///
/// Holds the one-dimensional heat profiles at every quadrature node, so each
/// kernel value costs one pass over the nodes.
pub struct GreenEvaluator {
    alpha: f64,
    dim: usize,
    extent: u32,
    /// `(ω_j t_j^{α/2-1} / Γ(α/2), profile_j[0..=extent])`
    nodes: Vec<(f64, Vec<f64>)>,
}

impl GreenEvaluator {
    pub fn new(
        alpha: f64,
        dim: usize,
        extent: u32,
        quad: &QuadratureSpec,
        method: KernelMethod,
    ) -> Result<Self> {
        check_alpha(alpha, dim)?;
        let t_max = quad.t_max_for(extent);
        let rule = SubordinationRule::new(quad, t_max, 0.5 * alpha, 0.5 * (dim as f64 - alpha))?;
        let norm = libm::tgamma(0.5 * alpha).abs();
        let torus = match method {
            KernelMethod::BesselProduct => 0,
            KernelMethod::TorusSpectral => torus_size_for(t_max, extent),
        };
        let nodes = rule
            .nodes
            .iter()
            .map(|&(t, w, segment)| {
                let profile = if method == KernelMethod::TorusSpectral && segment != Segment::Far {
                    (0..=extent as i64).map(|m| torus_kernel_1d(t, m, torus)).collect()
                } else {
                    scaled_bessel_i_orders(extent, 2.0 * t)
                };
                (w * t.powf(0.5 * alpha - 1.0) / norm, profile)
            })
            .collect();
        Ok(GreenEvaluator {
            alpha,
            dim,
            extent,
            nodes,
        })
    }

    pub fn alpha(&self) -> f64 {
        self.alpha
    }

    pub fn extent(&self) -> u32 {
        self.extent
    }

    pub fn value(&self, v: &[i32]) -> Result<f64> {
        if v.len() != self.dim {
            return Err(Error::InvalidInput(format!(
                "offset of dimension {} for a {}-dimensional kernel",
                v.len(),
                self.dim
            )));
        }
        let idx: Vec<usize> = v.iter().map(|c| c.unsigned_abs() as usize).collect();
        if idx.iter().any(|&m| m > self.extent as usize) {
            return Err(Error::Internal(format!(
                "offset beyond the evaluator extent {}",
                self.extent
            )));
        }
        Ok(self
            .nodes
            .iter()
            .map(|(w, profile)| w * idx.iter().map(|&m| profile[m]).product::<f64>())
            .sum())
    }
}

/// Smallest power-of-two torus whose wrap-around at time `t_max` is negligible.
fn torus_size_for(t_max: f64, extent: u32) -> usize {
    let mut l = (4 * (extent as usize + 1)).next_power_of_two();
    while walk_tail_bound(t_max, (l - extent as usize) as f64) > 1e-17 {
        l *= 2;
    }
    l
}

/// `R_α(v)` on `Z^N` with `N = v.len()`.
pub fn green_function(alpha: f64, v: &[i32], quad: &QuadratureSpec) -> Result<f64> {
    let dim = v.len();
    if dim == 0 {
        return Err(Error::InvalidInput("empty difference vector".into()));
    }
    let extent = v.iter().map(|c| c.unsigned_abs()).max().unwrap_or(0);
    GreenEvaluator::new(alpha, dim, extent, quad, KernelMethod::BesselProduct)?.value(v)
}

/// `|v|^{α-N}` with the Euclidean norm; undefined on the diagonal.
pub fn riesz_kernel(alpha: f64, v: &[i32]) -> Result<f64> {
    let dim = v.len();
    check_alpha(alpha, dim)?;
    let r2: f64 = v.iter().map(|&c| (c as f64) * (c as f64)).sum();
    if r2 == 0.0 {
        return Err(Error::Domain("the Riesz kernel excludes the diagonal v = 0".into()));
    }
    Ok(r2.powf(0.5 * (alpha - dim as f64)))
}
