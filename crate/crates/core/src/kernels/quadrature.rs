//! Quadrature on the subordination time axis `t ∈ (0, ∞)`.
//!
//! Integrals of the form `∫_0^∞ F(t) dt` where `F(t) ~ t^{a-1}` as `t → 0`
//! (`a > 0`) and `F(t) ~ t^{-q-1}` as `t → ∞` (`q > 0`) are split at
//! `0 < t₁ < T`:
//!
//! * `[0, t₁]` by Gauss-Jacobi quadrature with the endpoint power `t^{a-1}`
//!   as weight;
//! * `[t₁, T]` in `log t`, one Gauss-Legendre panel per unit length;
//! * `[T, ∞)` with `t = T/y`, which maps the algebraic tail onto `(0, 1]`
//!   with weight `y^{q-1}`, again by Gauss-Jacobi.
//!
//! Each segment uses `nodes` points per panel.

use std::fmt;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::error::{Error, Result};
use crate::kernels::bessel::legendre_rule;

/// Gauss-Jacobi nodes and weights on `[-1, 1]` for the weight `(1 + x)^beta`.
fn jacobi_rule(n: usize, beta: f64) -> Result<Vec<(f64, f64)>> {
    let n = std::num::NonZeroUsize::new(n).ok_or_else(|| Error::Parameter("empty rule".into()))?;
    let beta = beta
        .try_into()
        .map_err(|_| Error::Parameter(format!("Jacobi exponent {beta} must exceed -1")))?;
    let rule = gauss_quad::GaussJacobi::new(n, 0.0.try_into().expect("0 > -1"), beta);
    Ok(rule.as_node_weight_pairs().to_vec())
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct QuadratureSpec {
    /// First split point `t₁`.
    pub split: f64,
    /// Second split point `T`; chosen from the offset range when `None`.
    pub t_max: Option<f64>,
    /// Gauss-Legendre nodes per panel.
    pub nodes: usize,
    /// Target relative accuracy, certified by comparing against
    /// [`QuadratureSpec::refined`].
    pub eps: f64,
}

impl Default for QuadratureSpec {
    fn default() -> Self {
        QuadratureSpec {
            split: 1.0,
            t_max: None,
            nodes: 32,
            eps: 1e-8,
        }
    }
}

impl fmt::Display for QuadratureSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "split={:?} nodes={} eps={:?} t_max=", self.split, self.nodes, self.eps)?;
        match self.t_max {
            Some(t) => write!(f, "{t:?}"),
            None => write!(f, "auto"),
        }
    }
}

impl QuadratureSpec {
    pub fn validate(&self) -> Result<()> {
        if !(self.split > 0.0 && self.split.is_finite()) {
            return Err(Error::Parameter(format!("split point {} must be positive", self.split)));
        }
        if let Some(t) = self.t_max {
            if !(t > self.split && t.is_finite()) {
                return Err(Error::Parameter(format!(
                    "t_max {t} must exceed the split point {}",
                    self.split
                )));
            }
        }
        if self.nodes < 8 {
            return Err(Error::Parameter(format!("{} nodes per panel; need ≥ 8", self.nodes)));
        }
        if !(self.eps > 0.0) {
            return Err(Error::Parameter("eps must be positive".into()));
        }
        Ok(())
    }

    /// The same segmentation with twice the nodes per panel.
    pub fn refined(&self) -> Self {
        QuadratureSpec {
            nodes: 2 * self.nodes,
            ..*self
        }
    }

    /// `T` for offsets up to `extent` in sup norm.
    pub fn t_max_for(&self, extent: u32) -> f64 {
        self.t_max.unwrap_or_else(|| {
            let e = extent as f64 + 1.0;
            (4.0 * e * e).max(4.0 * self.split)
        })
    }

    /// Stable short hash of the parameters, used in cache keys.
    pub fn hash_hex(&self) -> String {
        let digest = Sha256::digest(self.to_string().as_bytes());
        digest[..8].iter().map(|b| format!("{b:02x}")).collect()
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Segment {
    Near,
    Middle,
    Far,
}

/// Nodes `t_j` and weights `ω_j` with `∫_0^∞ F ≈ Σ_j ω_j F(t_j)`.
#[derive(Clone, Debug)]
pub struct SubordinationRule {
    pub nodes: Vec<(f64, f64, Segment)>,
    pub split: f64,
    pub t_max: f64,
}

impl SubordinationRule {
    /// `near_exponent` is `a` in `F ~ t^{a-1}` at zero, `far_exponent` is `q`
    /// in `F ~ t^{-q-1}` at infinity.
    pub fn new(spec: &QuadratureSpec, t_max: f64, near_exponent: f64, far_exponent: f64) -> Result<Self> {
        spec.validate()?;
        if !(near_exponent > 0.0 && far_exponent > 0.0) {
            return Err(Error::Parameter(format!(
                "subordination integral diverges (exponents {near_exponent}, {far_exponent})"
            )));
        }
        if !(t_max > spec.split) {
            return Err(Error::Parameter(format!("t_max {t_max} must exceed {}", spec.split)));
        }
        let base = legendre_rule(spec.nodes);
        let t1 = spec.split;
        let mut nodes = Vec::new();

        // [0, t1]: F(t) = h(t) t^{a-1} with h smooth; Gauss-Jacobi in the
        // weight (1 + x)^{a-1} integrates h exactly for polynomials.
        let a = near_exponent;
        for (x, w) in jacobi_rule(spec.nodes, a - 1.0)? {
            let t = 0.5 * t1 * (x + 1.0);
            nodes.push((t, (0.5 * t1).powf(a) * w / t.powf(a - 1.0), Segment::Near));
        }

        // [t1, T] in log t.
        let (s0, s1) = (t1.ln(), t_max.ln());
        let panels = ((s1 - s0).ceil() as usize).max(1);
        let h = (s1 - s0) / panels as f64;
        for k in 0..panels {
            let lo = s0 + k as f64 * h;
            for &(x, w) in &base {
                let t = (lo + 0.5 * h * (x + 1.0)).exp();
                nodes.push((t, 0.5 * h * w * t, Segment::Middle));
            }
        }

        // [T, ∞): F(t) = g(t) t^{-q-1} with g smooth in 1/t. With t = T/y,
        // y ∈ (0, 1], the integral is T^{-q} ∫ g(T/y) y^{q-1} dy.
        let q = far_exponent;
        for (x, w) in jacobi_rule(spec.nodes, q - 1.0)? {
            let t = 2.0 * t_max / (x + 1.0);
            nodes.push((t, (2.0 * t_max).powf(-q) * w * t.powf(q + 1.0), Segment::Far));
        }

        Ok(SubordinationRule {
            nodes,
            split: t1,
            t_max,
        })
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn integrate(&self, mut f: impl FnMut(f64) -> f64) -> f64 {
        self.nodes.iter().map(|&(t, w, _)| w * f(t)).sum()
    }
}
