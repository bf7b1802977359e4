//! Tabulated translation-invariant kernels over all offsets reachable inside
//! a window.

use std::fmt;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::kernels::green::{check_alpha, riesz_kernel, GreenEvaluator, KernelMethod};
use crate::kernels::quadrature::QuadratureSpec;
use crate::lattice::LatticeWindow;

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum KernelKind {
    /// Green's function `R_α` of the discrete fractional Laplacian.
    #[default]
    Green,
    /// `|v|^{α-N}`, undefined on the diagonal.
    Riesz,
}

impl fmt::Display for KernelKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            KernelKind::Green => "green",
            KernelKind::Riesz => "riesz",
        })
    }
}

impl std::str::FromStr for KernelKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "green" => Ok(KernelKind::Green),
            "riesz" => Ok(KernelKind::Riesz),
            other => Err(Error::InvalidInput(format!("unknown kernel kind {other:?}"))),
        }
    }
}

/// Canonical representative of an offset's orbit under coordinate
/// permutations and sign flips: absolute values sorted in decreasing order.
pub fn canonical_offset(v: &[i32]) -> Vec<i32> {
    let mut c: Vec<i32> = v.iter().map(|x| x.abs()).collect();
    c.sort_unstable_by(|a, b| b.cmp(a));
    c
}

/// All canonical representatives with entries in `0..=extent`.
pub fn orbit_representatives(dim: usize, extent: u32) -> Vec<Vec<i32>> {
    fn rec(dim: usize, cap: i32, prefix: &mut Vec<i32>, out: &mut Vec<Vec<i32>>) {
        if prefix.len() == dim {
            out.push(prefix.clone());
            return;
        }
        for x in (0..=cap).rev() {
            prefix.push(x);
            rec(dim, x, prefix, out);
            prefix.pop();
        }
    }
    let mut out = Vec::new();
    rec(dim, extent as i32, &mut Vec::with_capacity(dim), &mut out);
    out.reverse();
    out
}

/// Kernel values on every offset of sup norm ≤ `extent`.
///
/// Values are computed once per symmetry orbit and expanded into a dense
/// array over `[-extent, extent]^N` for convolution.
#[derive(Clone, Debug)]
pub struct KernelTable {
    kind: KernelKind,
    alpha: f64,
    dim: usize,
    radius: i32,
    extent: u32,
    method: KernelMethod,
    quad: QuadratureSpec,
    orbits: Vec<(Vec<i32>, f64)>,
    dense: Vec<f64>,
    strides: Vec<isize>,
}

impl PartialEq for KernelTable {
    fn eq(&self, other: &Self) -> bool {
        self.kind == other.kind
            && self.alpha.to_bits() == other.alpha.to_bits()
            && self.dim == other.dim
            && self.radius == other.radius
            && self.extent == other.extent
            && self.method == other.method
            && self.quad == other.quad
            && self.orbits.len() == other.orbits.len()
            && self
                .orbits
                .iter()
                .zip(&other.orbits)
                .all(|(a, b)| a.0 == b.0 && a.1.to_bits() == b.1.to_bits())
    }
}

impl KernelTable {
    /// Tabulates `kind` for all offsets between sites of `window`.
    pub fn build(
        kind: KernelKind,
        alpha: f64,
        window: &LatticeWindow,
        quad: &QuadratureSpec,
        method: KernelMethod,
    ) -> Result<Self> {
        let extent = 2 * window.radius() as u32;
        Self::build_with_extent(kind, alpha, window.dim(), window.radius(), extent, quad, method)
    }

    pub fn build_with_extent(
        kind: KernelKind,
        alpha: f64,
        dim: usize,
        radius: i32,
        extent: u32,
        quad: &QuadratureSpec,
        method: KernelMethod,
    ) -> Result<Self> {
        check_alpha(alpha, dim)?;
        quad.validate()?;
        let reps = orbit_representatives(dim, extent);
        let values: Vec<f64> = match kind {
            KernelKind::Green => {
                let ev = GreenEvaluator::new(alpha, dim, extent, quad, method)?;
                reps.par_iter().map(|v| ev.value(v)).collect::<Result<_>>()?
            }
            KernelKind::Riesz => reps
                .iter()
                .map(|v| {
                    if v.iter().all(|c| *c == 0) {
                        Ok(0.0)
                    } else {
                        riesz_kernel(alpha, v)
                    }
                })
                .collect::<Result<_>>()?,
        };
        Self::from_orbits(
            kind,
            alpha,
            dim,
            radius,
            extent,
            method,
            *quad,
            reps.into_iter().zip(values).collect(),
        )
    }

    #[allow(clippy::too_many_arguments)]
    pub(crate) fn from_orbits(
        kind: KernelKind,
        alpha: f64,
        dim: usize,
        radius: i32,
        extent: u32,
        method: KernelMethod,
        quad: QuadratureSpec,
        orbits: Vec<(Vec<i32>, f64)>,
    ) -> Result<Self> {
        let expected = orbit_representatives(dim, extent);
        if orbits.len() != expected.len()
            || orbits.iter().zip(&expected).any(|((a, _), b)| a != b)
        {
            return Err(Error::Internal("orbit list does not match the table extent".into()));
        }
        if let Some((v, x)) = orbits.iter().find(|(_, x)| !(x.is_finite() && *x >= 0.0)) {
            return Err(Error::Internal(format!("kernel value {x} at {v:?} is not finite and ≥ 0")));
        }
        let side = 2 * extent as usize + 1;
        let mut strides = vec![1isize; dim];
        for axis in (0..dim.saturating_sub(1)).rev() {
            strides[axis] = strides[axis + 1] * side as isize;
        }
        let total = side.pow(dim as u32);
        let lookup: std::collections::HashMap<&[i32], f64> =
            orbits.iter().map(|(v, x)| (v.as_slice(), *x)).collect();
        let mut dense = vec![0.0; total];
        let mut coord = vec![0i32; dim];
        for (slot, d) in dense.iter_mut().enumerate() {
            let mut rem = slot;
            for axis in 0..dim {
                let s = strides[axis] as usize;
                coord[axis] = (rem / s) as i32 - extent as i32;
                rem %= s;
            }
            *d = lookup[canonical_offset(&coord).as_slice()];
        }
        Ok(KernelTable {
            kind,
            alpha,
            dim,
            radius,
            extent,
            method,
            quad,
            orbits,
            dense,
            strides,
        })
    }

    pub fn kind(&self) -> KernelKind {
        self.kind
    }

    pub fn alpha(&self) -> f64 {
        self.alpha
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    /// Radius of the window the table was built for.
    pub fn radius(&self) -> i32 {
        self.radius
    }

    /// Largest offset coordinate covered.
    pub fn extent(&self) -> u32 {
        self.extent
    }

    pub fn method(&self) -> KernelMethod {
        self.method
    }

    pub fn quadrature(&self) -> &QuadratureSpec {
        &self.quad
    }

    pub fn orbits(&self) -> &[(Vec<i32>, f64)] {
        &self.orbits
    }

    /// `R_α(0)` for the Green kernel; `None` for the Riesz kernel.
    pub fn diagonal(&self) -> Option<f64> {
        match self.kind {
            KernelKind::Green => Some(self.orbits[0].1),
            KernelKind::Riesz => None,
        }
    }

    pub fn covers(&self, v: &[i32]) -> bool {
        v.len() == self.dim && v.iter().all(|c| c.unsigned_abs() <= self.extent)
    }

    pub fn get(&self, v: &[i32]) -> Result<f64> {
        if !self.covers(v) {
            return Err(Error::Internal(format!(
                "offset {v:?} outside a kernel table of extent {}",
                self.extent
            )));
        }
        if self.kind == KernelKind::Riesz && v.iter().all(|c| *c == 0) {
            return Err(Error::Domain("the Riesz kernel excludes the diagonal v = 0".into()));
        }
        Ok(self.dense[self.dense_index(v)])
    }

    #[inline]
    pub(crate) fn dense_index(&self, v: &[i32]) -> usize {
        v.iter()
            .zip(&self.strides)
            .map(|(c, s)| (*c as isize + self.extent as isize) * s)
            .sum::<isize>() as usize
    }

    pub(crate) fn dense(&self) -> &[f64] {
        &self.dense
    }

    pub(crate) fn strides(&self) -> &[isize] {
        &self.strides
    }

    /// Maximum relative difference against another table of the same shape.
    pub fn max_relative_difference(&self, other: &KernelTable) -> Result<f64> {
        if self.dim != other.dim || self.extent != other.extent {
            return Err(Error::InvalidInput("tables of different shape".into()));
        }
        Ok(self
            .orbits
            .iter()
            .zip(&other.orbits)
            .map(|((_, a), (_, b))| if a == b { 0.0 } else { (a - b).abs() / a.abs().max(b.abs()) })
            .fold(0.0, f64::max))
    }

    /// `(min, max)` of `value(v) · |v|₁^{N-α}` over offsets with
    /// `lo ≤ |v|₁ ≤ hi` inside the table.
    pub fn asymptotic_bracket(&self, lo: u64, hi: u64) -> Option<(f64, f64)> {
        let power = self.dim as f64 - self.alpha;
        let mut out: Option<(f64, f64)> = None;
        for (v, x) in &self.orbits {
            let d: u64 = v.iter().map(|c| *c as u64).sum();
            if d < lo || d > hi {
                continue;
            }
            let scaled = x * (d as f64).powf(power);
            out = Some(match out {
                None => (scaled, scaled),
                Some((a, b)) => (a.min(scaled), b.max(scaled)),
            });
        }
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn orbit_counts() {
        // Orbits of [-16, 16]² under the dihedral group: pairs 16 ≥ a ≥ b ≥ 0.
        assert_eq!(orbit_representatives(2, 16).len(), 17 * 18 / 2);
        assert_eq!(orbit_representatives(1, 5).len(), 6);
        assert_eq!(orbit_representatives(3, 2).len(), 10);
        assert_eq!(orbit_representatives(2, 1), vec![vec![0, 0], vec![1, 0], vec![1, 1]]);
    }

    #[test]
    fn table_for_radius_eight_holds_every_orbit() {
        let w = LatticeWindow::boxed(2, 8).unwrap();
        let t = KernelTable::build(
            KernelKind::Riesz,
            1.0,
            &w,
            &QuadratureSpec::default(),
            KernelMethod::BesselProduct,
        )
        .unwrap();
        assert_eq!(t.orbits().len(), 153);
        assert_eq!(t.extent(), 16);
        assert!(t.covers(&[16, -16]));
        assert!(!t.covers(&[17, 0]));
        assert!((t.get(&[-3, 4]).unwrap() - 0.2).abs() < 1e-15);
        assert!(t.get(&[0, 0]).is_err());
        assert_eq!(t.diagonal(), None);
    }

    #[test]
    fn dense_expansion_respects_symmetry() {
        let t = KernelTable::build_with_extent(
            KernelKind::Green,
            1.0,
            2,
            3,
            6,
            &QuadratureSpec::default(),
            KernelMethod::BesselProduct,
        )
        .unwrap();
        for a in -6..=6 {
            for b in -6..=6 {
                let x = t.get(&[a, b]).unwrap();
                assert_eq!(x, t.get(&[-a, b]).unwrap());
                assert_eq!(x, t.get(&[b, a]).unwrap());
                assert!(x > 0.0 && x.is_finite());
            }
        }
        assert!(t.diagonal().unwrap() > t.get(&[1, 0]).unwrap());
    }
}
