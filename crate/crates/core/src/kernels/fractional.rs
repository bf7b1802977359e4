//! Heat semigroup on fields and the fractional Laplacian by subordination:
//!
//! ```text
//! (−Δ)^s u = (1/Γ(−s)) ∫_0^∞ (e^{tΔ}u − u) t^{−1−s} dt,   0 < s < 1.
//! ```
//!
//! `Γ(−s) < 0` and `e^{tΔ}u − u` is negative on positive spectrum, so the
//! quotient is the positive operator `(−Δ)^s`. Orders `α/2 ≥ 1` are split as
//! `(−Δ)^k (−Δ)^s` with the integer part applied exactly.

use std::sync::Arc;

use rayon::prelude::*;

use crate::calculus::laplacian;
use crate::error::{Error, Result};
use crate::field::Field;
use crate::kernels::heat::heat_kernel_1d_profile;
use crate::kernels::quadrature::{QuadratureSpec, Segment, SubordinationRule};
use crate::lattice::{LatticeWindow, WindowShape};

/// `e^{tΔ}u` restricted to the window of `u` (with `u` extended by zero).
pub fn heat_semigroup(t: f64, u: &Field) -> Result<Field> {
    let window = u.window();
    let bounding = bounding_box(window)?;
    let dense = if window.shape() == WindowShape::Box {
        u.values().to_vec()
    } else {
        u.embed(bounding.clone())?.into_values()
    };
    let profile = heat_kernel_1d_profile(t, 2 * window.radius() as u32)?;
    let smoothed = separable_apply(&dense, window.dim(), 2 * window.radius() as usize + 1, &profile);
    let out = Field::from_values(bounding, smoothed)?;
    Ok(if window.shape() == WindowShape::Box {
        out
    } else {
        out.restrict(window.clone())
    })
}

fn bounding_box(window: &Arc<LatticeWindow>) -> Result<Arc<LatticeWindow>> {
    Ok(match window.shape() {
        WindowShape::Box => window.clone(),
        WindowShape::WordBall => Arc::new(LatticeWindow::boxed(window.dim(), window.radius() as i64)?),
    })
}

/// Convolves a row-major cube of side `side` with the even 1-D kernel
/// `profile[|i−j|]` along every axis.
fn separable_apply(values: &[f64], dim: usize, side: usize, profile: &[f64]) -> Vec<f64> {
    let mut cur = values.to_vec();
    let mut next = vec![0.0; cur.len()];
    for axis in 0..dim {
        let stride = side.pow((dim - 1 - axis) as u32);
        let block = stride * side;
        // Lines along `axis` are indexed by (outer, inner) with
        // start = outer·block + inner.
        next.par_chunks_mut(block)
            .zip(cur.par_chunks(block))
            .for_each(|(out_block, in_block)| {
                let mut line = vec![0.0; side];
                for inner in 0..stride {
                    for (i, slot) in line.iter_mut().enumerate() {
                        *slot = in_block[inner + i * stride];
                    }
                    for i in 0..side {
                        let mut acc = 0.0;
                        for (j, x) in line.iter().enumerate() {
                            acc += profile[i.abs_diff(j)] * x;
                        }
                        out_block[inner + i * stride] = acc;
                    }
                }
            });
        std::mem::swap(&mut cur, &mut next);
    }
    cur
}

/// `(−Δ)^{α/2} u` on the window of `u`.
///
/// The input is extended by zero outside its window, so values near the
/// window edge feel the truncation; interior values converge as the window
/// grows.
pub fn fractional_laplacian(alpha: f64, u: &Field, quad: &QuadratureSpec) -> Result<Field> {
    if !(alpha > 0.0 && alpha.is_finite()) {
        return Err(Error::Parameter(format!("fractional order alpha = {alpha} must be positive")));
    }
    quad.validate()?;
    let half = 0.5 * alpha;
    let mut k = half.floor() as i64;
    let mut s = half - k as f64;
    if s < 1e-14 {
        s = 0.0;
    } else if 1.0 - s < 1e-14 {
        k += 1;
        s = 0.0;
    }

    // (−Δ)^k u is compactly supported on the window grown by k.
    let mut v = u.embed(Arc::new(u.window().grow(k)?))?;
    for _ in 0..k {
        v = laplacian(&v)?.scale(-1.0).restrict(v.window().clone());
    }
    let out = if s == 0.0 { v } else { fractional_part(s, &v, quad)? };
    Ok(out.restrict(u.window().clone()))
}

fn fractional_part(s: f64, u: &Field, quad: &QuadratureSpec) -> Result<Field> {
    let dim = u.window().dim() as f64;
    let extent = 2 * u.window().radius() as u32;
    let t_max = quad.t_max_for(extent);
    let rule = SubordinationRule::new(quad, t_max, 1.0 - s, 0.5 * dim + s)?;
    let base = u.values();
    let mut acc = vec![0.0; base.len()];
    for &(t, w, segment) in &rule.nodes {
        let smoothed = heat_semigroup(t, u)?;
        let c = w * t.powf(-1.0 - s);
        match segment {
            Segment::Near | Segment::Middle => {
                for ((a, h), u0) in acc.iter_mut().zip(smoothed.values()).zip(base) {
                    *a += c * (h - u0);
                }
            }
            Segment::Far => {
                for (a, h) in acc.iter_mut().zip(smoothed.values()) {
                    *a += c * h;
                }
            }
        }
    }
    // −u ∫_T^∞ t^{−1−s} dt
    let tail = t_max.powf(-s) / s;
    let gamma = libm::tgamma(-s);
    let values = acc
        .iter()
        .zip(base)
        .map(|(a, u0)| (a - tail * u0) / gamma)
        .collect();
    Field::from_values(u.window().clone(), values)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::kernels::heat::heat_kernel;

    #[test]
    fn semigroup_of_delta_is_the_heat_kernel() {
        for shape in [WindowShape::Box, WindowShape::WordBall] {
            let w = Arc::new(LatticeWindow::new(2, 6, shape).unwrap());
            let d = Field::delta(w.clone(), &[0, 0]).unwrap();
            let out = heat_semigroup(0.8, &d).unwrap();
            for c in w.sites() {
                let want = heat_kernel(0.8, c).unwrap();
                assert!((out.at(c) - want).abs() < 1e-15);
            }
        }
    }

    #[test]
    fn zero_maps_to_zero() {
        let w = Arc::new(LatticeWindow::boxed(2, 4).unwrap());
        let out = fractional_laplacian(1.0, &Field::zeros(w), &QuadratureSpec::default()).unwrap();
        assert!(out.is_zero());
    }

    #[test]
    fn integer_order_is_the_negative_laplacian() {
        let w = Arc::new(LatticeWindow::boxed(2, 4).unwrap());
        let u = Field::from_fn(w.clone(), |c| {
            if c[0].abs() <= 2 && c[1].abs() <= 2 {
                ((c[0] * 5 + c[1] * 3) as f64).cos()
            } else {
                0.0
            }
        });
        let got = fractional_laplacian(2.0, &u, &QuadratureSpec::default()).unwrap();
        let want = laplacian(&u).unwrap().scale(-1.0).restrict(w);
        assert_eq!(got, want);
    }

    #[test]
    fn rejects_nonpositive_order() {
        let w = Arc::new(LatticeWindow::boxed(1, 2).unwrap());
        let u = Field::zeros(w);
        assert!(fractional_laplacian(0.0, &u, &QuadratureSpec::default()).is_err());
        assert!(fractional_laplacian(-1.0, &u, &QuadratureSpec::default()).is_err());
    }

    #[test]
    fn half_power_composed_twice_is_the_laplacian() {
        // (−Δ)^{1/2} (−Δ)^{1/2} u ≈ −Δu in the interior of a large 1-D window.
        let w = Arc::new(LatticeWindow::boxed(1, 200).unwrap());
        let u = Field::from_fn(w.clone(), |c| (-(c[0] as f64).powi(2) / 8.0).exp());
        let q = QuadratureSpec::default();
        let once = fractional_laplacian(1.0, &u, &q).unwrap();
        let twice = fractional_laplacian(1.0, &once, &q).unwrap();
        let lap = laplacian(&u).unwrap();
        for x in -5..=5 {
            let want = -lap.at(&[x]);
            assert!((twice.at(&[x]) - want).abs() < 1e-4, "x={x}: {} vs {want}", twice.at(&[x]));
        }
    }
}
