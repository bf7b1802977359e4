//! Graph Laplacian, carré du champ and biharmonic operator on `Z^N`.
//!
//! All operators read their input with zero extension and write onto a
//! window grown just enough to hold every nonzero output: one layer for `Δ`
//! and `Γ`, two for `Δ²`.

use std::sync::Arc;

use crate::error::{Error, Result};
use crate::field::Field;
use crate::lattice::LatticeWindow;

const ABSENT: u32 = u32::MAX;

/// Index maps from a target window into a source window: each target site's
/// own index and its `2N` neighbours (`ABSENT` when outside the source).
#[derive(Clone, Debug)]
pub(crate) struct Stencil {
    center: Vec<u32>,
    neighbors: Vec<u32>,
    degree: usize,
}

impl Stencil {
    pub(crate) fn new(source: &LatticeWindow, target: &LatticeWindow) -> Self {
        let dim = source.dim();
        let degree = 2 * dim;
        let mut center = Vec::with_capacity(target.len());
        let mut neighbors = Vec::with_capacity(target.len() * degree);
        let mut c = vec![0i32; dim];
        let lookup = |c: &[i32]| source.index_of(c).map_or(ABSENT, |i| i as u32);
        for x in target.sites() {
            center.push(lookup(x));
            c.copy_from_slice(x);
            for axis in 0..dim {
                for step in [1, -1] {
                    c[axis] += step;
                    neighbors.push(lookup(&c));
                    c[axis] -= step;
                }
            }
        }
        Stencil {
            center,
            neighbors,
            degree,
        }
    }

    #[inline]
    fn read(values: &[f64], i: u32) -> f64 {
        if i == ABSENT {
            0.0
        } else {
            values[i as usize]
        }
    }

    /// `Δu` at every target site.
    pub(crate) fn laplacian_into(&self, u: &[f64], out: &mut [f64]) {
        for (k, slot) in out.iter_mut().enumerate() {
            let here = Self::read(u, self.center[k]);
            let nb = &self.neighbors[k * self.degree..(k + 1) * self.degree];
            let sum: f64 = nb.iter().map(|&j| Self::read(u, j)).sum();
            *slot = sum - self.degree as f64 * here;
        }
    }

    /// `Γ(u, v)` at every target site.
    pub(crate) fn gradient_form_into(&self, u: &[f64], v: &[f64], out: &mut [f64]) {
        for (k, slot) in out.iter_mut().enumerate() {
            let (u0, v0) = (Self::read(u, self.center[k]), Self::read(v, self.center[k]));
            let nb = &self.neighbors[k * self.degree..(k + 1) * self.degree];
            *slot = 0.5
                * nb
                    .iter()
                    .map(|&j| (Self::read(u, j) - u0) * (Self::read(v, j) - v0))
                    .sum::<f64>();
        }
    }
}

/// `Δu(x) = Σ_{y∼x} (u(y) − u(x))` on the window of `u` grown by one.
pub fn laplacian(u: &Field) -> Result<Field> {
    let target = Arc::new(u.window().grow(1)?);
    let stencil = Stencil::new(u.window(), &target);
    let mut out = vec![0.0; target.len()];
    stencil.laplacian_into(u.values(), &mut out);
    Field::from_values(target, out)
}

/// Carré du champ `Γ(u,v)(x) = ½ Σ_{y∼x} (u(y)−u(x))(v(y)−v(x))` on the
/// common window grown by one.
pub fn gradient_form(u: &Field, v: &Field) -> Result<Field> {
    if **u.window() != **v.window() {
        return Err(Error::InvalidInput("gradient form of fields on different windows".into()));
    }
    let target = Arc::new(u.window().grow(1)?);
    let stencil = Stencil::new(u.window(), &target);
    let mut out = vec![0.0; target.len()];
    stencil.gradient_form_into(u.values(), v.values(), &mut out);
    Field::from_values(target, out)
}

/// `|∇u| = √Γ(u,u)`.
pub fn gradient_length(u: &Field) -> Result<Field> {
    Ok(gradient_form(u, u)?.map(f64::sqrt))
}

/// `Δ²u = Δ(Δu)` on the window of `u` grown by two.
pub fn biharmonic(u: &Field) -> Result<Field> {
    laplacian(&laplacian(u)?)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn window(dim: usize, r: i64) -> Arc<LatticeWindow> {
        Arc::new(LatticeWindow::boxed(dim, r).unwrap())
    }

    #[test]
    fn laplacian_of_delta() {
        let d = Field::delta(window(2, 3), &[0, 0]).unwrap();
        let l = laplacian(&d).unwrap();
        assert_eq!(l.window().radius(), 4);
        assert_eq!(l.at(&[0, 0]), -4.0);
        for n in [[1, 0], [-1, 0], [0, 1], [0, -1]] {
            assert_eq!(l.at(&n), 1.0);
        }
        assert_eq!(l.at(&[1, 1]), 0.0);
        assert_eq!(l.values().iter().sum::<f64>(), 0.0);
    }

    #[test]
    fn harmonic_functions_in_the_interior() {
        let w = window(1, 20);
        let lin = Field::from_fn(w.clone(), |c| c[0] as f64);
        let l = laplacian(&lin).unwrap();
        for x in -19..=19 {
            assert_eq!(l.at(&[x]), 0.0);
        }
        let w2 = window(2, 10);
        let constant = Field::from_fn(w2.clone(), |_| 3.5);
        let l2 = laplacian(&constant).unwrap();
        for i in w2.interior(2) {
            assert_eq!(l2.at(w2.site(i)), 0.0);
        }
    }

    #[test]
    fn gradient_form_of_delta() {
        let d = Field::delta(window(2, 2), &[0, 0]).unwrap();
        let g = gradient_form(&d, &d).unwrap();
        assert_eq!(g.at(&[0, 0]), 2.0);
        assert_eq!(g.at(&[1, 0]), 0.5);
        assert_eq!(g.at(&[0, -1]), 0.5);
        assert_eq!(g.at(&[1, 1]), 0.0);
        let c = Field::from_fn(window(2, 2), |_| 1.0);
        let w = Field::from_fn(window(2, 2), |x| (x[0] * x[1]) as f64);
        let gc = gradient_form(&w, &c).unwrap();
        let inner = window(2, 1);
        for x in inner.sites() {
            assert_eq!(gc.at(x), 0.0);
        }
        let len = gradient_length(&d).unwrap();
        assert!((len.at(&[0, 0]) - 2f64.sqrt()).abs() < 1e-15);
    }

    #[test]
    fn biharmonic_of_delta() {
        let d = Field::delta(window(2, 2), &[0, 0]).unwrap();
        let b = biharmonic(&d).unwrap();
        assert_eq!(b.window().radius(), 4);
        assert_eq!(b.at(&[0, 0]), 20.0);
        // Σ|Δδ|² = 16 + 4 = 20 agrees with ⟨Δ²δ, δ⟩.
        let l = laplacian(&d).unwrap();
        assert_eq!(l.values().iter().map(|v| v * v).sum::<f64>(), 20.0);
        assert_eq!(b.at(&[1, 0]), -8.0);
        assert_eq!(b.at(&[2, 0]), 1.0);
        assert_eq!(b.at(&[1, 1]), 2.0);
    }

    #[test]
    fn mismatched_windows() {
        let a = Field::zeros(window(2, 2));
        let b = Field::zeros(window(2, 3));
        assert!(gradient_form(&a, &b).is_err());
    }
}
