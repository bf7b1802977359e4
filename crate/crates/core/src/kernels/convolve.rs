use std::sync::Arc;

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::field::Field;
use crate::kernels::table::{KernelKind, KernelTable};
use crate::lattice::LatticeWindow;

/// `(K∗f)(x) = Σ_{y≠x} K(x−y) f(y)`, plus `K(0) f(x)` when `include_diagonal`,
/// evaluated on the window of `f`.
pub fn convolve(kernel: &KernelTable, f: &Field, include_diagonal: bool) -> Result<Field> {
    convolve_onto(kernel, f, f.window().clone(), include_diagonal)
}

/// As [`convolve`], evaluated on an arbitrary target window.
pub fn convolve_onto(
    kernel: &KernelTable,
    f: &Field,
    target: Arc<LatticeWindow>,
    include_diagonal: bool,
) -> Result<Field> {
    let dim = kernel.dim();
    if f.window().dim() != dim || target.dim() != dim {
        return Err(Error::InvalidInput("field and kernel dimensions differ".into()));
    }
    if include_diagonal && kernel.kind() == KernelKind::Riesz {
        return Err(Error::Domain("the Riesz kernel has no diagonal value".into()));
    }
    let reach = f.window().radius() as u32 + target.radius() as u32;
    if reach > kernel.extent() {
        return Err(Error::Internal(format!(
            "kernel table of extent {} cannot reach offsets up to {reach}",
            kernel.extent()
        )));
    }
    let sources: Vec<(isize, f64)> = f
        .window()
        .sites()
        .zip(f.values())
        .filter(|(_, v)| **v != 0.0)
        .map(|(c, v)| (linear_offset(kernel, c), *v))
        .collect();
    let dense = kernel.dense();
    let center = kernel.dense_index(&vec![0; dim]) as isize;
    let diag = if include_diagonal { kernel.diagonal().unwrap_or(0.0) } else { 0.0 };
    let values: Vec<f64> = (0..target.len())
        .into_par_iter()
        .map(|i| {
            let base = center + linear_offset(kernel, target.site(i));
            let mut acc = 0.0;
            for &(off, v) in &sources {
                let idx = base - off;
                if idx == center {
                    acc += diag * v;
                } else {
                    acc += dense[idx as usize] * v;
                }
            }
            acc
        })
        .collect();
    Field::from_values(target, values)
}

#[inline]
fn linear_offset(kernel: &KernelTable, c: &[i32]) -> isize {
    c.iter().zip(kernel.strides()).map(|(x, s)| *x as isize * s).sum()
}
