use serde::{Deserialize, Serialize};

use crate::calculus::nonlocal::nonlocal_energy;
use crate::calculus::operators::{gradient_form, laplacian};
use crate::error::{Error, Result};
use crate::field::Field;
use crate::lattice::l1;
use crate::solver::ground_state::IterationRecord;
use crate::variational::ProblemSpec;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PsDiagnostics {
    /// `max_n |J(u_n) − F(u_n)/2p − (1/2 − 1/2p)‖u_n‖²| / ‖u_n‖²`.
    pub identity_defect: f64,
    /// Final level `c`.
    pub level: f64,
    /// `|‖u‖² − 2pc/(p−1)| / ‖u‖²` at the last iterate.
    pub limit_defect: f64,
    /// `(1/2 − 1/2p) σ̂²`, when `σ̂` is supplied.
    pub level_lower_bound: Option<f64>,
    pub above_lower_bound: Option<bool>,
}

/// Checks the Palais–Smale bookkeeping along solver iterates: the identity
/// `J − (1/2p)(J′(u), u) = (1/2 − 1/2p)‖u‖²` at every iterate, and at the end
/// `‖u‖² = 2pc/(p−1)` with `c` the final level.
pub fn ps_monitor(history: &[IterationRecord], prob: &ProblemSpec, sigma_hat: Option<f64>) -> Result<PsDiagnostics> {
    let last = history
        .last()
        .ok_or_else(|| Error::InvalidInput("empty iteration history".into()))?;
    let p = prob.p();
    let factor = prob.level_factor();
    let identity_defect = history
        .iter()
        .map(|r| (r.energy - r.nehari / (2.0 * p) - factor * r.norm_sq).abs() / r.norm_sq)
        .fold(0.0, f64::max);
    let level = last.energy;
    let limit_defect = (last.norm_sq - 2.0 * p * level / (p - 1.0)).abs() / last.norm_sq;
    let level_lower_bound = sigma_hat.map(|s| factor * s * s);
    Ok(PsDiagnostics {
        identity_defect,
        level,
        limit_defect,
        level_lower_bound,
        above_lower_bound: level_lower_bound.map(|b| level >= b),
    })
}

/// `⟨u, v⟩_{W^{2,2}} = Σ ΔuΔv + Γ(u, v) + uv` over `Z^N`.
pub fn w22_inner(u: &Field, v: &Field) -> Result<f64> {
    let (lu, lv) = (laplacian(u)?, laplacian(v)?);
    let gamma: f64 = gradient_form(u, v)?.values().iter().sum();
    Ok(lu.dot(&lv)? + gamma + u.dot(v)?)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BrezisLiebRow {
    pub shift: Vec<i32>,
    /// `|z|₁`.
    pub distance: u64,
    /// `‖u_n‖² − ‖u_n − u‖² − ‖u‖²` in `W^{2,2}`, evaluated as the cross term
    /// `2⟨u, v(·−z)⟩` so that it is exactly zero for stencil-disjoint supports.
    pub norm_defect: f64,
    /// `|D(u_n) − D(u_n − u) − D(u)|`.
    pub nonlocal_defect: f64,
}

/// Splitting defects for `u_n = u + v(· − z_n)` over the given shifts.
pub fn brezis_lieb_probe(u: &Field, v: &Field, shifts: &[Vec<i32>], prob: &ProblemSpec) -> Result<Vec<BrezisLiebRow>> {
    let window = prob.window();
    if **u.window() != **window || **v.window() != **window {
        return Err(Error::InvalidInput("probe fields must live on the problem window".into()));
    }
    let dim = window.dim();
    let origin = vec![0; dim];
    let support = v.support();
    let radius = support.iter().map(|x| l1(x.coords(), &origin)).max().unwrap_or(0) as i64;
    let kernel = prob.kernel();
    let p = prob.p();
    let d_u = nonlocal_energy(u, kernel, p)?;
    let mut rows = Vec::with_capacity(shifts.len());
    for z in shifts {
        if z.len() != dim {
            return Err(Error::InvalidInput(format!("shift {z:?} is not {dim}-dimensional")));
        }
        for x in support.iter() {
            let moved = x.offset(z);
            if window.depth(moved.coords()) <= radius {
                return Err(Error::InvalidInput(format!(
                    "shift {z:?} moves the bump within {radius} of the window edge"
                )));
            }
        }
        let vz = v.translate(z)?;
        let un = u.add(&vz)?;
        let nonlocal = nonlocal_energy(&un, kernel, p)? - nonlocal_energy(&vz, kernel, p)? - d_u;
        rows.push(BrezisLiebRow {
            shift: z.clone(),
            distance: l1(z, &origin),
            norm_defect: 2.0 * w22_inner(u, &vz)?,
            nonlocal_defect: nonlocal.abs(),
        });
    }
    Ok(rows)
}
