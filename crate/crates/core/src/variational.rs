//! Energy functionals, their gradients and the Nehari manifold.
//!
//! Two problems share one description:
//!
//! * **full** mode, on all fields of the window:
//!   `J_λ(u) = ½‖u‖²_{E_λ} − (1/2p) D(u)` with
//!   `‖u‖²_{E_λ} = Σ |Δu|² + |∇u|² + (1 + λa) u²`;
//! * **Dirichlet** mode, on fields supported in the well `Ω`:
//!   `J_Ω(u) = ½‖u‖²_{E(Ω)} − (1/2p) D(u)`, with the stencils reading the
//!   zero extension of `u` beyond `Ω`.
//!
//! `D(u) = Σ_{x≠y} K(x−y)|u(x)|^p|u(y)|^p` is the off-diagonal nonlocal term.
//! Both quadratic forms are `⟨u, Au⟩` for the stencil operator
//! `A = Δ² − Δ + (1 + λa)` restricted to the *active* sites (the window, or
//! `Ω`), so every functional here works on the active coordinates.

use std::fmt;
use std::str::FromStr;
use std::sync::Arc;

use rand::{RngExt, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::calculus::nonlocal::check_exponent;
use crate::calculus::potential::PotentialSpec;
use crate::error::{Error, Result};
use crate::field::{dot, Field};
use crate::kernels::table::KernelTable;
use crate::lattice::{LatticeWindow, Site, SiteSet};

/// Smallest word distance allowed between `Ω` and the window edge.
pub const OMEGA_MARGIN: i64 = 3;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case", tag = "mode")]
pub enum Mode {
    Full { lambda: f64 },
    Dirichlet,
}

impl Mode {
    pub fn lambda(&self) -> Option<f64> {
        match self {
            Mode::Full { lambda } => Some(*lambda),
            Mode::Dirichlet => None,
        }
    }
}

impl fmt::Display for Mode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Mode::Full { lambda } => write!(f, "full(λ = {lambda})"),
            Mode::Dirichlet => f.write_str("dirichlet"),
        }
    }
}

/// The mode names accepted on the command line.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ModeKind {
    Full,
    Dirichlet,
}

impl fmt::Display for ModeKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            ModeKind::Full => "full",
            ModeKind::Dirichlet => "dirichlet",
        })
    }
}

impl FromStr for ModeKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "full" => Ok(ModeKind::Full),
            "dirichlet" => Ok(ModeKind::Dirichlet),
            other => Err(Error::InvalidInput(format!("unknown mode {other:?} (full | dirichlet)"))),
        }
    }
}

/// `Δ² − Δ + (1 + λa)` on the active sites, as a sparse symmetric matrix.
#[derive(Clone, Debug)]
pub(crate) struct QuadraticOperator {
    diagonal: Vec<f64>,
    row_start: Vec<usize>,
    columns: Vec<u32>,
    coefficients: Vec<f64>,
}

impl QuadraticOperator {
    fn new(window: &LatticeWindow, active: &[usize], potential: &[f64]) -> Self {
        let dim = window.dim();
        let n = dim as f64;
        let mut local = vec![u32::MAX; window.len()];
        for (k, &i) in active.iter().enumerate() {
            local[i] = k as u32;
        }
        // Off-diagonal stencil of Δ² − Δ on Z^N.
        let mut stencil: Vec<(Vec<i32>, f64)> = Vec::new();
        for a in 0..dim {
            for s in [1, -1] {
                let mut e = vec![0; dim];
                e[a] = s;
                stencil.push((e.clone(), -(4.0 * n + 1.0)));
                e[a] = 2 * s;
                stencil.push((e, 1.0));
                for b in a + 1..dim {
                    for t in [1, -1] {
                        let mut d = vec![0; dim];
                        d[a] = s;
                        d[b] = t;
                        stencil.push((d, 2.0));
                    }
                }
            }
        }
        let center = (2.0 * n + 1.0).powi(2);
        let mut diagonal = Vec::with_capacity(active.len());
        let mut row_start = vec![0];
        let mut columns = Vec::new();
        let mut coefficients = Vec::new();
        let mut y = vec![0i32; dim];
        for (k, &i) in active.iter().enumerate() {
            let x = window.site(i);
            diagonal.push(center + potential[k]);
            for (offset, c) in &stencil {
                for ((slot, a), b) in y.iter_mut().zip(x).zip(offset) {
                    *slot = a + b;
                }
                if let Some(j) = window.index_of(&y) {
                    if local[j] != u32::MAX {
                        columns.push(local[j]);
                        coefficients.push(*c);
                    }
                }
            }
            row_start.push(columns.len());
        }
        QuadraticOperator {
            diagonal,
            row_start,
            columns,
            coefficients,
        }
    }

    pub(crate) fn len(&self) -> usize {
        self.diagonal.len()
    }

    pub(crate) fn diagonal(&self) -> &[f64] {
        &self.diagonal
    }

    pub(crate) fn apply(&self, x: &[f64]) -> Vec<f64> {
        let row = |k: usize| {
            let mut acc = self.diagonal[k] * x[k];
            for e in self.row_start[k]..self.row_start[k + 1] {
                acc += self.coefficients[e] * x[self.columns[e] as usize];
            }
            acc
        };
        if self.len() >= 4096 {
            (0..self.len()).into_par_iter().map(row).collect()
        } else {
            (0..self.len()).map(row).collect()
        }
    }
}

/// Everything the functionals need at one point.
#[derive(Clone, Debug)]
pub(crate) struct Evaluation {
    /// `A u`.
    pub(crate) au: Vec<f64>,
    /// `|u|^p`.
    pub(crate) powers: Vec<f64>,
    /// `K∗'|u|^p`, off-diagonal.
    pub(crate) potential: Vec<f64>,
    /// `‖u‖²`.
    pub(crate) norm_sq: f64,
    /// `D(u)`.
    pub(crate) nonlocal: f64,
}

impl Evaluation {
    pub(crate) fn energy(&self, p: f64) -> f64 {
        0.5 * self.norm_sq - self.nonlocal / (2.0 * p)
    }

    pub(crate) fn nehari(&self) -> f64 {
        self.norm_sq - self.nonlocal
    }
}

#[derive(Clone, Debug)]
pub struct ProblemSpec {
    mode: Mode,
    window: Arc<LatticeWindow>,
    potential: PotentialSpec,
    kernel: Arc<KernelTable>,
    p: f64,
    active: Vec<usize>,
    offsets: Vec<isize>,
    operator: QuadraticOperator,
}

impl ProblemSpec {
    pub fn new(
        mode: Mode,
        window: Arc<LatticeWindow>,
        potential: PotentialSpec,
        kernel: Arc<KernelTable>,
        p: f64,
    ) -> Result<Self> {
        let dim = window.dim();
        if kernel.dim() != dim {
            return Err(Error::InvalidInput(format!(
                "kernel table is {}-dimensional, window is {dim}-dimensional",
                kernel.dim()
            )));
        }
        if kernel.extent() < 2 * window.radius() as u32 {
            return Err(Error::InvalidInput(format!(
                "kernel table of extent {} does not cover a window of radius {}",
                kernel.extent(),
                window.radius()
            )));
        }
        check_exponent(p, dim, kernel.alpha())?;
        if let Mode::Full { lambda } = mode {
            if !(lambda > 0.0 && lambda.is_finite()) {
                return Err(Error::Parameter(format!("λ = {lambda} must be positive")));
            }
        }
        let omega = potential.well();
        if omega.dim() != Some(dim) {
            return Err(Error::InvalidInput("the well and the window differ in dimension".into()));
        }
        for x in omega.iter() {
            // depth counts the exterior layer, so the edge itself has depth 1.
            if window.depth(x.coords()) < OMEGA_MARGIN + 1 {
                return Err(Error::InvalidInput(format!(
                    "Ω site {x} lies within distance {OMEGA_MARGIN} of the window edge"
                )));
            }
        }
        let active: Vec<usize> = match mode {
            Mode::Full { .. } => (0..window.len()).collect(),
            Mode::Dirichlet => (0..window.len())
                .filter(|&i| omega.contains_coords(window.site(i)))
                .collect(),
        };
        let lambda = mode.lambda().unwrap_or(0.0);
        let weights: Vec<f64> = active
            .iter()
            .map(|&i| lambda * potential.value(window.site(i)))
            .collect();
        let operator = QuadraticOperator::new(&window, &active, &weights);
        let offsets = active
            .iter()
            .map(|&i| {
                window
                    .site(i)
                    .iter()
                    .zip(kernel.strides())
                    .map(|(c, s)| *c as isize * s)
                    .sum()
            })
            .collect();
        Ok(ProblemSpec {
            mode,
            window,
            potential,
            kernel,
            p,
            active,
            offsets,
            operator,
        })
    }

    pub fn full(
        window: Arc<LatticeWindow>,
        potential: PotentialSpec,
        kernel: Arc<KernelTable>,
        p: f64,
        lambda: f64,
    ) -> Result<Self> {
        Self::new(Mode::Full { lambda }, window, potential, kernel, p)
    }

    pub fn dirichlet(
        window: Arc<LatticeWindow>,
        potential: PotentialSpec,
        kernel: Arc<KernelTable>,
        p: f64,
    ) -> Result<Self> {
        Self::new(Mode::Dirichlet, window, potential, kernel, p)
    }

    /// The same problem in another mode.
    pub fn with_mode(&self, mode: Mode) -> Result<Self> {
        Self::new(mode, self.window.clone(), self.potential.clone(), self.kernel.clone(), self.p)
    }

    pub fn mode(&self) -> Mode {
        self.mode
    }

    pub fn lambda(&self) -> Option<f64> {
        self.mode.lambda()
    }

    pub fn window(&self) -> &Arc<LatticeWindow> {
        &self.window
    }

    pub fn potential(&self) -> &PotentialSpec {
        &self.potential
    }

    pub fn kernel(&self) -> &Arc<KernelTable> {
        &self.kernel
    }

    pub fn p(&self) -> f64 {
        self.p
    }

    pub fn omega(&self) -> &SiteSet {
        self.potential.well()
    }

    /// Window indices of the sites a field may occupy.
    pub fn active_sites(&self) -> &[usize] {
        &self.active
    }

    /// `(1/2 − 1/2p)`, the factor relating level and norm on the manifold.
    pub fn level_factor(&self) -> f64 {
        0.5 - 0.5 / self.p
    }

    pub(crate) fn operator(&self) -> &QuadraticOperator {
        &self.operator
    }

    /// Active coordinates of `u`; errors if `u` lives elsewhere.
    pub fn active_values(&self, u: &Field) -> Result<Vec<f64>> {
        if **u.window() != *self.window {
            return Err(Error::InvalidInput("field does not live on the problem window".into()));
        }
        if self.active.len() < self.window.len() {
            let inactive = u
                .values()
                .iter()
                .enumerate()
                .find(|(i, v)| **v != 0.0 && !self.omega().contains_coords(self.window.site(*i)));
            if let Some((i, _)) = inactive {
                return Err(Error::InvalidInput(format!(
                    "field is nonzero at {} outside Ω",
                    Site::from(self.window.site(i))
                )));
            }
        }
        Ok(self.active.iter().map(|&i| u.values()[i]).collect())
    }

    /// The field with the given active coordinates, zero elsewhere.
    pub fn field_from_active(&self, x: &[f64]) -> Result<Field> {
        if x.len() != self.active.len() {
            return Err(Error::InvalidInput(format!(
                "{} coordinates for {} active sites",
                x.len(),
                self.active.len()
            )));
        }
        let mut values = vec![0.0; self.window.len()];
        for (&i, v) in self.active.iter().zip(x) {
            values[i] = *v;
        }
        Field::from_values(self.window.clone(), values)
    }

    /// `(K∗'f)` on the active sites for `f` given on the active sites.
    pub(crate) fn nonlocal_potential(&self, f: &[f64]) -> Vec<f64> {
        let dense = self.kernel.dense();
        let center = self.kernel.dense_index(&vec![0; self.window.dim()]) as isize;
        let sources: Vec<(isize, f64)> = self
            .offsets
            .iter()
            .zip(f)
            .filter(|(_, v)| **v != 0.0)
            .map(|(o, v)| (*o, *v))
            .collect();
        let row = |k: usize| {
            let base = center + self.offsets[k];
            let mut acc = 0.0;
            for &(off, v) in &sources {
                let idx = base - off;
                if idx != center {
                    acc += dense[idx as usize] * v;
                }
            }
            acc
        };
        if self.active.len() * sources.len() >= 1 << 16 {
            (0..self.active.len()).into_par_iter().map(row).collect()
        } else {
            (0..self.active.len()).map(row).collect()
        }
    }

    pub(crate) fn evaluate(&self, x: &[f64]) -> Evaluation {
        let au = self.operator.apply(x);
        let powers: Vec<f64> = x.iter().map(|v| v.abs().powf(self.p)).collect();
        let potential = self.nonlocal_potential(&powers);
        Evaluation {
            norm_sq: dot(x, &au),
            nonlocal: dot(&potential, &powers),
            au,
            powers,
            potential,
        }
    }

    /// Coordinate gradient `Au − (K∗'|u|^p)|u|^{p−2}u` on the active sites.
    pub(crate) fn gradient(&self, x: &[f64], ev: &Evaluation) -> Vec<f64> {
        x.iter()
            .zip(&ev.au)
            .zip(&ev.potential)
            .map(|((u, au), k)| au - k * signed_power(*u, self.p - 1.0))
            .collect()
    }

    /// `J(z) − J(x)` without forming either energy, so that differences far
    /// below the energy's round-off are still resolved.
    pub(crate) fn energy_change(&self, x: &[f64], ex: &Evaluation, z: &[f64], ez: &Evaluation) -> f64 {
        let h: Vec<f64> = z.iter().zip(x).map(|(a, b)| a - b).collect();
        let ah = self.operator.apply(&h);
        let quadratic: f64 = x.iter().zip(z).zip(&ah).map(|((a, b), c)| (a + b) * c).sum();
        let dpow: Vec<f64> = x
            .iter()
            .zip(z)
            .zip(&h)
            .map(|((u, v), d)| power_change(*u, *v, *d, self.p))
            .collect();
        let conv = self.nonlocal_potential(&dpow);
        let nonlocal: f64 = conv
            .iter()
            .zip(ex.powers.iter().zip(&ez.powers))
            .map(|(c, (a, b))| c * (a + b))
            .sum();
        0.5 * quadratic - nonlocal / (2.0 * self.p)
    }
}

/// `|u|^{q} sgn u`.
pub(crate) fn signed_power(u: f64, q: f64) -> f64 {
    if u == 0.0 {
        0.0
    } else {
        u.signum() * u.abs().powf(q)
    }
}

/// `|v|^p − |u|^p` given `h = v − u`, accurate when `h` is small.
fn power_change(u: f64, v: f64, h: f64, p: f64) -> f64 {
    if u == 0.0 || v == 0.0 || u.signum() != v.signum() {
        return v.abs().powf(p) - u.abs().powf(p);
    }
    let rel = u.signum() * h / u.abs();
    u.abs().powf(p) * (p * rel.ln_1p()).exp_m1()
}

/// `(‖u‖², D(u))`.
pub fn energy_parts(u: &Field, prob: &ProblemSpec) -> Result<(f64, f64)> {
    let ev = prob.evaluate(&prob.active_values(u)?);
    Ok((ev.norm_sq, ev.nonlocal))
}

/// `‖u‖²_{E_λ}` in full mode, `‖u‖²_{E(Ω)}` in Dirichlet mode.
pub fn norm_sq(u: &Field, prob: &ProblemSpec) -> Result<f64> {
    let x = prob.active_values(u)?;
    Ok(dot(&x, &prob.operator.apply(&x)))
}

/// `J(u) = ½‖u‖² − (1/2p) D(u)`.
pub fn energy(u: &Field, prob: &ProblemSpec) -> Result<f64> {
    let (a, b) = energy_parts(u, prob)?;
    Ok(0.5 * a - b / (2.0 * prob.p))
}

/// The coordinate gradient of `J`, zero off the active sites. It vanishes
/// exactly at solutions of the Euler–Lagrange equation.
pub fn euler_lagrange_residual(u: &Field, prob: &ProblemSpec) -> Result<Field> {
    let x = prob.active_values(u)?;
    let ev = prob.evaluate(&x);
    prob.field_from_active(&prob.gradient(&x, &ev))
}

/// `F(u) = (J′(u), u) = ‖u‖² − D(u)`.
pub fn nehari_f(u: &Field, prob: &ProblemSpec) -> Result<f64> {
    let (a, b) = energy_parts(u, prob)?;
    Ok(a - b)
}

/// The unique `t > 0` with `tu` on the Nehari manifold,
/// `t = (‖u‖²/D(u))^{1/(2(p−1))}`, and the projected field.
pub fn nehari_project(u: &Field, prob: &ProblemSpec) -> Result<(f64, Field)> {
    let (a, b) = energy_parts(u, prob)?;
    let t = projection_scale(a, b, prob.p)?;
    Ok((t, u.scale(t)))
}

pub(crate) fn projection_scale(norm_sq: f64, nonlocal: f64, p: f64) -> Result<f64> {
    if !(nonlocal > 0.0) || !(norm_sq > 0.0) {
        return Err(Error::NoProjection);
    }
    Ok((norm_sq / nonlocal).powf(0.5 / (p - 1.0)))
}

/// Relative Nehari defect accepted by [`nehari_level`].
pub const LEVEL_DEFECT_TOLERANCE: f64 = 1e-10;

/// `J(u)` for `u` on the Nehari manifold, where it equals
/// `(1/2 − 1/2p)‖u‖²`.
pub fn nehari_level(u: &Field, prob: &ProblemSpec) -> Result<f64> {
    let (a, b) = energy_parts(u, prob)?;
    if a == 0.0 {
        return Err(Error::InvalidInput("the zero field is not on the Nehari manifold".into()));
    }
    let defect = ((a - b) / a).abs();
    if defect > LEVEL_DEFECT_TOLERANCE {
        return Err(Error::NehariDefect {
            defect,
            tolerance: LEVEL_DEFECT_TOLERANCE,
        });
    }
    Ok(0.5 * a - b / (2.0 * prob.p))
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MountainPassProbe {
    pub rho: f64,
    /// Least sampled energy on the sphere `‖u‖ = ρ`.
    pub theta: f64,
    /// A scale with `J(t u_*) < 0` for the witness `u_*`, itself of norm `ρ`.
    pub t_neg: f64,
    /// `J(t_neg u_*)` and `J(2 t_neg u_*)`.
    pub witness_energies: [f64; 2],
    pub samples: usize,
}

/// Positive random values on the active sites.
pub(crate) fn random_active(prob: &ProblemSpec, rng: &mut ChaCha8Rng) -> Vec<f64> {
    (0..prob.active.len()).map(|_| rng.random::<f64>()).collect()
}

/// Samples `J` on the sphere of radius `ρ` and finds a scale past the
/// mountain.
pub fn mountain_pass_probe(prob: &ProblemSpec, rho: f64, samples: usize, seed: u64) -> Result<MountainPassProbe> {
    if !(rho > 0.0 && rho.is_finite()) {
        return Err(Error::Parameter(format!("sphere radius ρ = {rho} must be positive")));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut theta = f64::INFINITY;
    let mut witness: Option<(f64, f64)> = None;
    for _ in 0..samples {
        let x = random_active(prob, &mut rng);
        let ev = prob.evaluate(&x);
        if !(ev.norm_sq > 0.0) {
            continue;
        }
        // On the sphere: A = ρ², D scales with (ρ/‖x‖)^{2p}.
        let scale = rho / ev.norm_sq.sqrt();
        let d = ev.nonlocal * scale.powf(2.0 * prob.p);
        theta = theta.min(0.5 * rho * rho - d / (2.0 * prob.p));
        if witness.is_none() && d > 0.0 {
            witness = Some((rho * rho, d));
        }
    }
    let (a, b) = witness.ok_or_else(|| {
        Error::Inconclusive(format!("none of {samples} samples has a positive nonlocal term"))
    })?;
    // J(tu) = t²A/2 − t^{2p}B/2p vanishes at t* = (pA/B)^{1/(2p−2)}.
    let t_zero = (prob.p * a / b).powf(0.5 / (prob.p - 1.0));
    let t_neg = 2.0 * t_zero;
    let j = |t: f64| 0.5 * t * t * a - t.powf(2.0 * prob.p) * b / (2.0 * prob.p);
    Ok(MountainPassProbe {
        rho,
        theta,
        t_neg,
        witness_energies: [j(t_neg), j(2.0 * t_neg)],
        samples,
    })
}
