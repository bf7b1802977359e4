//! Property suites for the inequalities and identities behind the existence
//! theory, each measured on a concrete problem.
//!
//! The constants the theory leaves implicit are reported as measurements:
//! `Ĉ` (largest sampled HLS ratio), `σ̂ = Ĉ^{−1/(2(p−1))}` (Nehari radius
//! bound), `θ̂` (least sampled energy on a small sphere) and `c₁, c₂` (the
//! bracket of `R_α(v)|v|₁^{N−α}`).

use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;
use std::sync::Arc;

use rand::{RngExt, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::calculus::nonlocal::{hls_ratio, interpolation_check, symmetric_hls_exponent};
use crate::calculus::norms::{elambda_norm_sq, w22_norm_sq};
use crate::calculus::operators::{biharmonic, gradient_form, laplacian};
use crate::error::{Error, Result};
use crate::field::Field;
use crate::kernels::{convolve_onto, fractional_laplacian, CacheKey, KernelKind, KernelTable};
use crate::lattice::LatticeWindow;
use crate::solver::{apply_quadratic_operator, brezis_lieb_probe};
use crate::variational::{energy_parts, mountain_pass_probe, nehari_level, nehari_project, ProblemSpec};

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Suite {
    Operators,
    Hls,
    BrezisLieb,
    Lions,
    Nehari,
    MountainPass,
    Green,
}

impl Suite {
    pub const ALL: [Suite; 7] = [
        Suite::Operators,
        Suite::Hls,
        Suite::BrezisLieb,
        Suite::Lions,
        Suite::Nehari,
        Suite::MountainPass,
        Suite::Green,
    ];

    pub fn name(&self) -> &'static str {
        match self {
            Suite::Operators => "operators",
            Suite::Hls => "hls",
            Suite::BrezisLieb => "brezis-lieb",
            Suite::Lions => "lions",
            Suite::Nehari => "nehari",
            Suite::MountainPass => "mountain-pass",
            Suite::Green => "green",
        }
    }

    /// Parses a comma-separated selection; `all` selects every suite.
    pub fn parse_list(list: &str) -> Result<Vec<Suite>> {
        let mut out = Vec::new();
        for item in list.split(',').map(str::trim).filter(|s| !s.is_empty()) {
            if item == "all" {
                return Ok(Suite::ALL.to_vec());
            }
            let s: Suite = item.parse()?;
            if !out.contains(&s) {
                out.push(s);
            }
        }
        if out.is_empty() {
            return Err(Error::InvalidInput("empty suite selection".into()));
        }
        Ok(out)
    }
}

impl fmt::Display for Suite {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Suite {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Suite::ALL
            .into_iter()
            .find(|x| x.name() == s)
            .ok_or_else(|| {
                let names: Vec<_> = Suite::ALL.iter().map(Suite::name).collect();
                Error::InvalidInput(format!("unknown suite {s:?} (one of {})", names.join(", ")))
            })
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct VerifyConfig {
    /// Random fields per sampling check.
    pub samples: usize,
    /// Random pairs per HLS batch.
    pub hls_samples: usize,
    pub seed: u64,
    /// Sphere radius for the mountain-pass probe.
    pub rho: f64,
    /// The Green identity is evaluated on a window this many times the
    /// problem radius.
    pub green_window_factor: i64,
    /// Sup-norm tolerance of the Green identity on the problem window.
    pub green_tolerance: f64,
}

impl Default for VerifyConfig {
    fn default() -> Self {
        VerifyConfig {
            samples: 100,
            hls_samples: 200,
            seed: 0,
            rho: 1e-3,
            green_window_factor: 4,
            green_tolerance: 1e-4,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Check {
    pub name: String,
    pub value: f64,
    /// Human-readable acceptance condition.
    pub condition: String,
    pub passed: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SuiteReport {
    pub suite: Suite,
    pub passed: bool,
    pub checks: Vec<Check>,
    pub constants: BTreeMap<String, f64>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct VerifyReport {
    pub passed: bool,
    pub suites: Vec<SuiteReport>,
    /// Union of the measured constants.
    pub constants: BTreeMap<String, f64>,
}

impl VerifyReport {
    pub fn failures(&self) -> Vec<String> {
        self.suites
            .iter()
            .flat_map(|s| {
                s.checks
                    .iter()
                    .filter(|c| !c.passed)
                    .map(move |c| format!("{}: {} = {:e} (needs {})", s.suite, c.name, c.value, c.condition))
            })
            .collect()
    }
}

struct SuiteBuilder {
    suite: Suite,
    checks: Vec<Check>,
    constants: BTreeMap<String, f64>,
}

impl SuiteBuilder {
    fn new(suite: Suite) -> Self {
        SuiteBuilder {
            suite,
            checks: Vec::new(),
            constants: BTreeMap::new(),
        }
    }

    fn at_most(&mut self, name: &str, value: f64, bound: f64) {
        self.push(name, value, format!("≤ {bound:e}"), value <= bound);
    }

    fn at_least(&mut self, name: &str, value: f64, bound: f64) {
        self.push(name, value, format!("≥ {bound:e}"), value >= bound);
    }

    fn holds(&mut self, name: &str, ok: bool) {
        self.push(name, if ok { 1.0 } else { 0.0 }, "holds".into(), ok);
    }

    fn push(&mut self, name: &str, value: f64, condition: String, passed: bool) {
        self.checks.push(Check {
            name: name.into(),
            value,
            condition,
            passed: passed && !value.is_nan(),
        });
    }

    fn finish(self) -> SuiteReport {
        SuiteReport {
            suite: self.suite,
            passed: self.checks.iter().all(|c| c.passed),
            checks: self.checks,
            constants: self.constants,
        }
    }
}

/// The problem plus the tables the suites need.
pub struct Verifier<'a> {
    prob: &'a ProblemSpec,
    cfg: VerifyConfig,
    reference: Arc<KernelTable>,
}

/// Extent of the reference Green table used by the identity check.
pub fn reference_extent(prob: &ProblemSpec, cfg: &VerifyConfig) -> u32 {
    let r = prob.window().radius() as i64;
    (cfg.green_window_factor.max(1) * r + r) as u32
}

/// Cache key of the Green table, matching the problem's quadrature and
/// method, that covers the identity check's window.
pub fn reference_key(prob: &ProblemSpec, cfg: &VerifyConfig) -> CacheKey {
    let k = prob.kernel();
    CacheKey {
        kind: KernelKind::Green,
        method: k.method(),
        alpha: k.alpha(),
        dim: k.dim(),
        radius: (cfg.green_window_factor.max(1) * prob.window().radius() as i64) as i32,
        extent: reference_extent(prob, cfg),
        quad: *k.quadrature(),
    }
}

pub fn build_reference(prob: &ProblemSpec, cfg: &VerifyConfig) -> Result<KernelTable> {
    let key = reference_key(prob, cfg);
    KernelTable::build_with_extent(key.kind, key.alpha, key.dim, key.radius, key.extent, &key.quad, key.method)
}

impl<'a> Verifier<'a> {
    /// `reference` must be a Green table of at least [`reference_extent`];
    /// it is built when absent.
    pub fn new(prob: &'a ProblemSpec, cfg: VerifyConfig, reference: Option<Arc<KernelTable>>) -> Result<Self> {
        let reference = match reference {
            Some(t) => t,
            None => Arc::new(build_reference(prob, &cfg)?),
        };
        if reference.kind() != KernelKind::Green
            || reference.extent() < reference_extent(prob, &cfg)
            || reference.alpha() != prob.kernel().alpha()
        {
            return Err(Error::InvalidInput("reference table does not fit the Green identity check".into()));
        }
        Ok(Verifier { prob, cfg, reference })
    }

    pub fn run(&self, suites: &[Suite]) -> Result<VerifyReport> {
        let mut reports = Vec::new();
        for suite in suites {
            log::info!("running suite {suite}");
            reports.push(match suite {
                Suite::Operators => self.operators()?,
                Suite::Hls => self.hls()?,
                Suite::BrezisLieb => self.brezis_lieb()?,
                Suite::Lions => self.lions()?,
                Suite::Nehari => self.nehari()?,
                Suite::MountainPass => self.mountain_pass()?,
                Suite::Green => self.green()?,
            });
        }
        let constants = reports.iter().flat_map(|r| r.constants.clone()).collect();
        Ok(VerifyReport {
            passed: reports.iter().all(|r| r.passed),
            suites: reports,
            constants,
        })
    }

    fn rng(&self, stream: u64) -> ChaCha8Rng {
        let mut rng = ChaCha8Rng::seed_from_u64(self.cfg.seed);
        rng.set_stream(stream);
        rng
    }

    fn operators(&self) -> Result<SuiteReport> {
        let mut out = SuiteBuilder::new(Suite::Operators);
        let window = self.prob.window();
        let mut rng = self.rng(1);
        let (mut gradient, mut biharm, mut symmetry, mut form) = (0.0f64, 0.0f64, 0.0f64, 0.0f64);
        let mut embedding = true;
        let mut positive = true;
        for _ in 0..self.cfg.samples {
            // Restricted to the active sites, so the Dirichlet form applies too.
            let u = self.restrict(&random_compact(window, &mut rng, false))?;
            let phi = self.restrict(&random_compact(window, &mut rng, false))?;
            // Σ|∇u|² = −Σ uΔu
            let energy: f64 = gradient_form(&u, &u)?.values().iter().sum();
            let lap = laplacian(&u)?;
            let pairing = -lap.dot(&u.embed(lap.window().clone())?)?;
            gradient = gradient.max(relative(energy, pairing));
            // ΣΔ²u·φ = ΣΔuΔφ
            let bi = biharmonic(&u)?;
            let left = bi.dot(&phi.embed(bi.window().clone())?)?;
            let right = lap.dot(&laplacian(&phi)?)?;
            biharm = biharm.max(relative(left, right).min((left - right).abs() / bi.sup_norm().max(1.0)));
            // A symmetric and positive with ⟨u, Au⟩ = ‖u‖².
            let au = apply_quadratic_operator(&u, self.prob)?;
            let aphi = apply_quadratic_operator(&phi, self.prob)?;
            symmetry = symmetry.max(relative(phi.dot(&au)?, u.dot(&aphi)?));
            let quad = u.dot(&au)?;
            let norm = match self.prob.lambda() {
                Some(l) => elambda_norm_sq(&u, self.prob.potential(), l)?,
                None => w22_norm_sq(&u)?,
            };
            form = form.max(relative(quad, norm));
            positive &= quad >= u.dot(&u)?;
            // ‖u‖_∞ ≤ ‖u‖₂ ≤ ‖u‖_{W^{2,2}} ≤ ‖u‖_{E_λ}
            let w22 = w22_norm_sq(&u)?.sqrt();
            embedding &= u.sup_norm() <= u.lq_norm(2.0) && u.lq_norm(2.0) <= w22 && w22 <= norm.sqrt() * (1.0 + 1e-14);
        }
        out.at_most("gradient identity", gradient, 1e-12);
        out.at_most("biharmonic identity", biharm, 1e-12);
        out.at_most("operator symmetry", symmetry, 1e-12);
        out.at_most("quadratic form vs norm", form, 1e-12);
        out.holds("⟨u, Au⟩ ≥ Σu²", positive);
        out.holds("embedding chain", embedding);
        Ok(out.finish())
    }

    fn hls(&self) -> Result<SuiteReport> {
        let mut out = SuiteBuilder::new(Suite::Hls);
        let r = symmetric_hls_exponent(self.prob.window().dim(), self.prob.kernel().alpha());
        let first = hls_batch(self.prob, self.cfg.hls_samples, &mut self.rng(2))?;
        let second = hls_batch(self.prob, self.cfg.hls_samples, &mut self.rng(3))?;
        let c = first.max;
        out.constants.insert("C_hat".into(), c);
        out.constants.insert("C_hat_resample".into(), second.max);
        out.holds("ratios finite", first.max.is_finite() && second.max.is_finite());
        out.at_most("resampling change", (first.max - second.max).abs() / first.max, 0.2);
        // Scale invariance of the ratio.
        let mut rng = self.rng(4);
        let mut scale = 0.0f64;
        let window = self.prob.window();
        for _ in 0..10 {
            let u = random_compact(window, &mut rng, true);
            let v = random_compact(window, &mut rng, true);
            let a = hls_ratio(&u, &v, self.prob.kernel(), r, r)?;
            let b = hls_ratio(&u.scale(3.7), &v.scale(1e-3), self.prob.kernel(), r, r)?;
            scale = scale.max(relative(a, b));
        }
        out.at_most("scale invariance", scale, 1e-12);
        Ok(out.finish())
    }

    fn brezis_lieb(&self) -> Result<SuiteReport> {
        let mut out = SuiteBuilder::new(Suite::BrezisLieb);
        let (u, v, shifts) = brezis_lieb_setup(self.prob)?;
        let rows = brezis_lieb_probe(&u, &v, &shifts, self.prob)?;
        let norm_defect = rows.iter().map(|r| r.norm_defect.abs()).fold(0.0, f64::max);
        out.at_most("norm defect (disjoint stencils)", norm_defect, 0.0);
        out.holds(
            "nonlocal defect decreasing",
            rows.windows(2).all(|w| w[1].nonlocal_defect < w[0].nonlocal_defect),
        );
        let last = rows.last().expect("three shifts");
        let bound = brezis_lieb_bound(self.prob, &u, &v, last.distance)?;
        out.at_most("last nonlocal defect / bound", last.nonlocal_defect / bound, 1.0);
        for r in &rows {
            out.constants
                .insert(format!("nonlocal_defect_{}", r.distance), r.nonlocal_defect);
        }
        Ok(out.finish())
    }

    fn lions(&self) -> Result<SuiteReport> {
        let mut out = SuiteBuilder::new(Suite::Lions);
        let mut rng = self.rng(5);
        let mut ok = true;
        for _ in 0..self.cfg.samples {
            let u = random_compact(self.prob.window(), &mut rng, false);
            for (s, t) in [(1.0, 2.0), (2.0, 3.0), (2.0, 4.0), (2.5, 7.0)] {
                ok &= interpolation_check(&u, s, t)?;
            }
        }
        out.holds("‖u‖_t^t ≤ ‖u‖_s^s ‖u‖_∞^{t−s}", ok);
        Ok(out.finish())
    }

    fn nehari(&self) -> Result<SuiteReport> {
        let mut out = SuiteBuilder::new(Suite::Nehari);
        let c = hls_batch(self.prob, self.cfg.hls_samples, &mut self.rng(2))?.max;
        let p = self.prob.p();
        let sigma = c.powf(-0.5 / (p - 1.0));
        out.constants.insert("sigma_hat".into(), sigma);
        let mut rng = self.rng(6);
        let (mut defect, mut level, mut smallest) = (0.0f64, 0.0f64, f64::INFINITY);
        let mut tried = 0;
        while tried < self.cfg.samples {
            let u = self.random_problem_field(&mut rng)?;
            let (_, b) = energy_parts(&u, self.prob)?;
            if b <= 0.0 {
                continue;
            }
            tried += 1;
            let (_, v) = nehari_project(&u, self.prob)?;
            let (a, b) = energy_parts(&v, self.prob)?;
            defect = defect.max(((a - b) / a).abs());
            let m = nehari_level(&v, self.prob)?;
            level = level.max(relative(m, self.prob.level_factor() * a));
            smallest = smallest.min(a.sqrt());
        }
        out.at_most("projection defect", defect, 1e-12);
        out.at_most("level identity", level, 1e-10);
        out.at_least("smallest projected norm / σ̂", smallest / sigma, 1.0);
        out.constants.insert("smallest_projected_norm".into(), smallest);
        let site = self
            .prob
            .omega()
            .iter()
            .next()
            .expect("nonempty well")
            .coords()
            .to_vec();
        let single = Field::delta(self.prob.window().clone(), &site)?;
        out.holds(
            "single site has no projection",
            matches!(nehari_project(&single, self.prob), Err(Error::NoProjection)),
        );
        Ok(out.finish())
    }

    fn mountain_pass(&self) -> Result<SuiteReport> {
        let mut out = SuiteBuilder::new(Suite::MountainPass);
        let probe = mountain_pass_probe(self.prob, self.cfg.rho, self.cfg.samples, self.cfg.seed)?;
        out.constants.insert("theta_hat".into(), probe.theta);
        out.constants.insert("t_neg".into(), probe.t_neg);
        out.at_least("θ̂ / ρ²", probe.theta / (self.cfg.rho * self.cfg.rho), 0.25);
        out.holds("J(t_neg u) < 0 and J(2 t_neg u) < 0", probe.witness_energies.iter().all(|e| *e < 0.0));
        let small = mountain_pass_probe(self.prob, 1e-4, self.cfg.samples, self.cfg.seed)?;
        let ratio = small.theta / 1e-8;
        // D ≥ 0 caps θ at ρ²/2; the quartic correction is invisible at this radius.
        out.push(
            "θ̂ / ρ² at ρ = 1e-4",
            ratio,
            "in [0.4, 0.5]".into(),
            (0.4..=0.5 * (1.0 + 1e-12)).contains(&ratio),
        );
        Ok(out.finish())
    }

    fn green(&self) -> Result<SuiteReport> {
        let mut out = SuiteBuilder::new(Suite::Green);
        let table = self.prob.kernel();
        let reference = &*self.reference;
        if table.kind() == KernelKind::Green {
            // The problem table and the reference agree wherever both are defined.
            out.at_most("table consistency", table_consistency(table, reference)?, 1e-6);
            let refined = KernelTable::build_with_extent(
                KernelKind::Green,
                table.alpha(),
                table.dim(),
                table.radius(),
                table.extent(),
                &table.quadrature().refined(),
                table.method(),
            )?;
            out.at_most("two-resolution agreement", table.max_relative_difference(&refined)?, 1e-8);
        }
        if let Some((c1, c2)) = reference.asymptotic_bracket(5, 30) {
            out.constants.insert("c1".into(), c1);
            out.constants.insert("c2".into(), c2);
            out.at_most("c2 / c1", c2 / c1, 10.0);
        }
        let f = unit_bump(self.prob.window());
        let near = (table.kind() == KernelKind::Green).then_some(&**table);
        let err = green_identity_error(&f, near, reference, self.cfg.green_window_factor)?;
        out.constants.insert("green_identity_error".into(), err);
        out.at_most("identity sup-error", err, self.cfg.green_tolerance);
        Ok(out.finish())
    }

    fn restrict(&self, u: &Field) -> Result<Field> {
        self.prob.field_from_active(&self.prob.active_values(u)?)
    }

    /// Random positive values on the active sites, as a field.
    fn random_problem_field(&self, rng: &mut ChaCha8Rng) -> Result<Field> {
        let x: Vec<f64> = (0..self.prob.active_sites().len()).map(|_| rng.random::<f64>()).collect();
        self.prob.field_from_active(&x)
    }
}

fn relative(a: f64, b: f64) -> f64 {
    let scale = a.abs().max(b.abs());
    if scale == 0.0 {
        0.0
    } else {
        (a - b).abs() / scale
    }
}

/// Random values on a word ball of random radius at a random centre, all
/// inside the window with margin two.
fn random_compact(window: &Arc<LatticeWindow>, rng: &mut ChaCha8Rng, nonnegative: bool) -> Field {
    let r = window.radius() as i64;
    let reach = (r / 2).max(1);
    let radius = rng.random_range(0..=reach);
    let room = (r - radius - 2).max(0) as i32;
    let center: Vec<i32> = (0..window.dim()).map(|_| rng.random_range(-room..=room)).collect();
    Field::from_fn(window.clone(), |c| {
        let d: i64 = c.iter().zip(&center).map(|(a, b)| (a - b).abs() as i64).sum();
        if d <= radius {
            let x: f64 = rng.random();
            if nonnegative {
                x
            } else {
                2.0 * x - 1.0
            }
        } else {
            0.0
        }
    })
}

struct HlsBatch {
    max: f64,
}

fn hls_batch(prob: &ProblemSpec, samples: usize, rng: &mut ChaCha8Rng) -> Result<HlsBatch> {
    let r = symmetric_hls_exponent(prob.window().dim(), prob.kernel().alpha());
    let mut max = 0.0f64;
    let mut done = 0;
    while done < samples {
        let u = random_compact(prob.window(), rng, true);
        let v = random_compact(prob.window(), rng, true);
        if u.is_zero() || v.is_zero() {
            continue;
        }
        done += 1;
        max = max.max(hls_ratio(&u, &v, prob.kernel(), r, r)?);
        max = max.max(hls_ratio(&u, &u, prob.kernel(), r, r)?);
    }
    Ok(HlsBatch { max })
}

/// Measured HLS constant `Ĉ`: the largest ratio over `samples` random
/// nonnegative pairs.
pub fn measure_hls_constant(prob: &ProblemSpec, samples: usize, seed: u64) -> Result<f64> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(2);
    Ok(hls_batch(prob, samples, &mut rng)?.max)
}

/// `σ̂ = Ĉ^{−1/(2(p−1))}`.
pub fn sigma_hat(c_hat: f64, p: f64) -> f64 {
    c_hat.powf(-0.5 / (p - 1.0))
}

/// The Brezis–Lieb probe's fields: a unit plateau on `B_1(0)` for both `u`
/// and `v`, and shifts with `|z|₁ ∈ {8, 16, 24}`.
pub fn brezis_lieb_setup(prob: &ProblemSpec) -> Result<(Field, Field, Vec<Vec<i32>>)> {
    let window = prob.window();
    let dim = window.dim();
    // In one dimension the shift runs along the axis; otherwise diagonally
    // in the first two coordinates, which keeps it inside smaller boxes.
    let reach = if dim == 1 { 24 } else { 12 };
    if window.radius() < reach + 3 {
        return Err(Error::InvalidInput(format!(
            "the Brezis–Lieb probe needs a window radius of at least {}",
            reach + 3
        )));
    }
    let plateau = Field::from_fn(window.clone(), |c| {
        if c.iter().map(|x| x.abs()).sum::<i32>() <= 1 {
            1.0
        } else {
            0.0
        }
    });
    let shifts = [8, 16, 24]
        .into_iter()
        .map(|d| {
            let mut z = vec![0; dim];
            if dim == 1 {
                z[0] = d;
            } else {
                z[0] = d / 2;
                z[1] = d / 2;
            }
            z
        })
        .collect();
    Ok((plateau.clone(), plateau, shifts))
}

/// `10 · d^{α−N} · (‖u‖ + ‖v‖)^{2p}` in `W^{2,2}`.
pub fn brezis_lieb_bound(prob: &ProblemSpec, u: &Field, v: &Field, distance: u64) -> Result<f64> {
    let n = prob.window().dim() as f64;
    let norms = w22_norm_sq(u)?.sqrt() + w22_norm_sq(v)?.sqrt();
    Ok(10.0 * (distance as f64).powf(prob.kernel().alpha() - n) * norms.powf(2.0 * prob.p()))
}

/// Largest relative difference between two Green tables over the offsets of
/// the smaller.
pub fn table_consistency(small: &KernelTable, large: &KernelTable) -> Result<f64> {
    let mut worst = 0.0f64;
    for (v, x) in small.orbits() {
        if !large.covers(v) {
            return Err(Error::InvalidInput("reference table is smaller than the problem table".into()));
        }
        worst = worst.max(relative(*x, large.get(v)?));
    }
    Ok(worst)
}

/// A unit-mass bump: `1/2` at the origin and `1/8` at its neighbours.
pub fn unit_bump(window: &Arc<LatticeWindow>) -> Field {
    let n = window.dim() as f64;
    Field::from_fn(window.clone(), |c| match c.iter().map(|x| x.abs()).sum::<i32>() {
        0 => 0.5,
        1 => 0.25 / n,
        _ => 0.0,
    })
}

/// `sup |(−Δ)^{α/2}(R_α∗f) − f|` over the window of `f`.
///
/// `R_α∗f` (diagonal included) is evaluated on a window `factor` times
/// larger, from `near` for offsets it covers and from `far` otherwise. The
/// truncation of the potential beyond that window limits the accuracy to
/// about `0.07·Σf/L²` in two dimensions.
pub fn green_identity_error(f: &Field, near: Option<&KernelTable>, far: &KernelTable, factor: i64) -> Result<f64> {
    let window = f.window();
    let big = Arc::new(LatticeWindow::boxed(window.dim(), factor.max(1) * window.radius() as i64)?);
    let mut v = convolve_onto(far, f, big.clone(), true)?;
    if let Some(near) = near {
        // Overwrite with the near table wherever every offset is covered.
        let reach = near.extent() as i32 - window.radius();
        if reach >= 0 {
            let inner = Arc::new(LatticeWindow::boxed(window.dim(), reach.max(1) as i64)?);
            let local = convolve_onto(near, f, inner.clone(), true)?;
            for (c, x) in inner.sites().zip(local.values()) {
                let i = big.index_of(c).expect("inner window lies inside");
                v.values_mut()[i] = *x;
            }
        }
    }
    let lap = fractional_laplacian(far.alpha(), &v, far.quadrature())?;
    Ok(window
        .sites()
        .zip(f.values())
        .map(|(c, x)| (lap.at(c) - x).abs())
        .fold(0.0, f64::max))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn suite_lists() {
        assert_eq!(Suite::parse_list("hls,nehari").unwrap(), vec![Suite::Hls, Suite::Nehari]);
        assert_eq!(Suite::parse_list("all").unwrap().len(), 7);
        assert!(Suite::parse_list("hls,bogus").is_err());
        assert!(Suite::parse_list("").is_err());
        for s in Suite::ALL {
            assert_eq!(s.name().parse::<Suite>().unwrap(), s);
        }
    }

    fn small_problem() -> ProblemSpec {
        use crate::calculus::potential::PotentialSpec;
        use crate::kernels::{KernelMethod, QuadratureSpec};
        let w = Arc::new(LatticeWindow::boxed(2, 16).unwrap());
        let quad = QuadratureSpec::default();
        let k = KernelTable::build(KernelKind::Green, 1.0, &w, &quad, KernelMethod::BesselProduct).unwrap();
        let pot = PotentialSpec::ball_well(2, 1).unwrap();
        ProblemSpec::full(w, pot, Arc::new(k), 2.0, 10.0).unwrap()
    }

    #[test]
    fn all_suites_pass_on_a_small_problem() {
        let prob = small_problem();
        let cfg = VerifyConfig {
            samples: 20,
            hls_samples: 40,
            ..VerifyConfig::default()
        };
        let report = Verifier::new(&prob, cfg, None).unwrap().run(&Suite::ALL).unwrap();
        assert!(report.passed, "{:?}", report.failures());
        for key in ["C_hat", "sigma_hat", "theta_hat", "c1", "c2"] {
            assert!(report.constants[key] > 0.0, "{key}");
        }
    }

    #[test]
    fn green_identity_beats_truncation_estimate() {
        let prob = small_problem();
        let cfg = VerifyConfig::default();
        let reference = build_reference(&prob, &cfg).unwrap();
        let f = unit_bump(prob.window());
        let err = green_identity_error(&f, Some(prob.kernel()), &reference, 4).unwrap();
        // 0.07 · Σf / L² with L = 64.
        assert!(err < 0.07 / 64.0_f64.powi(2) * 1.5, "{err}");
    }

    #[test]
    fn table_consistency_flags_a_perturbed_value() {
        let prob = small_problem();
        let reference = build_reference(&prob, &VerifyConfig::default()).unwrap();
        assert!(table_consistency(prob.kernel(), &reference).unwrap() < 1e-10);
        let mut text = Vec::new();
        crate::kernels::cache::write_table(prob.kernel(), &mut text).unwrap();
        let key = crate::kernels::CacheKey::of(prob.kernel());
        let text = String::from_utf8(text).unwrap();
        let edited: Vec<String> = text
            .lines()
            .map(|line| match line.strip_prefix("1 0 ") {
                Some(x) => format!("1 0 {:?}", x.parse::<f64>().unwrap() * (1.0 + 1e-3)),
                None => line.to_string(),
            })
            .collect();
        let tampered = crate::kernels::cache::read_table(&edited.join("\n"), &key).unwrap();
        assert!(table_consistency(&tampered, &reference).unwrap() > 1e-4);
    }
}
