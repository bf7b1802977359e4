use rand::{RngExt, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::field::{dot, Field};
use crate::kernels::heat_semigroup;
use crate::solver::cg::pcg;
use crate::variational::{projection_scale, Evaluation, Mode, ProblemSpec};

/// Where a descent starts.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Initializer {
    /// The indicator of `Ω` smoothed once by the heat semigroup (`t = 1`).
    #[default]
    WellBump,
    /// Independent uniform values in `(0, 1)` on the sublevel set
    /// `{a ≤ M}` (on `Ω` in Dirichlet mode).
    RandomPositive,
    /// A given field on the problem window.
    #[serde(skip)]
    Supplied(Field),
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SolverConfig {
    pub max_iterations: usize,
    /// Stop once `‖J′(u)‖_*` and `‖J′(u)‖₂` are both below
    /// `residual_tol · ‖u‖`.
    pub residual_tol: f64,
    /// Stop only if `|F(u)| ≤ nehari_tol · ‖u‖²`.
    pub nehari_tol: f64,
    pub cg_tol: f64,
    pub cg_max_iterations: usize,
    /// Backtracking factor in `(0, 1)`.
    pub shrink: f64,
    /// Armijo constant `c` in `ΔJ ≤ −c·s·‖J′‖²_*`.
    pub sufficient_decrease: f64,
    /// Steps below this count as stagnation.
    pub min_step: f64,
    pub initializer: Initializer,
    /// Random-positive restarts on top of the initializer's run.
    pub restarts: usize,
    pub seed: u64,
}

impl Default for SolverConfig {
    fn default() -> Self {
        SolverConfig {
            max_iterations: 1000,
            residual_tol: 1e-8,
            nehari_tol: 1e-10,
            cg_tol: 1e-10,
            cg_max_iterations: 20_000,
            shrink: 0.5,
            sufficient_decrease: 1e-4,
            min_step: 1e-12,
            initializer: Initializer::WellBump,
            restarts: 5,
            seed: 0,
        }
    }
}

impl SolverConfig {
    pub fn validate(&self) -> Result<()> {
        for (name, v) in [
            ("residual_tol", self.residual_tol),
            ("nehari_tol", self.nehari_tol),
            ("cg_tol", self.cg_tol),
            ("sufficient_decrease", self.sufficient_decrease),
            ("min_step", self.min_step),
        ] {
            if !(v > 0.0 && v.is_finite()) {
                return Err(Error::Parameter(format!("{name} = {v} must be positive")));
            }
        }
        if !(self.shrink > 0.0 && self.shrink < 1.0) {
            return Err(Error::Parameter(format!("shrink = {} must lie in (0, 1)", self.shrink)));
        }
        if self.max_iterations == 0 || self.cg_max_iterations == 0 {
            return Err(Error::Parameter("iteration limits must be positive".into()));
        }
        Ok(())
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum SolveStatus {
    Converged,
    Stagnated,
    IterationLimit,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct IterationRecord {
    pub iteration: usize,
    pub energy: f64,
    pub norm_sq: f64,
    pub nonlocal: f64,
    /// `F(u) = (J′(u), u)`.
    pub nehari: f64,
    pub dual_residual: f64,
    pub coordinate_residual: f64,
    /// Step accepted after this record; zero on the last one.
    pub step: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RestartRecord {
    pub start: String,
    pub level: Option<f64>,
    pub iterations: usize,
    pub status: Option<SolveStatus>,
    pub note: Option<String>,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SolveResult {
    #[serde(skip)]
    pub u: Field,
    pub mode: Mode,
    pub status: SolveStatus,
    /// `m = J(u)`.
    pub level: f64,
    pub norm_sq: f64,
    pub nonlocal: f64,
    /// `‖J′(u)‖_*`.
    pub dual_residual: f64,
    /// `‖J′(u)‖_* / ‖u‖`.
    pub relative_residual: f64,
    /// `‖g‖₂` for the coordinate gradient `g`.
    pub coordinate_residual: f64,
    /// `|F(u)|`.
    pub nehari_defect: f64,
    pub iterations: usize,
    /// Which run produced `u`.
    pub start: String,
    pub history: Vec<IterationRecord>,
    pub restarts: Vec<RestartRecord>,
}

impl SolveResult {
    pub fn converged(&self) -> bool {
        self.status == SolveStatus::Converged
    }

    /// `Ok` only for a converged result.
    pub fn ensure_converged(self) -> Result<Self> {
        match self.status {
            SolveStatus::Converged => Ok(self),
            SolveStatus::Stagnated => Err(Error::Stagnation {
                iteration: self.iterations,
                residual: self.relative_residual,
            }),
            SolveStatus::IterationLimit => Err(Error::IterationLimit {
                iterations: self.iterations,
                residual: self.relative_residual,
            }),
        }
    }

    /// Levels of the converged runs.
    pub fn restart_levels(&self) -> Vec<f64> {
        self.restarts
            .iter()
            .filter(|r| r.status == Some(SolveStatus::Converged))
            .filter_map(|r| r.level)
            .collect()
    }
}

struct Run {
    x: Vec<f64>,
    ev: Evaluation,
    status: SolveStatus,
    history: Vec<IterationRecord>,
}

/// Active coordinates of the initializer's field.
fn initial_values(prob: &ProblemSpec, init: &Initializer, rng: &mut ChaCha8Rng) -> Result<Vec<f64>> {
    let window = prob.window();
    match init {
        Initializer::WellBump => {
            let indicator = Field::from_fn(window.clone(), |c| {
                if prob.omega().contains_coords(c) {
                    1.0
                } else {
                    0.0
                }
            });
            let smooth = heat_semigroup(1.0, &indicator)?;
            Ok(prob.active_sites().iter().map(|&i| smooth.values()[i]).collect())
        }
        Initializer::RandomPositive => {
            let bound = prob.potential().bound();
            Ok(prob
                .active_sites()
                .iter()
                .map(|&i| {
                    let draw = rng.random::<f64>();
                    if prob.potential().value(window.site(i)) <= bound {
                        draw
                    } else {
                        0.0
                    }
                })
                .collect())
        }
        Initializer::Supplied(u) => prob.active_values(u),
    }
}

fn descend(prob: &ProblemSpec, cfg: &SolverConfig, x0: Vec<f64>) -> Result<Run> {
    let p = prob.p();
    let ev0 = prob.evaluate(&x0);
    let t = projection_scale(ev0.norm_sq, ev0.nonlocal, p).map_err(|_| Error::Initializer)?;
    let mut x: Vec<f64> = x0.iter().map(|v| v * t).collect();
    let mut ev = prob.evaluate(&x);
    let mut history = Vec::new();
    let mut step = 1.0f64;
    for iteration in 0..=cfg.max_iterations {
        let g = prob.gradient(&x, &ev);
        let r = pcg(prob.operator(), &g, cfg.cg_tol, cfg.cg_max_iterations)?;
        let dual_sq = dot(&g, &r).max(0.0);
        let dual = dual_sq.sqrt();
        let coordinate = dot(&g, &g).sqrt();
        let norm = ev.norm_sq.sqrt();
        history.push(IterationRecord {
            iteration,
            energy: ev.energy(p),
            norm_sq: ev.norm_sq,
            nonlocal: ev.nonlocal,
            nehari: ev.nehari(),
            dual_residual: dual,
            coordinate_residual: coordinate,
            step: 0.0,
        });
        let done = dual <= cfg.residual_tol * norm
            && coordinate <= cfg.residual_tol * norm
            && ev.nehari().abs() <= cfg.nehari_tol * ev.norm_sq;
        if done {
            return Ok(Run {
                x,
                ev,
                status: SolveStatus::Converged,
                history,
            });
        }
        if iteration == cfg.max_iterations {
            break;
        }
        let mut s = (2.0 * step).min(1.0);
        loop {
            let y: Vec<f64> = x.iter().zip(&r).map(|(a, b)| a - s * b).collect();
            let ey = prob.evaluate(&y);
            if let Ok(t) = projection_scale(ey.norm_sq, ey.nonlocal, p) {
                let z: Vec<f64> = y.iter().map(|v| v * t).collect();
                let ez = prob.evaluate(&z);
                let change = prob.energy_change(&x, &ev, &z, &ez);
                if change < 0.0 && change <= -cfg.sufficient_decrease * s * dual_sq {
                    x = z;
                    ev = ez;
                    step = s;
                    history.last_mut().expect("pushed above").step = s;
                    break;
                }
            }
            s *= cfg.shrink;
            if s < cfg.min_step {
                return Ok(Run {
                    x,
                    ev,
                    status: SolveStatus::Stagnated,
                    history,
                });
            }
        }
    }
    Ok(Run {
        x,
        ev,
        status: SolveStatus::IterationLimit,
        history,
    })
}

fn start_label(init: &Initializer) -> &'static str {
    match init {
        Initializer::WellBump => "well-bump",
        Initializer::RandomPositive => "random-positive",
        Initializer::Supplied(_) => "supplied",
    }
}

/// Runs the descent from the configured start and from `cfg.restarts`
/// random-positive starts, returning the least-level run — converged runs
/// take precedence. Unconverged results come back as `Ok` with their status;
/// see [`ground_state`] for the strict form.
pub fn ground_state_detailed(prob: &ProblemSpec, cfg: &SolverConfig) -> Result<SolveResult> {
    cfg.validate()?;
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let mut starts = vec![(
        start_label(&cfg.initializer).to_string(),
        initial_values(prob, &cfg.initializer, &mut rng)?,
    )];
    for k in 0..cfg.restarts {
        starts.push((
            format!("random-positive #{}", k + 1),
            initial_values(prob, &Initializer::RandomPositive, &mut rng)?,
        ));
    }
    let runs: Vec<(String, Result<Run>)> = starts
        .into_par_iter()
        .map(|(label, x0)| {
            let run = descend(prob, cfg, x0);
            (label, run)
        })
        .collect();

    let mut restarts = Vec::new();
    let mut best: Option<(String, Run)> = None;
    let mut first_error = None;
    for (label, run) in runs {
        match run {
            Ok(run) => {
                restarts.push(RestartRecord {
                    start: label.clone(),
                    level: Some(run.ev.energy(prob.p())),
                    iterations: run.history.len() - 1,
                    status: Some(run.status),
                    note: None,
                });
                let better = match &best {
                    None => true,
                    Some((_, b)) => {
                        let (bc, rc) = (b.status == SolveStatus::Converged, run.status == SolveStatus::Converged);
                        (rc && !bc) || (rc == bc && run.ev.energy(prob.p()) < b.ev.energy(prob.p()))
                    }
                };
                if better {
                    best = Some((label, run));
                }
            }
            Err(e) => {
                restarts.push(RestartRecord {
                    start: label,
                    level: None,
                    iterations: 0,
                    status: None,
                    note: Some(match &e {
                        Error::Initializer => "no positive nonlocal term at the start".to_string(),
                        other => other.to_string(),
                    }),
                });
                first_error.get_or_insert(e);
            }
        }
    }
    let Some((start, run)) = best else {
        return Err(first_error.unwrap_or(Error::Initializer));
    };
    let last = run.history.last().expect("descent records every iterate").clone();
    let norm = run.ev.norm_sq.sqrt();
    Ok(SolveResult {
        u: prob.field_from_active(&run.x)?,
        mode: prob.mode(),
        status: run.status,
        level: run.ev.energy(prob.p()),
        norm_sq: run.ev.norm_sq,
        nonlocal: run.ev.nonlocal,
        dual_residual: last.dual_residual,
        relative_residual: last.dual_residual / norm,
        coordinate_residual: last.coordinate_residual,
        nehari_defect: run.ev.nehari().abs(),
        iterations: run.history.len() - 1,
        start,
        history: run.history,
        restarts,
    })
}

/// [`ground_state_detailed`], failing unless the selected run converged.
pub fn ground_state(prob: &ProblemSpec, cfg: &SolverConfig) -> Result<SolveResult> {
    ground_state_detailed(prob, cfg)?.ensure_converged()
}
