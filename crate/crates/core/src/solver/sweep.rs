use std::io::Write;

use serde::{Deserialize, Serialize};

use crate::calculus::norms::w22_norm_sq;
use crate::error::{Error, Result};
use crate::field::Field;
use crate::solver::ground_state::{ground_state_detailed, Initializer, SolveResult, SolverConfig};
use crate::variational::{Mode, ProblemSpec};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SweepRow {
    pub lambda: f64,
    pub m_lambda: Option<f64>,
    /// `min_± ‖u_λ ∓ u_Ω‖_{W^{2,2}}`.
    pub w22_dist: Option<f64>,
    /// `w22_dist / ‖u_Ω‖_{W^{2,2}}`.
    pub relative_w22_dist: Option<f64>,
    /// `Σ_{Ω^c} (1 + λa) u_λ²`.
    pub outside_mass: Option<f64>,
    /// `Σ_{Ω^c} λa u_λ²`.
    pub outside_potential: Option<f64>,
    pub iterations: usize,
    /// Relative dual residual of the returned field.
    pub residual: Option<f64>,
    pub converged: bool,
    pub failure: Option<String>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SweepVerdicts {
    /// `m_λ` nondecreasing within `1e-8·m_Ω`.
    pub m_nondecreasing: bool,
    /// `m_λ ≤ m_Ω (1 + 1e-8)` on every row.
    pub below_m_omega: bool,
    /// `|m_λ − m_Ω| / m_Ω` on the last row.
    pub final_level_gap: Option<f64>,
    /// Relative `W^{2,2}` distance strictly decreasing along the grid.
    pub distance_decreasing: bool,
    pub final_relative_distance: Option<f64>,
    /// `Σ_{Ω^c} λa u_λ²` strictly decreasing along the grid.
    pub outside_potential_decreasing: bool,
    pub all_converged: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ConvergenceReport {
    pub grid: Vec<f64>,
    pub rows: Vec<SweepRow>,
    pub m_omega: f64,
    pub omega_w22_norm: f64,
    pub omega: SolveResult,
    pub verdicts: SweepVerdicts,
}

/// Relative slack for the monotonicity and comparison verdicts.
pub const LEVEL_SLACK: f64 = 1e-8;

/// Solves the Dirichlet problem once and the full problem for each `λ` of
/// the grid, warm-starting each full solve from the previous solution.
pub fn lambda_sweep(template: &ProblemSpec, grid: &[f64], cfg: &SolverConfig) -> Result<ConvergenceReport> {
    if grid.is_empty() {
        return Err(Error::InvalidInput("empty λ grid".into()));
    }
    if grid.windows(2).any(|w| !(w[1] > w[0])) {
        return Err(Error::InvalidInput("λ grid must be strictly increasing".into()));
    }
    let dirichlet = template.with_mode(Mode::Dirichlet)?;
    let omega = ground_state_detailed(&dirichlet, cfg)?.ensure_converged()?;
    let u_omega = omega.u.clone();
    let omega_norm = w22_norm_sq(&u_omega)?.sqrt();

    let mut rows = Vec::with_capacity(grid.len());
    let mut warm: Option<Field> = None;
    for &lambda in grid {
        let prob = template.with_mode(Mode::Full { lambda })?;
        let mut run_cfg = cfg.clone();
        if let Some(u) = &warm {
            run_cfg.initializer = Initializer::Supplied(u.clone());
        }
        match ground_state_detailed(&prob, &run_cfg) {
            Ok(res) => {
                let row = measure_row(&prob, lambda, &res, &u_omega, omega_norm)?;
                if res.converged() {
                    warm = Some(res.u.clone());
                }
                rows.push(row);
            }
            Err(e) => rows.push(SweepRow {
                lambda,
                m_lambda: None,
                w22_dist: None,
                relative_w22_dist: None,
                outside_mass: None,
                outside_potential: None,
                iterations: 0,
                residual: None,
                converged: false,
                failure: Some(e.to_string()),
            }),
        }
    }
    let verdicts = judge(&rows, omega.level);
    Ok(ConvergenceReport {
        grid: grid.to_vec(),
        rows,
        m_omega: omega.level,
        omega_w22_norm: omega_norm,
        omega,
        verdicts,
    })
}

fn measure_row(prob: &ProblemSpec, lambda: f64, res: &SolveResult, u_omega: &Field, omega_norm: f64) -> Result<SweepRow> {
    let u = &res.u;
    let plus = w22_norm_sq(&u.sub(u_omega)?)?;
    let minus = w22_norm_sq(&u.add(u_omega)?)?;
    let dist = plus.min(minus).sqrt();
    let (mut mass, mut potential) = (0.0, 0.0);
    for (c, v) in prob.window().sites().zip(u.values()) {
        if !prob.omega().contains_coords(c) {
            let weight = lambda * prob.potential().value(c);
            mass += (1.0 + weight) * v * v;
            potential += weight * v * v;
        }
    }
    Ok(SweepRow {
        lambda,
        m_lambda: Some(res.level),
        w22_dist: Some(dist),
        relative_w22_dist: Some(dist / omega_norm),
        outside_mass: Some(mass),
        outside_potential: Some(potential),
        iterations: res.iterations,
        residual: Some(res.relative_residual),
        converged: res.converged(),
        failure: (!res.converged()).then(|| format!("{:?}", res.status)),
    })
}

fn judge(rows: &[SweepRow], m_omega: f64) -> SweepVerdicts {
    let slack = LEVEL_SLACK * m_omega.abs();
    let levels: Vec<Option<f64>> = rows.iter().map(|r| r.m_lambda).collect();
    let pairs = |xs: &[Option<f64>], ok: &dyn Fn(f64, f64) -> bool| {
        xs.windows(2).all(|w| matches!((w[0], w[1]), (Some(a), Some(b)) if ok(a, b)))
    };
    let distances: Vec<Option<f64>> = rows.iter().map(|r| r.relative_w22_dist).collect();
    let outside: Vec<Option<f64>> = rows.iter().map(|r| r.outside_potential).collect();
    let last = rows.last();
    SweepVerdicts {
        m_nondecreasing: pairs(&levels, &|a, b| b >= a - slack),
        below_m_omega: levels.iter().all(|m| matches!(m, Some(m) if *m <= m_omega + slack)),
        final_level_gap: last.and_then(|r| r.m_lambda).map(|m| (m - m_omega).abs() / m_omega),
        distance_decreasing: pairs(&distances, &|a, b| b < a),
        final_relative_distance: last.and_then(|r| r.relative_w22_dist),
        outside_potential_decreasing: pairs(&outside, &|a, b| b < a),
        all_converged: rows.iter().all(|r| r.converged),
    }
}

impl ConvergenceReport {
    /// `lambda,m_lambda,w22_dist,outside_mass,iterations,residual`, one row per
    /// grid point, then a `# m_omega` footer. Failed rows leave blanks.
    pub fn write_csv(&self, mut w: impl Write) -> Result<()> {
        writeln!(w, "lambda,m_lambda,w22_dist,outside_mass,iterations,residual")?;
        let cell = |x: Option<f64>| x.map(|v| format!("{v:?}")).unwrap_or_default();
        for r in &self.rows {
            writeln!(
                w,
                "{:?},{},{},{},{},{}",
                r.lambda,
                cell(r.m_lambda),
                cell(r.w22_dist),
                cell(r.outside_mass),
                r.iterations,
                cell(r.residual)
            )?;
        }
        writeln!(w, "# m_omega,{:?}", self.m_omega)?;
        Ok(())
    }

    /// Two-column plot data `(log10 λ, value)` for rows that have a value.
    pub fn plot_columns(&self, pick: impl Fn(&SweepRow) -> Option<f64>) -> Vec<(f64, f64)> {
        self.rows
            .iter()
            .filter_map(|r| pick(r).map(|v| (r.lambda.log10(), v)))
            .collect()
    }
}
