//! The run configuration: one TOML file with `problem`, `solver`, `output`
//! and `verify` blocks, every field optional.

use std::path::{Path, PathBuf};
use std::sync::Arc;

use choquard::calculus::nonlocal::check_exponent;
use choquard::calculus::{PotentialProfile, PotentialSpec};
use choquard::kernels::green::check_alpha;
use choquard::lattice::ball;
use choquard::solver::SolverConfig;
use choquard::variational::{Mode, ModeKind, ProblemSpec, OMEGA_MARGIN};
use choquard::verify::{Suite, VerifyConfig};
use choquard::{KernelKind, KernelMethod, KernelTable, LatticeWindow, QuadratureSpec, Site};
use serde::{Deserialize, Serialize};

use crate::error::{CliError, CliResult};

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunConfig {
    pub problem: ProblemConfig,
    pub solver: SolverConfig,
    pub output: OutputConfig,
    pub verify: VerifySection,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ProblemConfig {
    pub dim: usize,
    /// Half-width of the box window.
    pub radius: i64,
    pub alpha: f64,
    pub p: f64,
    pub mode: ModeKind,
    pub lambda: f64,
    /// Grid for `sweep`; strictly increasing.
    pub lambda_grid: Vec<f64>,
    /// The well is the word ball of this radius around the origin.
    pub omega_radius: i64,
    /// Sublevel bound `M` of the potential.
    pub bound: f64,
    pub potential: PotentialProfile,
    pub kernel: KernelKind,
    pub method: KernelMethod,
    pub quadrature: QuadratureSpec,
}

impl Default for ProblemConfig {
    fn default() -> Self {
        ProblemConfig {
            dim: 2,
            radius: 16,
            alpha: 1.0,
            p: 2.0,
            mode: ModeKind::Full,
            lambda: 100.0,
            lambda_grid: vec![1.0, 10.0, 100.0, 1000.0, 10000.0],
            omega_radius: 2,
            bound: 1.0,
            potential: PotentialProfile::Distance,
            kernel: KernelKind::Green,
            method: KernelMethod::BesselProduct,
            quadrature: QuadratureSpec::default(),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct OutputConfig {
    /// Directory receiving reports, CSV, plot data and solution fields.
    pub dir: PathBuf,
    /// Report path; `<dir>/<command>.json` when absent.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub report: Option<PathBuf>,
    /// Sweep table path; `<dir>/sweep.csv` when absent.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub csv: Option<PathBuf>,
    pub cache_dir: PathBuf,
}

impl Default for OutputConfig {
    fn default() -> Self {
        OutputConfig {
            dir: PathBuf::from("out"),
            report: None,
            csv: None,
            cache_dir: PathBuf::from("kernel-cache"),
        }
    }
}

impl OutputConfig {
    pub fn report_path(&self, command: &str) -> PathBuf {
        self.report
            .clone()
            .unwrap_or_else(|| self.dir.join(format!("{command}.json")))
    }

    pub fn csv_path(&self) -> PathBuf {
        self.csv.clone().unwrap_or_else(|| self.dir.join("sweep.csv"))
    }
}

/// Suite selection plus the sampling settings; the seed is the solver's.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct VerifySection {
    pub suites: Vec<Suite>,
    pub samples: usize,
    pub hls_samples: usize,
    pub rho: f64,
    pub green_window_factor: i64,
    pub green_tolerance: f64,
}

impl Default for VerifySection {
    fn default() -> Self {
        let d = VerifyConfig::default();
        VerifySection {
            suites: Suite::ALL.to_vec(),
            samples: d.samples,
            hls_samples: d.hls_samples,
            rho: d.rho,
            green_window_factor: d.green_window_factor,
            green_tolerance: d.green_tolerance,
        }
    }
}

impl VerifySection {
    pub fn settings(&self, seed: u64) -> VerifyConfig {
        VerifyConfig {
            samples: self.samples,
            hls_samples: self.hls_samples,
            seed,
            rho: self.rho,
            green_window_factor: self.green_window_factor,
            green_tolerance: self.green_tolerance,
        }
    }
}

impl RunConfig {
    pub fn from_toml(text: &str) -> CliResult<Self> {
        toml::from_str(text).map_err(|e| CliError::Config(e.to_string()))
    }

    pub fn load(path: &Path) -> CliResult<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| CliError::Config(format!("cannot read config {}: {e}", path.display())))?;
        Self::from_toml(&text)
    }

    pub fn to_toml(&self) -> CliResult<String> {
        toml::to_string(self).map_err(|e| CliError::Config(e.to_string()))
    }

    /// Validates every field and puts the suite list in canonical order.
    pub fn normalized(mut self) -> CliResult<Self> {
        let p = &self.problem;
        let bad = |msg: String| Err(CliError::Config(msg));
        if !(1..=3).contains(&p.dim) {
            return bad(format!("dim = {} must be 1, 2 or 3", p.dim));
        }
        check_alpha(p.alpha, p.dim)?;
        check_exponent(p.p, p.dim, p.alpha)?;
        if p.omega_radius < 0 {
            return bad("omega_radius must be nonnegative".into());
        }
        if p.radius < p.omega_radius + OMEGA_MARGIN + 1 {
            return bad(format!(
                "radius = {} must be at least omega_radius + {}",
                p.radius,
                OMEGA_MARGIN + 1
            ));
        }
        if !(p.lambda > 0.0 && p.lambda.is_finite()) {
            return bad(format!("lambda = {} must be positive", p.lambda));
        }
        if p.lambda_grid.is_empty() || p.lambda_grid.iter().any(|l| !(*l > 0.0 && l.is_finite())) {
            return bad("lambda_grid must be a nonempty list of positive values".into());
        }
        if p.lambda_grid.windows(2).any(|w| w[1] <= w[0]) {
            return bad("lambda_grid must be strictly increasing".into());
        }
        p.quadrature.validate()?;
        // Surfaces potential errors (cap below M and the like) up front.
        self.potential()?;
        self.solver.validate()?;
        let v = &mut self.verify;
        v.suites.sort();
        v.suites.dedup();
        if v.suites.is_empty() {
            return bad("verify.suites must not be empty".into());
        }
        if v.samples == 0 || v.hls_samples == 0 {
            return bad("verify sample counts must be positive".into());
        }
        if !(v.rho > 0.0) || !(v.green_tolerance > 0.0) || v.green_window_factor < 1 {
            return bad("verify.rho, green_tolerance and green_window_factor must be positive".into());
        }
        if matches!(self.solver.initializer, choquard::solver::Initializer::Supplied(_)) {
            return bad("a supplied initial field cannot come from the config".into());
        }
        Ok(self)
    }

    pub fn mode(&self) -> Mode {
        match self.problem.mode {
            ModeKind::Full => Mode::Full {
                lambda: self.problem.lambda,
            },
            ModeKind::Dirichlet => Mode::Dirichlet,
        }
    }

    pub fn window(&self) -> CliResult<Arc<LatticeWindow>> {
        Ok(Arc::new(LatticeWindow::boxed(self.problem.dim, self.problem.radius)?))
    }

    pub fn potential(&self) -> CliResult<PotentialSpec> {
        let p = &self.problem;
        let well = ball(&Site::origin(p.dim), p.omega_radius)?;
        Ok(PotentialSpec::new(well, p.bound, p.potential)?)
    }

    pub fn problem(&self, mode: Mode, kernel: Arc<KernelTable>) -> CliResult<ProblemSpec> {
        Ok(ProblemSpec::new(
            mode,
            self.window()?,
            self.potential()?,
            kernel,
            self.problem.p,
        )?)
    }
}
