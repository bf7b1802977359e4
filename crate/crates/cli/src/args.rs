use std::path::PathBuf;

use choquard::variational::ModeKind;
use choquard::KernelKind;
use clap::{Args, Parser, Subcommand};

use crate::config::RunConfig;
use crate::error::{CliError, CliResult};

#[derive(Debug, Parser)]
#[command(name = "choquard", version, about = "Ground states of the discrete Choquard equation on Z^N")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Build (or load) the kernel table and summarize it.
    Kernel(Overrides),
    /// Compute a ground state in the configured mode.
    Solve(Overrides),
    /// Solve along the λ grid and compare with the Dirichlet limit.
    Sweep(Overrides),
    /// Run the property suites.
    Verify(Overrides),
}

impl Command {
    pub fn name(&self) -> &'static str {
        match self {
            Command::Kernel(_) => "kernel",
            Command::Solve(_) => "solve",
            Command::Sweep(_) => "sweep",
            Command::Verify(_) => "verify",
        }
    }

    pub fn overrides(&self) -> &Overrides {
        match self {
            Command::Kernel(o) | Command::Solve(o) | Command::Sweep(o) | Command::Verify(o) => o,
        }
    }
}

/// Flags override the config file, which overrides the defaults.
#[derive(Debug, Default, Args)]
pub struct Overrides {
    /// TOML run configuration.
    #[arg(long, short)]
    pub config: Option<PathBuf>,
    #[arg(long)]
    pub dim: Option<usize>,
    #[arg(long)]
    pub radius: Option<i64>,
    #[arg(long)]
    pub alpha: Option<f64>,
    #[arg(long)]
    pub p: Option<f64>,
    #[arg(long)]
    pub lambda: Option<f64>,
    /// Comma-separated, strictly increasing.
    #[arg(long, value_delimiter = ',')]
    pub lambda_grid: Option<Vec<f64>>,
    #[arg(long)]
    pub omega_radius: Option<i64>,
    #[arg(long, value_parser = parse_kernel)]
    pub kernel: Option<KernelKind>,
    #[arg(long, value_parser = parse_mode)]
    pub mode: Option<ModeKind>,
    #[arg(long)]
    pub seed: Option<u64>,
    /// Output directory.
    #[arg(long)]
    pub out: Option<PathBuf>,
    #[arg(long)]
    pub cache_dir: Option<PathBuf>,
    /// Comma-separated suite names, or `all`.
    #[arg(long)]
    pub suites: Option<String>,
    /// Write the resolved configuration to this path.
    #[arg(long)]
    pub emit_config: Option<PathBuf>,
}

fn parse_kernel(s: &str) -> Result<KernelKind, String> {
    s.parse().map_err(|e: choquard::Error| e.to_string())
}

fn parse_mode(s: &str) -> Result<ModeKind, String> {
    s.parse().map_err(|e: choquard::Error| e.to_string())
}

impl Overrides {
    /// Loads the config file (if any), applies the flags and normalizes.
    pub fn resolve(&self) -> CliResult<RunConfig> {
        let mut cfg = match &self.config {
            Some(path) => RunConfig::load(path)?,
            None => RunConfig::default(),
        };
        let p = &mut cfg.problem;
        macro_rules! set {
            ($($flag:ident => $target:expr),* $(,)?) => {
                $(if let Some(v) = &self.$flag { $target = v.clone(); })*
            };
        }
        set! {
            dim => p.dim,
            radius => p.radius,
            alpha => p.alpha,
            p => p.p,
            lambda => p.lambda,
            lambda_grid => p.lambda_grid,
            omega_radius => p.omega_radius,
            kernel => p.kernel,
            mode => p.mode,
            seed => cfg.solver.seed,
            out => cfg.output.dir,
            cache_dir => cfg.output.cache_dir,
        }
        if let Some(list) = &self.suites {
            cfg.verify.suites = choquard::verify::Suite::parse_list(list).map_err(|e| CliError::Config(e.to_string()))?;
        }
        cfg.normalized()
    }
}
