use std::fs;
use std::path::{Path, PathBuf};
use std::sync::Arc;

use choquard::kernels::{load_or_build, CacheKey, CacheStatus};
use choquard::solver::{ground_state_detailed, lambda_sweep, ps_monitor, ConvergenceReport, PsDiagnostics, SolveResult};
use choquard::variational::Mode;
use choquard::verify::{reference_key, Verifier, VerifyReport};
use choquard::{KernelKind, KernelMethod, KernelTable};
use serde::Serialize;
use sha2::{Digest, Sha256};

use crate::args::{Cli, Command};
use crate::config::RunConfig;
use crate::error::{CliError, CliResult};

/// Provenance of the kernel table a report was computed with.
#[derive(Clone, Debug, Serialize)]
pub struct KernelInfo {
    pub file: String,
    pub sha256: String,
    pub kind: KernelKind,
    pub method: KernelMethod,
    pub extent: u32,
    pub orbits: usize,
}

#[derive(Serialize)]
struct Report<'a, T: Serialize> {
    command: &'a str,
    config: &'a RunConfig,
    kernel: &'a KernelInfo,
    #[serde(flatten)]
    body: T,
}

#[derive(Serialize)]
struct KernelSummary {
    diagonal: Option<f64>,
    /// `min, max` of `R_α(v)|v|₁^{N−α}` over `5 ≤ |v|₁ ≤ 30`.
    bracket: Option<[f64; 2]>,
    bracket_ratio: Option<f64>,
    cross_method: Option<CrossMethod>,
}

#[derive(Serialize)]
struct CrossMethod {
    other: KernelMethod,
    max_relative_difference: f64,
}

#[derive(Serialize)]
struct SolveBody<'a> {
    result: &'a SolveResult,
    diagnostics: PsDiagnostics,
    solution: String,
}

#[derive(Serialize)]
struct SweepBody<'a> {
    sweep: &'a ConvergenceReport,
    csv: String,
    plots: Vec<String>,
}

#[derive(Serialize)]
struct VerifyBody<'a> {
    reference: KernelInfo,
    verify: &'a VerifyReport,
}

/// Runs one subcommand. Reports are written before a convergence or
/// verification failure is returned.
pub fn run(cli: &Cli) -> CliResult<()> {
    let cfg = cli.command.overrides().resolve()?;
    if let Some(path) = &cli.command.overrides().emit_config {
        write_file(path, cfg.to_toml()?.as_bytes())?;
    }
    match &cli.command {
        Command::Kernel(_) => cmd_kernel(&cfg),
        Command::Solve(_) => cmd_solve(&cfg),
        Command::Sweep(_) => cmd_sweep(&cfg),
        Command::Verify(_) => cmd_verify(&cfg),
    }
}

pub fn problem_key(cfg: &RunConfig) -> CacheKey {
    let p = &cfg.problem;
    CacheKey {
        kind: p.kernel,
        method: p.method,
        alpha: p.alpha,
        dim: p.dim,
        radius: p.radius as i32,
        extent: 2 * p.radius as u32,
        quad: p.quadrature,
    }
}

/// Loads or builds the table for `key`, reporting the cache status on stderr.
pub fn cached_table(cfg: &RunConfig, key: &CacheKey) -> CliResult<(Arc<KernelTable>, KernelInfo)> {
    let (table, status, path) = load_or_build(&cfg.output.cache_dir, key)?;
    let verb = match status {
        CacheStatus::Hit => "cache hit",
        CacheStatus::Built => "built and cached",
        CacheStatus::Rebuilt => "rebuilt and cached",
    };
    eprintln!("kernel table {verb}: {}", path.display());
    let bytes = fs::read(&path).map_err(choquard::Error::Io)?;
    let info = KernelInfo {
        file: path
            .file_name()
            .map(|n| n.to_string_lossy().into_owned())
            .unwrap_or_default(),
        sha256: Sha256::digest(&bytes).iter().map(|b| format!("{b:02x}")).collect(),
        kind: table.kind(),
        method: table.method(),
        extent: table.extent(),
        orbits: table.orbits().len(),
    };
    Ok((Arc::new(table), info))
}

fn write_file(path: &Path, bytes: &[u8]) -> CliResult<()> {
    let wrap = |source| CliError::Write {
        path: path.to_path_buf(),
        source,
    };
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        fs::create_dir_all(dir).map_err(wrap)?;
    }
    fs::write(path, bytes).map_err(wrap)
}

fn write_report<T: Serialize>(cfg: &RunConfig, command: &str, kernel: &KernelInfo, body: T) -> CliResult<PathBuf> {
    let report = Report {
        command,
        config: cfg,
        kernel,
        body,
    };
    let mut text = serde_json::to_string_pretty(&report).map_err(|e| CliError::Config(e.to_string()))?;
    text.push('\n');
    let path = cfg.output.report_path(command);
    write_file(&path, text.as_bytes())?;
    println!("report: {}", path.display());
    Ok(path)
}

pub fn cmd_kernel(cfg: &RunConfig) -> CliResult<()> {
    let key = problem_key(cfg);
    let (table, info) = cached_table(cfg, &key)?;
    let bracket = table.asymptotic_bracket(5, 30);
    match bracket {
        Some((c1, c2)) => println!(
            "asymptotic bracket over 5 <= |v|_1 <= 30: c1 = {c1:.6e}, c2 = {c2:.6e}, c2/c1 = {:.4}",
            c2 / c1
        ),
        None => println!("asymptotic bracket: table extent {} is below 30", table.extent()),
    }
    let cross_method = if table.kind() == KernelKind::Green {
        let other = match table.method() {
            KernelMethod::BesselProduct => KernelMethod::TorusSpectral,
            KernelMethod::TorusSpectral => KernelMethod::BesselProduct,
        };
        let alt = KernelTable::build_with_extent(
            table.kind(),
            table.alpha(),
            table.dim(),
            table.radius(),
            table.extent(),
            table.quadrature(),
            other,
        )?;
        let diff = table.max_relative_difference(&alt)?;
        println!("cross-method agreement ({} vs {other}): max relative difference {diff:.3e}", table.method());
        Some(CrossMethod {
            other,
            max_relative_difference: diff,
        })
    } else {
        None
    };
    let summary = KernelSummary {
        diagonal: table.diagonal(),
        bracket: bracket.map(|(a, b)| [a, b]),
        bracket_ratio: bracket.map(|(a, b)| b / a),
        cross_method,
    };
    write_report(cfg, "kernel", &info, summary)?;
    Ok(())
}

pub fn cmd_solve(cfg: &RunConfig) -> CliResult<()> {
    let (table, info) = cached_table(cfg, &problem_key(cfg))?;
    let prob = cfg.problem(cfg.mode(), table)?;
    let result = ground_state_detailed(&prob, &cfg.solver)?;
    let diagnostics = ps_monitor(&result.history, &prob, None)?;
    let solution = cfg.output.dir.join("solution.txt");
    write_file(&solution, result.u.to_text().as_bytes())?;
    println!(
        "{}: m = {:.12e}, status {:?}, {} iterations, relative dual residual {:.3e}, Nehari defect {:.3e}",
        result.mode,
        result.level,
        result.status,
        result.iterations,
        result.relative_residual,
        result.nehari_defect
    );
    write_report(
        cfg,
        "solve",
        &info,
        SolveBody {
            result: &result,
            diagnostics,
            solution: solution.display().to_string(),
        },
    )?;
    if !result.converged() {
        return Err(CliError::Convergence(format!(
            "{:?} after {} iterations (relative residual {:.3e})",
            result.status, result.iterations, result.relative_residual
        )));
    }
    Ok(())
}

pub fn cmd_sweep(cfg: &RunConfig) -> CliResult<()> {
    let (table, info) = cached_table(cfg, &problem_key(cfg))?;
    let template = cfg.problem(Mode::Dirichlet, table)?;
    let report = lambda_sweep(&template, &cfg.problem.lambda_grid, &cfg.solver)?;

    let csv = cfg.output.csv_path();
    let mut text = Vec::new();
    report.write_csv(&mut text)?;
    write_file(&csv, &text)?;
    let mut plots = Vec::new();
    for (name, column) in [
        ("m_lambda", report.plot_columns(|r| r.m_lambda)),
        ("w22_dist", report.plot_columns(|r| r.w22_dist)),
    ] {
        let path = cfg.output.dir.join(format!("sweep_{name}.dat"));
        let mut body = format!("# log10(lambda) {name}\n");
        for (x, y) in column {
            body.push_str(&format!("{x:?} {y:?}\n"));
        }
        write_file(&path, body.as_bytes())?;
        plots.push(path.display().to_string());
    }

    println!("m_omega = {:.12e}", report.m_omega);
    for r in &report.rows {
        match (r.m_lambda, r.relative_w22_dist) {
            (Some(m), Some(d)) => println!("lambda = {:>10}: m = {m:.12e}, relative W22 distance {d:.3e}", r.lambda),
            _ => println!(
                "lambda = {:>10}: failed ({})",
                r.lambda,
                r.failure.as_deref().unwrap_or("unknown")
            ),
        }
    }
    let v = &report.verdicts;
    println!(
        "m nondecreasing: {}; m <= m_omega: {}; distance decreasing: {}; outside potential decreasing: {}",
        v.m_nondecreasing, v.below_m_omega, v.distance_decreasing, v.outside_potential_decreasing
    );
    write_report(
        cfg,
        "sweep",
        &info,
        SweepBody {
            sweep: &report,
            csv: csv.display().to_string(),
            plots,
        },
    )?;
    if !v.all_converged {
        let failed: Vec<String> = report
            .rows
            .iter()
            .filter(|r| !r.converged)
            .map(|r| format!("lambda = {}", r.lambda))
            .collect();
        return Err(CliError::Convergence(format!("rows failed: {}", failed.join(", "))));
    }
    Ok(())
}

pub fn cmd_verify(cfg: &RunConfig) -> CliResult<()> {
    let (table, info) = cached_table(cfg, &problem_key(cfg))?;
    let prob = cfg.problem(cfg.mode(), table)?;
    let settings = cfg.verify.settings(cfg.solver.seed);
    // The reference Green table for the identity check is cached like any other.
    let (reference, reference_info) = cached_table(cfg, &reference_key(&prob, &settings))?;
    let report = Verifier::new(&prob, settings, Some(reference))?.run(&cfg.verify.suites)?;
    for suite in &report.suites {
        println!("{} {}", if suite.passed { "PASS" } else { "FAIL" }, suite.suite);
        for c in &suite.checks {
            println!("    {:<40} {:>12.4e}  {}", c.name, c.value, c.condition);
        }
    }
    for (name, value) in &report.constants {
        println!("{name} = {value:.6e}");
    }
    write_report(
        cfg,
        "verify",
        &info,
        VerifyBody {
            reference: reference_info,
            verify: &report,
        },
    )?;
    if !report.passed {
        return Err(CliError::Verification(report.failures()));
    }
    Ok(())
}
