//! Command-line front end: load a case, compile models (cached), run a routine, write outputs.

use std::fmt::Write as _;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::time::{Duration, Instant};

use clap::{Args, Parser, Subcommand, ValueEnum};
use num_complex::Complex64;
use serde::Serialize;

use crate::expr::Expr;
use crate::io::{self, BuildOptions, CaseFile, IoError};
use crate::linalg::damping_ratio;
use crate::models;
use crate::numeric::{JacobianStore, Scope, System};
use crate::routines::{
    compute_state_matrix, eigen_report, initialize_dynamics, run_tds, solve_power_flow, Event, InitConfig,
    PowerFlowConfig, RoutineError, TdsConfig, TdsResult, Timing,
};
use crate::symbolic::{compile_model, CacheOutcome, ModelCache};

pub const EXIT_PARSE: i32 = 2;
pub const EXIT_CONVERGENCE: i32 = 3;
pub const EXIT_INTERNAL: i32 = 4;

#[derive(Debug, Parser)]
#[command(name = "symdae", version, about = "Power-system DAE simulation from symbolic models")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Newton power flow.
    Pf(PfArgs),
    /// Time-domain simulation from the power-flow operating point.
    Tds(TdsArgs),
    /// State-matrix eigenvalues ranked by damping ratio.
    Eig(EigArgs),
    /// Write model reference documents.
    Doc(DocArgs),
    /// Quick internal consistency checks.
    Selftest(CacheArgs),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Json,
    Csv,
}

#[derive(Debug, Clone, Args)]
pub struct CacheArgs {
    /// Compile models without reading or writing the cache.
    #[arg(long, conflicts_with = "cache_dir")]
    pub no_cache: bool,
    /// Directory of compiled models.
    #[arg(long)]
    pub cache_dir: Option<PathBuf>,
}

#[derive(Debug, Clone, Args)]
pub struct CaseArgs {
    /// Case file: native JSON, or MATPOWER when the extension is `.m`.
    pub case: PathBuf,
    #[command(flatten)]
    pub cache: CacheArgs,
    /// Newton tolerance on the max residual.
    #[arg(long, default_value_t = 1e-8)]
    pub tol: f64,
    /// Newton iteration cap (power flow 20, per TDS step 15)
    #[arg(long)]
    pub max_iter: Option<usize>,
    /// Write results to this file
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Output format; pf defaults to json, tds and eig to csv
    #[arg(long, value_enum)]
    pub format: Option<Format>,
    /// Print the solve / update / Jacobian timing split.
    #[arg(long)]
    pub profile: bool,
}

#[derive(Debug, Clone, Args)]
pub struct PfArgs {
    #[command(flatten)]
    pub common: CaseArgs,
    /// Start from v = 1, theta = 0 instead of the case values.
    #[arg(long)]
    pub flat_start: bool,
}

#[derive(Debug, Clone, Args)]
pub struct TdsArgs {
    #[command(flatten)]
    pub common: CaseArgs,
    /// Step size in seconds.
    #[arg(long, default_value_t = 1.0 / 30.0)]
    pub h: f64,
    /// End time in seconds.
    #[arg(long, default_value_t = 20.0)]
    pub tmax: f64,
    /// `toggle:<model>:<idx>:<time>`; repeatable.
    #[arg(long = "event", value_parser = parse_event)]
    pub events: Vec<Event>,
    /// Keep loads as constant power.
    #[arg(long)]
    pub no_pq_to_shunt: bool,
}

#[derive(Debug, Clone, Args)]
pub struct EigArgs {
    #[command(flatten)]
    pub common: CaseArgs,
}

#[derive(Debug, Clone, Args)]
pub struct DocArgs {
    /// Output directory
    #[arg(long, default_value = "docs")]
    pub out: PathBuf,
    #[command(flatten)]
    pub cache: CacheArgs,
}

fn parse_event(s: &str) -> Result<Event, String> {
    s.parse()
}

/// Failure with its exit category.
#[derive(Debug)]
pub struct CliError {
    pub code: i32,
    pub message: String,
}

impl CliError {
    fn parse(m: impl ToString) -> Self {
        CliError { code: EXIT_PARSE, message: m.to_string() }
    }

    fn internal(m: impl ToString) -> Self {
        CliError { code: EXIT_INTERNAL, message: m.to_string() }
    }
}

impl From<IoError> for CliError {
    fn from(e: IoError) -> Self {
        match e {
            IoError::Numeric(_) | IoError::Parse { .. } | IoError::Schema { .. } | IoError::Matpower { .. } | IoError::File { .. } => {
                CliError::parse(e)
            }
            IoError::Model(_) => CliError::internal(e),
        }
    }
}

impl From<RoutineError> for CliError {
    fn from(e: RoutineError) -> Self {
        let code = match &e {
            RoutineError::NoConvergence { .. }
            | RoutineError::Islanded { .. }
            | RoutineError::Singular { .. }
            | RoutineError::Init { .. }
            | RoutineError::Inconsistent { .. }
            | RoutineError::Step { .. } => EXIT_CONVERGENCE,
            RoutineError::Config(_) => EXIT_PARSE,
            RoutineError::Numeric(_) | RoutineError::Linalg(_) => EXIT_INTERNAL,
        };
        CliError { code, message: e.to_string() }
    }
}

type CliResult<T> = Result<T, CliError>;

/// Default cache location: `symdae-data/cache` beside the executable.
pub fn default_cache_dir() -> Option<PathBuf> {
    let exe = std::env::current_exe().ok()?;
    Some(exe.parent()?.join("symdae-data").join("cache"))
}

fn cache_of(a: &CacheArgs) -> ModelCache {
    if a.no_cache {
        return ModelCache::disabled();
    }
    match a.cache_dir.clone().or_else(default_cache_dir) {
        Some(d) => ModelCache::new(d),
        None => ModelCache::disabled(),
    }
}

fn load(path: &Path) -> CliResult<CaseFile> {
    let case = if path.extension().is_some_and(|e| e == "m") { io::load_matpower(path)? } else { io::load_case(path)? };
    Ok(case)
}

fn build(a: &CaseArgs) -> CliResult<(System, Vec<CacheOutcome>)> {
    let case = load(&a.case)?;
    Ok(io::build_system(&case, &cache_of(&a.cache), BuildOptions::default())?)
}

fn check_positive(name: &str, v: f64) -> CliResult<()> {
    if v > 0.0 && v.is_finite() {
        Ok(())
    } else {
        Err(CliError::parse(format!("--{name} must be a positive number")))
    }
}

fn pf_config(a: &CaseArgs, flat_start: bool) -> CliResult<PowerFlowConfig> {
    check_positive("tol", a.tol)?;
    Ok(PowerFlowConfig { tol: a.tol, max_iter: a.max_iter.unwrap_or(20), flat_start, ..Default::default() })
}

fn secs(d: Duration) -> f64 {
    d.as_secs_f64()
}

/// Timing table: one row per phase with its share of the total.
pub fn profile_table(t: &Timing, build: Duration) -> String {
    let total = secs(t.solve + t.update + t.jacobian);
    let share = |d: Duration| if total > 0.0 { 100.0 * secs(d) / total } else { 0.0 };
    let mut s = String::new();
    let _ = writeln!(s, "{:<20} {:>12} {:>8}", "phase", "seconds", "share");
    for (name, d) in [("Solve Equations", t.solve), ("Update Residuals", t.update), ("Build Jacobians", t.jacobian)] {
        let _ = writeln!(s, "{:<20} {:>12.6} {:>7.1}%", name, secs(d), share(d));
    }
    let _ = writeln!(s, "{:<20} {:>12.6}", "Jacobian pattern", secs(build));
    s
}

fn write_out(path: &Path, text: &str) -> CliResult<()> {
    if let Some(p) = path.parent().filter(|p| !p.as_os_str().is_empty()) {
        std::fs::create_dir_all(p).map_err(|e| CliError::parse(format!("{}: {e}", p.display())))?;
    }
    std::fs::write(path, text).map_err(|e| CliError::parse(format!("{}: {e}", path.display())))
}

fn pattern_time(sys: &System, scope: Scope) -> CliResult<Duration> {
    let t0 = Instant::now();
    JacobianStore::build(sys, scope).map_err(|e| CliError::internal(e))?;
    Ok(t0.elapsed())
}

fn cmd_pf(a: &PfArgs, out: &mut dyn Write) -> CliResult<()> {
    let cfg = pf_config(&a.common, a.flat_start)?;
    let (mut sys, _) = build(&a.common)?;
    let r = solve_power_flow(&mut sys, &cfg)?;
    let mut s = format!("power flow converged in {} iterations, max mismatch {:.3e}\n", r.iterations, r.residual);
    if a.common.profile {
        s += &profile_table(&r.timing, pattern_time(&sys, Scope::PowerFlow)?);
    }
    if let Some(path) = &a.common.out {
        let text = match a.common.format.unwrap_or(Format::Json) {
            Format::Json => io::pf_json(&sys, &r),
            Format::Csv => {
                let n = sys.n_pf_algeb();
                let mut t = String::from("name,value\n");
                for (k, v) in sys.dae.y_names[..n].iter().zip(&sys.dae.y[..n]) {
                    let _ = writeln!(t, "{k},{v:.12}");
                }
                t
            }
        };
        write_out(path, &text)?;
        let _ = writeln!(s, "wrote {}", path.display());
    }
    out.write_all(s.as_bytes()).map_err(CliError::internal)
}

#[derive(Serialize)]
struct Trajectory<'a> {
    t: &'a [f64],
    x_names: &'a [String],
    y_names: &'a [String],
    x: &'a [Vec<f64>],
    y: &'a [Vec<f64>],
}

fn tds_json(r: &TdsResult) -> String {
    let t = Trajectory { t: &r.t, x_names: &r.x_names, y_names: &r.y_names, x: &r.x, y: &r.y };
    serde_json::to_string(&t).expect("trajectory serializes") + "\n"
}

fn cmd_tds(a: &TdsArgs, out: &mut dyn Write) -> CliResult<()> {
    let pf = pf_config(&a.common, false)?;
    check_positive("h", a.h)?;
    if !(a.tmax >= 0.0 && a.tmax.is_finite()) {
        return Err(CliError::parse("--tmax must be a non-negative number"));
    }
    let (mut sys, _) = build(&a.common)?;
    let r = solve_power_flow(&mut sys, &pf)?;
    let init = InitConfig { pq_to_shunt: !a.no_pq_to_shunt, ..Default::default() };
    initialize_dynamics(&mut sys, &init)?;
    let cfg = TdsConfig {
        h: a.h,
        t_end: a.tmax,
        tol: a.common.tol,
        max_iter: a.common.max_iter.unwrap_or(15),
        events: a.events.clone(),
    };
    let res = run_tds(&mut sys, &cfg)?;
    let mut s = format!(
        "power flow: {} iterations; simulated {} steps to t = {:.4} s, {} Newton iterations\n",
        r.iterations,
        res.t.len() - 1,
        res.t.last().copied().unwrap_or(0.0),
        res.newton_iterations
    );
    if a.common.profile {
        s += &profile_table(&res.timing, pattern_time(&sys, Scope::Full)?);
    }
    if let Some(path) = &a.common.out {
        match a.common.format.unwrap_or(Format::Csv) {
            Format::Csv => io::write_tds_csv(&res, path)?,
            Format::Json => write_out(path, &tds_json(&res))?,
        }
        let _ = writeln!(s, "wrote {}", path.display());
    }
    out.write_all(s.as_bytes()).map_err(CliError::internal)
}

fn cmd_eig(a: &EigArgs, out: &mut dyn Write) -> CliResult<()> {
    let pf = pf_config(&a.common, false)?;
    let (mut sys, _) = build(&a.common)?;
    solve_power_flow(&mut sys, &pf)?;
    let mut jac = initialize_dynamics(&mut sys, &InitConfig::default())?;
    let am = compute_state_matrix(&mut sys, &mut jac)?;
    let rep = eigen_report(&am)?;
    let mut s = format!("{} eigenvalues, oscillatory modes by damping ratio:\n", rep.modes.len());
    let _ = writeln!(s, "{:>12} {:>12} {:>10} {:>10}", "real", "imag", "freq (Hz)", "zeta (%)");
    for m in rep.oscillatory() {
        let _ = writeln!(s, "{:>12.5} {:>12.5} {:>10.4} {:>10.3}", m.re, m.im, m.freq_hz(), 100.0 * m.zeta);
    }
    if let Some(path) = &a.common.out {
        match a.common.format.unwrap_or(Format::Csv) {
            Format::Csv => io::write_eigen_csv(&rep, path)?,
            Format::Json => write_out(path, &(serde_json::to_string_pretty(&rep).expect("report serializes") + "\n"))?,
        }
        let _ = writeln!(s, "wrote {}", path.display());
    }
    out.write_all(s.as_bytes()).map_err(CliError::internal)
}

fn cmd_doc(a: &DocArgs, out: &mut dyn Write) -> CliResult<()> {
    let (sys, _) = models::builtin_system(&cache_of(&a.cache), Default::default()).map_err(CliError::internal)?;
    let compiled: Vec<_> = sys.models.iter().map(|m| m.model.as_ref()).collect();
    io::export_model_docs(&compiled, &a.out)?;
    writeln!(out, "wrote {} model documents to {}", compiled.len(), a.out.display()).map_err(CliError::internal)
}

/// Small checks with known answers; returns (name, passed) pairs.
pub fn selftest_checks(cache: &ModelCache) -> Vec<(&'static str, bool)> {
    let mut checks = Vec::new();
    let shunt = compile_model(&models::shunt()).ok().map(|c| {
        c.jac.gy.iter().map(|t| (t.row, t.col, t.value.clone())).collect::<Vec<_>>()
    });
    let want = ["2*v*g", "-2*v*b"].map(|s| Expr::parse(s).expect("valid").simplify());
    checks.push((
        "shunt Jacobian triplets",
        shunt.is_some_and(|t| t == vec![(0, 1, want[0].clone()), (1, 1, want[1].clone())]),
    ));
    checks.push(("builtin models compile", models::builtin_system(cache, Default::default()).is_ok()));
    let two_bus = || -> Option<f64> {
        let case = CaseFile::parse(
            r#"{"Bus": [{"idx": 1}, {"idx": 2}], "Slack": [{"bus": 1}], "PV": [{"bus": 2, "p0": 0}],
                "PQ": [{"bus": 2, "p0": 0.8}], "Line": [{"bus1": 1, "bus2": 2, "r": 0, "x": 0.3}]}"#,
        )
        .ok()?;
        let (mut sys, _) = io::build_system(&case, cache, BuildOptions::default()).ok()?;
        solve_power_flow(&mut sys, &PowerFlowConfig::default()).ok()?;
        Some(sys.var_values("Bus", "a")?[1])
    };
    checks.push(("two-bus power flow", two_bus().is_some_and(|a| (a + (0.8f64 * 0.3).asin()).abs() < 1e-9)));
    let z = damping_ratio(Complex64::new(-0.192, 4.225));
    checks.push(("damping ratio", (100.0 * z - 4.54).abs() < 0.05));
    checks
}

fn cmd_selftest(a: &CacheArgs, out: &mut dyn Write) -> CliResult<()> {
    let checks = selftest_checks(&cache_of(a));
    let mut s = String::new();
    for (name, ok) in &checks {
        let _ = writeln!(s, "{} {name}", if *ok { "pass" } else { "FAIL" });
    }
    out.write_all(s.as_bytes()).map_err(CliError::internal)?;
    match checks.iter().filter(|c| !c.1).count() {
        0 => Ok(()),
        n => Err(CliError::internal(format!("{n} self-test check(s) failed"))),
    }
}

/// Run one command; returns the process exit code. Errors go to `err`.
pub fn dispatch<I, T>(argv: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_PARSE } else { 0 };
            let text = e.render().to_string();
            let _ = if code == 0 { out.write_all(text.as_bytes()) } else { err.write_all(text.as_bytes()) };
            return code;
        }
    };
    let r = match &cli.command {
        Command::Pf(a) => cmd_pf(a, out),
        Command::Tds(a) => cmd_tds(a, out),
        Command::Eig(a) => cmd_eig(a, out),
        Command::Doc(a) => cmd_doc(a, out),
        Command::Selftest(a) => cmd_selftest(a, out),
    };
    match r {
        Ok(()) => 0,
        Err(e) => {
            let _ = writeln!(err, "error: {}", e.message);
            e.code
        }
    }
}
