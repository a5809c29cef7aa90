//! `granlab` command line: parses flags and an optional flat TOML config,
//! runs the library routines and writes CSV tables, JSON reports and SVG plots.
//!
//! Exit codes: 0 success, 1 a check failed, 2 usage or invalid parameters,
//! 3 numerical or I/O failure.

use std::collections::BTreeSet;
use std::ffi::OsString;
use std::fs;
use std::path::{Path, PathBuf};
use std::sync::Mutex;

use clap::{Args, Parser, Subcommand};
use nalgebra::{DMatrix, DVector};
use serde::Serialize;

use crate::error::{Error, Result};
use crate::export::{heatmap, line_plot, Failure, Report, Series, Table};
use crate::meerson::{global_blowup, snapshot, DensityProfile, MeersonParams, MonotoneCubic};
use crate::model::{haff_comparison, HaffParams, ModelParams};
use crate::ode::{IntegrateOptions, Termination};
use crate::riemann::{classify, concentration_onset, solve, Regime, RiemannData};
use crate::scenarios::{Scenario, TabulatedFields, STANDARD_STEPS};
use crate::residual::{residual_euler, study, ConvergenceStudy};
use crate::uniform::{
    anisotropy_diagnostic, blowup_balance_isotropic, blowup_resonances, density_exponent_fit, integrate, reconstruct_fields,
    resonances, DeformationState, UDState, UniformFlow,
};

pub const OUT_DIR_ENV: &str = "GRANLAB_OUT_DIR";
const DEFAULT_OUT_DIR: &str = "granlab-out";

#[derive(Debug, Parser)]
#[command(name = "granlab", version, about = "Exact solutions of ideal granular hydrodynamics and their numerical certification")]
pub struct Cli {
    #[command(flatten)]
    pub common: CommonArgs,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Args)]
pub struct CommonArgs {
    /// Output directory (default: $GRANLAB_OUT_DIR, else ./granlab-out)
    #[arg(long, global = true)]
    pub out_dir: Option<PathBuf>,
    /// Flat TOML file of flag values; flags given on the command line win
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
    /// Worker threads for grid and scan work
    #[arg(long, global = true)]
    pub jobs: Option<usize>,
    #[arg(long, global = true)]
    pub no_csv: bool,
    #[arg(long, global = true)]
    pub no_json: bool,
    /// Also write SVG plots
    #[arg(long, global = true)]
    pub svg: bool,
    #[arg(long, short, global = true)]
    pub quiet: bool,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Homogeneous cooling: closed form against ODE integration
    Haff(HaffArgs),
    /// Uniform-deformation flow: trajectory, density grids, blow-up report
    Uniform(UniformArgs),
    /// Riemann problem for the pressureless-limit system
    Riemann(RiemannArgs),
    /// Lagrangian collapse family with cosine pressure
    Meerson(MeersonArgs),
    /// Finite-difference residual study of a built-in scenario or field table
    Verify(VerifyArgs),
    /// Resonances of the isotropic blow-up balance
    Resonance(ResonanceArgs),
}

#[derive(Debug, Args)]
pub struct HaffArgs {
    #[arg(long, allow_hyphen_values = true)]
    pub lambda: Option<f64>,
    #[arg(long, allow_hyphen_values = true)]
    pub rho0: Option<f64>,
    #[arg(long, allow_hyphen_values = true)]
    pub t0: Option<f64>,
    #[arg(long, allow_hyphen_values = true)]
    pub t_final: Option<f64>,
    #[arg(long)]
    pub samples: Option<usize>,
}

#[derive(Debug, Args)]
pub struct UniformArgs {
    #[arg(long)]
    pub n: Option<usize>,
    #[arg(long, allow_hyphen_values = true)]
    pub gamma: Option<f64>,
    #[arg(long, allow_hyphen_values = true)]
    pub lambda: Option<f64>,
    /// Velocity gradient, row-major n*n values
    #[arg(long, allow_hyphen_values = true)]
    pub alpha: Option<String>,
    #[arg(long, allow_hyphen_values = true)]
    pub beta: Option<String>,
    /// Quadratic temperature coefficient matrix, row-major
    #[arg(long, allow_hyphen_values = true)]
    pub quad: Option<String>,
    #[arg(long, allow_hyphen_values = true)]
    pub lin: Option<String>,
    #[arg(long, allow_hyphen_values = true)]
    pub offset: Option<f64>,
    #[arg(long, allow_hyphen_values = true)]
    pub phi: Option<f64>,
    #[arg(long, allow_hyphen_values = true)]
    pub t_final: Option<f64>,
    /// Snapshot times for density grids (default: start, middle, 90% of the run)
    #[arg(long, allow_hyphen_values = true)]
    pub snapshots: Option<String>,
    /// Half-width of the spatial grid
    #[arg(long)]
    pub extent: Option<f64>,
    /// Grid points per axis
    #[arg(long)]
    pub points: Option<usize>,
    /// Trailing fraction of samples used for the exponent fit
    #[arg(long)]
    pub window: Option<f64>,
    #[arg(long)]
    pub rtol: Option<f64>,
    #[arg(long)]
    pub atol: Option<f64>,
}

#[derive(Debug, Args)]
pub struct RiemannArgs {
    /// Initial data vL,TL,vR,TR
    #[arg(long, allow_hyphen_values = true)]
    pub data: Option<String>,
    #[arg(long, allow_hyphen_values = true)]
    pub lambda: Option<f64>,
    #[arg(long, allow_hyphen_values = true)]
    pub c: Option<f64>,
    #[arg(long, allow_hyphen_values = true)]
    pub t_final: Option<f64>,
    #[arg(long)]
    pub samples: Option<usize>,
    #[arg(long, allow_hyphen_values = true)]
    pub snapshots: Option<String>,
    #[arg(long)]
    pub extent: Option<f64>,
    #[arg(long)]
    pub points: Option<usize>,
}

#[derive(Debug, Args)]
pub struct MeersonArgs {
    /// Spatial frequency; sets Lambda = mu gamma sqrt(2)
    #[arg(long, allow_hyphen_values = true)]
    pub mu: Option<f64>,
    /// Used instead of --mu to set the energy loss rate directly
    #[arg(long, allow_hyphen_values = true)]
    pub lambda: Option<f64>,
    #[arg(long, allow_hyphen_values = true)]
    pub gamma: Option<f64>,
    #[arg(long, allow_hyphen_values = true)]
    pub amp: Option<f64>,
    #[arg(long, allow_hyphen_values = true)]
    pub times: Option<String>,
    #[arg(long)]
    pub points: Option<usize>,
    /// CSV with columns m,rho0 giving the initial density profile
    #[arg(long)]
    pub profile: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct VerifyArgs {
    /// Built-in scenario name
    #[arg(long)]
    pub scenario: Option<String>,
    /// CSV field table with columns t,x,rho,v,T on a uniform lattice
    #[arg(long)]
    pub fields: Option<PathBuf>,
    #[arg(long, allow_hyphen_values = true)]
    pub gamma: Option<f64>,
    #[arg(long, allow_hyphen_values = true)]
    pub lambda: Option<f64>,
    /// Step sizes (comma-separated)
    #[arg(long)]
    pub steps: Option<String>,
    /// Negative control: scale temperatures (or mu) by this factor
    #[arg(long, allow_hyphen_values = true)]
    pub perturb: Option<f64>,
}

#[derive(Debug, Args)]
pub struct ResonanceArgs {
    #[arg(long)]
    pub n: Option<usize>,
    #[arg(long, allow_hyphen_values = true)]
    pub gamma: Option<f64>,
    #[arg(long, allow_hyphen_values = true)]
    pub lambda: Option<f64>,
    #[arg(long, allow_hyphen_values = true)]
    pub t_star: Option<f64>,
    #[arg(long, allow_hyphen_values = true)]
    pub a0: Option<f64>,
    #[arg(long, allow_hyphen_values = true)]
    pub c0: Option<f64>,
}

/// Flat key-value config; keys are flag names with `-` or `_`.
struct Config {
    table: toml::Table,
    used: Mutex<BTreeSet<String>>,
}

impl Config {
    fn load(path: Option<&Path>) -> Result<Self> {
        let table = match path {
            None => toml::Table::new(),
            Some(p) => {
                let text = fs::read_to_string(p)?;
                let raw: toml::Table =
                    text.parse().map_err(|e| Error::InvalidParameter(format!("config {}: {e}", p.display())))?;
                raw.into_iter().map(|(k, v)| (k.replace('-', "_"), v)).collect()
            }
        };
        if let Some((k, _)) = table.iter().find(|(_, v)| v.is_table()) {
            return Err(Error::InvalidParameter(format!("config must be flat; key {k:?} holds a table")));
        }
        Ok(Self { table, used: Mutex::new(BTreeSet::new()) })
    }

    fn raw(&self, key: &str) -> Option<&toml::Value> {
        let v = self.table.get(key);
        if v.is_some() {
            self.used.lock().unwrap().insert(key.to_string());
        }
        v
    }

    fn f64(&self, flag: Option<f64>, key: &str, default: f64) -> Result<f64> {
        Ok(flag.or(self.opt_f64(key)?).unwrap_or(default))
    }

    fn opt_f64(&self, key: &str) -> Result<Option<f64>> {
        match self.raw(key) {
            None => Ok(None),
            Some(toml::Value::Float(x)) => Ok(Some(*x)),
            Some(toml::Value::Integer(i)) => Ok(Some(*i as f64)),
            Some(v) => Err(Error::InvalidParameter(format!("config key {key:?} must be a number, got {v}"))),
        }
    }

    fn usize(&self, flag: Option<usize>, key: &str, default: usize) -> Result<usize> {
        if let Some(v) = flag {
            return Ok(v);
        }
        match self.raw(key) {
            None => Ok(default),
            Some(toml::Value::Integer(i)) if *i >= 0 => Ok(*i as usize),
            Some(v) => Err(Error::InvalidParameter(format!("config key {key:?} must be a non-negative integer, got {v}"))),
        }
    }

    fn string(&self, flag: Option<String>, key: &str) -> Result<Option<String>> {
        if flag.is_some() {
            return Ok(flag);
        }
        match self.raw(key) {
            None => Ok(None),
            Some(toml::Value::String(s)) => Ok(Some(s.clone())),
            Some(v) => Err(Error::InvalidParameter(format!("config key {key:?} must be a string, got {v}"))),
        }
    }

    /// Number lists come from a comma-separated flag, or from the config as
    /// an array or a comma-separated string.
    fn list(&self, flag: Option<String>, key: &str) -> Result<Option<Vec<f64>>> {
        if let Some(s) = flag {
            return parse_list(&s).map(Some);
        }
        match self.raw(key) {
            None => Ok(None),
            Some(toml::Value::String(s)) => parse_list(s).map(Some),
            Some(toml::Value::Array(a)) => a
                .iter()
                .map(|v| match v {
                    toml::Value::Float(x) => Ok(*x),
                    toml::Value::Integer(i) => Ok(*i as f64),
                    other => Err(Error::InvalidParameter(format!("config key {key:?}: {other} is not a number"))),
                })
                .collect::<Result<Vec<_>>>()
                .map(Some),
            Some(v) => Err(Error::InvalidParameter(format!("config key {key:?} must be a list, got {v}"))),
        }
    }

    fn path(&self, flag: Option<PathBuf>, key: &str) -> Result<Option<PathBuf>> {
        Ok(self.string(flag.map(|p| p.to_string_lossy().into_owned()), key)?.map(PathBuf::from))
    }

    fn check_all_used(&self) -> Result<()> {
        let used = self.used.lock().unwrap();
        let unknown: Vec<&str> = self.table.keys().filter(|k| !used.contains(*k)).map(String::as_str).collect();
        if unknown.is_empty() {
            Ok(())
        } else {
            Err(Error::InvalidParameter(format!("unknown config keys for this subcommand: {}", unknown.join(", "))))
        }
    }
}

pub fn parse_list(s: &str) -> Result<Vec<f64>> {
    s.split(',')
        .map(str::trim)
        .filter(|p| !p.is_empty())
        .map(|p| p.parse::<f64>().map_err(|e| Error::InvalidParameter(format!("bad number {p:?} in list: {e}"))))
        .collect()
}

/// Collects output files under the output directory.
struct Output {
    dir: PathBuf,
    csv: bool,
    json: bool,
    svg: bool,
    quiet: bool,
}

impl Output {
    fn table(&self, name: &str, t: &Table) -> Result<()> {
        if self.csv {
            t.write_csv(&self.dir.join(format!("{name}.csv")))?;
        }
        Ok(())
    }

    fn report(&self, name: &str, r: &Report) -> Result<()> {
        if self.json {
            r.write(&self.dir.join(format!("{name}.json")))?;
        }
        Ok(())
    }

    fn plot(&self, name: &str, svg: impl FnOnce() -> String) -> Result<()> {
        if self.svg {
            fs::write(self.dir.join(format!("{name}.svg")), svg())?;
        }
        Ok(())
    }

    fn say(&self, line: impl AsRef<str>) {
        if !self.quiet {
            println!("{}", line.as_ref());
        }
    }
}

/// Outcome of a subcommand that ran to completion.
enum Outcome {
    Pass,
    CheckFailed,
    NumericFailure,
}

pub fn exit_code(e: &Error) -> i32 {
    match e {
        Error::InvalidParameter(_)
        | Error::Domain(_)
        | Error::DegenerateBalance
        | Error::NegativeDiscriminant { .. }
        | Error::DegenerateFront(_)
        | Error::BlowUpReached { .. } => 2,
        _ => 3,
    }
}

/// Parses `args` (including the program name) and runs the subcommand.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 2 } else { 0 };
            let _ = e.print();
            return code;
        }
    };
    match execute(cli) {
        Ok(Outcome::Pass) => 0,
        Ok(Outcome::CheckFailed) => 1,
        Ok(Outcome::NumericFailure) => 3,
        Err(e) => {
            eprintln!("error: {e}");
            exit_code(&e)
        }
    }
}

fn execute(cli: Cli) -> Result<Outcome> {
    let cfg = Config::load(cli.common.config.as_deref())?;
    let out_dir = match cfg.path(cli.common.out_dir.clone(), "out_dir")? {
        Some(d) => d,
        None => std::env::var_os(OUT_DIR_ENV).map(PathBuf::from).unwrap_or_else(|| PathBuf::from(DEFAULT_OUT_DIR)),
    };
    let jobs = cfg.usize(cli.common.jobs, "jobs", 1)?;
    if jobs == 0 {
        return Err(Error::InvalidParameter("--jobs must be >= 1".into()));
    }
    let out = Output { dir: out_dir, csv: !cli.common.no_csv, json: !cli.common.no_json, svg: cli.common.svg, quiet: cli.common.quiet };
    let pool = rayon::ThreadPoolBuilder::new().num_threads(jobs).build().map_err(|e| Error::Integration(e.to_string()))?;
    pool.install(|| {
        let outcome = match cli.command {
            Command::Haff(a) => cmd_haff(a, &cfg, &out),
            Command::Uniform(a) => cmd_uniform(a, &cfg, &out),
            Command::Riemann(a) => cmd_riemann(a, &cfg, &out),
            Command::Meerson(a) => cmd_meerson(a, &cfg, &out),
            Command::Verify(a) => cmd_verify(a, &cfg, &out),
            Command::Resonance(a) => cmd_resonance(a, &cfg, &out),
        }?;
        Ok(outcome)
    })
}

fn prepare(cfg: &Config, out: &Output) -> Result<()> {
    cfg.check_all_used()?;
    fs::create_dir_all(&out.dir)?;
    Ok(())
}

const HAFF_TOLERANCE: f64 = 1e-8;

#[derive(Serialize)]
struct HaffSummary {
    lambda: f64,
    rho0: f64,
    temperature0: f64,
    t_final: f64,
    rows: usize,
    max_rel_diff: f64,
    tolerance: f64,
}

fn cmd_haff(a: HaffArgs, cfg: &Config, out: &Output) -> Result<Outcome> {
    let lambda = cfg.f64(a.lambda, "lambda", 1.0)?;
    let rho0 = cfg.f64(a.rho0, "rho0", 1.0)?;
    let t0 = cfg.f64(a.t0, "t0", 1.0)?;
    let t_final = cfg.f64(a.t_final, "t_final", 10.0)?;
    let samples = cfg.usize(a.samples, "samples", 101)?;
    // the cooling law does not involve gamma
    let p = ModelParams::new(2.0, lambda, 1)?;
    let h = HaffParams::new(rho0, t0)?;
    prepare(cfg, out)?;
    let rows = haff_comparison(&p, &h, t_final, samples)?;
    let mut table = Table::new(&["t", "T_closed", "T_integrated", "abs_diff"]);
    for r in &rows {
        table.push_values(&[r.t, r.closed, r.integrated, r.abs_diff]);
    }
    let max_rel_diff = rows.iter().map(|r| r.rel_diff()).fold(0.0, f64::max);
    let mut failures = Vec::new();
    if !(max_rel_diff <= HAFF_TOLERANCE) {
        failures.push(Failure::new("haff_tolerance", format!("max relative difference {max_rel_diff:e} exceeds {HAFF_TOLERANCE:e}")));
    }
    let summary = HaffSummary { lambda, rho0, temperature0: t0, t_final, rows: rows.len(), max_rel_diff, tolerance: HAFF_TOLERANCE };
    out.table("haff", &table)?;
    out.report("haff", &Report::new("haff", &summary, failures.clone())?)?;
    out.plot("haff", || {
        line_plot(
            "Homogeneous cooling",
            "t",
            "T",
            &[
                Series { name: "closed form", points: rows.iter().map(|r| (r.t, r.closed)).collect() },
                Series { name: "integrated", points: rows.iter().map(|r| (r.t, r.integrated)).collect() },
            ],
        )
    })?;
    out.say(format!("haff: {} rows, max relative difference {max_rel_diff:.3e}", rows.len()));
    Ok(if failures.is_empty() { Outcome::Pass } else { Outcome::CheckFailed })
}

fn matrix_arg(values: Option<Vec<f64>>, n: usize, default: DMatrix<f64>, name: &str) -> Result<DMatrix<f64>> {
    match values {
        None => Ok(default),
        Some(v) if v.len() == n * n => Ok(DMatrix::from_row_slice(n, n, &v)),
        Some(v) => Err(Error::InvalidParameter(format!("--{name} needs {} values, got {}", n * n, v.len()))),
    }
}

fn vector_arg(values: Option<Vec<f64>>, n: usize, name: &str) -> Result<DVector<f64>> {
    match values {
        None => Ok(DVector::zeros(n)),
        Some(v) if v.len() == n => Ok(DVector::from_vec(v)),
        Some(v) => Err(Error::InvalidParameter(format!("--{name} needs {n} values, got {}", v.len()))),
    }
}

#[derive(Serialize)]
struct UniformSummary {
    n: usize,
    gamma: f64,
    lambda: f64,
    termination: Termination,
    steps: usize,
    t_last: f64,
    t_estimate: Option<f64>,
    fitted_exponent: Option<f64>,
    fit_points: Option<usize>,
    anisotropy: Option<AnisotropySummary>,
    snapshots: Vec<f64>,
    skipped_snapshots: Vec<f64>,
}

#[derive(Serialize)]
struct AnisotropySummary {
    initial_ratio: f64,
    final_ratio: f64,
    max_ratio: f64,
}

fn cmd_uniform(a: UniformArgs, cfg: &Config, out: &Output) -> Result<Outcome> {
    let n = cfg.usize(a.n, "n", 2)?;
    let p = ModelParams::new(cfg.f64(a.gamma, "gamma", 5.0 / 3.0)?, cfg.f64(a.lambda, "lambda", 1.0)?, n)?;
    let alpha = matrix_arg(cfg.list(a.alpha, "alpha")?, n, -DMatrix::identity(n, n), "alpha")?;
    let beta = vector_arg(cfg.list(a.beta, "beta")?, n, "beta")?;
    let quad = matrix_arg(cfg.list(a.quad, "quad")?, n, DMatrix::identity(n, n) * 0.1, "quad")?;
    let lin = vector_arg(cfg.list(a.lin, "lin")?, n, "lin")?;
    let offset = cfg.f64(a.offset, "offset", 1.0)?;
    let phi = cfg.f64(a.phi, "phi", 1.0)?;
    let t_final = cfg.f64(a.t_final, "t_final", 10.0)?;
    let snapshots = cfg.list(a.snapshots, "snapshots")?;
    let extent = cfg.f64(a.extent, "extent", 1.0)?;
    let points = cfg.usize(a.points, "points", 41)?;
    let window = cfg.f64(a.window, "window", 0.5)?;
    let defaults = IntegrateOptions::default();
    let opts = IntegrateOptions { rtol: cfg.f64(a.rtol, "rtol", defaults.rtol)?, atol: cfg.f64(a.atol, "atol", defaults.atol)?, ..defaults };
    if points < 2 || !(extent > 0.0) {
        return Err(Error::InvalidParameter("grid needs --points >= 2 and --extent > 0".into()));
    }
    let s0 = UDState::new(0.0, alpha, beta, quad, lin, offset, phi)?;
    prepare(cfg, out)?;

    let traj = integrate(&p, &s0, t_final, &opts)?;
    let mut table = Table::new(&["t", "phi", "offset", "trace_alpha", "trace_quad", "peak_density"]);
    for s in &traj.samples {
        table.push(vec![Some(s.t), Some(s.phi), Some(s.offset), Some(s.alpha.trace()), Some(s.quad.trace()), s.peak_density()]);
    }
    out.table("trajectory", &table)?;

    let mut failures = Vec::new();
    let fit = match density_exponent_fit(&traj, window) {
        Ok(f) => Some(f),
        Err(Error::NoBlowUp) => None,
        Err(e) => {
            failures.push(Failure::new("exponent_fit", e.to_string()));
            None
        }
    };
    let anisotropy = if n >= 2 {
        match anisotropy_diagnostic(&traj) {
            Ok(series) => {
                let mut t = Table::new(&["t", "eig_min", "eig_max", "ratio"]);
                for pt in &series {
                    t.push_values(&[pt.t, pt.eig_min, pt.eig_max, pt.ratio]);
                }
                out.table("anisotropy", &t)?;
                Some(AnisotropySummary {
                    initial_ratio: series[0].ratio,
                    final_ratio: series.last().unwrap().ratio,
                    max_ratio: series.iter().map(|p| p.ratio).fold(0.0, f64::max),
                })
            }
            Err(e) => {
                failures.push(Failure::new("anisotropy", e.to_string()));
                None
            }
        }
    } else {
        None
    };

    let t_last = traj.last().t;
    let flow = UniformFlow::new(p, traj.clone());
    let requested = snapshots.unwrap_or_else(|| vec![0.0, 0.5 * t_last, 0.9 * t_last]);
    let (mut written, mut skipped) = (Vec::new(), Vec::new());
    let axis: Vec<f64> = (0..points).map(|i| -extent + 2.0 * extent * i as f64 / (points - 1) as f64).collect();
    for &ts in &requested {
        if !(ts >= 0.0 && ts <= t_last) {
            skipped.push(ts);
            continue;
        }
        let state = flow.state_at(ts)?;
        let k = written.len();
        let rho_at = |x: &[f64]| reconstruct_fields(&state, x).ok().map(|g| g.rho);
        if n == 1 {
            let mut t = Table::new(&["x", "rho"]);
            for &x in &axis {
                t.push(vec![Some(x), rho_at(&[x])]);
            }
            out.table(&format!("density_{k}"), &t)?;
        } else {
            // n >= 3: the plane through the origin spanned by the first two axes
            let mut t = Table::new(&["x", "y", "rho"]);
            let mut grid = Vec::with_capacity(points);
            for &y in &axis {
                let mut row = Vec::with_capacity(points);
                for &x in &axis {
                    let mut pt = vec![0.0; n];
                    pt[0] = x;
                    pt[1] = y;
                    let rho = rho_at(&pt);
                    t.push(vec![Some(x), Some(y), rho]);
                    row.push(rho);
                }
                grid.push(row);
            }
            out.table(&format!("density_{k}"), &t)?;
            out.plot(&format!("density_{k}"), || heatmap(&format!("density at t = {ts:.6}"), &axis, &axis, &grid))?;
        }
        written.push(ts);
    }

    let outcome = match traj.termination {
        Termination::StepUnderflow { t } => {
            failures.push(Failure::new("integration", format!("step size underflow at t = {t}")));
            Outcome::NumericFailure
        }
        Termination::PhiNonPositive { t } => {
            failures.push(Failure::new("integration", format!("phi reached zero at t = {t}")));
            Outcome::NumericFailure
        }
        _ if failures.is_empty() => Outcome::Pass,
        _ => Outcome::CheckFailed,
    };
    let summary = UniformSummary {
        n,
        gamma: p.gamma(),
        lambda: p.lambda(),
        termination: traj.termination,
        steps: traj.samples.len(),
        t_last,
        t_estimate: traj.termination.blowup_time(),
        fitted_exponent: fit.map(|f| f.exponent),
        fit_points: fit.map(|f| f.points),
        anisotropy,
        snapshots: written,
        skipped_snapshots: skipped,
    };
    out.report("uniform", &Report::new("uniform", &summary, failures)?)?;
    out.plot("peak_density", || {
        line_plot(
            "Peak density",
            "t",
            "log10 rho_max",
            &[Series {
                name: "peak density",
                points: traj.samples.iter().filter_map(|s| s.peak_density().map(|r| (s.t, r.log10()))).collect(),
            }],
        )
    })?;
    out.say(format!("uniform: {:?} after {} steps", summary.termination, summary.steps));
    if let Some(e) = summary.fitted_exponent {
        out.say(format!("uniform: fitted density exponent {e:.6}"));
    }
    Ok(outcome)
}

#[derive(Serialize)]
struct RiemannSummary {
    data: RiemannData,
    regime: Regime,
    regime_name: &'static str,
    concentration_onset: Option<f64>,
    transitional_window: Option<(f64, f64)>,
    snapshots: Vec<f64>,
}

fn cmd_riemann(a: RiemannArgs, cfg: &Config, out: &Output) -> Result<Outcome> {
    let data = cfg.list(a.data, "data")?.unwrap_or_else(|| vec![0.0, 1.0, 1.0, 1.0]);
    if data.len() != 4 {
        return Err(Error::InvalidParameter(format!("--data needs vL,TL,vR,TR, got {} values", data.len())));
    }
    let d = RiemannData::new(data[0], data[1], data[2], data[3], cfg.f64(a.lambda, "lambda", 2.0)?, cfg.f64(a.c, "c", 1.0)?)?;
    let t_final = cfg.f64(a.t_final, "t_final", 5.0)?;
    let samples = cfg.usize(a.samples, "samples", 101)?;
    let snapshots = cfg.list(a.snapshots, "snapshots")?.unwrap_or_else(|| vec![0.0, 0.5 * t_final, t_final]);
    let extent = cfg.f64(a.extent, "extent", 10.0)?;
    let points = cfg.usize(a.points, "points", 201)?;
    if !(t_final >= 0.0) || samples < 1 || points < 2 || !(extent > 0.0) {
        return Err(Error::InvalidParameter("need --t-final >= 0, --samples >= 1, --points >= 2, --extent > 0".into()));
    }
    prepare(cfg, out)?;
    let sol = solve(&d)?;
    let regime = classify(&d)?;

    let times: Vec<f64> = if samples == 1 { vec![0.0] } else { (0..samples).map(|i| t_final * i as f64 / (samples - 1) as f64).collect() };
    let mut fronts = Table::new(&["t", "x_minus", "x_plus", "x_star"]);
    let mut masses = Table::new(&["t", "x_star", "theta"]);
    for &t in &times {
        let pm = sol.point_masses(t)?;
        let f = sol.fronts(t);
        match (pm.first(), f.as_slice()) {
            (Some(m), _) => {
                fronts.push(vec![Some(t), None, None, Some(m.x)]);
                masses.push_values(&[t, m.x, m.mass]);
            }
            (None, [a, b]) => fronts.push(vec![Some(t), Some(*a), Some(*b), None]),
            (None, [a]) => fronts.push(vec![Some(t), Some(*a), Some(*a), None]),
            _ => fronts.push(vec![Some(t), None, None, None]),
        }
    }
    out.table("fronts", &fronts)?;
    out.table("point_masses", &masses)?;

    let xs: Vec<f64> = (0..points).map(|i| -extent + 2.0 * extent * i as f64 / (points - 1) as f64).collect();
    for (k, &t) in snapshots.iter().enumerate() {
        let mut snap = Table::new(&["x", "v", "T", "rho_regular"]);
        for &x in &xs {
            let pv = sol.evaluate(t, x)?;
            snap.push_values(&[x, pv.v, pv.temperature, pv.rho]);
        }
        out.table(&format!("snapshot_{k}"), &snap)?;
    }
    out.plot("fronts", || {
        let col = |name: &str| -> Vec<(f64, f64)> {
            let c = fronts.column(name).unwrap();
            times.iter().zip(c).filter_map(|(&t, x)| x.map(|x| (x, t))).collect()
        };
        line_plot(
            "Fronts in the (x, t) plane",
            "x",
            "t",
            &[
                Series { name: "left contact", points: col("x_minus") },
                Series { name: "right contact", points: col("x_plus") },
                Series { name: "delta front", points: col("x_star") },
            ],
        )
    })?;
    let summary = RiemannSummary {
        data: d,
        regime,
        regime_name: regime.name(),
        concentration_onset: concentration_onset(&d),
        transitional_window: sol.transitional_window,
        snapshots,
    };
    out.report("regime", &Report::new("riemann", &summary, Vec::new())?)?;
    out.say(format!("riemann: regime {}", regime.name()));
    if let Regime::DelayedConcentration { t_doublestar, t_star } = regime {
        out.say(format!("riemann: t** = {t_doublestar:.12}, contacts meet at {t_star:.12}"));
    }
    Ok(Outcome::Pass)
}

#[derive(Serialize)]
struct MeersonSummary {
    mu: f64,
    lambda: f64,
    gamma: f64,
    amplitude: f64,
    profile: String,
    blowup_mass: f64,
    global_blowup_time: f64,
    times: Vec<f64>,
}

fn cmd_meerson(a: MeersonArgs, cfg: &Config, out: &Output) -> Result<Outcome> {
    let gamma = cfg.f64(a.gamma, "gamma", 2.0)?;
    let amp = cfg.f64(a.amp, "amp", 1.0)?;
    let mu = cfg.opt_f64("mu")?;
    let lambda = cfg.opt_f64("lambda")?;
    let mut mp = match (a.mu.or(mu), a.lambda.or(lambda)) {
        (Some(_), Some(_)) => return Err(Error::InvalidParameter("give either --mu or --lambda, not both".into())),
        (Some(mu), None) => MeersonParams::from_mu(mu, gamma, amp)?,
        (None, Some(l)) => MeersonParams::new(gamma, l, amp)?,
        (None, None) => MeersonParams::from_mu(1.0, gamma, amp)?,
    };
    let mut profile_name = "uniform".to_string();
    if let Some(path) = cfg.path(a.profile, "profile")? {
        let t = Table::read_csv(&path)?;
        let col = |name: &str| -> Result<Vec<f64>> {
            t.column(name)
                .ok_or_else(|| Error::InvalidParameter(format!("profile table lacks column {name:?}")))?
                .into_iter()
                .map(|v| v.ok_or_else(|| Error::InvalidParameter("empty cell in profile table".into())))
                .collect()
        };
        mp = mp.with_profile(DensityProfile::Table(MonotoneCubic::new(col("m")?, col("rho0")?)?))?;
        profile_name = path.display().to_string();
    }
    let g = global_blowup(&mp);
    let times = cfg.list(a.times, "times")?.unwrap_or_else(|| vec![0.0, 0.5 * g.t_star, 0.9 * g.t_star]);
    let points = cfg.usize(a.points, "points", 101)?;
    if points < 1 {
        return Err(Error::InvalidParameter("--points must be >= 1".into()));
    }
    prepare(cfg, out)?;
    let mut series = Vec::new();
    for (k, &t) in times.iter().enumerate() {
        let rows = snapshot(&mp, t, points)?;
        let mut table = Table::new(&["m", "x", "rho", "v", "T"]);
        for r in &rows {
            table.push_values(&[r.m, r.x, r.rho, r.v, r.temperature]);
        }
        out.table(&format!("meerson_{k}"), &table)?;
        series.push((t, rows));
    }
    out.plot("meerson_density", || {
        let labels: Vec<String> = series.iter().map(|(t, _)| format!("t = {t:.4}")).collect();
        let lines: Vec<Series> = series
            .iter()
            .zip(&labels)
            .map(|((_, rows), name)| Series { name, points: rows.iter().map(|r| (r.x, r.rho)).collect() })
            .collect();
        line_plot("Density against position", "x", "rho", &lines)
    })?;
    let summary = MeersonSummary {
        mu: mp.mu(),
        lambda: mp.lambda(),
        gamma: mp.gamma(),
        amplitude: mp.amplitude(),
        profile: profile_name,
        blowup_mass: g.m,
        global_blowup_time: g.t_star,
        times,
    };
    out.report("meerson", &Report::new("meerson", &summary, Vec::new())?)?;
    out.say(format!("meerson: global blow-up at m = {:.6e}, t* = {:.12}", g.m, g.t_star));
    Ok(Outcome::Pass)
}

const ORDER_RANGE: (f64, f64) = (1.7, 2.3);

#[derive(Serialize)]
struct VerifySummary {
    source: String,
    perturbation: Option<f64>,
    accepted_orders: (f64, f64),
    study: ConvergenceStudy,
}

fn cmd_verify(a: VerifyArgs, cfg: &Config, out: &Output) -> Result<Outcome> {
    let scenario = cfg.string(a.scenario, "scenario")?;
    let fields = cfg.path(a.fields, "fields")?;
    let steps = cfg.list(a.steps, "steps")?;
    let perturbation = match (a.perturb, cfg.opt_f64("perturb")?) {
        (Some(f), _) | (None, Some(f)) => Some(f),
        _ => None,
    };
    let (source, study_result) = match (scenario, fields) {
        (Some(_), Some(_)) => return Err(Error::InvalidParameter("give either --scenario or --fields".into())),
        (Some(name), None) => {
            let sc = Scenario::from_name(&name)?;
            let steps = steps.unwrap_or_else(|| STANDARD_STEPS.to_vec());
            prepare(cfg, out)?;
            (name, sc.run(&steps, perturbation)?)
        }
        (None, Some(path)) => {
            let p = ModelParams::new(cfg.f64(a.gamma, "gamma", 2.0)?, cfg.f64(a.lambda, "lambda", 1.0)?, 1)?;
            let f = TabulatedFields::from_table(&Table::read_csv(&path)?)?;
            let dx = f.spacing();
            let steps = steps.unwrap_or_else(|| vec![4.0 * dx, 2.0 * dx, dx]);
            let margin = steps.iter().copied().fold(0.0, f64::max);
            let grid = f.interior_grid(margin)?;
            prepare(cfg, out)?;
            if perturbation.is_some() {
                return Err(Error::InvalidParameter("--perturb applies to built-in scenarios only".into()));
            }
            (path.display().to_string(), study(&steps, |h| residual_euler(&f, &p, &grid, h))?)
        }
        (None, None) => return Err(Error::InvalidParameter("verify needs --scenario or --fields".into())),
    };
    let mut failures = Vec::new();
    for o in &study_result.orders {
        let order = o.order();
        if !o.floor_warning && !(order >= ORDER_RANGE.0 && order <= ORDER_RANGE.1) {
            failures.push(Failure::new(
                format!("order_{}", o.equation),
                format!("convergence order {order:.4} outside [{}, {}]", ORDER_RANGE.0, ORDER_RANGE.1),
            ));
        }
        out.say(format!(
            "verify: {:<18} order {:>8.4}{}",
            o.equation,
            order,
            if o.floor_warning { "  (rounding floor)" } else { "" }
        ));
    }
    let mut table = Table::new(&["h", "equation_index", "max", "l2"]);
    for r in &study_result.reports {
        for (i, e) in r.equations.iter().enumerate() {
            table.push_values(&[r.h, i as f64, e.max, e.l2]);
        }
    }
    out.table("residuals", &table)?;
    let passed = failures.is_empty();
    let summary = VerifySummary { source, perturbation, accepted_orders: ORDER_RANGE, study: study_result };
    out.report("verify", &Report::new("verify", &summary, failures)?)?;
    Ok(if passed { Outcome::Pass } else { Outcome::CheckFailed })
}

#[derive(Serialize)]
struct ResonanceSummary {
    n: usize,
    gamma: f64,
    lambda: f64,
    matrix: Vec<Vec<f64>>,
    eigenvalues: Vec<(f64, f64)>,
    closed_form: [f64; 4],
}

fn cmd_resonance(a: ResonanceArgs, cfg: &Config, out: &Output) -> Result<Outcome> {
    let p = ModelParams::new(cfg.f64(a.gamma, "gamma", 5.0 / 3.0)?, cfg.f64(a.lambda, "lambda", 1.0)?, cfg.usize(a.n, "n", 2)?)?;
    let t_star = cfg.f64(a.t_star, "t_star", 1.0)?;
    let a0 = cfg.f64(a.a0, "a0", 1.0)?;
    let c0 = cfg.f64(a.c0, "c0", 1.0)?;
    prepare(cfg, out)?;
    let b = blowup_balance_isotropic(&p, t_star, a0, c0)?;
    let rep = resonances(&p, &b)?;
    let matrix: Vec<Vec<f64>> = (0..rep.matrix.nrows()).map(|i| rep.matrix.row(i).iter().copied().collect()).collect();
    let eigenvalues: Vec<(f64, f64)> = rep.eigenvalues.iter().map(|z| (z.re, z.im)).collect();
    let mut table = Table::new(&["index", "re", "im"]);
    for (i, &(re, im)) in eigenvalues.iter().enumerate() {
        table.push_values(&[i as f64, re, im]);
    }
    out.table("resonance", &table)?;
    let summary = ResonanceSummary { n: p.dim(), gamma: p.gamma(), lambda: p.lambda(), matrix, eigenvalues, closed_form: blowup_resonances(&p) };
    out.report("resonance", &Report::new("resonance", &summary, Vec::new())?)?;
    let listed: Vec<String> = summary.eigenvalues.iter().map(|(re, im)| if *im == 0.0 { format!("{re:.12}") } else { format!("{re:.12}{im:+.12}i") }).collect();
    out.say(format!("resonance: eigenvalues {}", listed.join(", ")));
    Ok(Outcome::Pass)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn lists_parse() {
        assert_eq!(parse_list("1, -2.5,3e-1").unwrap(), vec![1.0, -2.5, 0.3]);
        assert!(parse_list("1,x").is_err());
    }

    #[test]
    fn config_values_fill_missing_flags() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("c.toml");
        fs::write(&path, "lambda = 3\nt-final = 2.5\nsnapshots = [0, 1]\n").unwrap();
        let cfg = Config::load(Some(&path)).unwrap();
        assert_eq!(cfg.f64(None, "lambda", 1.0).unwrap(), 3.0);
        assert_eq!(cfg.f64(Some(7.0), "lambda", 1.0).unwrap(), 7.0);
        assert_eq!(cfg.f64(None, "t_final", 1.0).unwrap(), 2.5);
        assert_eq!(cfg.list(None, "snapshots").unwrap(), Some(vec![0.0, 1.0]));
        cfg.check_all_used().unwrap();
        fs::write(&path, "lamda = 3\n").unwrap();
        let cfg = Config::load(Some(&path)).unwrap();
        assert!(cfg.check_all_used().is_err());
    }

    #[test]
    fn error_classes_map_to_exit_codes() {
        assert_eq!(exit_code(&Error::InvalidParameter("x".into())), 2);
        assert_eq!(exit_code(&Error::Integration("x".into())), 3);
        assert_eq!(exit_code(&Error::Io("x".into())), 3);
    }
}
