//! Batch front end: `solve`, `verify` and `sweep` over instance configs.
//!
//! Exit status: 0 success, 1 a check failed, 2 usage or parse error, 3 solver failure.

use std::ffi::OsString;
use std::fmt::Write as _;
use std::path::{Path, PathBuf};
use std::time::Instant;

use clap::{Parser, Subcommand, ValueEnum};
use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::config::InstanceConfig;
use crate::error::{Error, Result};
use crate::irls::{certify, fixed_point_residual, FixedPointCertificate, IrlsOutcome, IrlsRow};
use crate::lp_solver::MinimizerCertificate;
use crate::function_space::HoloFunction;
use crate::verifier::{problem, run_ledger, solve_direct, solve_irls, CheckLedger, CheckStatus};

/// Default directory for reports when `--out` is not given.
pub const OUT_DIR_ENV: &str = "MINEXT_OUT_DIR";

pub const EXIT_OK: i32 = 0;
pub const EXIT_CHECK_FAILED: i32 = 1;
pub const EXIT_USAGE: i32 = 2;
pub const EXIT_SOLVER: i32 = 3;

/// Sweep table columns, in order.
pub const SWEEP_COLUMNS: [&str; 7] = ["p", "D", "m_p_direct", "m_p_irls", "fixed_point_residual", "iterations", "dispersion"];

#[derive(Debug, Parser)]
#[command(name = "minext", version, about = "Minimal weighted L^p holomorphic extensions")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Solve one instance and write a report.
    Solve {
        config: PathBuf,
        #[arg(long, value_enum, default_value_t = Method::Both)]
        method: Method,
        #[arg(long)]
        out: Option<PathBuf>,
        #[arg(long, value_enum, default_value_t = Format::Json)]
        format: Format,
    },
    /// Run the residual ledger; the exit status reflects pass/fail.
    Verify {
        config: PathBuf,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Tabulate both solvers over exponents and degrees.
    Sweep {
        config: PathBuf,
        /// Comma-separated exponents in (0, 2).
        #[arg(long = "p", value_delimiter = ',', required = true, num_args = 1..)]
        ps: Vec<f64>,
        /// Comma-separated degrees; defaults to the config's degree.
        #[arg(long, value_delimiter = ',', num_args = 1..)]
        degrees: Vec<u32>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Method {
    Direct,
    Irls,
    Both,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Json,
    Csv,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StartReport {
    pub objective: f64,
    pub residual: f64,
    pub iterations: usize,
    pub stalled: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DirectReport {
    pub coeffs: Vec<Complex64>,
    /// Smoothed objective at the final smoothing.
    pub objective: f64,
    pub m_p: f64,
    pub variational_residual: f64,
    pub fixed_point_residual: Option<f64>,
    pub dispersion: f64,
    pub convexity_flag: bool,
    pub selected_start: usize,
    pub starts: Vec<StartReport>,
    /// `(ε, J_ε)` after each accepted step of the selected start.
    pub trace: Vec<(f64, f64)>,
}

impl DirectReport {
    fn new(f: &HoloFunction, cert: &MinimizerCertificate, fixed_point_residual: Option<f64>) -> Self {
        DirectReport {
            coeffs: f.coeffs.iter().copied().collect(),
            objective: cert.objective,
            m_p: cert.energy,
            variational_residual: cert.variational_residual,
            fixed_point_residual,
            dispersion: cert.dispersion,
            convexity_flag: cert.convexity_flag,
            selected_start: cert.selected_start,
            starts: cert
                .starts
                .iter()
                .map(|s| StartReport { objective: s.objective, residual: s.residual, iterations: s.iterations, stalled: s.stalled })
                .collect(),
            trace: cert.starts[cert.selected_start].trace.rows.clone(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct IrlsReport {
    pub coeffs: Vec<Complex64>,
    pub m_p: f64,
    pub iterations: usize,
    pub iterate_diff: f64,
    pub trace: Vec<IrlsRow>,
}

impl IrlsReport {
    fn new(out: &IrlsOutcome, m_p: f64) -> Self {
        IrlsReport {
            coeffs: out.solution.coeffs.iter().copied().collect(),
            m_p,
            iterations: out.iterations,
            iterate_diff: out.iterate_diff,
            trace: out.trace.clone(),
        }
    }
}

/// A solver error with its trace.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FailureReport {
    pub solver: String,
    pub message: String,
    pub iterations: Option<usize>,
    pub residual: Option<f64>,
    pub trace: Vec<f64>,
}

impl FailureReport {
    fn new(solver: &str, e: &Error) -> Self {
        let (iterations, residual, trace) = match e {
            Error::Convergence { iterations, residual, trace, .. } => (Some(*iterations), Some(*residual), trace.clone()),
            _ => (None, None, Vec::new()),
        };
        FailureReport { solver: solver.into(), message: e.to_string(), iterations, residual, trace }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunReport {
    pub fingerprint: String,
    pub config: InstanceConfig,
    pub method: Method,
    pub direct: Option<DirectReport>,
    pub irls: Option<IrlsReport>,
    pub fixed_point: Option<FixedPointCertificate>,
    pub failures: Vec<FailureReport>,
    pub ledger: Option<CheckLedger>,
    pub wall_time_s: f64,
}

impl RunReport {
    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serializes")
    }

    pub fn from_json(text: &str) -> Result<Self> {
        serde_json::from_str(text).map_err(|e| Error::Config(format!("bad report: {e}")))
    }

    /// Flat `record,index,eps,value` rows: summary values, then both traces.
    pub fn to_csv(&self) -> String {
        let mut s = String::from("record,index,eps,value\n");
        let mut row = |record: &str, index: Option<usize>, eps: Option<f64>, value: f64| {
            let index = index.map(|i| i.to_string()).unwrap_or_default();
            let eps = eps.map(|e| format!("{e:.16e}")).unwrap_or_default();
            writeln!(s, "{record},{index},{eps},{value:.16e}").unwrap();
        };
        if let Some(d) = &self.direct {
            row("m_p_direct", None, None, d.m_p);
            row("objective_direct", None, None, d.objective);
            row("variational_residual", None, None, d.variational_residual);
            if let Some(r) = d.fixed_point_residual {
                row("fixed_point_residual", None, None, r);
            }
            row("dispersion", None, None, d.dispersion);
        }
        if let Some(i) = &self.irls {
            row("m_p_irls", None, None, i.m_p);
            row("irls_iterations", None, None, i.iterations as f64);
            row("irls_iterate_diff", None, None, i.iterate_diff);
        }
        if let Some(fp) = &self.fixed_point {
            row("cross_check_distance", None, None, fp.cross_check_distance);
            row("difference_orthogonality", None, None, fp.difference_orthogonality);
        }
        if let Some(d) = &self.direct {
            for (k, (eps, j)) in d.trace.iter().enumerate() {
                row("direct_trace", Some(k), Some(*eps), *j);
            }
        }
        if let Some(i) = &self.irls {
            for r in &i.trace {
                row("irls_trace", Some(r.iteration), Some(r.eps), r.objective);
            }
        }
        s
    }
}

/// Runs the requested solvers. Solver errors land in `failures`.
pub fn solve_report(cfg: &InstanceConfig, method: Method) -> Result<RunReport> {
    let clock = Instant::now();
    let disc = cfg.instance().discretize()?;
    let prob = problem(cfg, &disc)?;
    let mut failures = Vec::new();
    let direct = match method {
        Method::Direct | Method::Both => solve_direct(cfg, &prob).map_err(|e| failures.push(FailureReport::new("direct", &e))).ok(),
        Method::Irls => None,
    };
    let irls = match method {
        Method::Irls | Method::Both => solve_irls(cfg, &prob).map_err(|e| failures.push(FailureReport::new("irls", &e))).ok(),
        Method::Direct => None,
    };
    let fixed_point = match (&direct, &irls) {
        (Some((f, cert)), Some(out)) => Some(certify(&prob, out, f, cert)?),
        _ => None,
    };
    let direct = match direct {
        Some((f, cert)) => Some(DirectReport::new(&f, &cert, Some(fixed_point_residual(&f, &prob)?))),
        None => None,
    };
    let irls = irls.map(|out| IrlsReport::new(&out, prob.energy(&out.solution)));
    Ok(RunReport {
        fingerprint: cfg.fingerprint(),
        config: cfg.clone(),
        method,
        direct,
        irls,
        fixed_point,
        failures,
        ledger: None,
        wall_time_s: clock.elapsed().as_secs_f64(),
    })
}

/// Runs the ledger and packages its solver outputs with it.
pub fn verify_report(cfg: &InstanceConfig) -> Result<RunReport> {
    let clock = Instant::now();
    let run = run_ledger(cfg)?;
    let prob = problem(cfg, &run.disc)?;
    let mut failures = Vec::new();
    let direct = match &run.solutions.direct {
        Ok((f, cert)) => Some(DirectReport::new(f, cert, Some(fixed_point_residual(f, &prob)?))),
        Err(e) => {
            failures.push(FailureReport::new("direct", e));
            None
        }
    };
    let irls = match &run.solutions.irls {
        Ok(out) => Some(IrlsReport::new(out, prob.energy(&out.solution))),
        Err(e) => {
            failures.push(FailureReport::new("irls", e));
            None
        }
    };
    Ok(RunReport {
        fingerprint: cfg.fingerprint(),
        config: cfg.clone(),
        method: Method::Both,
        direct,
        irls,
        fixed_point: run.fixed_point,
        failures,
        ledger: Some(run.ledger),
        wall_time_s: clock.elapsed().as_secs_f64(),
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepRow {
    pub p: f64,
    pub degree: u32,
    pub m_p_direct: f64,
    pub m_p_irls: f64,
    pub fixed_point_residual: f64,
    pub iterations: usize,
    pub dispersion: f64,
}

/// One row per distinct `(p, D)`, sorted, cells solved concurrently.
pub fn sweep(cfg: &InstanceConfig, ps: &[f64], degrees: &[u32]) -> Result<Vec<SweepRow>> {
    if ps.is_empty() || degrees.is_empty() {
        return Err(Error::Config("sweep needs at least one exponent and one degree".into()));
    }
    if let Some(p) = ps.iter().find(|p| !(**p > 0.0 && **p < 2.0)) {
        return Err(Error::Config(format!("sweep exponents must lie in (0, 2), got {p}")));
    }
    let mut cells: Vec<(f64, u32)> = ps.iter().flat_map(|&p| degrees.iter().map(move |&d| (p, d))).collect();
    cells.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1)));
    cells.dedup();
    let cfgs = cells.iter().map(|&(p, d)| cfg.with_cell(p, d)).collect::<Result<Vec<_>>>()?;
    cfgs.par_iter()
        .map(|c| {
            let disc = c.instance().discretize()?;
            let prob = problem(c, &disc)?;
            let (f, cert) = solve_direct(c, &prob)?;
            let out = solve_irls(c, &prob)?;
            Ok(SweepRow {
                p: c.solve.p,
                degree: c.solve.degree,
                m_p_direct: cert.energy,
                m_p_irls: prob.energy(&out.solution),
                fixed_point_residual: fixed_point_residual(&f, &prob)?,
                iterations: out.iterations,
                dispersion: cert.dispersion,
            })
        })
        .collect()
}

pub fn sweep_csv(rows: &[SweepRow]) -> String {
    let mut s = SWEEP_COLUMNS.join(",");
    s.push('\n');
    for r in rows {
        writeln!(
            s,
            "{},{},{:.16e},{:.16e},{:.16e},{},{:.16e}",
            r.p, r.degree, r.m_p_direct, r.m_p_irls, r.fixed_point_residual, r.iterations, r.dispersion
        )
        .unwrap();
    }
    s
}

fn output_path(out: Option<PathBuf>, config: &Path, suffix: &str) -> PathBuf {
    out.unwrap_or_else(|| {
        let dir = std::env::var_os(OUT_DIR_ENV).map(PathBuf::from).unwrap_or_else(|| PathBuf::from("."));
        let stem = config.file_stem().map(|s| s.to_string_lossy().into_owned()).unwrap_or_else(|| "run".into());
        dir.join(format!("{stem}.{suffix}"))
    })
}

fn write(path: &Path, text: &str) -> std::result::Result<(), i32> {
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        if let Err(e) = std::fs::create_dir_all(dir) {
            eprintln!("error: cannot create {}: {e}", dir.display());
            return Err(EXIT_USAGE);
        }
    }
    std::fs::write(path, text).map_err(|e| {
        eprintln!("error: cannot write {}: {e}", path.display());
        EXIT_USAGE
    })
}

fn error_code(e: &Error) -> i32 {
    match e {
        Error::Config(_) => EXIT_USAGE,
        _ => EXIT_SOLVER,
    }
}

fn fail(e: &Error) -> i32 {
    eprintln!("error: {e}");
    error_code(e)
}

/// Entry point of the `minext` binary; returns the exit status.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { EXIT_USAGE } else { EXIT_OK };
        }
    };
    match cli.command {
        Command::Solve { config, method, out, format } => {
            let cfg = match InstanceConfig::load(&config) {
                Ok(c) => c,
                Err(e) => return fail(&e),
            };
            let report = match solve_report(&cfg, method) {
                Ok(r) => r,
                Err(e) => return fail(&e),
            };
            let (text, ext) = match format {
                Format::Json => (report.to_json(), "json"),
                Format::Csv => (report.to_csv(), "csv"),
            };
            let path = output_path(out, &config, &format!("solve.{ext}"));
            if let Err(code) = write(&path, &text) {
                return code;
            }
            if let Some(d) = &report.direct {
                println!("direct  m_p = {:.12}  residual {:.2e}  dispersion {:.2e}", d.m_p, d.variational_residual, d.dispersion);
            }
            if let Some(i) = &report.irls {
                println!("irls    m_p = {:.12}  iterations {}", i.m_p, i.iterations);
            }
            for f in &report.failures {
                eprintln!("{} failed: {}", f.solver, f.message);
            }
            println!("report: {}", path.display());
            if report.failures.is_empty() { EXIT_OK } else { EXIT_SOLVER }
        }
        Command::Verify { config, out } => {
            let cfg = match InstanceConfig::load(&config) {
                Ok(c) => c,
                Err(e) => return fail(&e),
            };
            let report = match verify_report(&cfg) {
                Ok(r) => r,
                Err(e) => return fail(&e),
            };
            let path = output_path(out, &config, "verify.json");
            if let Err(code) = write(&path, &report.to_json()) {
                return code;
            }
            let ledger = report.ledger.as_ref().expect("verify fills the ledger");
            for e in &ledger.entries {
                let status = match e.status {
                    CheckStatus::Pass => "pass",
                    CheckStatus::Fail => "FAIL",
                    CheckStatus::Skipped => "skip",
                    CheckStatus::Error => "ERROR",
                };
                let residual = e.residual.map(|r| format!("{r:.3e}")).unwrap_or_else(|| "-".into());
                println!("{status:<5} {:<26} {residual:>10}  (tol {:.0e})", e.name, e.tolerance);
            }
            println!("ledger: {}", path.display());
            ledger.exit_code()
        }
        Command::Sweep { config, ps, degrees, out } => {
            let cfg = match InstanceConfig::load(&config) {
                Ok(c) => c,
                Err(e) => return fail(&e),
            };
            let degrees = if degrees.is_empty() { vec![cfg.solve.degree] } else { degrees };
            let rows = match sweep(&cfg, &ps, &degrees) {
                Ok(r) => r,
                Err(e) => return fail(&e),
            };
            let csv = sweep_csv(&rows);
            let path = output_path(out, &config, "sweep.csv");
            if let Err(code) = write(&path, &csv) {
                return code;
            }
            print!("{csv}");
            EXIT_OK
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const DISC: &str = r#"
[domain]
kind = "disc"
[submanifold]
kind = "coordinate"
codim = 1
[weight]
alpha = 1.0
[data]
f = ["1,0"]
[solve]
p = 1.5
degree = 4
order = 6
starts = 2
"#;

    #[test]
    fn report_round_trips() {
        let cfg = InstanceConfig::parse(DISC).unwrap();
        let report = verify_report(&cfg).unwrap();
        let back = RunReport::from_json(&report.to_json()).unwrap();
        assert_eq!(report, back);
    }

    #[test]
    fn quadratic_solvers_coincide() {
        let cfg = InstanceConfig::parse(&DISC.replace("p = 1.5", "p = 2.0")).unwrap();
        let r = solve_report(&cfg, Method::Both).unwrap();
        assert_eq!(r.direct.as_ref().unwrap().coeffs, r.irls.as_ref().unwrap().coeffs);
        assert_eq!(r.irls.unwrap().iterations, 1);
    }

    #[test]
    fn single_method_reports() {
        let cfg = InstanceConfig::parse(DISC).unwrap();
        let r = solve_report(&cfg, Method::Irls).unwrap();
        assert!(r.direct.is_none() && r.irls.is_some() && r.fixed_point.is_none());
        let csv = r.to_csv();
        assert!(csv.starts_with("record,index,eps,value\nm_p_irls,,,"));
    }

    #[test]
    fn sweep_rows_are_sorted_and_unique() {
        let cfg = InstanceConfig::parse(DISC).unwrap();
        let rows = sweep(&cfg, &[1.5, 0.5, 1.5], &[3, 2]).unwrap();
        let keys: Vec<(f64, u32)> = rows.iter().map(|r| (r.p, r.degree)).collect();
        assert_eq!(keys, vec![(0.5, 2), (0.5, 3), (1.5, 2), (1.5, 3)]);
        assert!(sweep(&cfg, &[], &[2]).is_err());
        assert!(sweep(&cfg, &[2.0], &[2]).is_err());
        let csv = sweep_csv(&rows[..1]);
        assert_eq!(csv.lines().next().unwrap(), SWEEP_COLUMNS.join(","));
        assert_eq!(csv.lines().count(), 2);
    }

    #[test]
    fn usage_errors_exit_2() {
        assert_eq!(run(["minext"]), EXIT_USAGE);
        assert_eq!(run(["minext", "solve", "/nonexistent/x.cfg"]), EXIT_USAGE);
        assert_eq!(run(["minext", "sweep", "x.cfg"]), EXIT_USAGE);
        assert_eq!(run(["minext", "solve", "x.cfg", "--method", "newton"]), EXIT_USAGE);
    }
}
