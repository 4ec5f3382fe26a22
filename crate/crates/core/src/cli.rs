//! Command-line front end. Reports are JSON (exact rationals as `"num/den"`
//! strings, floats in shortest round-trip form) or CSV (floats with 17
//! significant digits). Exit codes: 2 for unreadable input, 3 for violated
//! invariants, 4 for non-convergence.

use std::fmt::Write as _;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use clap::{Args, Parser, Subcommand, ValueEnum};
use num_rational::BigRational;
use serde_json::{json, Value};

use crate::acceptance::{self, default_data_dir, form_and_loop, read_json, Corpus};
use crate::bergman::{self, RadialMetric};
use crate::chow::{
    balance_iterate, chow_weight, conic_inequality, moment_matrix, trace_norm, ProjectiveCycle,
};
use crate::laurent::io::{matrix_from_json, matrix_to_json, poly_to_json};
use crate::laurent::{factorize, section_degree};
use crate::quad::Adaptive;
use crate::rational::{fmt_fraction, to_f64};
use crate::weights::{chow_k, futaki, i_coefficient, tau_poly, SignConvention, WeightSystem};
use crate::{Error, Result};

#[derive(Parser, Debug)]
#[command(name = "kstab", version, about = "Stability invariants of polarized varieties and their degenerations")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
    #[command(flatten)]
    pub common: Common,
}

#[derive(Args, Debug, Clone)]
pub struct Common {
    /// Report format.
    #[arg(long, alias = "report", value_enum, default_value_t = Format::Json, global = true)]
    pub format: Format,
    /// Write the report here instead of standard output.
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
    /// Worker threads; defaults to KSTAB_THREADS, then to the available parallelism.
    #[arg(long, env = "KSTAB_THREADS", global = true)]
    pub threads: Option<usize>,
}

#[derive(Copy, Clone, Debug, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Json,
    Csv,
}

#[derive(Args, Debug, Clone)]
pub struct Quadrature {
    /// Gauss–Legendre base order per panel.
    #[arg(long)]
    pub order: Option<usize>,
    /// Absolute quadrature tolerance.
    #[arg(long)]
    pub tol: Option<f64>,
}

impl Quadrature {
    fn resolve(&self, default: Adaptive) -> Result<Adaptive> {
        let q = Adaptive { order: self.order.unwrap_or(default.order), tol: self.tol.unwrap_or(default.tol), ..default };
        if q.order == 0 || !(q.tol > 0.0) {
            return Err(Error::Invalid("quadrature order and tolerance must be positive".into()));
        }
        Ok(q)
    }
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Normal form `g = L t^A R` of a matrix loop.
    Factorize {
        #[arg(long)]
        input: PathBuf,
    },
    /// Weight polynomial, Chow invariants and Futaki invariant of a weight system.
    Futaki {
        #[arg(long)]
        input: PathBuf,
        #[arg(long, value_enum, default_value_t = SignArg::Calibrated)]
        sign: SignArg,
        /// Levels at which to report `Ch_k`.
        #[arg(long, default_value = "1:4")]
        k: KRange,
        /// First level used to fit the polynomials.
        #[arg(long, default_value_t = 1)]
        k0: u64,
    },
    /// Chow weight of `g(t) {F = 0}`; for plane conics also the moment pairing.
    Chow {
        #[arg(long)]
        input: PathBuf,
        #[arg(long, value_enum, default_value_t = SignArg::Calibrated)]
        sign: SignArg,
        #[command(flatten)]
        quad: Quadrature,
    },
    /// Moment matrix of a cycle of rational curves.
    Moment {
        #[arg(long)]
        input: PathBuf,
        #[command(flatten)]
        quad: Quadrature,
    },
    /// Balancing iteration for a cycle of rational curves.
    Balance {
        #[arg(long)]
        input: PathBuf,
        #[arg(long, default_value_t = 500)]
        max_steps: usize,
        /// Target for the trace norm of the moment matrix.
        #[arg(long = "target", default_value_t = 1e-8)]
        target: f64,
        #[command(flatten)]
        quad: Quadrature,
    },
    /// Density of states of a circle-invariant metric on the sphere.
    Bergman {
        #[arg(long)]
        input: PathBuf,
        #[arg(long, default_value = "8:64:double")]
        k: KRange,
        /// Number of grid points.
        #[arg(long, default_value_t = 16)]
        grid: usize,
        #[command(flatten)]
        quad: Quadrature,
    },
    /// Runs the acceptance suite on a data directory.
    Verify {
        /// Data directory; defaults to the shipped corpus.
        #[arg(long)]
        input: Option<PathBuf>,
        /// Run only these criteria.
        #[arg(long, value_delimiter = ',')]
        only: Vec<u32>,
    },
}

#[derive(Copy, Clone, Debug, PartialEq, Eq, ValueEnum)]
pub enum SignArg {
    Calibrated,
    Flipped,
}

impl From<SignArg> for SignConvention {
    fn from(s: SignArg) -> Self {
        match s {
            SignArg::Calibrated => SignConvention::Calibrated,
            SignArg::Flipped => SignConvention::Flipped,
        }
    }
}

/// Levels: `a:b` (every level), `a:b:step`, `a:b:double`, or a comma list.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct KRange(pub Vec<u64>);

impl FromStr for KRange {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, String> {
        let num = |x: &str| x.trim().parse::<u64>().map_err(|_| format!("bad level {x:?}"));
        let levels: Vec<u64> = if s.contains(':') {
            let parts: Vec<&str> = s.split(':').collect();
            if parts.len() > 3 {
                return Err(format!("bad range {s:?}"));
            }
            let (a, b) = (num(parts[0])?, num(parts[1])?);
            if a == 0 {
                return Err("levels start at 1".into());
            }
            match parts.get(2).map(|p| p.trim()) {
                Some("double") => std::iter::successors(Some(a), |k| Some(k * 2)).take_while(|k| *k <= b).collect(),
                Some(step) => {
                    let step = num(step)?;
                    if step == 0 {
                        return Err("step must be positive".into());
                    }
                    (a..=b).step_by(step as usize).collect()
                }
                None => (a..=b).collect(),
            }
        } else {
            s.split(',').map(num).collect::<std::result::Result<_, _>>()?
        };
        if levels.is_empty() || levels.contains(&0) {
            return Err(format!("range {s:?} has no positive levels"));
        }
        Ok(KRange(levels))
    }
}

/// Exit status for an error.
pub fn exit_code(e: &Error) -> i32 {
    match e {
        Error::Parse(_) => 2,
        Error::NoConvergence { .. } | Error::Quadrature { .. } => 4,
        _ => 3,
    }
}

fn frac(q: &BigRational) -> Value {
    Value::String(fmt_fraction(q))
}

fn csv_float(x: f64) -> String {
    format!("{x:.16e}")
}

fn load(path: &Path) -> Result<Value> {
    read_json(path)
}

fn with_path<T>(path: &Path, r: Result<T>) -> Result<T> {
    r.map_err(|e| match e {
        Error::Parse(m) => Error::Parse(format!("{}: {m}", path.display())),
        other => other,
    })
}

/// A finished report, plus an error to turn into the exit status after the
/// report has been written.
pub struct Report {
    pub text: String,
    pub failure: Option<Error>,
}

impl Report {
    fn ok(text: String) -> Self {
        Report { text, failure: None }
    }
}

fn json_text(v: &Value) -> String {
    let mut s = serde_json::to_string_pretty(v).expect("serializable");
    s.push('\n');
    s
}

pub fn execute(cli: &Cli) -> Result<Report> {
    let format = cli.common.format;
    match &cli.command {
        Command::Factorize { input } => {
            let g = with_path(input, matrix_from_json(&load(input)?))?;
            let f = factorize(&g)?;
            let lo = section_degree(&g, &f.minimal_section())?;
            let hi = section_degree(&g, &f.maximal_section())?;
            match format {
                Format::Json => Ok(Report::ok(json_text(&json!({
                    "weights": f.weights,
                    "column_order": f.column_order,
                    "left": matrix_to_json(&f.left),
                    "right": matrix_to_json(&f.right),
                    "section_degree_bounds": [lo, hi],
                    "minimal_section": f.minimal_section().iter().map(poly_to_json).collect::<Vec<_>>(),
                    "maximal_section": f.maximal_section().iter().map(poly_to_json).collect::<Vec<_>>(),
                })))),
                Format::Csv => {
                    let mut s = String::from("index,weight\n");
                    for (i, w) in f.weights.iter().enumerate() {
                        writeln!(s, "{i},{w}").unwrap();
                    }
                    Ok(Report::ok(s))
                }
            }
        }
        Command::Futaki { input, sign, k, k0 } => {
            let w = with_path(input, WeightSystem::from_json(&load(input)?))?;
            let tau = tau_poly(&w, (*sign).into(), *k0)?;
            let ch: Vec<(u64, BigRational)> = k.0.iter().map(|&k| (k, chow_k(&tau, k))).collect();
            match format {
                Format::Json => Ok(Report::ok(json_text(&json!({
                    "sign": format!("{sign:?}").to_lowercase(),
                    "tau": tau.coeffs.iter().map(frac).collect::<Vec<_>>(),
                    "hilbert": tau.hilbert.iter().map(frac).collect::<Vec<_>>(),
                    "volume": frac(&tau.volume()),
                    "I": frac(&i_coefficient(&tau)),
                    "futaki": frac(&futaki(&tau)),
                    "chow": ch.iter().map(|(k, c)| json!({"k": k, "value": frac(c)})).collect::<Vec<_>>(),
                })))),
                Format::Csv => {
                    let mut s = String::from("k,chow\n");
                    for (k, c) in &ch {
                        writeln!(s, "{k},{}", fmt_fraction(c)).unwrap();
                    }
                    writeln!(s, "inf,{}", fmt_fraction(&futaki(&tau))).unwrap();
                    Ok(Report::ok(s))
                }
            }
        }
        Command::Chow { input, sign, quad } => {
            let (f, g) = with_path(input, form_and_loop(&load(input)?))?;
            let ambient = f.ambient();
            if ambient < 1 {
                return Err(Error::ChowFormUnavailable("forms need at least two variables".into()));
            }
            let n = ambient - 1;
            let factorial: i64 = (1..=n as i64).product();
            let volume = BigRational::new((f.degree() as i64).into(), factorial.into());
            let ch = chow_weight(&f, &g, &volume, ambient, (*sign).into())?;
            let weights = factorize(&g)?.weights;
            let mut report = json!({
                "weights": weights,
                "chow_weight": frac(&ch),
                "chow_weight_float": to_f64(&ch),
            });
            let mut failure = None;
            if ambient == 2 && f.degree() == 2 && *sign == SignArg::Calibrated {
                let q = quad.resolve(Adaptive { order: 16, tol: 1e-10, max_depth: 12 })?;
                let r = conic_inequality(&f, &g, &q, 1e-6)?;
                report["pairing"] = json!(r.pairing);
                report["slack"] = json!(r.slack);
                report["quadrature_error"] = json!(r.quadrature_error);
                report["equivariant"] = json!(r.equivariant);
                report["inequality_holds"] = json!(r.holds);
                if !r.holds {
                    failure = Some(Error::Invalid(format!("Chow weight {} exceeds the pairing {}", r.chow, r.pairing)));
                }
            }
            let text = match format {
                Format::Json => json_text(&report),
                Format::Csv => {
                    let mut s = String::from("quantity,value\n");
                    writeln!(s, "chow_weight,{}", fmt_fraction(&ch)).unwrap();
                    for key in ["pairing", "slack", "quadrature_error"] {
                        if let Some(x) = report.get(key).and_then(Value::as_f64) {
                            writeln!(s, "{key},{}", csv_float(x)).unwrap();
                        }
                    }
                    s
                }
            };
            Ok(Report { text, failure })
        }
        Command::Moment { input, quad } => {
            let z = with_path(input, ProjectiveCycle::from_json(&load(input)?))?;
            let q = quad.resolve(Adaptive { order: 16, tol: 1e-10, max_depth: 12 })?;
            let m = moment_matrix(&z, &q)?;
            let n = m.matrix.size();
            match format {
                Format::Json => {
                    let rows: Vec<Vec<[f64; 2]>> =
                        (0..n).map(|i| (0..n).map(|j| [m.matrix.0[(i, j)].re, m.matrix.0[(i, j)].im]).collect()).collect();
                    Ok(Report::ok(json_text(&json!({
                        "matrix": rows,
                        "trace_norm": trace_norm(&m.matrix),
                        "eigenvalues": m.matrix.eigenvalues(),
                        "error": m.error,
                        "volume": m.volume,
                        "area": m.area,
                    }))))
                }
                Format::Csv => {
                    let mut s = String::from("row,col,re,im\n");
                    for i in 0..n {
                        for j in 0..n {
                            let z = m.matrix.0[(i, j)];
                            writeln!(s, "{i},{j},{},{}", csv_float(z.re), csv_float(z.im)).unwrap();
                        }
                    }
                    Ok(Report::ok(s))
                }
            }
        }
        Command::Balance { input, max_steps, target, quad } => {
            if !(*target > 0.0) {
                return Err(Error::Invalid("target must be positive".into()));
            }
            let z = with_path(input, ProjectiveCycle::from_json(&load(input)?))?;
            let q = quad.resolve(Adaptive { order: 16, tol: 1e-12, max_depth: 10 })?;
            let r = balance_iterate(&z, *max_steps, *target, &q)?;
            let text = match format {
                Format::Json => json_text(&json!({
                    "converged": r.converged,
                    "steps": r.steps,
                    "residual": r.residual(),
                    "monotone_from": r.monotone_from,
                    "history": r.history,
                    "cycle": r.cycle.to_json(),
                })),
                Format::Csv => {
                    let mut s = String::from("step,trace_norm\n");
                    for (i, h) in r.history.iter().enumerate() {
                        writeln!(s, "{i},{}", csv_float(*h)).unwrap();
                    }
                    s
                }
            };
            let failure = (!r.converged).then(|| Error::NoConvergence { steps: r.steps, residual: r.residual() });
            Ok(Report { text, failure })
        }
        Command::Bergman { input, k, grid, quad } => {
            let m = with_path(input, RadialMetric::from_json(&load(input)?))?;
            let q = quad.resolve(bergman::default_quad())?;
            if *grid == 0 {
                return Err(Error::Invalid("grid needs at least one point".into()));
            }
            bergman_report(&m, &k.0, *grid, &q, format)
        }
        Command::Verify { input, only } => {
            let dir = input.clone().unwrap_or_else(default_data_dir);
            let corpus = Corpus::load(&dir)?;
            let outcomes: Vec<_> = if only.is_empty() {
                acceptance::run_all(&corpus)
            } else {
                only.iter()
                    .map(|&id| {
                        if acceptance::CRITERIA.iter().any(|c| c.0 == id) {
                            Ok(acceptance::run(id, &corpus))
                        } else {
                            Err(Error::Invalid(format!("no criterion {id}")))
                        }
                    })
                    .collect::<Result<_>>()?
            };
            let failed: Vec<u32> = outcomes.iter().filter(|o| !o.passed).map(|o| o.id).collect();
            let text = match format {
                Format::Json => json_text(&serde_json::to_value(&outcomes).expect("serializable")),
                Format::Csv => {
                    let mut s = String::from("criterion,title,passed,seconds,detail\n");
                    for o in &outcomes {
                        writeln!(s, "{},{},{},{:.3},\"{}\"", o.id, o.title, o.passed, o.seconds, o.detail.replace('"', "'")).unwrap();
                    }
                    s
                }
            };
            let failure = (!failed.is_empty()).then(|| Error::Invalid(format!("criteria {failed:?} failed")));
            Ok(Report { text, failure })
        }
    }
}

fn bergman_report(m: &RadialMetric, levels: &[u64], n: usize, q: &Adaptive, format: Format) -> Result<Report> {
    let grid = bergman::sphere_grid(n);
    let levels: Vec<usize> = levels.iter().map(|&k| k as usize).collect();
    let grams: Vec<bergman::Gram> = levels.iter().map(|&k| bergman::gram(m, k, q)).collect::<Result<_>>()?;
    let rho: Vec<Vec<f64>> = grams.iter().map(|g| bergman::rho(m, g, &grid)).collect();
    let theta: Vec<f64> =
        grams.iter().map(|g| bergman::theta_total_variation(m, g, q).map(|t| t.value)).collect::<Result<_>>()?;
    let norm: Vec<f64> = grams.iter().map(|g| bergman::rho_integral(m, g, q).0).collect();
    let mut distinct = levels.clone();
    distinct.sort_unstable();
    distinct.dedup();
    let fit = if distinct.len() >= 3 { Some(bergman::expansion_fit(m, &levels, &grid, q)?) } else { None };
    let curvature = bergman::scalar_curvature(m, &grid)?;
    let text = match format {
        Format::Json => json_text(&json!({
            "metric": m.to_json(),
            "min_density": m.min_density,
            "levels": levels,
            "grid": grid,
            "scalar_curvature": curvature,
            "rho": rho,
            "normalization": norm,
            "theta_tv": theta,
            "a1_fit": fit.as_ref().map(|f| f.a1.clone()),
            "remainder_bound": fit.as_ref().map(|f| f.remainder_bound()),
        })),
        Format::Csv => {
            let mut s = String::from("k,gridpoint,rho,a1_fit,theta_tv\n");
            for (i, k) in levels.iter().enumerate() {
                for (j, x) in grid.iter().enumerate() {
                    let a1 = fit.as_ref().map_or(String::new(), |f| csv_float(f.a1[j]));
                    writeln!(s, "{k},{},{},{a1},{}", csv_float(*x), csv_float(rho[i][j]), csv_float(theta[i])).unwrap();
                }
            }
            s
        }
    };
    Ok(Report::ok(text))
}

/// Parses arguments, runs the command and returns the exit status.
pub fn main() -> i32 {
    let cli = Cli::parse();
    if let Some(n) = cli.common.threads {
        if n == 0 {
            eprintln!("error: thread count must be positive");
            return 2;
        }
        if let Err(e) = rayon::ThreadPoolBuilder::new().num_threads(n).build_global() {
            eprintln!("error: {e}");
            return 3;
        }
    }
    match execute(&cli) {
        Ok(report) => {
            let written = match &cli.common.out {
                Some(path) => std::fs::write(path, &report.text).map_err(|e| format!("{}: {e}", path.display())),
                None => {
                    print!("{}", report.text);
                    Ok(())
                }
            };
            if let Err(e) = written {
                eprintln!("error: {e}");
                return 3;
            }
            match report.failure {
                Some(e) => {
                    eprintln!("error: {e}");
                    exit_code(&e)
                }
                None => 0,
            }
        }
        Err(e) => {
            eprintln!("error: {e}");
            exit_code(&e)
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn level_ranges() {
        assert_eq!("8:64:double".parse::<KRange>().unwrap().0, vec![8, 16, 32, 64]);
        assert_eq!("2:9:3".parse::<KRange>().unwrap().0, vec![2, 5, 8]);
        assert_eq!("1:3".parse::<KRange>().unwrap().0, vec![1, 2, 3]);
        assert_eq!("4,2".parse::<KRange>().unwrap().0, vec![4, 2]);
        for bad in ["0:4", "5:4", "a", "1:2:0", "", "1:2:3:4"] {
            assert!(bad.parse::<KRange>().is_err(), "{bad}");
        }
    }

    #[test]
    fn exit_codes() {
        assert_eq!(exit_code(&Error::Parse("x".into())), 2);
        assert_eq!(exit_code(&Error::DegenerateLoop), 3);
        assert_eq!(exit_code(&Error::NoConvergence { steps: 1, residual: 1.0 }), 4);
    }

    #[test]
    fn csv_floats_have_seventeen_digits() {
        assert_eq!(csv_float(0.1), "1.0000000000000001e-1");
        assert_eq!(csv_float(-2.0), "-2.0000000000000000e0");
    }
}
