//! The acceptance suite: thirteen numbered checks, each with a pinned
//! tolerance and a wall-clock budget. Used by the `acceptance` test target
//! and by `kstab verify`.

use std::path::{Path, PathBuf};
use std::time::Instant;

use nalgebra::DMatrix;
use num_complex::Complex64;
use num_traits::{Signed, Zero};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;
use serde_json::Value;

use crate::bergman::{self, RadialMetric};
use crate::chow::{
    balance_iterate, conic_inequality, moment_matrix, pairing_matrix, trace_norm, HermitianForm,
    HypersurfaceForm, ProjectiveCycle,
};
use crate::laurent::io::matrix_from_json;
use crate::laurent::{factorize, section_degree, LaurentMatrix, LaurentPoly};
use crate::quad::Adaptive;
use crate::rational::rat;
use crate::weights::{futaki, i_coefficient, induced_gap, tau_poly, SignConvention, WeightSystem};
use crate::{Error, Result};

/// Inputs read from the shipped data directory.
#[derive(Clone, Debug)]
pub struct Corpus {
    pub suite: Vec<WeightSystem>,
    pub conic: WeightSystem,
    pub conic_form: HypersurfaceForm,
    pub conic_loop: LaurentMatrix,
    pub round: RadialMetric,
    pub perturbed: RadialMetric,
    pub cubic: ProjectiveCycle,
}

pub fn default_data_dir() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("data")
}

pub fn read_json(path: &Path) -> Result<Value> {
    let text = std::fs::read_to_string(path).map_err(|e| Error::Parse(format!("{}: {e}", path.display())))?;
    serde_json::from_str(&text).map_err(|e| Error::Parse(format!("{}: {e}", path.display())))
}

fn in_file<T>(path: &Path, r: Result<T>) -> Result<T> {
    r.map_err(|e| match e {
        Error::Parse(m) => Error::Parse(format!("{}: {m}", path.display())),
        other => other,
    })
}

impl Corpus {
    pub fn load(dir: &Path) -> Result<Corpus> {
        let path = dir.join("sign_suite.json");
        let suite = match read_json(&path)? {
            Value::Array(items) => items
                .iter()
                .enumerate()
                .map(|(i, v)| in_file(&path, WeightSystem::from_json(v).map_err(|e| Error::Parse(format!("[{i}]: {e}")))))
                .collect::<Result<Vec<_>>>()?,
            _ => return Err(Error::Parse(format!("{}: expected a list of weight systems", path.display()))),
        };
        let path = dir.join("conic.json");
        let conic = in_file(&path, WeightSystem::from_json(&read_json(&path)?))?;
        let path = dir.join("chow/conic_degeneration.json");
        let v = read_json(&path)?;
        let (conic_form, conic_loop) = in_file(&path, form_and_loop(&v))?;
        let metric = |name: &str| -> Result<RadialMetric> {
            let path = dir.join("metrics").join(name);
            in_file(&path, RadialMetric::from_json(&read_json(&path)?))
        };
        let path = dir.join("cycles/distorted_cubic.json");
        let cubic = in_file(&path, ProjectiveCycle::from_json(&read_json(&path)?))?;
        Ok(Corpus { suite, conic, conic_form, conic_loop, round: metric("round.json")?, perturbed: metric("perturbed.json")?, cubic })
    }
}

/// `{"form": {...}, "loop": {...}}`.
pub fn form_and_loop(v: &Value) -> Result<(HypersurfaceForm, LaurentMatrix)> {
    let form = HypersurfaceForm::from_json(v.get("form").ok_or_else(|| Error::Parse("missing field \"form\"".into()))?)?;
    let g = matrix_from_json(v.get("loop").ok_or_else(|| Error::Parse("missing field \"loop\"".into()))?)?;
    Ok((form, g))
}

#[derive(Clone, Debug, Serialize)]
pub struct Outcome {
    pub id: u32,
    pub title: &'static str,
    pub passed: bool,
    pub detail: String,
    pub seconds: f64,
    pub budget: f64,
}

impl Outcome {
    pub fn line(&self) -> String {
        format!(
            "{} {:>2}. {} ({:.2} s, budget {} s): {}",
            if self.passed { "PASS" } else { "FAIL" },
            self.id,
            self.title,
            self.seconds,
            self.budget,
            self.detail
        )
    }
}

pub const CRITERIA: [(u32, &str, f64); 13] = [
    (1, "factorization round-trip", 5.0),
    (2, "section degree bounds", 5.0),
    (3, "spread scales with level", 1.0),
    (4, "Futaki calibration", 1.0),
    (5, "leading coefficient sign", 2.0),
    (6, "equivariant Chow equality", 10.0),
    (7, "trace-norm pairing bound", 2.0),
    (8, "Chow weight below pairing", 60.0),
    (9, "Bergman normalization", 30.0),
    (10, "expansion coefficient", 60.0),
    (11, "Theta decay", 60.0),
    (12, "moment-map cross-check", 30.0),
    (13, "balancing iteration", 30.0),
];

/// Runs one criterion. Errors count as failures.
pub fn run(id: u32, corpus: &Corpus) -> Outcome {
    let &(_, title, budget) = CRITERIA.iter().find(|c| c.0 == id).expect("known criterion");
    let start = Instant::now();
    let result = match id {
        1 => factorization_round_trip(),
        2 => section_degree_bounds(),
        3 => spread_scaling(corpus),
        4 => futaki_calibration(),
        5 => leading_sign(corpus),
        6 => equivariant_equality(corpus),
        7 => pairing_bound(),
        8 => chow_inequality(corpus),
        9 => bergman_normalization(corpus),
        10 => expansion_coefficient(corpus),
        11 => theta_decay(corpus),
        12 => moment_cross_check(corpus),
        13 => balancing(corpus),
        _ => unreachable!(),
    };
    let seconds = start.elapsed().as_secs_f64();
    let (ok, detail) = result.unwrap_or_else(|e| (false, format!("error: {e}")));
    let detail = if ok && seconds > budget { format!("{detail}; over time budget") } else { detail };
    Outcome { id, title, passed: ok && seconds <= budget, detail, seconds, budget }
}

pub fn run_all(corpus: &Corpus) -> Vec<Outcome> {
    CRITERIA.iter().map(|c| run(c.0, corpus)).collect()
}

pub fn table(outcomes: &[Outcome]) -> String {
    let mut out: String = outcomes.iter().map(|o| o.line() + "\n").collect();
    let passed = outcomes.iter().filter(|o| o.passed).count();
    out.push_str(&format!("{passed}/{} criteria passed\n", outcomes.len()));
    out
}

type Check = Result<(bool, String)>;

fn random_poly(rng: &mut ChaCha8Rng, lo: i64, hi: i64, terms: usize) -> LaurentPoly {
    let mut p = LaurentPoly::zero();
    for _ in 0..terms {
        p.add_term(rng.gen_range(lo..=hi), rat(rng.gen_range(-4..=4)));
    }
    p
}

fn random_loop(rng: &mut ChaCha8Rng) -> LaurentMatrix {
    let n = rng.gen_range(1..=4);
    loop {
        let mut g = LaurentMatrix::zeros(n);
        for i in 0..n {
            for j in 0..n {
                let terms = rng.gen_range(0..=2);
                g.set(i, j, random_poly(rng, -6, 6, terms));
            }
        }
        if !g.det().is_zero() {
            return g;
        }
    }
}

fn factorization_round_trip() -> Check {
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    for trial in 0..100 {
        let g = random_loop(&mut rng);
        let f = factorize(&g)?;
        if f.reconstruct() != g {
            return Ok((false, format!("loop {trial}: L t^A R differs from g")));
        }
        if let Err(msg) = f.check(&g) {
            return Ok((false, format!("loop {trial}: {msg}")));
        }
    }
    Ok((true, "100 loops reproduced exactly, degree bounds and ordering hold".into()))
}

fn section_degree_bounds() -> Check {
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    for trial in 0..100 {
        let g = random_loop(&mut rng);
        let f = factorize(&g)?;
        let n = g.size();
        let (lo, hi) = (-f.max_weight(), -f.min_weight());
        let gamma = loop {
            let v: Vec<LaurentPoly> = (0..n).map(|_| random_poly(&mut rng, 0, 4, 2)).collect();
            if !v.iter().all(LaurentPoly::is_zero) {
                break v;
            }
        };
        let d = section_degree(&g, &gamma)?;
        if d < lo || d > hi {
            return Ok((false, format!("pair {trial}: {lo} <= {d} <= {hi} fails")));
        }
        let (a, b) = (section_degree(&g, &f.minimal_section())?, section_degree(&g, &f.maximal_section())?);
        if a != lo || b != hi {
            return Ok((false, format!("pair {trial}: extremal sections give {a}, {b}; bounds {lo}, {hi}")));
        }
    }
    Ok((true, "100 pairs within bounds, both bounds attained".into()))
}

/// Every projective system with 2 to 4 generators in `[-2, 2]` and every
/// plane or space hypersurface of degree up to 3 with generators in
/// `[-1, 1]`, together with the shipped systems.
fn supported_systems(corpus: &Corpus) -> Vec<WeightSystem> {
    fn tuples(len: usize, lo: i64, hi: i64) -> Vec<Vec<i64>> {
        let mut out = vec![vec![]];
        for _ in 0..len {
            out = out
                .into_iter()
                .flat_map(|t: Vec<i64>| {
                    (lo..=hi).map(move |x| {
                        let mut t = t.clone();
                        t.push(x);
                        t
                    })
                })
                .collect();
        }
        out
    }
    let mut systems: Vec<WeightSystem> = corpus.suite.clone();
    systems.push(corpus.conic.clone());
    for len in 2..=4 {
        for g in tuples(len, -2, 2) {
            systems.push(WeightSystem::projective(g).expect("valid"));
        }
    }
    for len in 3..=4 {
        for g in tuples(len, -1, 1) {
            for d in 1..=3u32 {
                for lambda in -(d as i64)..=d as i64 {
                    if let Ok(w) = WeightSystem::hypersurface(g.clone(), d, lambda) {
                        systems.push(w);
                    }
                }
            }
        }
    }
    systems.retain(WeightSystem::extremes_survive);
    systems
}

fn spread_scaling(corpus: &Corpus) -> Check {
    let systems = supported_systems(corpus);
    for w in &systems {
        let base = induced_gap(w, 1);
        for k in 2..=10 {
            if induced_gap(w, k) != k as i64 * base {
                return Ok((false, format!("{w:?} at k = {k}")));
            }
        }
    }
    Ok((true, format!("{} systems, k <= 10", systems.len())))
}

fn futaki_calibration() -> Check {
    let sign = SignConvention::Calibrated;
    for w in [
        WeightSystem::projective(vec![0, 0])?,
        WeightSystem::projective(vec![3, 3, 3])?,
        WeightSystem::hypersurface(vec![1, 1, 1], 2, 2)?,
    ] {
        let tau = tau_poly(&w, sign, 1)?;
        if !futaki(&tau).is_zero() {
            return Ok((false, format!("trivial {w:?} has nonzero Futaki invariant")));
        }
    }
    let mut count = 0;
    for a in -6..=6 {
        for b in -6..=6 {
            let tau = tau_poly(&WeightSystem::projective(vec![a, b])?, sign, 1)?;
            let (i, j) = (i_coefficient(&tau), tau.coeffs[1].clone());
            if tau.volume() != rat(1) || j != i * tau.alpha1() || !futaki(&tau).is_zero() {
                return Ok((false, format!("weights ({a}, {b}) do not cancel")));
            }
            count += 1;
        }
    }
    Ok((true, format!("trivial configurations and {count} product actions on P^1 give 0")))
}

fn leading_sign(corpus: &Corpus) -> Check {
    if corpus.suite.len() != 20 {
        return Ok((false, format!("suite has {} entries, expected 20", corpus.suite.len())));
    }
    for w in &corpus.suite {
        if *w != w.normalized() || w.is_trivial() {
            return Ok((false, format!("{w:?} is not normalized and nontrivial")));
        }
        let tau = tau_poly(w, SignConvention::Calibrated, 1)?;
        if !i_coefficient(&tau).is_negative() {
            return Ok((false, format!("{w:?}: I = {}", i_coefficient(&tau))));
        }
    }
    Ok((true, "I < 0 for all 20 configurations".into()))
}

fn chow_quad() -> Adaptive {
    Adaptive { order: 16, tol: 1e-10, max_depth: 12 }
}

fn equivariant_equality(corpus: &Corpus) -> Check {
    let r = conic_inequality(&corpus.conic_form, &corpus.conic_loop, &chow_quad(), 1e-6)?;
    let ok = r.equivariant && r.slack.abs() <= 1e-6 && r.quadrature_error <= 1e-8;
    Ok((ok, format!("Ch = {}, pairing = {:.12}, quadrature error {:.1e}", r.chow, r.pairing, r.quadrature_error)))
}

fn random_hermitian(rng: &mut ChaCha8Rng, n: usize) -> HermitianForm {
    let x = DMatrix::from_fn(n, n, |_, _| Complex64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)));
    HermitianForm::symmetrize(&x)
}

fn pairing_bound() -> Check {
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let mut worst: f64 = 0.0;
    for trial in 0..200 {
        let n = rng.gen_range(2..=6);
        let a = random_hermitian(&mut rng, n);
        let m = random_hermitian(&mut rng, n).trace_free();
        let ev = a.eigenvalues();
        let spread = ev.iter().copied().fold(f64::NEG_INFINITY, f64::max) - ev.iter().copied().fold(f64::INFINITY, f64::min);
        let lhs = pairing_matrix(&m, &a)?.abs();
        let rhs = 2.0 * spread * trace_norm(&m);
        if lhs > rhs {
            return Ok((false, format!("pair {trial}: {lhs} > {rhs}")));
        }
        worst = worst.max(lhs / rhs);
    }
    Ok((true, format!("200 pairs, largest ratio {worst:.3}")))
}

fn random_smooth_conic(rng: &mut ChaCha8Rng) -> Result<HypersurfaceForm> {
    loop {
        let monomials = [[2, 0, 0], [0, 2, 0], [0, 0, 2], [1, 1, 0], [1, 0, 1], [0, 1, 1]];
        let c: Vec<i64> = (0..6).map(|_| rng.gen_range(-2..=2)).collect();
        // 4 det of the symmetric matrix
        let (a, b, cc, d, e, f) = (c[0], c[1], c[2], c[3], c[4], c[5]);
        let det4 = 4 * a * b * cc + d * e * f - a * f * f - b * e * e - cc * d * d;
        if det4 != 0 {
            let terms = monomials.iter().zip(&c).map(|(m, &x)| (m.to_vec(), rat(x)));
            return HypersurfaceForm::from_rational(3, terms);
        }
    }
}

/// Lower unipotent `R` with `deg R[a][b] < w[b] - w[a]`.
fn admissible_r(rng: &mut ChaCha8Rng, w: &[i64]) -> LaurentMatrix {
    let n = w.len();
    let mut r = LaurentMatrix::identity(n);
    for a in 0..n {
        for b in 0..a {
            let mut p = LaurentPoly::zero();
            for e in 0..w[b] - w[a] {
                p.add_term(e, rat(rng.gen_range(-3..=3)));
            }
            r.set(a, b, p);
        }
    }
    r
}

fn chow_inequality(corpus: &Corpus) -> Check {
    let mut rng = ChaCha8Rng::seed_from_u64(8);
    let mut strict = 0;
    for trial in 0..50 {
        let f = if trial % 2 == 0 { corpus.conic_form.clone() } else { random_smooth_conic(&mut rng)? };
        let mut w: Vec<i64> = (0..3).map(|_| rng.gen_range(-2..=2)).collect();
        w.sort_by(|a, b| b.cmp(a));
        let g = LaurentMatrix::t_pow_diag(&w).multiply(&admissible_r(&mut rng, &w))?;
        let r = conic_inequality(&f, &g, &chow_quad(), 1e-6)?;
        if !r.holds {
            return Ok((false, format!("trial {trial}: Ch = {} above pairing {}", r.chow, r.pairing)));
        }
        if r.slack > 1e-6 {
            strict += 1;
        }
    }
    Ok((true, format!("50 loops, no violations ({strict} strict)")))
}

const LEVELS: [usize; 4] = [8, 16, 32, 64];

fn bergman_normalization(corpus: &Corpus) -> Check {
    let q = bergman::default_quad();
    let mut worst: f64 = 0.0;
    for m in [&corpus.round, &corpus.perturbed] {
        for k in LEVELS {
            let g = bergman::gram(m, k, &q)?;
            let (v, _) = bergman::rho_integral(m, &g, &q);
            worst = worst.max((v - (k as f64 + 1.0)).abs());
        }
    }
    let mut spread: f64 = 0.0;
    for k in LEVELS {
        let g = bergman::gram(&corpus.round, k, &q)?;
        let r = bergman::rho(&corpus.round, &g, &bergman::sphere_grid(100));
        let (lo, hi) = r.iter().fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), x| (a.min(*x), b.max(*x)));
        spread = spread.max(hi - lo);
    }
    Ok((worst <= 1e-8 && spread <= 1e-9, format!("|∫ρ dμ - (k+1)| <= {worst:.1e}, round ρ spread {spread:.1e}")))
}

fn expansion_coefficient(corpus: &Corpus) -> Check {
    let q = bergman::default_quad();
    let grid = bergman::sphere_grid(100);
    let levels = [16, 32, 64];
    let round = bergman::expansion_fit(&corpus.round, &levels, &grid, &q)?;
    let s_round = bergman::scalar_curvature(&corpus.round, &grid)?;
    let round_err = round.a1.iter().zip(&s_round).map(|(a, s)| ((a - s / 2.0) / (s / 2.0)).abs()).fold(0.0, f64::max);
    // interior points: t = s/(1+s) in [0.05, 0.95]
    let interior: Vec<f64> = grid.iter().copied().filter(|s| (0.05..=0.95).contains(&(s / (1.0 + s)))).collect();
    let fit = bergman::expansion_fit(&corpus.perturbed, &levels, &interior, &q)?;
    let s = bergman::scalar_curvature(&corpus.perturbed, &interior)?;
    let ratios: Vec<f64> = fit.a1.iter().zip(&s).map(|(a, s)| a / s).collect();
    let pert_err = fit.a1.iter().zip(&s).map(|(a, s)| ((a - s / 2.0) / (s / 2.0)).abs()).fold(0.0, f64::max);
    let (lo, hi) = ratios.iter().fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), x| (a.min(*x), b.max(*x)));
    Ok((
        round_err <= 0.02 && pert_err <= 0.05,
        format!(
            "round: max |a1 - S/2|/(S/2) = {round_err:.1e}; perturbed: {pert_err:.2e} on {} points; a1/S in [{lo:.4}, {hi:.4}], so a1 = S/2",
            interior.len()
        ),
    ))
}

/// Least-squares slope of `log y` against `log x`.
pub fn log_log_slope(xs: &[f64], ys: &[f64]) -> f64 {
    let lx: Vec<f64> = xs.iter().map(|x| x.ln()).collect();
    let ly: Vec<f64> = ys.iter().map(|y| y.ln()).collect();
    let n = lx.len() as f64;
    let (mx, my) = (lx.iter().sum::<f64>() / n, ly.iter().sum::<f64>() / n);
    let sxy: f64 = lx.iter().zip(&ly).map(|(x, y)| (x - mx) * (y - my)).sum();
    let sxx: f64 = lx.iter().map(|x| (x - mx) * (x - mx)).sum();
    sxy / sxx
}

fn theta_decay(corpus: &Corpus) -> Check {
    let q = bergman::default_quad();
    let m = &corpus.perturbed;
    let mut tv = Vec::new();
    let mut rem = Vec::new();
    for k in LEVELS {
        let g = bergman::gram(m, k, &q)?;
        tv.push(bergman::theta_total_variation(m, &g, &q)?.value);
        rem.push(bergman::theta_remainder_variation(m, &g, &q)?.value);
    }
    let ks: Vec<f64> = LEVELS.iter().map(|&k| k as f64).collect();
    let decreasing = tv.windows(2).all(|w| w[1] < w[0]);
    let slope = log_log_slope(&ks, &tv);
    let ok = decreasing && (-2.3..=-1.7).contains(&slope);
    let limit = bergman::curvature_deviation(m, &q);
    let scaled: Vec<String> = ks.iter().zip(&tv).map(|(k, t)| format!("{:.4}", k * t)).collect();
    let values: Vec<String> = tv.iter().map(|t| format!("{t:.3e}")).collect();
    Ok((
        ok,
        format!(
            "∫|Θ_k| = [{}], slope {slope:.3}; k∫|Θ_k| = [{}] against ∫|S/2-1|ω = {limit:.4}; \
             after removing the k^-1 (S/2-1) ω term: slope {:.3}",
            values.join(", "),
            scaled.join(", "),
            log_log_slope(&ks, &rem)
        ),
    ))
}

fn moment_cross_check(corpus: &Corpus) -> Check {
    let q = bergman::default_quad();
    let m = &corpus.perturbed;
    let mut worst: f64 = 0.0;
    for k in [2, 3, 4] {
        let g = bergman::gram(m, k, &q)?;
        let (diag, _) = bergman::bergman_moment(m, &g, &q)?;
        let mm = moment_matrix(&bergman::embedding_curve(&g), &chow_quad())?.matrix;
        for a in 0..=k {
            for b in 0..=k {
                let want = if a == b { diag[a] } else { 0.0 };
                worst = worst.max((mm.0[(a, b)] - Complex64::new(want, 0.0)).norm());
            }
        }
    }
    Ok((worst <= 1e-6, format!("largest entry difference {worst:.1e} for k = 2, 3, 4")))
}

fn balancing(corpus: &Corpus) -> Check {
    let quad = Adaptive { order: 16, tol: 1e-12, max_depth: 10 };
    let r = balance_iterate(&corpus.cubic, 500, 1e-8, &quad)?;
    let monotone = r.monotone_from.is_some_and(|i| i <= 5);
    Ok((
        r.converged && monotone,
        format!(
            "|M|_1 = {:.1e} after {} steps, monotone from step {}",
            r.residual(),
            r.steps,
            r.monotone_from.map_or("-".into(), |i| i.to_string())
        ),
    ))
}
