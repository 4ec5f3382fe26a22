//! Density of states for circle-invariant metrics on the Riemann sphere.
//!
//! The Hermitian metric on `O(1)` is `|1|^2 = e^{-u(s)}`, `s = |z|^2`, with
//! `u(s) = log(1+s) + ε ψ(s)` and `ψ(s) = P(s) / (1+s)^m`, `deg P ≤ m`. Its
//! curvature form `ω = (i/2π) ∂∂̄u` has density `f = (s u')'` against
//! `ds dθ / 2π`, and total area 1.
//!
//! Everything is evaluated in one of two charts with coordinate in `[0, 1]`:
//! `s` itself, or `σ = 1/s`. In the second chart the potential has the same
//! shape with the coefficients of `P` reversed and `z^j` becomes `σ^{k-j}`,
//! so no formula ever sees a large argument.

use std::f64::consts::PI;

use num_complex::Complex64;
use rayon::prelude::*;
use serde_json::{json, Value};

use crate::chow::{Component, ProjectiveCycle};
use crate::quad::{Adaptive, Compensated};
use crate::{Error, Result};

fn horner(p: &[f64], x: f64) -> f64 {
    p.iter().rev().fold(0.0, |acc, c| acc * x + c)
}

fn log_sum_exp(v: &[f64]) -> f64 {
    let hi = v.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    if hi == f64::NEG_INFINITY {
        return hi;
    }
    hi + v.iter().map(|x| (x - hi).exp()).sum::<f64>().ln()
}

/// The potential in one chart, with `ψ^{(r)} = P_r(s) / (1+s)^{m+r}`.
#[derive(Clone, Debug)]
struct Chart {
    eps: f64,
    power: u32,
    psi: Vec<Vec<f64>>,
}

impl Chart {
    fn new(eps: f64, coeffs: &[f64], power: u32) -> Chart {
        let mut psi = vec![coeffs.to_vec()];
        for r in 0..4 {
            let p = &psi[r];
            let mut next = vec![0.0; p.len()];
            for i in 1..p.len() {
                let d = i as f64 * p[i];
                next[i - 1] += d;
                next[i] += d;
            }
            let c = (power + r as u32) as f64;
            for (n, q) in next.iter_mut().zip(p) {
                *n -= c * q;
            }
            psi.push(next);
        }
        Chart { eps, power, psi }
    }

    /// `u, u', u'', u''', u''''` at `s`.
    fn derivs(&self, s: f64) -> [f64; 5] {
        let q = 1.0 / (1.0 + s);
        let mut d = [0.0; 5];
        d[0] = s.ln_1p();
        let mut c = 1.0;
        for r in 1..5 {
            d[r] = c * q.powi(r as i32);
            c *= -(r as f64);
        }
        if self.eps != 0.0 {
            for (r, p) in self.psi.iter().enumerate() {
                d[r] += self.eps * horner(p, s) * q.powi((self.power as usize + r) as i32);
            }
        }
        d
    }

    fn potential(&self, s: f64) -> f64 {
        self.derivs(s)[0]
    }

    fn density(&self, s: f64) -> f64 {
        let d = self.derivs(s);
        d[1] + s * d[2]
    }
}

/// Kähler density `f = (s u')'` and scalar curvature `S = -(s (log f)')' / f`
/// from the derivatives of the potential. The round metric has `S = 2`.
fn local_geometry(d: &[f64; 5], s: f64) -> (f64, f64) {
    let f = d[1] + s * d[2];
    let f1 = 2.0 * d[2] + s * d[3];
    let f2 = 3.0 * d[3] + s * d[4];
    let l1 = f1 / f;
    (f, -(l1 + s * (f2 / f - l1 * l1)) / f)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
enum Side {
    Near,
    Far,
}

const SIDES: [Side; 2] = [Side::Near, Side::Far];

/// Chart and chart coordinate of the point `|z|^2 = s`.
fn locate(s: f64) -> (Side, f64) {
    if s <= 1.0 {
        (Side::Near, s)
    } else {
        (Side::Far, 1.0 / s)
    }
}

#[derive(Clone, Debug)]
pub struct RadialMetric {
    pub epsilon: f64,
    /// Coefficients of `P`, lowest degree first.
    pub coeffs: Vec<f64>,
    /// The exponent `m` in `ψ = P / (1+s)^m`.
    pub power: u32,
    /// Smallest Kähler density on the check grid of either chart.
    pub min_density: f64,
    near: Chart,
    far: Chart,
}

const CHECK_POINTS: usize = 2000;

impl RadialMetric {
    pub fn new(epsilon: f64, coeffs: Vec<f64>, power: u32) -> Result<Self> {
        if !epsilon.is_finite() || coeffs.iter().any(|c| !c.is_finite()) {
            return Err(Error::Invalid("metric parameters must be finite".into()));
        }
        let deg = coeffs.iter().rposition(|c| *c != 0.0).unwrap_or(0);
        if deg > power as usize {
            return Err(Error::Invalid(format!(
                "bump numerator has degree {deg} above the power {power}: it does not decay"
            )));
        }
        let mut padded = coeffs.clone();
        padded.resize(power as usize + 1, 0.0);
        let reversed: Vec<f64> = padded.iter().rev().copied().collect();
        let near = Chart::new(epsilon, &padded, power);
        let far = Chart::new(epsilon, &reversed, power);
        let mut min_density = f64::INFINITY;
        for (side, chart) in [(Side::Near, &near), (Side::Far, &far)] {
            for i in 0..=CHECK_POINTS {
                let x = i as f64 / CHECK_POINTS as f64;
                let f = chart.density(x);
                if f <= 0.0 || f.is_nan() {
                    let s = if side == Side::Near { x } else { 1.0 / x };
                    return Err(Error::Positivity { s, value: f });
                }
                min_density = min_density.min(f);
            }
        }
        Ok(RadialMetric { epsilon, coeffs, power, min_density, near, far })
    }

    /// The Fubini–Study metric.
    pub fn round() -> Self {
        Self::new(0.0, vec![0.0], 0).expect("round metric")
    }

    /// `ψ = s/(1+s)^2` at the given strength.
    pub fn bumped(epsilon: f64) -> Result<Self> {
        Self::new(epsilon, vec![0.0, 1.0], 2)
    }

    /// `{"epsilon": e, "bump": {"type": "rational", "coeffs": [...], "power": m}}`;
    /// `power` defaults to the number of coefficients.
    pub fn from_json(v: &Value) -> Result<Self> {
        let eps = v
            .get("epsilon")
            .and_then(Value::as_f64)
            .ok_or_else(|| Error::Parse("epsilon: expected a number".into()))?;
        let Some(bump) = v.get("bump") else {
            return Self::new(eps, vec![0.0, 1.0], 2);
        };
        match bump.get("type").and_then(Value::as_str) {
            Some("rational") => {}
            other => return Err(Error::Parse(format!("bump.type: expected \"rational\", got {other:?}"))),
        }
        let coeffs = bump
            .get("coeffs")
            .and_then(Value::as_array)
            .ok_or_else(|| Error::Parse("bump.coeffs: expected an array".into()))?
            .iter()
            .enumerate()
            .map(|(i, c)| c.as_f64().ok_or_else(|| Error::Parse(format!("bump.coeffs[{i}]: expected a number"))))
            .collect::<Result<Vec<f64>>>()?;
        if coeffs.is_empty() {
            return Err(Error::Parse("bump.coeffs: empty".into()));
        }
        let power = match bump.get("power") {
            None => coeffs.len() as u32,
            Some(p) => p
                .as_u64()
                .and_then(|p| u32::try_from(p).ok())
                .ok_or_else(|| Error::Parse("bump.power: expected a nonnegative integer".into()))?,
        };
        Self::new(eps, coeffs, power)
    }

    pub fn to_json(&self) -> Value {
        json!({
            "epsilon": self.epsilon,
            "bump": { "type": "rational", "coeffs": self.coeffs, "power": self.power },
        })
    }

    fn chart(&self, side: Side) -> &Chart {
        match side {
            Side::Near => &self.near,
            Side::Far => &self.far,
        }
    }

    /// `u(s)`.
    pub fn potential(&self, s: f64) -> f64 {
        match locate(s) {
            (Side::Near, x) => self.near.potential(x),
            // u(s) = ũ(σ) + log s
            (Side::Far, x) => self.far.potential(x) + s.ln(),
        }
    }

    /// Density of `ω` against `ds dθ / 2π`.
    pub fn density(&self, s: f64) -> f64 {
        match locate(s) {
            (Side::Near, x) => self.near.density(x),
            (Side::Far, x) => self.far.density(x) * x * x,
        }
    }

    /// Total area of `ω`; equals 1 for every admissible bump.
    pub fn area(&self, quad: &Adaptive) -> f64 {
        SIDES
            .iter()
            .map(|&side| {
                let c = self.chart(side);
                quad.integrate_1d(|x, out| out[0] += c.density(x), 1, &[0.0, 1.0]).value[0]
            })
            .sum()
    }
}

/// Grid of `n` points `s = t/(1-t)` at the midpoints of `n` equal cells in
/// `t ∈ (0, 1)`; it is mapped to itself by `s ↦ 1/s`.
pub fn sphere_grid(n: usize) -> Vec<f64> {
    (0..n)
        .map(|i| {
            let t = (i as f64 + 0.5) / n as f64;
            t / (1.0 - t)
        })
        .collect()
}

/// Scalar curvature on the grid, differentiated symbolically.
pub fn scalar_curvature(m: &RadialMetric, grid: &[f64]) -> Result<Vec<f64>> {
    grid.iter()
        .map(|&s| {
            let (side, x) = locate(s);
            let (f, curv) = local_geometry(&m.chart(side).derivs(x), x);
            if f <= 0.0 {
                return Err(Error::Positivity { s, value: f });
            }
            Ok(curv)
        })
        .collect()
}

/// Squared `L^2` norms of the monomials `z^j`, `j = 0..=k`, for the metric
/// `e^{-k u}` and volume form `2πk ω`. With this normalization
/// `∫ ρ_k dμ_k = k + 1` and `2π ρ_k → 1`.
#[derive(Clone, Debug)]
pub struct Gram {
    pub k: usize,
    pub norms: Vec<f64>,
    log_norms: Vec<f64>,
    /// Largest relative error estimate over the norms.
    pub error: f64,
}

/// `log ∫_0^1 x^e e^{-k u(x)} f(x) dx` and its relative error estimate.
fn log_integral(chart: &Chart, e: usize, k: usize, quad: &Adaptive) -> Result<(f64, f64)> {
    let g = |x: f64| {
        let d = chart.derivs(x);
        let f = d[1] + x * d[2];
        let lx = if e == 0 { 0.0 } else { e as f64 * x.ln() };
        lx - k as f64 * d[0] + f.ln()
    };
    let scan = 256;
    let (mut top, mut arg) = (f64::NEG_INFINITY, 0.0);
    for i in 0..=scan {
        let x = i as f64 / scan as f64;
        let v = g(x);
        if v > top {
            top = v;
            arg = x;
        }
    }
    let mut breaks = vec![0.0];
    if arg > 0.0 && arg < 1.0 {
        breaks.push(arg);
    }
    breaks.push(1.0);
    let est = quad.integrate_1d(|x, out| out[0] += (g(x) - top).exp(), 1, &breaks);
    if est.error > quad.tol {
        return Err(Error::Quadrature { estimate: est.error, tol: quad.tol });
    }
    Ok((top + est.value[0].ln(), est.error / est.value[0]))
}

pub fn gram(m: &RadialMetric, k: usize, quad: &Adaptive) -> Result<Gram> {
    if k == 0 {
        return Err(Error::Invalid("level must be at least 1".into()));
    }
    let scale = (2.0 * PI * k as f64).ln();
    let parts: Vec<(f64, f64)> = (0..=k)
        .into_par_iter()
        .map(|j| {
            let (a, ea) = log_integral(&m.near, j, k, quad)?;
            let (b, eb) = log_integral(&m.far, k - j, k, quad)?;
            let hi = a.max(b);
            let (wa, wb) = ((a - hi).exp(), (b - hi).exp());
            Ok((scale + hi + (wa + wb).ln(), (ea * wa + eb * wb) / (wa + wb)))
        })
        .collect::<Result<_>>()?;
    let log_norms: Vec<f64> = parts.iter().map(|p| p.0).collect();
    Ok(Gram {
        k,
        norms: log_norms.iter().map(|l| l.exp()).collect(),
        log_norms,
        error: parts.iter().map(|p| p.1).fold(0.0, f64::max),
    })
}

/// Pointwise data in a chart coordinate.
struct Local {
    /// `2π ρ_k`.
    rho_hat: f64,
    /// Density of `ω`.
    density: f64,
    /// Density of `ω_{FS,k}`.
    fs: f64,
    /// `|s_j|^2 / Σ_i |s_i|^2`.
    probs: Vec<f64>,
}

impl Gram {
    pub fn log_norms(&self) -> &[f64] {
        &self.log_norms
    }

    /// `log(|z^j|^2 e^{k u} / ‖z^j‖^2)` in chart coordinates.
    fn log_weights(&self, side: Side, x: f64) -> Vec<f64> {
        (0..=self.k)
            .map(|j| {
                let e = if side == Side::Near { j } else { self.k - j };
                let lx = if e == 0 { 0.0 } else { e as f64 * x.ln() };
                lx - self.log_norms[j]
            })
            .collect()
    }

    fn local(&self, m: &RadialMetric, side: Side, x: f64) -> Local {
        let chart = m.chart(side);
        let d = chart.derivs(x);
        let lw = self.log_weights(side, x);
        let total = log_sum_exp(&lw);
        let probs: Vec<f64> = lw.iter().map(|l| (l - total).exp()).collect();
        let exps = |j: usize| if side == Side::Near { j as f64 } else { (self.k - j) as f64 };
        let mean: f64 = probs.iter().enumerate().map(|(j, p)| p * exps(j)).sum();
        let var: f64 = probs.iter().enumerate().map(|(j, p)| p * (exps(j) - mean).powi(2)).sum();
        Local {
            rho_hat: 2.0 * PI * (total - self.k as f64 * d[0]).exp(),
            density: d[1] + x * d[2],
            fs: var / (self.k as f64 * x),
            probs,
        }
    }
}

/// `ρ_k` on the grid.
pub fn rho(m: &RadialMetric, g: &Gram, grid: &[f64]) -> Vec<f64> {
    grid.par_iter()
        .map(|&s| {
            let (side, x) = locate(s);
            g.local(m, side, x).rho_hat / (2.0 * PI)
        })
        .collect()
}

/// `∫ ρ_k dμ_k`, integrated afresh from pointwise values of `ρ_k` on a
/// different set of panels than the norms themselves.
pub fn rho_integral(m: &RadialMetric, g: &Gram, quad: &Adaptive) -> (f64, f64) {
    let q = Adaptive { order: quad.order + 5, ..*quad };
    let k = g.k as f64;
    let mut total = Compensated::default();
    let mut error = 0.0;
    for side in SIDES {
        let e = q.integrate_1d(
            |x, out| {
                let l = g.local(m, side, x);
                out[0] += k * l.rho_hat * l.density;
            },
            1,
            &[0.0, 0.25, 0.5, 0.75, 1.0],
        );
        total.add(e.value[0]);
        error += e.error;
    }
    (total.value(), error)
}

/// Density of `ω_{FS,k} = ω + k^{-1} (i/2π) ∂∂̄ log ρ_k` against `ds dθ / 2π`.
/// Differentiating `log Σ_j s^j / ‖z^j‖^2` twice in `log s` gives the
/// variance of `j` under the weights `|z^j|^2 / ‖z^j‖^2`, so the density is
/// `Var(j) / (k s)`.
pub fn fs_pullback_form(m: &RadialMetric, g: &Gram, grid: &[f64]) -> Result<Vec<f64>> {
    grid.iter()
        .map(|&s| {
            let (side, x) = locate(s);
            let l = g.local(m, side, x);
            let d = if side == Side::Near { l.fs } else { l.fs * x * x };
            if d <= 0.0 {
                return Err(Error::Positivity { s, value: d });
            }
            Ok(d)
        })
        .collect()
}

/// Total mass of `ω_{FS,k}`.
pub fn fs_area(m: &RadialMetric, g: &Gram, quad: &Adaptive) -> f64 {
    SIDES
        .iter()
        .map(|&side| quad.integrate_1d(|x, out| out[0] += g.local(m, side, x).fs, 1, &[0.0, 0.5, 1.0]).value[0])
        .sum()
}

#[derive(Clone, Debug)]
pub struct ThetaVariation {
    pub k: usize,
    /// `∫ |Θ_k|`.
    pub value: f64,
    /// `∫ Θ_k`; zero since both terms have unit mass.
    pub signed: f64,
    pub error: f64,
}

fn bisect(f: impl Fn(f64) -> f64, mut a: f64, mut b: f64) -> f64 {
    let fa = f(a);
    for _ in 0..80 {
        let m = 0.5 * (a + b);
        if (f(m) > 0.0) == (fa > 0.0) {
            a = m;
        } else {
            b = m;
        }
    }
    0.5 * (a + b)
}

/// `∫ |Θ_k|` for `Θ_k = (ρ_k / P(k)) ω - ω_{FS,k}`, `P(k) = (k+1)/k`, with
/// `ρ_k` measured as `2π ρ_k`. Panels are split at the sign changes of the
/// integrand.
pub fn theta_total_variation(m: &RadialMetric, g: &Gram, quad: &Adaptive) -> Result<ThetaVariation> {
    theta_variation(m, g, quad, false)
}

/// `∫ |Θ_k - k^{-1} (S/2 - 1) ω|`: the part of `Θ_k` beyond the first-order
/// term of the density expansion, which vanishes for constant `S`.
pub fn theta_remainder_variation(m: &RadialMetric, g: &Gram, quad: &Adaptive) -> Result<ThetaVariation> {
    theta_variation(m, g, quad, true)
}

/// `∫ |S/2 - 1| ω`, the limit of `k ∫ |Θ_k|`.
pub fn curvature_deviation(m: &RadialMetric, quad: &Adaptive) -> f64 {
    SIDES
        .iter()
        .map(|&side| {
            let c = m.chart(side);
            let h = |x: f64| {
                let (f, s) = local_geometry(&c.derivs(x), x);
                (0.5 * s - 1.0) * f
            };
            quad.integrate_1d(|x, out| out[0] += h(x).abs(), 1, &sign_breaks(h)).value[0]
        })
        .sum()
}

/// Panel boundaries on `[0, 1]` at the sign changes of `h`.
fn sign_breaks(h: impl Fn(f64) -> f64 + Copy) -> Vec<f64> {
    let scan = 400;
    let mut breaks = vec![0.0];
    let mut prev = h(0.5 / scan as f64);
    for i in 1..scan {
        let (a, b) = ((i as f64 - 0.5) / scan as f64, (i as f64 + 0.5) / scan as f64);
        let cur = h(b);
        if (cur > 0.0) != (prev > 0.0) && cur != 0.0 && prev != 0.0 {
            breaks.push(bisect(h, a, b));
        }
        prev = cur;
    }
    breaks.push(1.0);
    breaks
}

fn theta_variation(m: &RadialMetric, g: &Gram, quad: &Adaptive, first_order: bool) -> Result<ThetaVariation> {
    let k = g.k as f64;
    let p = (k + 1.0) / k;
    let mut value = Compensated::default();
    let mut signed = Compensated::default();
    let mut error = 0.0;
    for side in SIDES {
        let theta = |x: f64| {
            let l = g.local(m, side, x);
            let t = l.rho_hat / p * l.density - l.fs;
            if first_order {
                let (f, s) = local_geometry(&m.chart(side).derivs(x), x);
                t - (0.5 * s - 1.0) * f / k
            } else {
                t
            }
        };
        let e = quad.integrate_1d(
            |x, out| {
                let t = theta(x);
                out[0] += t.abs();
                out[1] += t;
            },
            2,
            &sign_breaks(theta),
        );
        if e.error > quad.tol {
            return Err(Error::Quadrature { estimate: e.error, tol: quad.tol });
        }
        value.add(e.value[0]);
        signed.add(e.value[1]);
        error += e.error;
    }
    Ok(ThetaVariation { k: g.k, value: value.value(), signed: signed.value(), error })
}

/// Pointwise fit of `y_k = k (2π ρ_k - 1)` against `a_1 + b/k`.
#[derive(Clone, Debug)]
pub struct ExpansionFit {
    pub levels: Vec<usize>,
    pub grid: Vec<f64>,
    /// `2π ρ_k` per level, per grid point.
    pub rho_hat: Vec<Vec<f64>>,
    pub a1: Vec<f64>,
    pub b: Vec<f64>,
    /// `E_k = k^2 (2π ρ_k - 1 - a_1/k)` per level, per grid point.
    pub remainder: Vec<Vec<f64>>,
    /// Largest least-squares residual in `y_k`.
    pub residual: f64,
}

impl ExpansionFit {
    /// `max_k |E_k|` per grid point.
    pub fn remainder_bound(&self) -> Vec<f64> {
        (0..self.grid.len())
            .map(|i| self.remainder.iter().map(|r| r[i].abs()).fold(0.0, f64::max))
            .collect()
    }
}

pub fn expansion_fit(m: &RadialMetric, levels: &[usize], grid: &[f64], quad: &Adaptive) -> Result<ExpansionFit> {
    let mut distinct = levels.to_vec();
    distinct.sort_unstable();
    distinct.dedup();
    if distinct.len() < 3 {
        return Err(Error::IllConditioned(format!("need at least 3 distinct levels, got {}", distinct.len())));
    }
    let grams: Vec<Gram> = distinct.par_iter().map(|&k| gram(m, k, quad)).collect::<Result<_>>()?;
    let rho_hat: Vec<Vec<f64>> = grams.iter().map(|g| rho(m, g, grid).iter().map(|r| 2.0 * PI * r).collect()).collect();
    // normal equations for the basis (1, 1/k)
    let xs: Vec<f64> = distinct.iter().map(|&k| 1.0 / k as f64).collect();
    let n = xs.len() as f64;
    let sx: f64 = xs.iter().sum();
    let sxx: f64 = xs.iter().map(|x| x * x).sum();
    let det = n * sxx - sx * sx;
    let mut a1 = Vec::with_capacity(grid.len());
    let mut b = Vec::with_capacity(grid.len());
    let mut residual: f64 = 0.0;
    for i in 0..grid.len() {
        let ys: Vec<f64> = distinct.iter().zip(&rho_hat).map(|(&k, r)| k as f64 * (r[i] - 1.0)).collect();
        let sy: f64 = ys.iter().sum();
        let sxy: f64 = xs.iter().zip(&ys).map(|(x, y)| x * y).sum();
        let c0 = (sxx * sy - sx * sxy) / det;
        let c1 = (n * sxy - sx * sy) / det;
        for (x, y) in xs.iter().zip(&ys) {
            residual = residual.max((y - c0 - c1 * x).abs());
        }
        a1.push(c0);
        b.push(c1);
    }
    let remainder = distinct
        .iter()
        .zip(&rho_hat)
        .map(|(&k, r)| {
            let k = k as f64;
            r.iter().zip(&a1).map(|(r, a)| k * k * (r - 1.0 - a / k)).collect()
        })
        .collect();
    Ok(ExpansionFit { levels: distinct, grid: grid.to_vec(), rho_hat, a1, b, remainder, residual })
}

/// Diagonal of the trace-free moment matrix of the level-`k` embedding by
/// the orthonormal monomials: `∫ p_j ω_{FS,k} - 1/(k+1)`, with
/// `p_j = |s_j|^2 / Σ_i |s_i|^2`. Returns the diagonal and an error estimate.
pub fn bergman_moment(m: &RadialMetric, g: &Gram, quad: &Adaptive) -> Result<(Vec<f64>, f64)> {
    let n = g.k + 1;
    let mut acc = vec![Compensated::default(); n];
    let mut error = 0.0;
    let share = Adaptive { tol: quad.tol / 2.0, ..*quad };
    for side in SIDES {
        let e = share.integrate_1d(
            |x, out| {
                let l = g.local(m, side, x);
                for (o, p) in out.iter_mut().zip(&l.probs) {
                    *o += p * l.fs;
                }
            },
            n,
            &[0.0, 0.5, 1.0],
        );
        if e.error > share.tol {
            return Err(Error::Quadrature { estimate: e.error, tol: share.tol });
        }
        for (a, v) in acc.iter_mut().zip(&e.value) {
            a.add(*v);
        }
        error += e.error;
    }
    Ok((acc.iter().map(|a| a.value() - 1.0 / n as f64).collect(), error))
}

/// `⟨M_k, A⟩ = V^{-1} ∫ H_A dμ_{FS,k}` for diagonal `A`, with its trace
/// removed.
pub fn moment_from_bergman(m: &RadialMetric, g: &Gram, a: &[f64], quad: &Adaptive) -> Result<f64> {
    if a.len() != g.k + 1 {
        return Err(Error::SizeMismatch { expected: g.k + 1, got: a.len() });
    }
    let (diag, _) = bergman_moment(m, g, quad)?;
    Ok(crate::quad::sum(diag.iter().zip(a).map(|(d, l)| d * l)))
}

/// The image of the sphere under `z ↦ [z^j / ‖z^j‖]_j` in `P^k`.
pub fn embedding_curve(g: &Gram) -> ProjectiveCycle {
    let n = g.k + 1;
    let coords = (0..n)
        .map(|j| {
            let mut p = vec![Complex64::default(); n];
            p[j] = Complex64::new((-0.5 * g.log_norms[j]).exp(), 0.0);
            p
        })
        .collect();
    ProjectiveCycle::curves(g.k, vec![Component { coords, multiplicity: 1 }]).expect("monomial curve")
}

/// Default quadrature for the radial integrals.
pub fn default_quad() -> Adaptive {
    Adaptive { order: 20, tol: 1e-13, max_depth: 30 }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn quad() -> Adaptive {
        default_quad()
    }

    #[test]
    fn round_curvature_is_two() {
        let s = scalar_curvature(&RadialMetric::round(), &sphere_grid(50)).unwrap();
        assert!(s.iter().all(|v| (v - 2.0).abs() < 1e-12), "{s:?}");
    }

    #[test]
    fn homothety_scales_curvature() {
        let m = RadialMetric::bumped(0.1).unwrap();
        for s in [0.1, 0.7, 1.0] {
            let d = m.near.derivs(s);
            let scaled = d.map(|x| 3.0 * x);
            let (_, a) = local_geometry(&d, s);
            let (_, b) = local_geometry(&scaled, s);
            assert!((b - a / 3.0).abs() < 1e-13);
        }
    }

    #[test]
    fn curvature_linearizes_in_epsilon() {
        // δS for ψ = s/(1+s)^2 around the round metric, worked out by hand
        // in q = 1/(1+s): δS = 4 - 24 q + 24 q^2.
        let grid = sphere_grid(40);
        let eps = 1e-3;
        let s0 = scalar_curvature(&RadialMetric::round(), &grid).unwrap();
        let s1 = scalar_curvature(&RadialMetric::bumped(eps).unwrap(), &grid).unwrap();
        for ((s, a), b) in grid.iter().zip(&s0).zip(&s1) {
            let q = 1.0 / (1.0 + s);
            let lin = 4.0 - 24.0 * q + 24.0 * q * q;
            assert!(((b - a) / eps - lin).abs() <= 0.01 * 4.0, "s = {s}");
        }
    }

    #[test]
    fn area_is_one() {
        for m in [RadialMetric::round(), RadialMetric::bumped(0.1).unwrap(), RadialMetric::new(0.05, vec![1.0, -2.0, 0.5], 3).unwrap()] {
            assert!((m.area(&quad()) - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn charts_agree_on_the_potential() {
        let m = RadialMetric::new(0.2, vec![0.3, 1.0, 0.0, 0.5], 3).unwrap();
        let p = |s: f64| s.ln_1p() + 0.2 * (0.3 + s + 0.5 * s.powi(3)) / (1.0 + s).powi(3);
        for s in [0.5, 1.0, 1.5, 7.0, 100.0] {
            assert!((m.potential(s) - p(s)).abs() < 1e-12, "s = {s}");
        }
    }

    #[test]
    fn positivity_failure_is_reported() {
        assert!(matches!(RadialMetric::bumped(-3.0), Err(Error::Positivity { .. })));
        assert!(matches!(RadialMetric::new(0.1, vec![0.0, 0.0, 0.0, 1.0], 2), Err(Error::Invalid(_))));
    }

    #[test]
    fn round_norms_are_beta_integrals() {
        for k in [1, 5, 16, 40] {
            let g = gram(&RadialMetric::round(), k, &quad()).unwrap();
            // ‖z^j‖^2 / ‖1‖^2 = j! (k-j)! / k! = 1 / binom(k, j)
            let mut binom = 1.0f64;
            for j in 0..=k {
                let ratio = g.norms[j] / g.norms[0];
                assert!((ratio * binom - 1.0).abs() < 1e-10, "k = {k}, j = {j}");
                binom = binom * (k - j) as f64 / (j + 1) as f64;
            }
            let first = 2.0 * PI * k as f64 / (k as f64 + 1.0);
            assert!((g.norms[0] / first - 1.0).abs() < 1e-11);
        }
    }

    #[test]
    fn symmetric_bump_gives_symmetric_norms() {
        let g = gram(&RadialMetric::bumped(0.1).unwrap(), 20, &quad()).unwrap();
        for j in 0..=20 {
            assert!((g.norms[j] / g.norms[20 - j] - 1.0).abs() < 1e-11);
        }
        let g = gram(&RadialMetric::new(0.1, vec![0.0, 1.0, 1.0], 3).unwrap(), 64, &quad()).unwrap();
        assert!(g.norms.iter().all(|n| *n > 0.0));
    }

    #[test]
    fn rho_integrates_to_dimension() {
        for m in [RadialMetric::round(), RadialMetric::bumped(0.1).unwrap()] {
            for k in [3, 17] {
                let g = gram(&m, k, &quad()).unwrap();
                let (v, _) = rho_integral(&m, &g, &quad());
                assert!((v - (k as f64 + 1.0)).abs() < 1e-9, "{v}");
            }
        }
    }

    #[test]
    fn round_rho_is_constant() {
        let g = gram(&RadialMetric::round(), 12, &quad()).unwrap();
        let r = rho(&RadialMetric::round(), &g, &sphere_grid(100));
        let want = 13.0 / (2.0 * PI * 12.0);
        assert!(r.iter().all(|v| (v - want).abs() < 1e-11));
    }

    #[test]
    fn round_pullback_is_the_round_form() {
        let m = RadialMetric::round();
        let grid = sphere_grid(60);
        let g = gram(&m, 9, &quad()).unwrap();
        let d = fs_pullback_form(&m, &g, &grid).unwrap();
        for (s, v) in grid.iter().zip(&d) {
            assert!((v - m.density(*s)).abs() < 1e-11);
        }
    }

    #[test]
    fn pullback_has_unit_mass() {
        let m = RadialMetric::bumped(0.1).unwrap();
        let g = gram(&m, 10, &quad()).unwrap();
        assert!((fs_area(&m, &g, &quad()) - 1.0).abs() < 1e-10);
    }

    #[test]
    fn round_theta_vanishes() {
        let m = RadialMetric::round();
        let g = gram(&m, 8, &quad()).unwrap();
        assert!(theta_total_variation(&m, &g, &quad()).unwrap().value < 1e-11);
    }

    #[test]
    fn fit_needs_three_levels() {
        let m = RadialMetric::round();
        assert!(matches!(expansion_fit(&m, &[8, 8, 16], &[1.0], &quad()), Err(Error::IllConditioned(_))));
    }

    #[test]
    fn moment_pairing_checks_size() {
        let m = RadialMetric::round();
        let g = gram(&m, 3, &quad()).unwrap();
        assert!(matches!(moment_from_bergman(&m, &g, &[1.0, -1.0], &quad()), Err(Error::SizeMismatch { .. })));
        let (d, _) = bergman_moment(&m, &g, &quad()).unwrap();
        assert!(d.iter().all(|v| v.abs() < 1e-12), "{d:?}");
    }
}
