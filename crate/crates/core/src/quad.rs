//! Gauss–Legendre quadrature, compensated sums and adaptive panel
//! integration with error estimates from order doubling.

use rayon::prelude::*;

/// Nodes and weights on `[-1, 1]`.
#[derive(Clone, Debug)]
pub struct Rule {
    pub nodes: Vec<f64>,
    pub weights: Vec<f64>,
}

impl Rule {
    /// Newton iteration on the three-term recurrence, started from the
    /// Chebyshev-like guesses. Accurate to a few ulps for the orders used
    /// here (up to a few hundred).
    pub fn gauss_legendre(q: usize) -> Rule {
        assert!(q >= 1);
        let mut nodes = vec![0.0; q];
        let mut weights = vec![0.0; q];
        let n = q as f64;
        for i in 0..q.div_ceil(2) {
            let mut x = (std::f64::consts::PI * (i as f64 + 0.75) / (n + 0.5)).cos();
            let mut dp = 0.0;
            for _ in 0..100 {
                let (mut p0, mut p1) = (1.0, x);
                for j in 2..=q {
                    let j = j as f64;
                    let p2 = ((2.0 * j - 1.0) * x * p1 - (j - 1.0) * p0) / j;
                    p0 = p1;
                    p1 = p2;
                }
                let p = if q == 1 { x } else { p1 };
                let pm1 = if q == 1 { 1.0 } else { p0 };
                dp = n * (x * p - pm1) / (x * x - 1.0);
                let dx = p / dp;
                x -= dx;
                if dx.abs() < 1e-16 {
                    break;
                }
            }
            if q == 1 {
                x = 0.0;
                dp = 1.0;
            }
            let w = 2.0 / ((1.0 - x * x) * dp * dp);
            nodes[i] = -x;
            nodes[q - 1 - i] = x;
            weights[i] = w;
            weights[q - 1 - i] = w;
        }
        if q == 1 {
            weights[0] = 2.0;
        }
        Rule { nodes, weights }
    }

    /// Nodes and weights mapped to `[a, b]`.
    pub fn mapped(&self, a: f64, b: f64) -> impl Iterator<Item = (f64, f64)> + '_ {
        let (c, h) = (0.5 * (a + b), 0.5 * (b - a));
        self.nodes.iter().zip(&self.weights).map(move |(x, w)| (c + h * x, h * w))
    }
}

/// Neumaier's variant of Kahan summation.
#[derive(Clone, Copy, Debug, Default)]
pub struct Compensated {
    sum: f64,
    c: f64,
}

impl Compensated {
    pub fn add(&mut self, x: f64) {
        let t = self.sum + x;
        if self.sum.abs() >= x.abs() {
            self.c += (self.sum - t) + x;
        } else {
            self.c += (x - t) + self.sum;
        }
        self.sum = t;
    }

    pub fn value(&self) -> f64 {
        self.sum + self.c
    }
}

pub fn sum(xs: impl IntoIterator<Item = f64>) -> f64 {
    let mut acc = Compensated::default();
    for x in xs {
        acc.add(x);
    }
    acc.value()
}

/// Vector-valued integral with an error estimate (max over components).
#[derive(Clone, Debug)]
pub struct Estimate {
    pub value: Vec<f64>,
    pub error: f64,
    pub evaluations: usize,
}

#[derive(Clone, Copy, Debug)]
pub struct Adaptive {
    /// Base order; each panel is also integrated at twice this order.
    pub order: usize,
    /// Absolute tolerance on the whole domain.
    pub tol: f64,
    pub max_depth: usize,
}

impl Default for Adaptive {
    fn default() -> Self {
        Adaptive { order: 16, tol: 1e-12, max_depth: 12 }
    }
}

fn vec_sum(parts: &[Vec<f64>], len: usize) -> Vec<f64> {
    (0..len).map(|i| sum(parts.iter().map(|p| p[i]))).collect()
}

fn max_diff(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max)
}

impl Adaptive {
    /// Tensor rule on the rectangle `[a0, a1] x [b0, b1]`.
    fn tensor<F>(rule: &Rule, f: &F, len: usize, r: [f64; 4]) -> Vec<f64>
    where
        F: Fn(f64, f64, &mut [f64]) + Sync,
    {
        let mut acc = vec![Compensated::default(); len];
        let mut buf = vec![0.0; len];
        for (x, wx) in rule.mapped(r[0], r[1]) {
            for (y, wy) in rule.mapped(r[2], r[3]) {
                buf.iter_mut().for_each(|v| *v = 0.0);
                f(x, y, &mut buf);
                for (a, v) in acc.iter_mut().zip(&buf) {
                    a.add(wx * wy * v);
                }
            }
        }
        acc.iter().map(Compensated::value).collect()
    }

    /// Integrates `f(x, y, out)` (which adds its `len` values into `out`)
    /// over a rectangle. Panels whose order-doubling discrepancy exceeds
    /// their share of the tolerance are split in four.
    pub fn integrate_2d<F>(&self, f: F, len: usize, rect: [f64; 4]) -> Estimate
    where
        F: Fn(f64, f64, &mut [f64]) + Sync,
    {
        let lo = Rule::gauss_legendre(self.order);
        let hi = Rule::gauss_legendre(2 * self.order);
        let area = (rect[1] - rect[0]) * (rect[3] - rect[2]);
        let per_panel = (self.order * self.order + 4 * self.order * self.order) as usize;
        let mut pending = vec![(rect, 0usize)];
        let mut done: Vec<(Vec<f64>, f64)> = Vec::new();
        let mut evaluations = 0;
        while !pending.is_empty() {
            let results: Vec<(Vec<f64>, f64)> = pending
                .par_iter()
                .map(|(r, _)| {
                    let a = Self::tensor(&lo, &f, len, *r);
                    let b = Self::tensor(&hi, &f, len, *r);
                    let err = max_diff(&a, &b);
                    (b, err)
                })
                .collect();
            evaluations += per_panel * pending.len();
            let mut next = Vec::new();
            for ((r, depth), (v, err)) in pending.into_iter().zip(results) {
                let share = self.tol * (r[1] - r[0]) * (r[3] - r[2]) / area;
                if err <= share || depth >= self.max_depth {
                    done.push((v, err));
                } else {
                    let (mx, my) = (0.5 * (r[0] + r[1]), 0.5 * (r[2] + r[3]));
                    for q in [[r[0], mx, r[2], my], [mx, r[1], r[2], my], [r[0], mx, my, r[3]], [mx, r[1], my, r[3]]] {
                        next.push((q, depth + 1));
                    }
                }
            }
            pending = next;
        }
        let values: Vec<Vec<f64>> = done.iter().map(|(v, _)| v.clone()).collect();
        Estimate { value: vec_sum(&values, len), error: sum(done.iter().map(|d| d.1)), evaluations }
    }

    /// One-dimensional counterpart of [`Adaptive::integrate_2d`], splitting
    /// panels in two. `breaks` seeds the initial panels.
    pub fn integrate_1d<F>(&self, f: F, len: usize, breaks: &[f64]) -> Estimate
    where
        F: Fn(f64, &mut [f64]) + Sync,
    {
        let lo = Rule::gauss_legendre(self.order);
        let hi = Rule::gauss_legendre(2 * self.order);
        let span = breaks[breaks.len() - 1] - breaks[0];
        let panel = |rule: &Rule, a: f64, b: f64| -> Vec<f64> {
            let mut acc = vec![Compensated::default(); len];
            let mut buf = vec![0.0; len];
            for (x, w) in rule.mapped(a, b) {
                buf.iter_mut().for_each(|v| *v = 0.0);
                f(x, &mut buf);
                for (a, v) in acc.iter_mut().zip(&buf) {
                    a.add(w * v);
                }
            }
            acc.iter().map(Compensated::value).collect()
        };
        let mut pending: Vec<(f64, f64, usize)> = breaks.windows(2).map(|w| (w[0], w[1], 0)).collect();
        let mut done: Vec<(f64, Vec<f64>, f64)> = Vec::new();
        let mut evaluations = 0;
        while !pending.is_empty() {
            let results: Vec<(Vec<f64>, f64)> = pending
                .par_iter()
                .map(|&(a, b, _)| {
                    let x = panel(&lo, a, b);
                    let y = panel(&hi, a, b);
                    let err = max_diff(&x, &y);
                    (y, err)
                })
                .collect();
            evaluations += 3 * self.order * pending.len();
            let mut next = Vec::new();
            for ((a, b, depth), (v, err)) in pending.into_iter().zip(results) {
                if err <= self.tol * (b - a) / span || depth >= self.max_depth {
                    done.push((a, v, err));
                } else {
                    let m = 0.5 * (a + b);
                    next.push((a, m, depth + 1));
                    next.push((m, b, depth + 1));
                }
            }
            pending = next;
        }
        // sum panels left to right so the result does not depend on the split history
        done.sort_by(|x, y| x.0.total_cmp(&y.0));
        let values: Vec<Vec<f64>> = done.iter().map(|d| d.1.clone()).collect();
        Estimate { value: vec_sum(&values, len), error: sum(done.iter().map(|d| d.2)), evaluations }
    }
}
