//! Weight polynomials of equivariant degenerations.
//!
//! A [`WeightSystem`] records the weights of the `C*`-action on the
//! coordinates of the ambient projective space, i.e. the diagonal of `A` in
//! the loop normal form. At level `k` the action induces weights on a
//! monomial basis of the degree-`k` part of the coordinate ring of the
//! central fibre, and `τ_k` is their sum.
//!
//! Sign: with [`SignConvention::Calibrated`] `τ_k` is the plain weight sum.
//! This makes `I < 0` for normalised nontrivial systems and gives the conic
//! degeneration `diag(1, 1, t)` the Chow weight `+1/12`, the value of its
//! pole-order formula.

use std::collections::BTreeMap;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};
use serde::{Deserialize, Serialize};

use crate::rational::rat;
use crate::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SignConvention {
    #[default]
    Calibrated,
    Flipped,
}

impl SignConvention {
    pub fn factor(self) -> i64 {
        match self {
            SignConvention::Calibrated => 1,
            SignConvention::Flipped => -1,
        }
    }
}

impl std::str::FromStr for SignConvention {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "calibrated" => Ok(Self::Calibrated),
            "flipped" => Ok(Self::Flipped),
            other => Err(Error::Parse(format!("unknown sign convention {other:?}"))),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "lowercase")]
pub enum Geometry {
    Projective,
    /// Central fibre cut out by a form of the given degree on which the
    /// action has weight `initial_weight`.
    Hypersurface { degree: u32, initial_weight: i64 },
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct WeightSystem {
    pub dim: usize,
    pub generators: Vec<i64>,
    pub geometry: Geometry,
}

/// Multiset of weights: weight -> multiplicity.
pub type WeightCounts = BTreeMap<i64, BigInt>;

/// Weights of all degree-`k` monomials in variables of weights `w`.
fn monomial_counts(w: &[i64], k: u64) -> WeightCounts {
    // dp[j] = counts for degree j using the variables seen so far
    let k = k as usize;
    let mut dp: Vec<WeightCounts> = vec![WeightCounts::new(); k + 1];
    dp[0].insert(0, BigInt::one());
    for &wi in w {
        for j in 1..=k {
            let prev = dp[j - 1].clone();
            for (wt, c) in prev {
                *dp[j].entry(wt + wi).or_insert_with(BigInt::zero) += c;
            }
        }
    }
    dp.pop().unwrap_or_default()
}

impl WeightSystem {
    pub fn projective(generators: Vec<i64>) -> Result<Self> {
        let w = WeightSystem { dim: generators.len().saturating_sub(1), generators, geometry: Geometry::Projective };
        w.validate()?;
        Ok(w)
    }

    pub fn hypersurface(generators: Vec<i64>, degree: u32, initial_weight: i64) -> Result<Self> {
        let w = WeightSystem {
            dim: generators.len().saturating_sub(2),
            generators,
            geometry: Geometry::Hypersurface { degree, initial_weight },
        };
        w.validate()?;
        Ok(w)
    }

    pub fn from_json(v: &serde_json::Value) -> Result<Self> {
        let w: WeightSystem =
            serde_json::from_value(v.clone()).map_err(|e| Error::Parse(format!("weight system: {e}")))?;
        w.validate()?;
        Ok(w)
    }

    /// Ambient `N`, the projective dimension of the coordinate space.
    pub fn ambient(&self) -> usize {
        self.generators.len() - 1
    }

    pub fn validate(&self) -> Result<()> {
        let expected = match self.geometry {
            Geometry::Projective => self.dim + 1,
            Geometry::Hypersurface { .. } => self.dim + 2,
        };
        if self.generators.len() != expected {
            return Err(Error::InvalidWeights(format!(
                "dimension {} needs {expected} generator weights, got {}",
                self.dim,
                self.generators.len()
            )));
        }
        if let Geometry::Hypersurface { degree, initial_weight } = self.geometry {
            if degree == 0 {
                return Err(Error::InvalidWeights("hypersurface degree must be positive".into()));
            }
            if !monomial_counts(&self.generators, degree as u64).contains_key(&initial_weight) {
                return Err(Error::InvalidWeights(format!(
                    "initial weight {initial_weight} is not the weight of any degree-{degree} monomial"
                )));
            }
        }
        Ok(())
    }

    /// Shift so the largest generator weight is 0. The initial form shifts
    /// by `degree` times the same amount.
    pub fn normalized(&self) -> Self {
        let top = *self.generators.iter().max().expect("validated");
        let geometry = match self.geometry {
            Geometry::Projective => Geometry::Projective,
            Geometry::Hypersurface { degree, initial_weight } => {
                Geometry::Hypersurface { degree, initial_weight: initial_weight - degree as i64 * top }
            }
        };
        WeightSystem { dim: self.dim, generators: self.generators.iter().map(|w| w - top).collect(), geometry }
    }

    pub fn is_trivial(&self) -> bool {
        self.generators.windows(2).all(|p| p[0] == p[1])
    }

    /// False when the initial form is a power of the only coordinate of
    /// extremal weight. The extremal monomials then die in the quotient and
    /// the level-`k` spread grows slower than `k`.
    pub fn extremes_survive(&self) -> bool {
        let Geometry::Hypersurface { degree, initial_weight } = self.geometry else {
            return true;
        };
        let d = degree as i64;
        let unique = |x: i64| self.generators.iter().filter(|&&w| w == x).count() == 1;
        let max = *self.generators.iter().max().expect("validated");
        let min = *self.generators.iter().min().expect("validated");
        !(initial_weight == d * max && unique(max) || initial_weight == d * min && unique(min))
    }

    /// Multiset of level-`k` weights. For a hypersurface the quotient by
    /// the initial form removes one copy of `m · F` for every monomial `m`
    /// of degree `k - d`.
    pub fn induced_counts(&self, k: u64) -> WeightCounts {
        let mut counts = monomial_counts(&self.generators, k);
        if let Geometry::Hypersurface { degree, initial_weight } = self.geometry {
            if k >= degree as u64 {
                for (wt, c) in monomial_counts(&self.generators, k - degree as u64) {
                    let e = counts.get_mut(&(wt + initial_weight)).expect("multiplication by F is injective");
                    *e -= c;
                    if e.is_zero() {
                        counts.remove(&(wt + initial_weight));
                    }
                }
            }
        }
        counts
    }

    /// Level-`k` weights in nonincreasing order.
    pub fn induced_weights(&self, k: u64) -> Vec<i64> {
        let mut out = Vec::new();
        for (&wt, c) in self.induced_counts(k).iter().rev() {
            let c: usize = c.try_into().expect("multiplicity fits in memory");
            out.extend(std::iter::repeat(wt).take(c));
        }
        out
    }

    /// `(dim H^0(L^k), Σ weights)` at level `k`.
    pub fn level_data(&self, k: u64) -> (BigInt, BigInt) {
        let counts = self.induced_counts(k);
        let dim = counts.values().sum();
        let sum = counts.iter().map(|(&w, c)| BigInt::from(w) * c).sum();
        (dim, sum)
    }
}

/// Spread of a weight multiset.
pub fn gap(weights: &[i64]) -> Result<i64> {
    let max = weights.iter().max().ok_or(Error::EmptyWeights)?;
    let min = weights.iter().min().ok_or(Error::EmptyWeights)?;
    Ok(max - min)
}

/// Gap of the level-`k` weights, read off the weight histogram.
pub fn induced_gap(w: &WeightSystem, k: u64) -> i64 {
    let c = w.induced_counts(k);
    match (c.keys().next(), c.keys().next_back()) {
        (Some(lo), Some(hi)) => hi - lo,
        _ => 0,
    }
}

/// Exact `τ_k` together with the Hilbert polynomial `N(k) + 1`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct TauPolynomial {
    pub dim: usize,
    /// `coeffs[i]` multiplies `k^i`; length `dim + 2`.
    pub coeffs: Vec<BigRational>,
    /// `hilbert[i]` multiplies `k^i`; length `dim + 1`.
    pub hilbert: Vec<BigRational>,
}

fn eval(p: &[BigRational], k: &BigRational) -> BigRational {
    p.iter().rev().fold(BigRational::zero(), |acc, c| acc * k + c)
}

/// Coefficients of the interpolating polynomial through `(x_i, y_i)`.
fn interpolate(xs: &[BigRational], ys: &[BigRational]) -> Vec<BigRational> {
    let n = xs.len();
    let mut out = vec![BigRational::zero(); n];
    for i in 0..n {
        // basis polynomial prod_{j != i} (k - x_j) / (x_i - x_j)
        let mut basis = vec![BigRational::one()];
        let mut denom = BigRational::one();
        for j in 0..n {
            if j == i {
                continue;
            }
            let mut next = vec![BigRational::zero(); basis.len() + 1];
            for (d, c) in basis.iter().enumerate() {
                next[d + 1] += c;
                next[d] -= c * &xs[j];
            }
            basis = next;
            denom *= &xs[i] - &xs[j];
        }
        let scale = &ys[i] / denom;
        for (o, b) in out.iter_mut().zip(&basis) {
            *o += b * &scale;
        }
    }
    out
}

impl TauPolynomial {
    pub fn eval(&self, k: u64) -> BigRational {
        eval(&self.coeffs, &rat(k as i64))
    }

    /// `N(k) + 1`.
    pub fn hilbert_eval(&self, k: u64) -> BigRational {
        eval(&self.hilbert, &rat(k as i64))
    }

    /// Leading coefficient of the Hilbert polynomial.
    pub fn volume(&self) -> BigRational {
        self.hilbert[self.dim].clone()
    }

    /// `α_1` in `N(k) + 1 = V k^n (1 + α_1/k + ...)`.
    pub fn alpha1(&self) -> BigRational {
        if self.dim == 0 {
            return BigRational::zero();
        }
        &self.hilbert[self.dim - 1] / self.volume()
    }

    /// Same Hilbert data, zero weights.
    pub fn trivial_like(&self) -> Self {
        TauPolynomial { dim: self.dim, coeffs: vec![BigRational::zero(); self.dim + 2], hilbert: self.hilbert.clone() }
    }

    pub fn difference(&self, other: &Self) -> Result<Self> {
        if self.dim != other.dim || self.hilbert != other.hilbert {
            return Err(Error::HilbertMismatch);
        }
        Ok(TauPolynomial {
            dim: self.dim,
            coeffs: self.coeffs.iter().zip(&other.coeffs).map(|(a, b)| a - b).collect(),
            hilbert: self.hilbert.clone(),
        })
    }
}

/// Fits `τ_k` at `n + 2` levels starting from `k0` and checks the fit on
/// three further levels. Small levels can fall outside the polynomial
/// range when the degree of a hypersurface exceeds its ambient dimension;
/// raise `k0` then.
pub fn tau_poly(w: &WeightSystem, sign: SignConvention, k0: u64) -> Result<TauPolynomial> {
    w.validate()?;
    let k0 = k0.max(1);
    let n = w.dim;
    let ks: Vec<u64> = (k0..k0 + n as u64 + 5).collect();
    let data: Vec<(BigInt, BigInt)> = {
        use rayon::prelude::*;
        ks.par_iter().map(|&k| w.level_data(k)).collect()
    };
    let s = BigInt::from(sign.factor());
    let xs: Vec<BigRational> = ks.iter().map(|&k| rat(k as i64)).collect();
    let taus: Vec<BigRational> = data.iter().map(|(_, t)| BigRational::from_integer(t * &s)).collect();
    let dims: Vec<BigRational> = data.iter().map(|(d, _)| BigRational::from_integer(d.clone())).collect();

    let coeffs = interpolate(&xs[..n + 2], &taus[..n + 2]);
    let hilbert = interpolate(&xs[..n + 1], &dims[..n + 1]);
    for i in 0..xs.len() {
        if eval(&coeffs, &xs[i]) != taus[i] || eval(&hilbert, &xs[i]) != dims[i] {
            return Err(Error::NotPolynomial { k: ks[i] });
        }
    }
    let tau = TauPolynomial { dim: n, coeffs, hilbert };
    if !tau.volume().is_positive() {
        return Err(Error::InvalidWeights("Hilbert polynomial has nonpositive leading term".into()));
    }
    Ok(tau)
}

/// Coefficient of `k^(n+1)`.
pub fn i_coefficient(tau: &TauPolynomial) -> BigRational {
    tau.coeffs[tau.dim + 1].clone()
}

/// `Ch_k = τ_k / (N(k) + 1) - k I / V`.
pub fn chow_k(tau: &TauPolynomial, k: u64) -> BigRational {
    tau.eval(k) / tau.hilbert_eval(k) - rat(k as i64) * i_coefficient(tau) / tau.volume()
}

/// `lim Ch_k = (J - I α_1) / V` with `τ_k = I k^(n+1) + J k^n + ...`.
pub fn futaki(tau: &TauPolynomial) -> BigRational {
    let j = &tau.coeffs[tau.dim];
    (j - i_coefficient(tau) * tau.alpha1()) / tau.volume()
}

pub fn relative_futaki(tau1: &TauPolynomial, tau2: &TauPolynomial) -> Result<BigRational> {
    Ok(futaki(&tau1.difference(tau2)?))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rational::ratio;

    /// All exponent vectors of degree `k` in `n` variables.
    fn monomials(n: usize, k: u64) -> Vec<Vec<u64>> {
        if n == 1 {
            return vec![vec![k]];
        }
        let mut out = Vec::new();
        for first in 0..=k {
            for mut rest in monomials(n - 1, k - first) {
                rest.insert(0, first);
                out.push(rest);
            }
        }
        out
    }

    /// Weights of the standard monomials modulo a monomial of the initial
    /// weight: the quotient by `F` has the same Hilbert function and weights.
    fn enumerate(w: &[i64], k: u64, lead: Option<&[u64]>) -> Vec<i64> {
        let mut out: Vec<i64> = monomials(w.len(), k)
            .into_iter()
            .filter(|m| lead.is_none_or(|l| !m.iter().zip(l).all(|(a, b)| a >= b)))
            .map(|m| m.iter().zip(w).map(|(&e, &x)| e as i64 * x).sum())
            .collect();
        out.sort_by(|a, b| b.cmp(a));
        out
    }

    fn conic() -> WeightSystem {
        WeightSystem::hypersurface(vec![0, 0, -1], 2, -1).unwrap()
    }

    #[test]
    fn projective_line_small_cases() {
        let w = WeightSystem::projective(vec![0, 0]).unwrap();
        assert_eq!(w.induced_weights(5), vec![0; 6]);
        let w = WeightSystem::projective(vec![3, -2]).unwrap();
        assert_eq!(w.induced_weights(2), vec![6, 1, -4]);
    }

    #[test]
    fn conic_matches_enumeration() {
        let w = conic();
        for k in 1..=6 {
            // x z has weight -1
            assert_eq!(w.induced_weights(k), enumerate(&[0, 0, -1], k, Some(&[1, 0, 1])), "k = {k}");
        }
    }

    #[test]
    fn cubic_surface_matches_enumeration() {
        let g = vec![2, 0, -1, -3];
        // x z^2 has weight 2 - 2 = 0
        let w = WeightSystem::hypersurface(g.clone(), 3, 0).unwrap();
        for k in 1..=5 {
            assert_eq!(w.induced_weights(k), enumerate(&g, k, Some(&[1, 0, 2, 0])));
        }
    }

    #[test]
    fn gaps() {
        assert_eq!(gap(&[0, 0, 0]).unwrap(), 0);
        assert_eq!(gap(&[3, -1]).unwrap(), 4);
        assert!(matches!(gap(&[]), Err(Error::EmptyWeights)));
    }

    #[test]
    fn projective_line_closed_form() {
        for (a, b) in [(0, 0), (1, 0), (3, -2), (-4, -7), (5, 5)] {
            let w = WeightSystem::projective(vec![a, b]).unwrap();
            let tau = tau_poly(&w, SignConvention::Calibrated, 1).unwrap();
            for k in 1..=12u64 {
                let direct: i64 = (0..=k as i64).map(|j| (k as i64 - j) * a + j * b).sum();
                assert_eq!(tau.eval(k), rat(direct));
                assert_eq!(tau.eval(k), ratio((a + b) * (k * (k + 1)) as i64, 2));
            }
            assert_eq!(i_coefficient(&tau), ratio(a + b, 2));
            assert_eq!(futaki(&tau), rat(0));
            let flipped = tau_poly(&w, SignConvention::Flipped, 1).unwrap();
            assert_eq!(i_coefficient(&flipped), -ratio(a + b, 2));
        }
    }

    #[test]
    fn conic_invariants() {
        let tau = tau_poly(&conic(), SignConvention::Calibrated, 1).unwrap();
        // quotient basis x^a y^b, y^b z^c; weight -c
        for k in 1..=8u64 {
            assert_eq!(tau.eval(k), -ratio((k * (k + 1)) as i64, 2));
            assert_eq!(tau.hilbert_eval(k), rat(2 * k as i64 + 1));
        }
        assert_eq!(tau.volume(), rat(2));
        assert_eq!(tau.alpha1(), ratio(1, 2));
        assert_eq!(i_coefficient(&tau), ratio(-1, 2));
        assert_eq!(futaki(&tau), ratio(-1, 8));
        assert_eq!(chow_k(&tau, 1), ratio(-1, 12));

        // the degeneration diag(1, 1, t) of x z - y^2 has limit x z = 0 of weight 1
        let deg = WeightSystem::hypersurface(vec![0, 0, 1], 2, 1).unwrap();
        let tau = tau_poly(&deg, SignConvention::Calibrated, 1).unwrap();
        assert_eq!(chow_k(&tau, 1), ratio(1, 12));
        assert_eq!(futaki(&tau), ratio(1, 8));
        assert!(i_coefficient(&tau_poly(&deg.normalized(), SignConvention::Calibrated, 1).unwrap()).is_negative());
    }

    #[test]
    fn chow_converges_to_futaki() {
        let tau = tau_poly(&conic(), SignConvention::Calibrated, 1).unwrap();
        let f = futaki(&tau);
        for k in 1..=50u64 {
            let err = (chow_k(&tau, k) - &f).abs() * rat(k as i64);
            assert!(err <= rat(1), "k = {k}: {err}");
        }
    }

    #[test]
    fn relative_invariants() {
        let tau = tau_poly(&conic(), SignConvention::Calibrated, 1).unwrap();
        assert_eq!(relative_futaki(&tau, &tau).unwrap(), rat(0));
        assert_eq!(relative_futaki(&tau, &tau.trivial_like()).unwrap(), futaki(&tau));
        let line = tau_poly(&WeightSystem::projective(vec![1, 0]).unwrap(), SignConvention::Calibrated, 1).unwrap();
        assert!(matches!(relative_futaki(&tau, &line), Err(Error::HilbertMismatch)));
    }

    #[test]
    fn rejects_inconsistent_systems() {
        assert!(WeightSystem::hypersurface(vec![0, 0, -1], 2, -3).is_err());
        assert!(WeightSystem::projective(vec![]).is_err());
        let bad = serde_json::json!({"dim": 2, "generators": [0, 1], "geometry": {"type": "projective"}});
        assert!(WeightSystem::from_json(&bad).is_err());
        let ok = serde_json::json!({"dim": 1, "generators": [0, 0, -1],
            "geometry": {"type": "hypersurface", "degree": 2, "initial_weight": -1}});
        assert_eq!(WeightSystem::from_json(&ok).unwrap(), conic());
    }

    #[test]
    fn degree_too_large_for_window_is_reported() {
        // a quintic curve: the Hilbert function is not polynomial below k = 3
        let w = WeightSystem::hypersurface(vec![0, -1, -2], 5, -5).unwrap();
        assert!(matches!(tau_poly(&w, SignConvention::Calibrated, 1), Err(Error::NotPolynomial { .. })));
        assert!(tau_poly(&w, SignConvention::Calibrated, 3).is_ok());
    }
}
