//! Moment matrices `M(Z) = V^{-1} [∫_Z z z^* / |z|^2 dμ_FS]_0` of curve
//! cycles by adaptive quadrature on the sphere.
//!
//! Each component is integrated over the two discs `|s| ≤ 1` and `|u| ≤ 1`
//! (`u = 1/s`) in polar coordinates. The Fubini–Study area density of
//! `s ↦ [φ(s)]` is `(|φ|^2 |φ'|^2 - |<φ', φ>|^2) / (π |φ|^4)`, normalized so
//! that a line has area 1.

use nalgebra::DMatrix;
use num_complex::Complex64;
use num_traits::Zero;

use super::cycle::{Component, ProjectiveCycle};
use super::form::{central_fiber, chow_weight, HypersurfaceForm};
use crate::laurent::{factorize, LaurentMatrix};
use crate::quad::Adaptive;
use crate::rational::{to_f64, RatMatrix};
use crate::weights::SignConvention;
use crate::{Error, Result};

type C = Complex64;

/// Hermitian matrix; the constructors below only produce exactly Hermitian
/// entries.
#[derive(Clone, Debug, PartialEq)]
pub struct HermitianForm(pub DMatrix<C>);

impl HermitianForm {
    pub fn size(&self) -> usize {
        self.0.nrows()
    }

    pub fn zeros(n: usize) -> Self {
        HermitianForm(DMatrix::zeros(n, n))
    }

    pub fn diagonal(d: &[f64]) -> Self {
        HermitianForm(DMatrix::from_fn(d.len(), d.len(), |i, j| if i == j { C::new(d[i], 0.0) } else { C::zero() }))
    }

    /// `(X + X^*) / 2`.
    pub fn symmetrize(m: &DMatrix<C>) -> Self {
        HermitianForm((m + m.adjoint()).scale(0.5))
    }

    pub fn trace(&self) -> f64 {
        (0..self.size()).map(|i| self.0[(i, i)].re).sum()
    }

    pub fn trace_free(&self) -> Self {
        let shift = self.trace() / self.size() as f64;
        let mut m = self.0.clone();
        for i in 0..self.size() {
            m[(i, i)] -= C::new(shift, 0.0);
        }
        HermitianForm(m)
    }

    pub fn eigenvalues(&self) -> Vec<f64> {
        let mut v: Vec<f64> = self.0.clone().symmetric_eigen().eigenvalues.iter().copied().collect();
        v.sort_by(|a, b| b.total_cmp(a));
        v
    }

    pub fn max_abs_diff(&self, other: &Self) -> f64 {
        (&self.0 - &other.0).iter().map(|z| z.norm()).fold(0.0, f64::max)
    }
}

/// `⟨M, A⟩ = Σ M_aa A_a` for diagonal `A`.
pub fn pairing(m: &HermitianForm, a: &[f64]) -> Result<f64> {
    if a.len() != m.size() {
        return Err(Error::SizeMismatch { expected: m.size(), got: a.len() });
    }
    Ok(crate::quad::sum(a.iter().enumerate().map(|(i, x)| m.0[(i, i)].re * x)))
}

/// `Re tr(M A)` for a general Hermitian `A`.
pub fn pairing_matrix(m: &HermitianForm, a: &HermitianForm) -> Result<f64> {
    if a.size() != m.size() {
        return Err(Error::SizeMismatch { expected: m.size(), got: a.size() });
    }
    let n = m.size();
    Ok(crate::quad::sum((0..n).flat_map(|i| (0..n).map(move |j| (i, j))).map(|(i, j)| (m.0[(i, j)] * a.0[(j, i)]).re)))
}

/// Sum of the absolute eigenvalues.
pub fn trace_norm(m: &HermitianForm) -> f64 {
    crate::quad::sum(m.eigenvalues().iter().map(|x| x.abs()))
}

/// Raw second moments `∫ z z^* / |z|^2 dμ_FS` with total area and an
/// error estimate.
#[derive(Clone, Debug)]
pub struct RawMoments {
    pub matrix: HermitianForm,
    pub area: f64,
    pub error: f64,
}

/// Packs the upper triangle: `n` real diagonal entries, then (re, im) pairs.
fn packed_len(n: usize) -> usize {
    n + n * (n - 1) + 1
}

fn chart_integral(c: &Component, quad: &Adaptive) -> crate::quad::Estimate {
    let n = c.coords.len();
    let len = packed_len(n);
    let weight = c.multiplicity as f64;
    let f = |rho: f64, theta: f64, out: &mut [f64]| {
        let s = C::from_polar(rho, theta);
        let mut phi = vec![C::zero(); n];
        let mut dphi = vec![C::zero(); n];
        c.eval(s, &mut phi, &mut dphi);
        let n2: f64 = phi.iter().map(|z| z.norm_sqr()).sum();
        let d2: f64 = dphi.iter().map(|z| z.norm_sqr()).sum();
        let cross: C = dphi.iter().zip(&phi).map(|(a, b)| a * b.conj()).sum();
        let density = (n2 * d2 - cross.norm_sqr()).max(0.0) / (std::f64::consts::PI * n2 * n2);
        let w = weight * density * rho;
        let mut k = n;
        for a in 0..n {
            out[a] += w * phi[a].norm_sqr() / n2;
            for b in a + 1..n {
                let z = phi[a] * phi[b].conj() / n2;
                out[k] += w * z.re;
                out[k + 1] += w * z.im;
                k += 2;
            }
        }
        out[len - 1] += w;
    };
    quad.integrate_2d(f, len, [0.0, 1.0, 0.0, 2.0 * std::f64::consts::PI])
}

pub fn raw_moments(z: &ProjectiveCycle, quad: &Adaptive) -> Result<RawMoments> {
    let comps = z.components()?;
    let n = z.ambient() + 1;
    let len = packed_len(n);
    let mut total = vec![crate::quad::Compensated::default(); len];
    let mut error = 0.0;
    // the tolerance is shared between all charts
    let share = Adaptive { tol: quad.tol / (2 * comps.len()) as f64, ..*quad };
    for c in comps {
        for chart in [c.clone(), c.reversed()] {
            let e = chart_integral(&chart, &share);
            for (t, v) in total.iter_mut().zip(&e.value) {
                t.add(*v);
            }
            error += e.error;
        }
    }
    let v: Vec<f64> = total.iter().map(|t| t.value()).collect();
    let mut m = DMatrix::zeros(n, n);
    let mut k = n;
    for a in 0..n {
        m[(a, a)] = C::new(v[a], 0.0);
        for b in a + 1..n {
            m[(a, b)] = C::new(v[k], v[k + 1]);
            m[(b, a)] = C::new(v[k], -v[k + 1]);
            k += 2;
        }
    }
    Ok(RawMoments { matrix: HermitianForm(m), area: v[len - 1], error })
}

#[derive(Clone, Debug)]
pub struct MomentEstimate {
    pub matrix: HermitianForm,
    /// Quadrature error estimate for the entries of `matrix`.
    pub error: f64,
    /// Degree of the cycle (`V` for curves).
    pub volume: f64,
    /// Integrated Fubini–Study area; equals `volume` up to quadrature error.
    pub area: f64,
}

/// `M(Z)`; fails when the quadrature error estimate exceeds `quad.tol`.
pub fn moment_matrix(z: &ProjectiveCycle, quad: &Adaptive) -> Result<MomentEstimate> {
    let raw = raw_moments(z, quad)?;
    if raw.error > quad.tol {
        return Err(Error::Quadrature { estimate: raw.error, tol: quad.tol });
    }
    let volume = z.degree() as f64;
    let m = raw.matrix.trace_free();
    Ok(MomentEstimate {
        matrix: HermitianForm(m.0.unscale(volume)),
        error: raw.error / volume,
        volume,
        area: raw.area,
    })
}

fn complex_matrix(m: &RatMatrix) -> DMatrix<C> {
    DMatrix::from_fn(m.len(), m.len(), |i, j| C::new(to_f64(&m[i][j]), 0.0))
}

#[derive(Clone, Debug)]
pub struct InequalityReport {
    /// Weights of `t^A` in the normal form of `g`.
    pub weights: Vec<i64>,
    pub chow: f64,
    /// `⟨M(W'), -A⟩` with `W' = L(0)^{-1} W`.
    pub pairing: f64,
    /// `pairing - chow`.
    pub slack: f64,
    pub quadrature_error: f64,
    pub holds: bool,
    /// `g` is a diagonal matrix of monomials, where equality is expected.
    pub equivariant: bool,
}

/// Checks `Ch ≤ ⟨M(W), A⟩` for a loop with central fibre `central`.
///
/// The loop acts on points; the equality case `Ch = ⟨M(W), A⟩` holds for
/// the induced action on coordinate functions, generated by `-A`, so the
/// pairing uses `-A`. The central fibre of `L t^A R` is `L(0)` applied to
/// that of `t^A R`, and the pairing is taken on the latter where `A` is
/// diagonal.
pub fn check_chow_inequality(
    g: &LaurentMatrix,
    central: &ProjectiveCycle,
    ch: f64,
    quad: &Adaptive,
    tol: f64,
) -> Result<InequalityReport> {
    let f = factorize(g)?;
    if central.ambient() + 1 != g.size() {
        return Err(Error::SizeMismatch { expected: g.size(), got: central.ambient() + 1 });
    }
    let l0 = complex_matrix(&f.left.at_zero());
    let l0inv = l0.try_inverse().ok_or_else(|| Error::IllConditioned("L(0) is singular".into()))?;
    let w = central.transform(&l0inv)?;
    let m = moment_matrix(&w, quad)?;
    let a: Vec<f64> = f.weights.iter().map(|&x| -(x as f64)).collect();
    let p = pairing(&m.matrix, &a)?;
    let n = g.size();
    let equivariant =
        (0..n).all(|i| (0..n).all(|j| if i == j { g.get(i, i).num_terms() == 1 } else { g.get(i, j).is_zero() }));
    let qerr = m.error * a.iter().map(|x| x.abs()).sum::<f64>();
    Ok(InequalityReport {
        weights: f.weights,
        chow: ch,
        pairing: p,
        slack: p - ch,
        quadrature_error: qerr,
        holds: ch <= p + tol,
        equivariant,
    })
}

/// Chow weight and central fibre of the degeneration `g(t) {F = 0}` of a
/// plane conic, followed by [`check_chow_inequality`].
pub fn conic_inequality(
    f: &HypersurfaceForm,
    g: &LaurentMatrix,
    quad: &Adaptive,
    tol: f64,
) -> Result<InequalityReport> {
    let ch = chow_weight(f, g, &crate::rational::rat(2), 2, SignConvention::Calibrated)?;
    let central = super::cycle::conic_cycle(&central_fiber(f, g)?)?;
    check_chow_inequality(g, &central, to_f64(&ch), quad, tol)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::chow::cycle::rational_normal_curve;

    fn quad() -> Adaptive {
        Adaptive { order: 16, tol: 1e-11, max_depth: 10 }
    }

    fn coordinate_line() -> ProjectiveCycle {
        let one = C::new(1.0, 0.0);
        let zero = C::zero();
        ProjectiveCycle::curves(2, vec![Component::line(&[one, zero, zero], &[zero, zero, one], 1).unwrap()]).unwrap()
    }

    #[test]
    fn coordinate_line_closed_form() {
        let raw = raw_moments(&coordinate_line(), &quad()).unwrap();
        for (i, want) in [0.5, 0.0, 0.5].iter().enumerate() {
            assert!((raw.matrix.0[(i, i)].re - want).abs() < 1e-13);
        }
        assert!((raw.area - 1.0).abs() < 1e-13);
        let m = moment_matrix(&coordinate_line(), &quad()).unwrap();
        let want = HermitianForm::diagonal(&[1.0 / 6.0, -1.0 / 3.0, 1.0 / 6.0]);
        assert!(m.matrix.max_abs_diff(&want) < 1e-13);
        assert!(m.matrix.trace().abs() < 1e-14);
    }

    #[test]
    fn balanced_curve_has_zero_moment() {
        for d in 1..=4 {
            let m = moment_matrix(&rational_normal_curve(d), &quad()).unwrap();
            assert!(trace_norm(&m.matrix) < 1e-11, "d = {d}");
            assert!((m.area - d as f64).abs() < 1e-11);
        }
    }

    #[test]
    fn conic_central_fibre() {
        let f = super::super::form::standard_conic();
        let g = LaurentMatrix::t_pow_diag(&[0, 0, 1]);
        let central = super::super::cycle::conic_cycle(&central_fiber(&f, &g).unwrap()).unwrap();
        let m = moment_matrix(&central, &quad()).unwrap();
        let want = HermitianForm::diagonal(&[-1.0 / 12.0, 1.0 / 6.0, -1.0 / 12.0]);
        assert!(m.matrix.max_abs_diff(&want) < 1e-12);
        let r = conic_inequality(&f, &g, &quad(), 1e-9).unwrap();
        assert!(r.equivariant);
        assert!((r.pairing - 1.0 / 12.0).abs() < 1e-12, "{r:?}");
        assert!(r.slack.abs() < 1e-12);
    }

    #[test]
    fn trace_norm_and_pairing_basics() {
        assert_eq!(trace_norm(&HermitianForm::zeros(3)), 0.0);
        assert!((trace_norm(&HermitianForm::diagonal(&[1.0, -1.0])) - 2.0).abs() < 1e-15);
        let m = HermitianForm::diagonal(&[0.25, -0.5, 0.25]);
        assert_eq!(pairing(&m, &[0.0; 3]).unwrap(), 0.0);
        assert!(pairing(&m, &[2.0; 3]).unwrap().abs() < 1e-15);
        assert!(pairing(&m, &[1.0]).is_err());
        assert!((pairing_matrix(&m, &HermitianForm::diagonal(&[1.0, 2.0, 3.0])).unwrap() - 0.0).abs() < 1e-15);
    }
}
