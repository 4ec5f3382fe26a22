//! Balancing iteration: move a curve by `G = (H / mean eigenvalue)^{-1/2}`,
//! where `H` is its raw second-moment matrix, until `M = 0`.

use nalgebra::DMatrix;
use num_complex::Complex64;

use super::cycle::ProjectiveCycle;
use super::moment::{raw_moments, trace_norm, HermitianForm};
use crate::quad::Adaptive;
use crate::{Error, Result};

#[derive(Clone, Debug)]
pub struct BalanceReport {
    pub cycle: ProjectiveCycle,
    /// `|M|_1` before each step, ending with the final value.
    pub history: Vec<f64>,
    pub steps: usize,
    pub converged: bool,
    /// First step after which `|M|_1` never increased again, if any.
    pub monotone_from: Option<usize>,
}

impl BalanceReport {
    pub fn residual(&self) -> f64 {
        *self.history.last().expect("at least one evaluation")
    }

    pub fn to_csv(&self) -> String {
        let mut out = String::from("step,trace_norm\n");
        for (i, r) in self.history.iter().enumerate() {
            out.push_str(&format!("{i},{r:.16e}\n"));
        }
        out
    }
}

fn inverse_sqrt(h: &HermitianForm) -> Result<DMatrix<Complex64>> {
    let eig = h.0.clone().symmetric_eigen();
    let n = h.size() as f64;
    let mean = eig.eigenvalues.iter().sum::<f64>() / n;
    if eig.eigenvalues.iter().any(|&l| l <= 1e-14 * mean.abs()) {
        return Err(Error::IllConditioned("second-moment matrix is singular: the curve lies in a hyperplane".into()));
    }
    let d = DMatrix::from_diagonal(&eig.eigenvalues.map(|l| Complex64::new((l / mean).powf(-0.5), 0.0)));
    Ok(&eig.eigenvectors * d * eig.eigenvectors.adjoint())
}

/// Runs at most `max_steps` balancing steps and stops once `|M|_1 ≤ tol`.
/// Running out of steps is reported through `converged = false`.
pub fn balance_iterate(z: &ProjectiveCycle, max_steps: usize, tol: f64, quad: &Adaptive) -> Result<BalanceReport> {
    let mut cycle = z.clone();
    let volume = z.degree() as f64;
    let mut history = Vec::new();
    let mut steps = 0;
    loop {
        let raw = raw_moments(&cycle, quad)?;
        if raw.error > quad.tol {
            return Err(Error::Quadrature { estimate: raw.error, tol: quad.tol });
        }
        let m = HermitianForm(raw.matrix.trace_free().0.unscale(volume));
        let r = trace_norm(&m);
        history.push(r);
        if r <= tol || steps == max_steps {
            break;
        }
        cycle = cycle.transform(&inverse_sqrt(&raw.matrix)?)?;
        steps += 1;
    }
    let converged = *history.last().unwrap() <= tol;
    let monotone_from = (0..history.len()).find(|&i| history[i..].windows(2).all(|w| w[1] <= w[0]));
    Ok(BalanceReport { cycle, history, steps, converged, monotone_from })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::chow::cycle::{rational_normal_curve, Component};

    fn quad() -> Adaptive {
        Adaptive { order: 16, tol: 1e-12, max_depth: 10 }
    }

    #[test]
    fn balanced_curve_is_a_fixed_point() {
        let r = balance_iterate(&rational_normal_curve(3), 10, 1e-10, &quad()).unwrap();
        assert_eq!(r.steps, 0);
        assert!(r.converged);
    }

    #[test]
    fn distorted_cubic_converges() {
        let d = DMatrix::from_diagonal(&nalgebra::DVector::from_vec(
            [2.0, 1.0, 1.0, 1.0].iter().map(|&x| Complex64::new(x, 0.0)).collect(),
        ));
        let z = rational_normal_curve(3).transform(&d).unwrap();
        let r = balance_iterate(&z, 500, 1e-8, &quad()).unwrap();
        assert!(r.converged, "{:?}", r.history);
        assert!(r.monotone_from.is_some_and(|i| i <= 5), "{:?}", r.history);
    }

    #[test]
    fn planar_curve_is_reported() {
        let c = |x: f64| Complex64::new(x, 0.0);
        let line = Component::line(&[c(1.0), c(0.0), c(0.0)], &[c(0.0), c(1.0), c(0.0)], 1).unwrap();
        let z = ProjectiveCycle::curves(2, vec![line]).unwrap();
        assert!(matches!(balance_iterate(&z, 5, 1e-8, &quad()), Err(Error::IllConditioned(_))));
    }
}
