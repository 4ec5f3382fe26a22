//! Power series in `t` truncated at a fixed precision.

use num_rational::BigRational;
use num_traits::Zero;

use super::poly::LaurentPoly;

/// Coefficients of `t^0 .. t^(prec-1)`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Series(pub Vec<BigRational>);

impl Series {
    pub fn zero(prec: usize) -> Self {
        Series(vec![BigRational::zero(); prec])
    }

    /// Truncation of a holomorphic Laurent polynomial. Negative exponents
    /// are a caller bug.
    pub fn from_poly(p: &LaurentPoly, prec: usize) -> Self {
        let mut s = Self::zero(prec);
        for (e, c) in p.terms() {
            assert!(e >= 0, "series from a polynomial with a pole");
            if (e as usize) < prec {
                s.0[e as usize] = c.clone();
            }
        }
        s
    }

    pub fn to_poly(&self) -> LaurentPoly {
        LaurentPoly::from_terms(self.0.iter().enumerate().map(|(i, c)| (i as i64, c.clone())))
    }

    pub fn prec(&self) -> usize {
        self.0.len()
    }

    pub fn is_unit(&self) -> bool {
        self.0.first().is_some_and(|c| !c.is_zero())
    }

    pub fn mul(&self, other: &Self) -> Self {
        let prec = self.prec();
        let mut out = Self::zero(prec);
        for (i, a) in self.0.iter().enumerate() {
            if a.is_zero() {
                continue;
            }
            for (j, b) in other.0.iter().enumerate().take(prec - i) {
                out.0[i + j] += a * b;
            }
        }
        out
    }

    pub fn sub_assign(&mut self, other: &Self) {
        for (a, b) in self.0.iter_mut().zip(&other.0) {
            *a -= b;
        }
    }

    /// Multiplicative inverse of a unit.
    pub fn inverse(&self) -> Self {
        let prec = self.prec();
        let a0 = &self.0[0];
        let mut inv = Self::zero(prec);
        inv.0[0] = a0.recip();
        for n in 1..prec {
            let mut acc = BigRational::zero();
            for k in 1..=n {
                acc += &self.0[k] * &inv.0[n - k];
            }
            inv.0[n] = -acc / a0;
        }
        inv
    }
}
