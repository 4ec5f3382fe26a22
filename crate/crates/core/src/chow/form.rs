//! Hypersurface forms with Laurent coefficients and their Chow weights.
//!
//! For a hypersurface of degree `d` in `P^N` the Chow form is the defining
//! form itself, so the Chow point of `g(t) X` is the coefficient vector of
//! `F ∘ adj g(t) = det(g)^d · F ∘ g(t)^{-1}`.

use std::collections::BTreeMap;

use num_rational::BigRational;
use num_traits::{One, Zero};
use serde_json::Value;

use crate::laurent::{det_pole_order, pole_order_vector, LaurentMatrix, LaurentPoly};
use crate::rational::{parse_fraction, rat};
use crate::weights::SignConvention;
use crate::{Error, Result};

pub type Exponent = Vec<u32>;

/// Homogeneous form in `vars` variables with Laurent polynomial
/// coefficients. Zero coefficients are never stored.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct HypersurfaceForm {
    vars: usize,
    degree: u32,
    terms: BTreeMap<Exponent, LaurentPoly>,
}

type Poly = BTreeMap<Exponent, LaurentPoly>;

fn poly_mul(a: &Poly, b: &Poly) -> Poly {
    let mut out = Poly::new();
    for (ea, ca) in a {
        for (eb, cb) in b {
            let e: Exponent = ea.iter().zip(eb).map(|(x, y)| x + y).collect();
            let c = ca * cb;
            let slot = out.entry(e.clone()).or_default();
            *slot = &*slot + &c;
            if slot.is_zero() {
                out.remove(&e);
            }
        }
    }
    out
}

impl HypersurfaceForm {
    pub fn new(vars: usize, terms: impl IntoIterator<Item = (Exponent, LaurentPoly)>) -> Result<Self> {
        let mut map: Poly = BTreeMap::new();
        let mut degree = None;
        for (e, c) in terms {
            if e.len() != vars {
                return Err(Error::Invalid(format!("monomial {e:?} has {} exponents, expected {vars}", e.len())));
            }
            let d: u32 = e.iter().sum();
            if *degree.get_or_insert(d) != d {
                return Err(Error::Invalid("form is not homogeneous".into()));
            }
            let slot = map.entry(e.clone()).or_default();
            *slot = &*slot + &c;
            if slot.is_zero() {
                map.remove(&e);
            }
        }
        if map.is_empty() {
            return Err(Error::ZeroForm);
        }
        if vars < 2 {
            return Err(Error::Invalid("a hypersurface needs at least two variables".into()));
        }
        Ok(HypersurfaceForm { vars, degree: degree.unwrap_or(0), terms: map })
    }

    /// Rational coefficients.
    pub fn from_rational(vars: usize, terms: impl IntoIterator<Item = (Exponent, BigRational)>) -> Result<Self> {
        Self::new(vars, terms.into_iter().map(|(e, c)| (e, LaurentPoly::constant(c))))
    }

    /// `{"1,0,1": coefficient, ...}` with coefficients given as a number, a
    /// `"num/den"` string or `[re, im]` with zero imaginary part.
    pub fn from_json(v: &Value) -> Result<Self> {
        let obj = v.as_object().ok_or_else(|| Error::Parse("form: expected an object of monomials".into()))?;
        let mut terms = Vec::new();
        let mut vars = None;
        for (key, c) in obj {
            let ctx = format!("form[{key:?}]");
            let e: Exponent = key
                .split(',')
                .map(|x| x.trim().parse::<u32>())
                .collect::<std::result::Result<_, _>>()
                .map_err(|_| Error::Parse(format!("{ctx}: monomial key must be comma-separated exponents")))?;
            if *vars.get_or_insert(e.len()) != e.len() {
                return Err(Error::Parse(format!("{ctx}: inconsistent number of variables")));
            }
            terms.push((e, parse_coefficient(c, &ctx)?));
        }
        let vars = vars.ok_or_else(|| Error::Parse("form: no monomials".into()))?;
        Self::from_rational(vars, terms).map_err(|e| match e {
            Error::Invalid(m) => Error::Parse(format!("form: {m}")),
            other => other,
        })
    }

    pub fn vars(&self) -> usize {
        self.vars
    }

    /// Projective dimension of the ambient space.
    pub fn ambient(&self) -> usize {
        self.vars - 1
    }

    pub fn degree(&self) -> u32 {
        self.degree
    }

    pub fn terms(&self) -> impl Iterator<Item = (&Exponent, &LaurentPoly)> {
        self.terms.iter()
    }

    pub fn coefficient_vector(&self) -> Vec<LaurentPoly> {
        self.terms.values().cloned().collect()
    }

    pub fn pole_order(&self) -> i64 {
        pole_order_vector(&self.coefficient_vector()).expect("forms are nonzero")
    }

    /// Multiplies every coefficient by `t^m`.
    pub fn shift(&self, m: i64) -> Self {
        HypersurfaceForm {
            vars: self.vars,
            degree: self.degree,
            terms: self.terms.iter().map(|(e, c)| (e.clone(), c.shift(m))).collect(),
        }
    }

    /// `G(y) = F(M y)`.
    pub fn substitute(&self, m: &LaurentMatrix) -> Result<Self> {
        if m.size() != self.vars {
            return Err(Error::SizeMismatch { expected: self.vars, got: m.size() });
        }
        let n = self.vars;
        let linear: Vec<Poly> = (0..n)
            .map(|i| {
                let mut p = Poly::new();
                for j in 0..n {
                    if !m.get(i, j).is_zero() {
                        let mut e = vec![0; n];
                        e[j] = 1;
                        p.insert(e, m.get(i, j).clone());
                    }
                }
                p
            })
            .collect();
        let mut powers: Vec<Vec<Poly>> = Vec::with_capacity(n);
        for l in &linear {
            let mut pw = vec![BTreeMap::from([(vec![0; n], LaurentPoly::one())])];
            for _ in 0..self.degree {
                let next = poly_mul(pw.last().unwrap(), l);
                pw.push(next);
            }
            powers.push(pw);
        }
        let mut out = Poly::new();
        for (e, c) in &self.terms {
            let mut term = BTreeMap::from([(vec![0; n], c.clone())]);
            for (i, &k) in e.iter().enumerate() {
                term = poly_mul(&term, &powers[i][k as usize]);
            }
            for (ex, cx) in term {
                let slot = out.entry(ex.clone()).or_default();
                *slot = &*slot + &cx;
                if slot.is_zero() {
                    out.remove(&ex);
                }
            }
        }
        if out.is_empty() {
            return Err(Error::ZeroForm);
        }
        Ok(HypersurfaceForm { vars: n, degree: self.degree, terms: out })
    }

    /// Coefficients of the lowest power of `t`: the flat limit at `t = 0`.
    pub fn leading_form(&self) -> BTreeMap<Exponent, BigRational> {
        let ord = self.terms.values().filter_map(LaurentPoly::ord).min().expect("nonzero form");
        self.terms
            .iter()
            .map(|(e, c)| (e.clone(), c.coeff(ord)))
            .filter(|(_, c)| !c.is_zero())
            .collect()
    }

    /// Largest weight of a monomial under the point weights `w`.
    pub fn max_monomial_weight(&self, w: &[i64]) -> i64 {
        self.terms
            .keys()
            .map(|e| e.iter().zip(w).map(|(&a, &b)| a as i64 * b).sum())
            .max()
            .expect("nonzero form")
    }
}

fn parse_coefficient(c: &Value, ctx: &str) -> Result<BigRational> {
    let float = |x: &Value| -> Result<BigRational> {
        if let Some(i) = x.as_i64() {
            return Ok(rat(i));
        }
        let f = x.as_f64().ok_or_else(|| Error::Parse(format!("{ctx}: expected a number")))?;
        BigRational::from_float(f).ok_or_else(|| Error::Parse(format!("{ctx}: non-finite coefficient")))
    };
    match c {
        Value::String(s) => parse_fraction(s).ok_or_else(|| Error::Parse(format!("{ctx}: bad fraction {s:?}"))),
        Value::Array(a) if a.len() == 2 => {
            let im = float(&a[1])?;
            if !im.is_zero() {
                return Err(Error::Parse(format!(
                    "{ctx}: exact Chow weights need real rational coefficients, got imaginary part"
                )));
            }
            float(&a[0])
        }
        Value::Number(_) => float(c),
        _ => Err(Error::Parse(format!("{ctx}: expected a number, \"num/den\" or [re, im]"))),
    }
}

/// The flat limit of `g(t) X` at `t = 0`, where `X = {F = 0}`.
pub fn central_fiber(f: &HypersurfaceForm, g: &LaurentMatrix) -> Result<BTreeMap<Exponent, BigRational>> {
    Ok(f.substitute(&g.adjugate())?.leading_form())
}

/// Chow weight `a / ((n+1)! V) - b / (N+1)` of the degeneration `g(t) X`.
///
/// `a` is the pole order of the Chow point relative to that of `F`, so a
/// rescaling `F ↦ t^m F` changes nothing. `(n+1)! V` is the degree of the
/// Chow form in the coordinates of the dual space, `(n+1) · d` for a
/// hypersurface; `V` must equal `d / n!`.
pub fn chow_weight(
    f: &HypersurfaceForm,
    g: &LaurentMatrix,
    volume: &BigRational,
    ambient: usize,
    convention: SignConvention,
) -> Result<BigRational> {
    if f.ambient() != ambient {
        return Err(Error::ChowFormUnavailable(format!(
            "form lives in P^{} but the cycle is in P^{ambient}",
            f.ambient()
        )));
    }
    let n = ambient - 1;
    let d = f.degree() as i64;
    let factorial: i64 = (1..=n as i64).product();
    if *volume != BigRational::new(d.into(), factorial.into()) {
        return Err(Error::Invalid(format!(
            "volume {volume} does not match a degree-{d} hypersurface of dimension {n}"
        )));
    }
    let det_ord = -det_pole_order(g)?;
    let (a, b) = match convention {
        SignConvention::Calibrated => (f.substitute(&g.adjugate())?.pole_order() - f.pole_order(), -det_ord),
        // action by g on forms: det(g)^{-d} F ∘ g
        SignConvention::Flipped => (f.substitute(g)?.pole_order() + d * det_ord - f.pole_order(), det_ord),
    };
    let top = rat(a) / rat((n as i64 + 1) * d);
    Ok(top - rat(b) / rat(ambient as i64 + 1))
}

/// The smooth conic `x z - y^2`.
pub fn standard_conic() -> HypersurfaceForm {
    HypersurfaceForm::from_rational(3, [(vec![1, 0, 1], BigRational::one()), (vec![0, 2, 0], -BigRational::one())])
        .expect("valid form")
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rational::ratio;

    fn conic_loop() -> LaurentMatrix {
        LaurentMatrix::t_pow_diag(&[0, 0, 1])
    }

    #[test]
    fn identity_has_zero_weight() {
        let f = standard_conic();
        let w = chow_weight(&f, &LaurentMatrix::identity(3), &rat(2), 2, SignConvention::Calibrated).unwrap();
        assert_eq!(w, rat(0));
    }

    #[test]
    fn conic_degeneration() {
        let f = standard_conic();
        let g = conic_loop();
        assert_eq!(chow_weight(&f, &g, &rat(2), 2, SignConvention::Calibrated).unwrap(), ratio(1, 12));
        // the flipped reading is the calibrated one for the inverse loop
        let inv = LaurentMatrix::t_pow_diag(&[0, 0, -1]);
        assert_eq!(
            chow_weight(&f, &g, &rat(2), 2, SignConvention::Flipped).unwrap(),
            chow_weight(&f, &inv, &rat(2), 2, SignConvention::Calibrated).unwrap()
        );
        let limit = central_fiber(&f, &g).unwrap();
        assert_eq!(limit, BTreeMap::from([(vec![1, 0, 1], rat(1))]));
    }

    #[test]
    fn invariant_under_rescaling_and_scalar_loops() {
        let f = standard_conic();
        let g = conic_loop();
        let base = chow_weight(&f, &g, &rat(2), 2, SignConvention::Calibrated).unwrap();
        for m in [-3, 1, 4] {
            assert_eq!(chow_weight(&f.shift(m), &g, &rat(2), 2, SignConvention::Calibrated).unwrap(), base);
            let scaled = g.shift(m);
            for conv in [SignConvention::Calibrated, SignConvention::Flipped] {
                assert_eq!(
                    chow_weight(&f, &scaled, &rat(2), 2, conv).unwrap(),
                    chow_weight(&f, &g, &rat(2), 2, conv).unwrap()
                );
            }
        }
    }

    #[test]
    fn rejects_bad_volume_and_ambient() {
        let f = standard_conic();
        let g = conic_loop();
        assert!(matches!(chow_weight(&f, &g, &rat(1), 2, SignConvention::Calibrated), Err(Error::Invalid(_))));
        assert!(matches!(
            chow_weight(&f, &g, &rat(2), 3, SignConvention::Calibrated),
            Err(Error::ChowFormUnavailable(_))
        ));
    }

    #[test]
    fn json_forms() {
        let v: Value = serde_json::from_str(r#"{"1,0,1": [1, 0], "0,2,0": "-1"}"#).unwrap();
        assert_eq!(HypersurfaceForm::from_json(&v).unwrap(), standard_conic());
        let v: Value = serde_json::from_str(r#"{"1,0,1": [1, 0.5]}"#).unwrap();
        assert!(HypersurfaceForm::from_json(&v).is_err());
        let v: Value = serde_json::from_str(r#"{"1,0,1": 1, "2,0": 1}"#).unwrap();
        assert!(HypersurfaceForm::from_json(&v).is_err());
    }
}
