//! One-dimensional cycles in `P^N` given as weighted sums of rational
//! curves `s ↦ [φ_0(s) : ... : φ_N(s)]`, or as a hypersurface form.

use std::collections::BTreeMap;

use nalgebra::{DMatrix, Matrix3};
use num_complex::Complex64;
use num_rational::BigRational;
use serde_json::{json, Value};

use super::form::{Exponent, HypersurfaceForm};
use crate::rational::{rank, to_f64, RatMatrix};
use crate::{Error, Result};

type C = Complex64;

/// A parametrized rational curve with multiplicity. `coords[i][p]` is the
/// coefficient of `s^p` in the `i`-th homogeneous coordinate.
#[derive(Clone, Debug, PartialEq)]
pub struct Component {
    pub coords: Vec<Vec<C>>,
    pub multiplicity: u32,
}

fn horner(p: &[C], s: C) -> (C, C) {
    let mut v = C::new(0.0, 0.0);
    let mut dv = C::new(0.0, 0.0);
    for c in p.iter().rev() {
        dv = dv * s + v;
        v = v * s + c;
    }
    (v, dv)
}

/// Durand–Kerner iteration for the roots of a polynomial with nonzero
/// leading coefficient.
pub fn roots(p: &[C]) -> Vec<C> {
    let deg = p.len() - 1;
    if deg == 0 {
        return Vec::new();
    }
    let lead = p[deg];
    let monic: Vec<C> = p.iter().map(|c| c / lead).collect();
    let radius = 1.0 + monic[..deg].iter().map(|c| c.norm()).fold(0.0, f64::max);
    let mut z: Vec<C> = (0..deg).map(|k| C::from_polar(radius, 0.4 + 2.0 * std::f64::consts::PI * k as f64 / deg as f64)).collect();
    for _ in 0..500 {
        let mut moved = 0.0f64;
        for i in 0..deg {
            let (v, _) = horner(&monic, z[i]);
            let mut den = C::new(1.0, 0.0);
            for j in 0..deg {
                if j != i {
                    den *= z[i] - z[j];
                }
            }
            let step = v / den;
            z[i] -= step;
            moved = moved.max(step.norm() / (1.0 + z[i].norm()));
        }
        if moved < 1e-15 {
            break;
        }
    }
    // polish with Newton on the original polynomial
    for r in z.iter_mut() {
        for _ in 0..3 {
            let (v, dv) = horner(p, *r);
            if dv.norm() > 0.0 {
                *r -= v / dv;
            }
        }
    }
    z
}

impl Component {
    pub fn new(coords: Vec<Vec<C>>, multiplicity: u32) -> Result<Self> {
        let c = Component { coords, multiplicity };
        c.validate()?;
        Ok(c)
    }

    pub fn line(p: &[C], q: &[C], multiplicity: u32) -> Result<Self> {
        Self::new(p.iter().zip(q).map(|(a, b)| vec![*a, *b]).collect(), multiplicity)
    }

    /// Largest power of `s` with a nonzero coefficient in some coordinate.
    pub fn degree(&self) -> usize {
        self.coords
            .iter()
            .filter_map(|p| p.iter().rposition(|c| c.norm() != 0.0))
            .max()
            .unwrap_or(0)
    }

    /// Values and derivatives of all coordinates.
    pub fn eval(&self, s: C, phi: &mut [C], dphi: &mut [C]) {
        for (i, p) in self.coords.iter().enumerate() {
            (phi[i], dphi[i]) = horner(p, s);
        }
    }

    /// The chart at infinity: `u^D φ(1/u)`.
    pub fn reversed(&self) -> Component {
        let d = self.degree();
        let coords = self
            .coords
            .iter()
            .map(|p| {
                let mut q = vec![C::new(0.0, 0.0); d + 1];
                for (k, c) in p.iter().enumerate().take(d + 1) {
                    q[d - k] = *c;
                }
                q
            })
            .collect();
        Component { coords, multiplicity: self.multiplicity }
    }

    /// Coordinates transformed by a constant matrix.
    pub fn transform(&self, m: &DMatrix<C>) -> Component {
        let n = self.coords.len();
        let len = self.coords.iter().map(Vec::len).max().unwrap_or(0);
        let coords = (0..n)
            .map(|i| {
                (0..len)
                    .map(|p| (0..n).map(|j| m[(i, j)] * self.coords[j].get(p).copied().unwrap_or_default()).sum())
                    .collect()
            })
            .collect();
        Component { coords, multiplicity: self.multiplicity }
    }

    fn scale(&self) -> f64 {
        self.coords.iter().flatten().map(|c| c.norm()).fold(0.0, f64::max)
    }

    /// Rejects constant maps and common zeros of all coordinates.
    pub fn validate(&self) -> Result<()> {
        if self.multiplicity == 0 {
            return Err(Error::Invalid("component multiplicity must be positive".into()));
        }
        if self.coords.len() < 2 {
            return Err(Error::Invalid("a curve needs at least two homogeneous coordinates".into()));
        }
        let scale = self.scale();
        if scale == 0.0 {
            return Err(Error::BasePoints("all coordinates vanish identically".into()));
        }
        // constant map: all coordinates proportional to a fixed vector
        let d = self.degree();
        let n = self.coords.len();
        let mat = DMatrix::from_fn(n, d + 1, |i, p| self.coords[i].get(p).copied().unwrap_or_default() / scale);
        if d == 0 || mat.rank(1e-12) < 2 {
            return Err(Error::BasePoints("parametrization is constant".into()));
        }
        // every finite base point is a root of the lowest-degree nonconstant coordinate
        let probe = self
            .coords
            .iter()
            .map(|p| &p[..p.iter().rposition(|c| c.norm() != 0.0).map_or(0, |k| k + 1)])
            .filter(|p| !p.is_empty())
            .min_by_key(|p| p.len())
            .expect("some coordinate is nonzero");
        for r in roots(probe) {
            let mut phi = vec![C::default(); n];
            let mut dphi = vec![C::default(); n];
            self.eval(r, &mut phi, &mut dphi);
            let size = scale * (1.0 + r.norm()).powi(d as i32);
            if phi.iter().all(|v| v.norm() <= 1e-9 * size) {
                return Err(Error::BasePoints(format!("all coordinates vanish at s = {r}")));
            }
        }
        Ok(())
    }
}

#[derive(Clone, Debug, PartialEq)]
pub enum ProjectiveCycle {
    Curves { ambient: usize, components: Vec<Component> },
    Hypersurface(HypersurfaceForm),
}

fn parse_complex(v: &Value, ctx: &str) -> Result<C> {
    match v {
        Value::Number(n) => Ok(C::new(n.as_f64().unwrap_or(f64::NAN), 0.0)),
        Value::Array(a) if a.len() == 2 => {
            let re = a[0].as_f64().ok_or_else(|| Error::Parse(format!("{ctx}: real part is not a number")))?;
            let im = a[1].as_f64().ok_or_else(|| Error::Parse(format!("{ctx}: imaginary part is not a number")))?;
            Ok(C::new(re, im))
        }
        _ => Err(Error::Parse(format!("{ctx}: expected [re, im]"))),
    }
}

impl ProjectiveCycle {
    pub fn curves(ambient: usize, components: Vec<Component>) -> Result<Self> {
        if components.is_empty() {
            return Err(Error::Invalid("cycle has no components".into()));
        }
        for (k, c) in components.iter().enumerate() {
            if c.coords.len() != ambient + 1 {
                return Err(Error::Invalid(format!(
                    "component {k} has {} coordinates, expected {}",
                    c.coords.len(),
                    ambient + 1
                )));
            }
            c.validate().map_err(|e| match e {
                Error::BasePoints(m) => Error::BasePoints(format!("component {k}: {m}")),
                other => other,
            })?;
        }
        Ok(ProjectiveCycle::Curves { ambient, components })
    }

    pub fn ambient(&self) -> usize {
        match self {
            ProjectiveCycle::Curves { ambient, .. } => *ambient,
            ProjectiveCycle::Hypersurface(f) => f.ambient(),
        }
    }

    /// Degree of the cycle: `Σ multiplicity · deg φ`, or the form degree.
    pub fn degree(&self) -> usize {
        match self {
            ProjectiveCycle::Curves { components, .. } => {
                components.iter().map(|c| c.multiplicity as usize * c.degree()).sum()
            }
            ProjectiveCycle::Hypersurface(f) => f.degree() as usize,
        }
    }

    pub fn components(&self) -> Result<&[Component]> {
        match self {
            ProjectiveCycle::Curves { components, .. } => Ok(components),
            ProjectiveCycle::Hypersurface(_) => {
                Err(Error::Invalid("operation needs a cycle given by parametrized components".into()))
            }
        }
    }

    pub fn transform(&self, m: &DMatrix<C>) -> Result<Self> {
        let comps = self.components()?.iter().map(|c| c.transform(m)).collect();
        Self::curves(self.ambient(), comps)
    }

    pub fn from_json(v: &Value) -> Result<Self> {
        if let Some(f) = v.get("form") {
            let form = HypersurfaceForm::from_json(f)?;
            if let Some(n) = v.get("ambient").and_then(Value::as_u64) {
                if n as usize != form.ambient() {
                    return Err(Error::Parse(format!("form has {} variables but ambient is {n}", form.vars())));
                }
            }
            return Ok(ProjectiveCycle::Hypersurface(form));
        }
        let ambient = v
            .get("ambient")
            .and_then(Value::as_u64)
            .ok_or_else(|| Error::Parse("cycle: missing integer field \"ambient\"".into()))? as usize;
        let comps = v
            .get("components")
            .and_then(Value::as_array)
            .ok_or_else(|| Error::Parse("cycle: missing list field \"components\" (or \"form\")".into()))?;
        let mut out = Vec::new();
        for (k, c) in comps.iter().enumerate() {
            let ctx = format!("components[{k}]");
            let coeffs = c
                .get("coeffs")
                .and_then(Value::as_array)
                .ok_or_else(|| Error::Parse(format!("{ctx}: missing list field \"coeffs\"")))?;
            let coords = coeffs
                .iter()
                .enumerate()
                .map(|(i, p)| {
                    let ctx = format!("{ctx}.coeffs[{i}]");
                    p.as_array()
                        .ok_or_else(|| Error::Parse(format!("{ctx}: expected a list of [re, im]")))?
                        .iter()
                        .enumerate()
                        .map(|(j, z)| parse_complex(z, &format!("{ctx}[{j}]")))
                        .collect::<Result<Vec<C>>>()
                })
                .collect::<Result<Vec<_>>>()?;
            let multiplicity = match c.get("multiplicity") {
                None => 1,
                Some(m) => m
                    .as_u64()
                    .filter(|&m| m > 0)
                    .ok_or_else(|| Error::Parse(format!("{ctx}: multiplicity must be a positive integer")))?
                    as u32,
            };
            out.push(Component { coords, multiplicity });
        }
        Self::curves(ambient, out)
    }

    pub fn to_json(&self) -> Value {
        match self {
            ProjectiveCycle::Curves { ambient, components } => json!({
                "ambient": ambient,
                "components": components.iter().map(|c| json!({
                    "coeffs": c.coords.iter().map(|p| p.iter().map(|z| json!([z.re, z.im])).collect::<Vec<_>>()).collect::<Vec<_>>(),
                    "multiplicity": c.multiplicity,
                })).collect::<Vec<_>>(),
            }),
            ProjectiveCycle::Hypersurface(f) => {
                let terms: serde_json::Map<String, Value> = f
                    .terms()
                    .map(|(e, c)| {
                        let key = e.iter().map(u32::to_string).collect::<Vec<_>>().join(",");
                        let c = if c.is_holomorphic() && c.num_terms() == 1 && c.ord() == Some(0) {
                            json!(crate::rational::fmt_fraction(&c.coeff(0)))
                        } else {
                            crate::laurent::io::poly_to_json(c)
                        };
                        (key, c)
                    })
                    .collect();
                json!({ "ambient": f.ambient(), "form": terms })
            }
        }
    }
}

/// The rational normal curve `s ↦ (sqrt(binom(d, j)) s^j)_j`, balanced for
/// the Fubini–Study metric.
pub fn rational_normal_curve(d: usize) -> ProjectiveCycle {
    let mut binom = 1.0f64;
    let mut coords = Vec::with_capacity(d + 1);
    for j in 0..=d {
        let mut p = vec![C::default(); d + 1];
        p[j] = C::new(binom.sqrt(), 0.0);
        coords.push(p);
        binom = binom * (d - j) as f64 / (j + 1) as f64;
    }
    ProjectiveCycle::curves(d, vec![Component { coords, multiplicity: 1 }]).expect("valid curve")
}

/// Parametrizes the plane conic `{Q = 0}` for a rational quadratic form on
/// `C^3`: one smooth component, two lines, or a double line.
pub fn conic_cycle(form: &BTreeMap<Exponent, BigRational>) -> Result<ProjectiveCycle> {
    let mut q: RatMatrix = vec![vec![BigRational::default(); 3]; 3];
    for (e, c) in form {
        if e.len() != 3 || e.iter().sum::<u32>() != 2 {
            return Err(Error::Invalid("conic_cycle expects a quadratic form in three variables".into()));
        }
        let idx: Vec<usize> = (0..3).flat_map(|i| std::iter::repeat(i).take(e[i] as usize)).collect();
        let (i, j) = (idx[0], idx[1]);
        if i == j {
            q[i][i] += c;
        } else {
            let half = c / BigRational::from_integer(2.into());
            q[i][j] += &half;
            q[j][i] += &half;
        }
    }
    let r = rank(&q);
    let qf = Matrix3::from_fn(|i, j| to_f64(&q[i][j]));
    let eig = qf.symmetric_eigen();
    // eigenvalues by decreasing magnitude; the last 3 - r are exact zeros
    let mut order = [0usize, 1, 2];
    order.sort_by(|&a, &b| eig.eigenvalues[b].abs().total_cmp(&eig.eigenvalues[a].abs()));
    let u = |k: usize| -> [C; 3] {
        let col = eig.eigenvectors.column(order[k]);
        [C::new(col[0], 0.0), C::new(col[1], 0.0), C::new(col[2], 0.0)]
    };
    let root = |k: usize| C::new(eig.eigenvalues[order[k]], 0.0).sqrt();
    let comb = |a: C, x: [C; 3], b: C, y: [C; 3]| -> Vec<C> { (0..3).map(|i| a * x[i] + b * y[i]).collect() };
    let zero = C::new(0.0, 0.0);
    let one = C::new(1.0, 0.0);
    let i = C::new(0.0, 1.0);
    let comps = match r {
        3 => {
            // w_0^2 + w_1^2 + w_2^2 = 0 along (1 - s^2, i (1 + s^2), 2 s), with w_k = sqrt(d_k) v_k
            let w = [[one, zero, -one], [i, zero, i], [zero, C::new(2.0, 0.0), zero]];
            let coords = (0..3)
                .map(|row| {
                    (0..3)
                        .map(|p| (0..3).map(|k| u(k)[row] / root(k) * w[k][p]).sum())
                        .collect()
                })
                .collect();
            vec![Component::new(coords, 1)?]
        }
        2 => {
            // d_0 v_0^2 + d_1 v_1^2 factors into two lines through e_2
            let (a, b) = (root(0), root(1));
            let p: Vec<C> = u(2).to_vec();
            vec![
                Component::line(&p, &comb(-i * b, u(0), a, u(1)), 1)?,
                Component::line(&p, &comb(i * b, u(0), a, u(1)), 1)?,
            ]
        }
        1 => vec![Component::line(&u(1), &u(2), 2)?],
        _ => return Err(Error::ZeroForm),
    };
    ProjectiveCycle::curves(2, comps)
}
