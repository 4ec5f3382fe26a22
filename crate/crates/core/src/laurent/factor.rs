//! Normal form `g(t) = L(t) · t^A · R(t)` of a meromorphic matrix loop.
//!
//! The weights are found by reducing the columns of `g` with respect to the
//! `t`-adic valuation until their leading coefficient vectors are
//! independent; the resulting orders are the elementary divisors of the
//! lattice spanned by `g` over the power series ring. The remaining unimodular
//! factor is then brought to lower unipotent form by a UL elimination over
//! truncated power series, and finally split into an absorbable part (moved
//! into `L`) and a part whose entries respect the degree bound
//! `deg R[a][b] < w[b] - w[a]`.

use num_rational::BigRational;
use num_traits::Zero;

use super::matrix::LaurentMatrix;
use super::poly::{pole_order_vector, LaurentPoly};
use super::series::Series;
use crate::rational::{column_relation, det as rat_det};
use crate::{Error, Result};

/// Result of [`factorize`].
///
/// `left · diag(t^weights) · right` reproduces the input exactly. Permuting
/// the columns of `right` by `column_order` (column `j` taken from column
/// `column_order[j]`) gives a lower unipotent polynomial matrix.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct LoopFactorization {
    pub left: LaurentMatrix,
    pub weights: Vec<i64>,
    pub right: LaurentMatrix,
    pub column_order: Vec<usize>,
}

impl LoopFactorization {
    pub fn t_a(&self) -> LaurentMatrix {
        LaurentMatrix::t_pow_diag(&self.weights)
    }

    pub fn reconstruct(&self) -> LaurentMatrix {
        self.left
            .multiply(&self.t_a())
            .and_then(|m| m.multiply(&self.right))
            .expect("factors share a size")
    }

    /// `right` with its columns reordered so it is lower triangular.
    pub fn triangular_right(&self) -> LaurentMatrix {
        self.right.permute_columns(&self.column_order)
    }

    pub fn max_weight(&self) -> i64 {
        self.weights[0]
    }

    pub fn min_weight(&self) -> i64 {
        *self.weights.last().expect("nonempty")
    }

    /// Inverse of `right`; polynomial because `right` is unipotent up to a
    /// column permutation.
    pub fn right_inverse(&self) -> LaurentMatrix {
        let tri = self.triangular_right();
        let inv = unipotent_lower_inverse(&tri);
        // right^{-1} = Π · tri^{-1}: row column_order[b] of the result is row b of tri^{-1}
        let n = tri.size();
        let mut out = LaurentMatrix::zeros(n);
        for (b, &dst) in self.column_order.iter().enumerate() {
            for j in 0..n {
                out.set(dst, j, inv.get(b, j).clone());
            }
        }
        out
    }

    /// Holomorphic lift attaining the smallest section degree `-λ_0`.
    pub fn minimal_section(&self) -> Vec<LaurentPoly> {
        self.right_inverse().column(0)
    }

    /// Holomorphic lift attaining the largest section degree `-λ_min`.
    pub fn maximal_section(&self) -> Vec<LaurentPoly> {
        let n = self.weights.len();
        self.right_inverse().column(n - 1)
    }

    /// Checks every structural invariant; returns a description of the first
    /// violation.
    pub fn check(&self, g: &LaurentMatrix) -> std::result::Result<(), String> {
        let n = g.size();
        if self.weights.windows(2).any(|w| w[0] < w[1]) {
            return Err("weights not nonincreasing".into());
        }
        if !self.left.is_holomorphic() {
            return Err("left factor has a pole".into());
        }
        if rat_det(&self.left.at_zero()).is_zero() {
            return Err("left factor singular at t = 0".into());
        }
        let tri = self.triangular_right();
        for a in 0..n {
            for b in 0..n {
                let e = tri.get(a, b);
                if a == b {
                    if *e != LaurentPoly::one() {
                        return Err(format!("right diagonal entry ({a},{a}) is not 1"));
                    }
                } else if b > a {
                    if !e.is_zero() {
                        return Err(format!("right not lower triangular at ({a},{b})"));
                    }
                } else if !e.is_zero() {
                    if !e.is_holomorphic() {
                        return Err(format!("right entry ({a},{b}) has a pole"));
                    }
                    let bound = self.weights[b] - self.weights[a];
                    if e.deg().unwrap() >= bound {
                        return Err(format!(
                            "right entry ({a},{b}) has degree {} >= {bound}",
                            e.deg().unwrap()
                        ));
                    }
                }
            }
        }
        if self.reconstruct() != *g {
            return Err("L t^A R does not reproduce g".into());
        }
        Ok(())
    }
}

fn unipotent_lower_inverse(r: &LaurentMatrix) -> LaurentMatrix {
    let n = r.size();
    let mut x = LaurentMatrix::identity(n);
    for a in 0..n {
        for c in (0..a).rev() {
            let mut acc = LaurentPoly::zero();
            for b in c..a {
                acc = &acc + &(r.get(a, b) * x.get(b, c));
            }
            x.set(a, c, -&acc);
        }
    }
    x
}

fn column_order(col: &[LaurentPoly]) -> i64 {
    col.iter().filter_map(LaurentPoly::ord).min().expect("nonzero column")
}

/// Reduce the columns of `g` until their leading coefficient vectors are
/// independent. Returns (orders of the reduced columns, inverse of the
/// accumulated column transformation).
fn reduce_columns(g: &LaurentMatrix) -> (Vec<i64>, LaurentMatrix) {
    let n = g.size();
    let mut cols: Vec<Vec<LaurentPoly>> = (0..n).map(|j| g.column(j)).collect();
    let mut tinv = LaurentMatrix::identity(n);
    loop {
        let orders: Vec<i64> = cols.iter().map(|c| column_order(c)).collect();
        let lead: Vec<Vec<BigRational>> = (0..n)
            .map(|r| (0..n).map(|i| cols[i][r].coeff(orders[i])).collect())
            .collect();
        let Some(rel) = column_relation(&lead) else {
            return (orders, tinv);
        };
        let pivot = (0..n)
            .filter(|&i| !rel[i].is_zero())
            .max_by_key(|&i| (orders[i], i))
            .expect("relation is nonzero");
        let adds: Vec<(usize, LaurentPoly)> = (0..n)
            .filter(|&i| i != pivot && !rel[i].is_zero())
            .map(|i| {
                let c = &rel[i] / &rel[pivot];
                (i, LaurentPoly::monomial(orders[pivot] - orders[i], c))
            })
            .collect();
        let mut new_col = cols[pivot].clone();
        for (i, a) in &adds {
            for (r, entry) in new_col.iter_mut().enumerate() {
                *entry = &*entry + &(a * &cols[*i][r]);
            }
        }
        cols[pivot] = new_col;
        for (i, a) in &adds {
            for j in 0..n {
                let v = tinv.get(*i, j) - &(a * tinv.get(pivot, j));
                tinv.set(*i, j, v);
            }
        }
    }
}

/// UL elimination with column pivoting: returns the lower unipotent factor
/// of `m · Π` modulo `t^prec` and the column order defining `Π`.
fn ul_lower_factor(mut m: Vec<Vec<Series>>) -> (Vec<Vec<Series>>, Vec<usize>) {
    let n = m.len();
    let mut order: Vec<usize> = (0..n).collect();
    for r in (0..n).rev() {
        let j = (0..=r)
            .rev()
            .find(|&j| m[r][j].is_unit())
            .expect("unimodular factor has an invertible trailing block");
        if j != r {
            for row in m.iter_mut() {
                row.swap(j, r);
            }
            order.swap(j, r);
        }
        let inv = m[r][r].inverse();
        for c in 0..n {
            m[r][c] = m[r][c].mul(&inv);
        }
        for i in 0..r {
            if m[i][r].0.iter().all(Zero::is_zero) {
                continue;
            }
            let f = m[i][r].clone();
            for c in 0..n {
                let prod = f.mul(&m[r][c]);
                m[i][c].sub_assign(&prod);
            }
        }
    }
    (m, order)
}

/// Factor a loop into `L · t^A · R` (see the module docs).
pub fn factorize(g: &LaurentMatrix) -> Result<LoopFactorization> {
    let n = g.size();
    if g.det().is_zero() {
        return Err(Error::DegenerateLoop);
    }
    let (orders, tinv) = reduce_columns(g);

    let mut sorted: Vec<usize> = (0..n).collect();
    sorted.sort_by_key(|&i| (std::cmp::Reverse(orders[i]), i));
    let weights: Vec<i64> = sorted.iter().map(|&i| orders[i]).collect();

    // V = (T P)^{-1}: row b of V is row sorted[b] of T^{-1}
    let spread = (weights[0] - weights[n - 1]) as usize;
    let prec = spread.max(1);
    let v: Vec<Vec<Series>> = sorted
        .iter()
        .map(|&src| (0..n).map(|j| Series::from_poly(tinv.get(src, j), prec)).collect())
        .collect();
    let (lower, col_order) = ul_lower_factor(v);

    // split lower = R1 · R2 with R2 obeying the degree bound
    let mut r1 = vec![vec![Series::zero(prec); n]; n];
    let mut r2 = LaurentMatrix::identity(n);
    for a in 0..n {
        for c in (0..a).rev() {
            let mut x = lower[a][c].clone();
            for b in (c + 1)..a {
                let r2bc = Series::from_poly(r2.get(b, c), prec);
                x.sub_assign(&r1[a][b].mul(&r2bc));
            }
            let bound = weights[c] - weights[a];
            let xp = x.to_poly();
            let low = xp.truncate_below(bound);
            r1[a][c] = Series::from_poly(&xp.truncate_from(bound), prec);
            r2.set(a, c, low);
        }
    }

    let r2_inv = unipotent_lower_inverse(&r2);
    let mut left = g.permute_columns(&col_order).multiply(&r2_inv)?;
    for (b, &w) in weights.iter().enumerate() {
        let col: Vec<LaurentPoly> = left.column(b).iter().map(|p| p.shift(-w)).collect();
        left.set_column(b, col);
    }
    let mut right = LaurentMatrix::zeros(n);
    for (b, &dst) in col_order.iter().enumerate() {
        for a in 0..n {
            right.set(a, dst, r2.get(a, b).clone());
        }
    }

    let f = LoopFactorization {
        left,
        weights,
        right,
        column_order: col_order,
    };
    if let Err(msg) = f.check(g) {
        return Err(Error::Invalid(format!("internal factorization failure: {msg}")));
    }
    Ok(f)
}

/// `t^{-λ_0} · g`, whose largest factorization weight is zero.
pub fn normalize(g: &LaurentMatrix) -> Result<LaurentMatrix> {
    let f = factorize(g)?;
    Ok(g.shift(-f.max_weight()))
}

/// Degree `d(γ)` of the section through the lift `gamma`: the pole order of
/// `g · γ̃` after clearing any common power of `t` from `gamma`.
pub fn section_degree(g: &LaurentMatrix, gamma: &[LaurentPoly]) -> Result<i64> {
    let common = -pole_order_vector(gamma)?;
    let lift: Vec<LaurentPoly> = gamma.iter().map(|p| p.shift(-common)).collect();
    pole_order_vector(&g.apply(&lift)?)
}
