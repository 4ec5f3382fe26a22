use std::fmt;

use num_rational::BigRational;

use super::poly::LaurentPoly;
use crate::{Error, Result};

/// Square matrix of Laurent polynomials, row-major.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct LaurentMatrix {
    size: usize,
    entries: Vec<LaurentPoly>,
}

impl LaurentMatrix {
    pub fn zeros(size: usize) -> Self {
        Self {
            size,
            entries: vec![LaurentPoly::zero(); size * size],
        }
    }

    pub fn identity(size: usize) -> Self {
        let mut m = Self::zeros(size);
        for i in 0..size {
            m.set(i, i, LaurentPoly::one());
        }
        m
    }

    pub fn diagonal(entries: Vec<LaurentPoly>) -> Self {
        let mut m = Self::zeros(entries.len());
        for (i, p) in entries.into_iter().enumerate() {
            m.set(i, i, p);
        }
        m
    }

    /// `diag(t^w_0, ..., t^w_n)`.
    pub fn t_pow_diag(weights: &[i64]) -> Self {
        Self::diagonal(weights.iter().map(|&w| LaurentPoly::t_pow(w)).collect())
    }

    pub fn from_rows(rows: Vec<Vec<LaurentPoly>>) -> Result<Self> {
        let size = rows.len();
        if size == 0 {
            return Err(Error::Invalid("empty matrix".into()));
        }
        let mut entries = Vec::with_capacity(size * size);
        for row in rows {
            if row.len() != size {
                return Err(Error::SizeMismatch {
                    expected: size,
                    got: row.len(),
                });
            }
            entries.extend(row);
        }
        Ok(Self { size, entries })
    }

    pub fn size(&self) -> usize {
        self.size
    }

    pub fn get(&self, i: usize, j: usize) -> &LaurentPoly {
        &self.entries[i * self.size + j]
    }

    pub fn set(&mut self, i: usize, j: usize, p: LaurentPoly) {
        self.entries[i * self.size + j] = p;
    }

    pub fn entries(&self) -> &[LaurentPoly] {
        &self.entries
    }

    pub fn column(&self, j: usize) -> Vec<LaurentPoly> {
        (0..self.size).map(|i| self.get(i, j).clone()).collect()
    }

    pub fn set_column(&mut self, j: usize, col: Vec<LaurentPoly>) {
        for (i, p) in col.into_iter().enumerate() {
            self.set(i, j, p);
        }
    }

    pub fn multiply(&self, other: &Self) -> Result<Self> {
        if self.size != other.size {
            return Err(Error::SizeMismatch {
                expected: self.size,
                got: other.size,
            });
        }
        let n = self.size;
        let mut out = Self::zeros(n);
        for i in 0..n {
            for j in 0..n {
                let mut acc = LaurentPoly::zero();
                for l in 0..n {
                    let a = self.get(i, l);
                    if a.is_zero() {
                        continue;
                    }
                    acc = &acc + &(a * other.get(l, j));
                }
                out.set(i, j, acc);
            }
        }
        Ok(out)
    }

    pub fn apply(&self, v: &[LaurentPoly]) -> Result<Vec<LaurentPoly>> {
        if v.len() != self.size {
            return Err(Error::SizeMismatch {
                expected: self.size,
                got: v.len(),
            });
        }
        Ok((0..self.size)
            .map(|i| {
                let mut acc = LaurentPoly::zero();
                for (j, vj) in v.iter().enumerate() {
                    acc = &acc + &(self.get(i, j) * vj);
                }
                acc
            })
            .collect())
    }

    /// Multiply every entry by `t^k`.
    pub fn shift(&self, k: i64) -> Self {
        Self {
            size: self.size,
            entries: self.entries.iter().map(|p| p.shift(k)).collect(),
        }
    }

    /// Lowest exponent among all entries.
    pub fn ord(&self) -> Option<i64> {
        self.entries.iter().filter_map(LaurentPoly::ord).min()
    }

    pub fn is_holomorphic(&self) -> bool {
        self.entries.iter().all(LaurentPoly::is_holomorphic)
    }

    /// Constant coefficients (value at `t = 0` for holomorphic matrices).
    pub fn at_zero(&self) -> Vec<Vec<BigRational>> {
        (0..self.size)
            .map(|i| (0..self.size).map(|j| self.get(i, j).coeff(0)).collect())
            .collect()
    }

    /// Determinant of the minor keeping `rows` and `cols` (equal lengths),
    /// by Laplace expansion memoized over column subsets.
    fn minor_det(&self, rows: &[usize], cols: &[usize]) -> LaurentPoly {
        let m = rows.len();
        if m == 0 {
            return LaurentPoly::one();
        }
        // dp[mask] = det of rows[0..popcount(mask)] x cols[mask]
        let mut dp: Vec<LaurentPoly> = vec![LaurentPoly::zero(); 1 << m];
        dp[0] = LaurentPoly::one();
        for mask in 1usize..(1 << m) {
            let r = mask.count_ones() as usize - 1;
            let mut acc = LaurentPoly::zero();
            let mut pos = 0usize;
            for (c, &col) in cols.iter().enumerate() {
                if mask & (1 << c) == 0 {
                    continue;
                }
                let sub = &dp[mask & !(1 << c)];
                let entry = self.get(rows[r], col);
                if !sub.is_zero() && !entry.is_zero() {
                    let term = entry * sub;
                    // sign of expanding along the last row: (-1)^(r + pos)
                    if (r + pos) % 2 == 0 {
                        acc = &acc + &term;
                    } else {
                        acc = &acc - &term;
                    }
                }
                pos += 1;
            }
            dp[mask] = acc;
        }
        dp[(1 << m) - 1].clone()
    }

    pub fn det(&self) -> LaurentPoly {
        let idx: Vec<usize> = (0..self.size).collect();
        self.minor_det(&idx, &idx)
    }

    /// Classical adjugate, `adj(g) * g = det(g) * I`.
    pub fn adjugate(&self) -> Self {
        let n = self.size;
        let mut out = Self::zeros(n);
        if n == 1 {
            out.set(0, 0, LaurentPoly::one());
            return out;
        }
        for i in 0..n {
            for j in 0..n {
                let rows: Vec<usize> = (0..n).filter(|&r| r != j).collect();
                let cols: Vec<usize> = (0..n).filter(|&c| c != i).collect();
                let d = self.minor_det(&rows, &cols);
                out.set(i, j, if (i + j) % 2 == 0 { d } else { -&d });
            }
        }
        out
    }

    /// Permute columns: column `j` of the result is column `order[j]` of `self`.
    pub fn permute_columns(&self, order: &[usize]) -> Self {
        let mut out = Self::zeros(self.size);
        for (j, &src) in order.iter().enumerate() {
            for i in 0..self.size {
                out.set(i, j, self.get(i, src).clone());
            }
        }
        out
    }
}

impl fmt::Display for LaurentMatrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for i in 0..self.size {
            let row: Vec<String> = (0..self.size).map(|j| self.get(i, j).to_string()).collect();
            writeln!(f, "[{}]", row.join(", "))?;
        }
        Ok(())
    }
}

/// Exact product; thin wrapper kept for the public operation name.
pub fn multiply(a: &LaurentMatrix, b: &LaurentMatrix) -> Result<LaurentMatrix> {
    a.multiply(b)
}

/// Minus the order of the determinant at `t = 0`.
pub fn det_pole_order(g: &LaurentMatrix) -> Result<i64> {
    g.det().ord().map(|o| -o).ok_or(Error::DegenerateLoop)
}
