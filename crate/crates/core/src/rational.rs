//! Small dense linear algebra over exact rationals, plus fraction formatting.

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};

pub type RatMatrix = Vec<Vec<BigRational>>;

pub fn rat(n: i64) -> BigRational {
    BigRational::from_integer(BigInt::from(n))
}

pub fn ratio(n: i64, d: i64) -> BigRational {
    BigRational::new(BigInt::from(n), BigInt::from(d))
}

/// `"num/den"`, or just `"num"` for integers.
pub fn fmt_fraction(q: &BigRational) -> String {
    if q.denom().is_one() {
        q.numer().to_string()
    } else {
        format!("{}/{}", q.numer(), q.denom())
    }
}

pub fn parse_fraction(s: &str) -> Option<BigRational> {
    let s = s.trim();
    match s.split_once('/') {
        Some((n, d)) => {
            let n: BigInt = n.trim().parse().ok()?;
            let d: BigInt = d.trim().parse().ok()?;
            if d.is_zero() {
                None
            } else {
                Some(BigRational::new(n, d))
            }
        }
        None => s.parse::<BigInt>().ok().map(BigRational::from_integer),
    }
}

pub fn to_f64(q: &BigRational) -> f64 {
    q.to_f64().unwrap_or(f64::NAN)
}

/// Row echelon reduction; returns (rank, determinant sign-corrected).
fn eliminate(mut m: RatMatrix) -> (RatMatrix, usize, BigRational) {
    let rows = m.len();
    let cols = if rows == 0 { 0 } else { m[0].len() };
    let mut det = BigRational::one();
    let mut r = 0;
    for c in 0..cols {
        let Some(p) = (r..rows).find(|&i| !m[i][c].is_zero()) else {
            det = BigRational::zero();
            continue;
        };
        if p != r {
            m.swap(p, r);
            det = -det;
        }
        let pivot = m[r][c].clone();
        det *= &pivot;
        for i in 0..rows {
            if i != r && !m[i][c].is_zero() {
                let f = &m[i][c] / &pivot;
                for j in c..cols {
                    let v = &f * &m[r][j];
                    m[i][j] -= v;
                }
            }
        }
        r += 1;
        if r == rows {
            break;
        }
    }
    (m, r, det)
}

pub fn det(m: &RatMatrix) -> BigRational {
    let n = m.len();
    let (_, rank, d) = eliminate(m.clone());
    if rank < n {
        BigRational::zero()
    } else {
        d
    }
}

pub fn rank(m: &RatMatrix) -> usize {
    eliminate(m.clone()).1
}

/// A nonzero vector `c` with `sum_j c_j * column_j = 0`, if the columns are
/// dependent.
pub fn column_relation(m: &RatMatrix) -> Option<Vec<BigRational>> {
    let rows = m.len();
    let cols = m.first().map_or(0, Vec::len);
    let (red, _, _) = eliminate(m.clone());
    // locate pivot columns of the reduced form
    let mut pivots = Vec::new();
    let mut r = 0;
    for c in 0..cols {
        if r < rows && !red[r][c].is_zero() {
            pivots.push((r, c));
            r += 1;
        } else {
            // free column: relation c_free = 1, pivots solve back
            let mut v = vec![BigRational::zero(); cols];
            v[c] = BigRational::one();
            for &(pr, pc) in &pivots {
                v[pc] = -(&red[pr][c] / &red[pr][pc]);
            }
            return Some(v);
        }
    }
    None
}

pub fn inverse(m: &RatMatrix) -> Option<RatMatrix> {
    let n = m.len();
    let mut aug: RatMatrix = m
        .iter()
        .enumerate()
        .map(|(i, row)| {
            let mut r = row.clone();
            r.extend((0..n).map(|j| if i == j { BigRational::one() } else { BigRational::zero() }));
            r
        })
        .collect();
    for c in 0..n {
        let p = (c..n).find(|&i| !aug[i][c].is_zero())?;
        aug.swap(p, c);
        let pivot = aug[c][c].clone();
        for v in aug[c].iter_mut() {
            *v /= &pivot;
        }
        for i in 0..n {
            if i != c && !aug[i][c].is_zero() {
                let f = aug[i][c].clone();
                for j in 0..2 * n {
                    let v = &f * &aug[c][j];
                    aug[i][j] -= v;
                }
            }
        }
    }
    Some(aug.into_iter().map(|r| r[n..].to_vec()).collect())
}

pub fn abs_max(v: &[BigRational]) -> BigRational {
    v.iter().map(|x| x.abs()).max().unwrap_or_else(BigRational::zero)
}
