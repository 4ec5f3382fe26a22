//! JSON encoding of loops: `{"size": n, "entries": [...]}` where each entry
//! is a list of `[exp, num, den]` triples. `entries` may be a flat row-major
//! list of `n*n` entries or a list of `n` rows.

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{ToPrimitive, Zero};
use serde_json::{json, Value};

use super::matrix::LaurentMatrix;
use super::poly::LaurentPoly;
use crate::{Error, Result};

fn parse_int(v: &Value, ctx: &str) -> Result<BigInt> {
    match v {
        Value::Number(n) => n
            .as_i64()
            .map(BigInt::from)
            .ok_or_else(|| Error::Parse(format!("{ctx}: expected an integer, got {n}"))),
        Value::String(s) => s
            .trim()
            .parse()
            .map_err(|_| Error::Parse(format!("{ctx}: expected an integer string, got {s:?}"))),
        other => Err(Error::Parse(format!("{ctx}: expected an integer, got {other}"))),
    }
}

pub fn poly_from_json(v: &Value, ctx: &str) -> Result<LaurentPoly> {
    let terms = v
        .as_array()
        .ok_or_else(|| Error::Parse(format!("{ctx}: expected a list of [exp, num, den] triples")))?;
    let mut p = LaurentPoly::zero();
    for (i, t) in terms.iter().enumerate() {
        let ctx = format!("{ctx}[{i}]");
        let triple = t
            .as_array()
            .filter(|a| a.len() == 3)
            .ok_or_else(|| Error::Parse(format!("{ctx}: expected [exp, num, den]")))?;
        let exp = parse_int(&triple[0], &ctx)?
            .to_i64()
            .ok_or_else(|| Error::Parse(format!("{ctx}: exponent out of range")))?;
        let num = parse_int(&triple[1], &ctx)?;
        let den = parse_int(&triple[2], &ctx)?;
        if den.is_zero() {
            return Err(Error::Parse(format!("{ctx}: zero denominator")));
        }
        p.add_term(exp, BigRational::new(num, den));
    }
    Ok(p)
}

fn int_json(n: &BigInt) -> Value {
    match n.to_i64() {
        Some(v) => json!(v),
        None => json!(n.to_string()),
    }
}

pub fn poly_to_json(p: &LaurentPoly) -> Value {
    Value::Array(
        p.terms()
            .map(|(e, c)| json!([e, int_json(c.numer()), int_json(c.denom())]))
            .collect(),
    )
}

pub fn matrix_from_json(v: &Value) -> Result<LaurentMatrix> {
    let size = v
        .get("size")
        .and_then(Value::as_u64)
        .ok_or_else(|| Error::Parse("loop: missing positive integer field \"size\"".into()))?
        as usize;
    if size == 0 {
        return Err(Error::Parse("loop: size must be positive".into()));
    }
    let entries = v
        .get("entries")
        .and_then(Value::as_array)
        .ok_or_else(|| Error::Parse("loop: missing list field \"entries\"".into()))?;
    let mut flat: Vec<(String, &Value)> = Vec::with_capacity(size * size);
    let nested = entries.len() == size
        && entries.iter().all(|row| {
            row.as_array().is_some_and(|r| {
                r.len() == size && r.iter().all(|e| e.as_array().is_some_and(|t| t.iter().all(Value::is_array)))
            })
        })
        && size * size != entries.len();
    if nested {
        for (i, row) in entries.iter().enumerate() {
            for (j, e) in row.as_array().unwrap().iter().enumerate() {
                flat.push((format!("entries[{i}][{j}]"), e));
            }
        }
    } else if entries.len() == size * size {
        for (k, e) in entries.iter().enumerate() {
            flat.push((format!("entries[{k}]"), e));
        }
    } else {
        return Err(Error::Parse(format!(
            "loop: expected {} entries (or {size} rows of {size}), got {}",
            size * size,
            entries.len()
        )));
    }
    let mut m = LaurentMatrix::zeros(size);
    for (k, (ctx, e)) in flat.into_iter().enumerate() {
        m.set(k / size, k % size, poly_from_json(e, &ctx)?);
    }
    Ok(m)
}

/// Flat row-major encoding.
pub fn matrix_to_json(m: &LaurentMatrix) -> Value {
    json!({
        "size": m.size(),
        "entries": m.entries().iter().map(poly_to_json).collect::<Vec<_>>(),
    })
}
