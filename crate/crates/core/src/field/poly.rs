use serde::{Deserialize, Deserializer, Serialize, Serializer};

use super::PrimeField;
use crate::error::{Error, Result};

/// A univariate polynomial over a prime field, constant term first, with
/// trailing zero coefficients trimmed. The zero polynomial has no
/// coefficients.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Default)]
pub struct UniPoly {
    coeffs: Vec<u64>,
}

impl UniPoly {
    pub fn zero() -> Self {
        UniPoly { coeffs: Vec::new() }
    }

    pub fn new(mut coeffs: Vec<u64>) -> Self {
        while coeffs.last() == Some(&0) {
            coeffs.pop();
        }
        UniPoly { coeffs }
    }

    pub fn constant(c: u64) -> Self {
        UniPoly::new(vec![c])
    }

    pub fn coeffs(&self) -> &[u64] {
        &self.coeffs
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.is_empty()
    }

    /// Degree, with the zero polynomial reported as `None`.
    pub fn degree(&self) -> Option<usize> {
        self.coeffs.len().checked_sub(1)
    }

    pub fn add(&self, other: &UniPoly, f: &PrimeField) -> UniPoly {
        let len = self.coeffs.len().max(other.coeffs.len());
        let get = |p: &UniPoly, k: usize| p.coeffs.get(k).copied().unwrap_or(0);
        UniPoly::new((0..len).map(|k| f.add(get(self, k), get(other, k))).collect())
    }

    pub fn sub(&self, other: &UniPoly, f: &PrimeField) -> UniPoly {
        let len = self.coeffs.len().max(other.coeffs.len());
        let get = |p: &UniPoly, k: usize| p.coeffs.get(k).copied().unwrap_or(0);
        UniPoly::new((0..len).map(|k| f.sub(get(self, k), get(other, k))).collect())
    }
}

impl Serialize for UniPoly {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        let strs: Vec<String> = self.coeffs.iter().map(u64::to_string).collect();
        strs.serialize(s)
    }
}

impl<'de> Deserialize<'de> for UniPoly {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let strs = Vec::<String>::deserialize(d)?;
        let coeffs = strs
            .iter()
            .map(|s| s.parse::<u64>().map_err(serde::de::Error::custom))
            .collect::<std::result::Result<Vec<_>, _>>()?;
        Ok(UniPoly::new(coeffs))
    }
}

pub fn poly_eval(p: &UniPoly, r: u64, f: &PrimeField) -> u64 {
    let r = f.elem(r);
    p.coeffs.iter().rev().fold(0, |acc, &c| f.add(f.mul(acc, r), c))
}

/// Number of points of `points` where the two polynomials agree.
pub fn agreement_count(p1: &UniPoly, p2: &UniPoly, points: &[u64], f: &PrimeField) -> usize {
    points
        .iter()
        .filter(|&&r| poly_eval(p1, r, f) == poly_eval(p2, r, f))
        .count()
}

/// Coefficients of the unique polynomial of degree below `nodes.len()`
/// through `(nodes[k], values[k])`, by Newton divided differences.
pub fn interpolate(nodes: &[u64], values: &[u64], f: &PrimeField) -> Result<UniPoly> {
    if nodes.len() != values.len() {
        return Err(Error::LengthMismatch {
            expected: nodes.len(),
            got: values.len(),
        });
    }
    let nodes: Vec<u64> = nodes.iter().map(|&x| f.elem(x)).collect();
    let t = nodes.len();
    let mut dd: Vec<u64> = values.iter().map(|&v| f.elem(v)).collect();
    for level in 1..t {
        for k in (level..t).rev() {
            let denom = f.sub(nodes[k], nodes[k - level]);
            let inv = f.inv(denom).ok_or_else(|| {
                Error::FieldTooSmall(format!("interpolation nodes collide modulo {}", f.modulus()))
            })?;
            dd[k] = f.mul(f.sub(dd[k], dd[k - 1]), inv);
        }
    }
    // Horner on the Newton form: p = dd0 + (x - x0)(dd1 + (x - x1)(...)).
    let mut coeffs: Vec<u64> = Vec::with_capacity(t);
    for k in (0..t).rev() {
        // coeffs <- coeffs * (x - nodes[k]) + dd[k]
        let mut next = vec![0u64; coeffs.len() + 1];
        for (e, &c) in coeffs.iter().enumerate() {
            next[e + 1] = f.add(next[e + 1], c);
            next[e] = f.sub(next[e], f.mul(c, nodes[k]));
        }
        next[0] = f.add(next[0], dd[k]);
        coeffs = next;
    }
    Ok(UniPoly::new(coeffs))
}
