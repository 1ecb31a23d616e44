use super::{interpolate, PrimeField, UniPoly};
use crate::error::{Error, Result};
use crate::model::BitString;

/// Values `a(i, j)` on the grid `[rows] x [cols]`, stored row-major.
///
/// A bit string `x` of length `rows * cols` maps to the table with
/// `a(i, j) = x[cols * (i - 1) + j]` (1-based on both sides).
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct EvalTable {
    field: PrimeField,
    rows: usize,
    cols: usize,
    values: Vec<u64>,
}

impl EvalTable {
    pub fn new(field: PrimeField, rows: usize, cols: usize, values: Vec<u64>) -> Result<Self> {
        if rows == 0 || cols == 0 {
            return Err(Error::InvalidParameter("empty evaluation table".into()));
        }
        if values.len() != rows * cols {
            return Err(Error::LengthMismatch {
                expected: rows * cols,
                got: values.len(),
            });
        }
        let values = values.into_iter().map(|v| field.elem(v)).collect();
        Ok(EvalTable {
            field,
            rows,
            cols,
            values,
        })
    }

    pub fn from_bits(field: PrimeField, x: &BitString, rows: usize, cols: usize) -> Result<Self> {
        let values = x.iter().map(u64::from).collect();
        EvalTable::new(field, rows, cols, values)
    }

    pub fn field(&self) -> &PrimeField {
        &self.field
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    /// Table value at 1-based `(i, j)`.
    pub fn get(&self, i: usize, j: usize) -> u64 {
        self.values[(i - 1) * self.cols + (j - 1)]
    }

    /// The block `{ ã(r, j) : j in [cols] }` a player sends for point `r`.
    pub fn block_at(&self, r: u64) -> Result<Vec<u64>> {
        let basis = lagrange_basis_at(self.rows, r, &self.field)?;
        let f = &self.field;
        Ok((1..=self.cols)
            .map(|j| {
                basis
                    .iter()
                    .enumerate()
                    .fold(0, |acc, (k, &l)| f.add(acc, f.mul(l, self.get(k + 1, j))))
            })
            .collect())
    }
}

/// Values at `r` of the Lagrange basis polynomials for nodes `1..=t`,
/// in barycentric form.
pub fn lagrange_basis_at(t: usize, r: u64, f: &PrimeField) -> Result<Vec<u64>> {
    if t as u64 >= f.modulus() {
        return Err(Error::FieldTooSmall(format!(
            "{t} interpolation nodes need a field larger than {}",
            f.modulus()
        )));
    }
    let r = f.elem(r);
    if (1..=t as u64).contains(&r) {
        let mut unit = vec![0; t];
        unit[r as usize - 1] = 1;
        return Ok(unit);
    }
    // ell(r) = prod_k (r - k); w_i = 1 / ((i-1)! (-1)^(t-i) (t-i)!).
    let ell = (1..=t as u64).fold(1, |acc, k| f.mul(acc, f.sub(r, k)));
    let mut fact = vec![1u64; t];
    for k in 1..t {
        fact[k] = f.mul(fact[k - 1], k as u64);
    }
    (1..=t)
        .map(|i| {
            let mut denom = f.mul(fact[i - 1], fact[t - i]);
            if (t - i) % 2 == 1 {
                denom = f.neg(denom);
            }
            let denom = f.mul(denom, f.sub(r, i as u64));
            let inv = f.inv(denom).expect("nonzero: r is not a node and t < q");
            Ok(f.mul(ell, inv))
        })
        .collect()
}

/// `ã(r, j)`: the degree `rows - 1` interpolant of column `j` through the
/// points `(i, a(i, j))`, evaluated at `r`.
pub fn lde_eval(table: &EvalTable, r: u64, j: usize) -> Result<u64> {
    if j == 0 || j > table.cols {
        return Err(Error::IndexOutOfRange {
            index: j,
            max: table.cols,
        });
    }
    let basis = lagrange_basis_at(table.rows, r, &table.field)?;
    let f = &table.field;
    Ok(basis
        .iter()
        .enumerate()
        .fold(0, |acc, (k, &l)| f.add(acc, f.mul(l, table.get(k + 1, j)))))
}

/// `s(r) = sum_j ã(r, j) * b̃(r, j)`, recovered as a polynomial of degree at
/// most `2(rows - 1)` by interpolation at `1..=2*rows - 1`.
pub fn s_polynomial(a: &EvalTable, b: &EvalTable) -> Result<UniPoly> {
    if a.rows != b.rows || a.cols != b.cols || a.field != b.field {
        return Err(Error::InvalidParameter("tables have different shapes or fields".into()));
    }
    let f = &a.field;
    let points = 2 * a.rows - 1;
    if points as u64 >= f.modulus() {
        return Err(Error::FieldTooSmall(format!(
            "{points} interpolation points need a field larger than {}",
            f.modulus()
        )));
    }
    let nodes: Vec<u64> = (1..=points as u64).collect();
    let values = nodes
        .iter()
        .map(|&r| s_value(a, b, r))
        .collect::<Result<Vec<_>>>()?;
    interpolate(&nodes, &values, f)
}

/// `s(r)` computed directly from the two tables.
pub fn s_value(a: &EvalTable, b: &EvalTable, r: u64) -> Result<u64> {
    let f = &a.field;
    let ba = a.block_at(r)?;
    let bb = b.block_at(r)?;
    Ok(ba
        .iter()
        .zip(&bb)
        .fold(0, |acc, (&u, &v)| f.add(acc, f.mul(u, v))))
}
