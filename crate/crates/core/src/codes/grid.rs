use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::{hamming_distance, BitString};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct GridShape {
    pub rows: usize,
    pub cols: usize,
}

impl GridShape {
    pub fn new(rows: usize, cols: usize, block_len: usize) -> Result<Self> {
        if rows == 0 || cols == 0 || rows * cols < block_len {
            return Err(Error::InvalidParameter(format!(
                "{rows}x{cols} grid cannot hold {block_len} bits"
            )));
        }
        Ok(GridShape { rows, cols })
    }

    /// The `k x k` grid with the smallest `k` such that `k^2 >= block_len`.
    pub fn square_for(block_len: usize) -> Self {
        let mut k = (block_len as f64).sqrt() as usize;
        while k * k < block_len {
            k += 1;
        }
        while k > 1 && (k - 1) * (k - 1) >= block_len {
            k -= 1;
        }
        GridShape { rows: k, cols: k }
    }

    pub fn padded_len(&self) -> usize {
        self.rows * self.cols
    }

    /// Row threshold `ceil(cols/3)` used by every grid protocol.
    pub fn row_threshold(&self) -> usize {
        self.cols.div_ceil(3)
    }
}

/// A codeword laid out row-major on a grid, padded with zeros at the end.
/// Rows and columns are 1-based.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct GridCodeword {
    bits: BitString,
    shape: GridShape,
}

impl GridCodeword {
    pub fn new(codeword: &BitString, shape: GridShape) -> Result<Self> {
        if codeword.len() > shape.padded_len() {
            return Err(Error::LengthMismatch {
                expected: shape.padded_len(),
                got: codeword.len(),
            });
        }
        let mut bits = BitString::zeros(shape.padded_len());
        for (i, b) in codeword.iter().enumerate() {
            if b {
                bits.set(i, true);
            }
        }
        Ok(GridCodeword { bits, shape })
    }

    /// Grid view with explicit dimensions; `rows * cols` must hold the
    /// codeword.
    pub fn with_dims(codeword: &BitString, rows: usize, cols: usize) -> Result<Self> {
        GridCodeword::new(codeword, GridShape::new(rows, cols, codeword.len())?)
    }

    pub fn shape(&self) -> GridShape {
        self.shape
    }

    pub fn bits(&self) -> &BitString {
        &self.bits
    }

    pub fn entry(&self, row: usize, col: usize) -> Result<bool> {
        self.check_row(row)?;
        self.check_col(col)?;
        Ok(self.bits.get((row - 1) * self.shape.cols + (col - 1)))
    }

    pub fn row(&self, row: usize) -> Result<BitString> {
        self.check_row(row)?;
        Ok(self.bits.slice((row - 1) * self.shape.cols, self.shape.cols))
    }

    pub fn column(&self, col: usize) -> Result<BitString> {
        self.check_col(col)?;
        let mut out = BitString::zeros(self.shape.rows);
        for r in 0..self.shape.rows {
            if self.bits.get(r * self.shape.cols + (col - 1)) {
                out.set(r, true);
            }
        }
        Ok(out)
    }

    fn check_row(&self, row: usize) -> Result<()> {
        if row == 0 || row > self.shape.rows {
            return Err(Error::IndexOutOfRange {
                index: row,
                max: self.shape.rows,
            });
        }
        Ok(())
    }

    fn check_col(&self, col: usize) -> Result<()> {
        if col == 0 || col > self.shape.cols {
            return Err(Error::IndexOutOfRange {
                index: col,
                max: self.shape.cols,
            });
        }
        Ok(())
    }
}

/// Smallest row index whose rows differ in at least `ceil(cols/3)` places.
pub fn best_row(gx: &GridCodeword, gy: &GridCodeword) -> Result<usize> {
    if gx.shape != gy.shape {
        return Err(Error::InvalidParameter("grids have different shapes".into()));
    }
    if gx.bits == gy.bits {
        return Err(Error::PromiseViolation("grids are identical".into()));
    }
    let threshold = gx.shape.row_threshold();
    for r in 1..=gx.shape.rows {
        if hamming_distance(&gx.row(r)?, &gy.row(r)?)? >= threshold {
            return Ok(r);
        }
    }
    Err(Error::NoQualifyingRow)
}
