//! Binary codes with relative distance at least 1/3: an outer Reed-Solomon
//! code over GF(2^s) of rate at most 1/3, concatenated with the Hadamard
//! code on s bits.
//!
//! Outer distance is `L - K + 1` symbols out of `L`, i.e. at least 2/3 of the
//! positions when `L >= 3K`, and every nonzero inner symbol difference costs
//! exactly `2^(s-1)` of the `2^s` inner bits. The product gives distance at
//! least `N/3` for `N = L * 2^s`.

mod gf2m;
mod grid;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::{hamming_distance, BitString};

pub use gf2m::Gf2m;
pub use grid::{best_row, GridCodeword, GridShape};

/// Parameters of a concatenated Reed-Solomon/Hadamard code, together with
/// the grid shape protocols use to view its codewords.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(try_from = "CodeSpecJson", into = "CodeSpecJson")]
pub struct CodeSpec {
    input_len: usize,
    symbol_bits: u32,
    outer_len: usize,
    grid: GridShape,
}

#[derive(Serialize, Deserialize)]
struct CodeSpecJson {
    n: usize,
    #[serde(rename = "N")]
    block_len: usize,
    s_outer: u32,
    rate: f64,
    padded_rows: usize,
    padded_cols: usize,
}

impl From<CodeSpec> for CodeSpecJson {
    fn from(c: CodeSpec) -> Self {
        CodeSpecJson {
            n: c.input_len,
            block_len: c.block_len(),
            s_outer: c.symbol_bits,
            rate: c.rate(),
            padded_rows: c.grid.rows,
            padded_cols: c.grid.cols,
        }
    }
}

impl TryFrom<CodeSpecJson> for CodeSpec {
    type Error = Error;

    fn try_from(j: CodeSpecJson) -> Result<Self> {
        let symbols = 1usize << j.s_outer;
        if j.block_len % symbols != 0 {
            return Err(Error::Config(format!(
                "N = {} is not a multiple of 2^{}",
                j.block_len, j.s_outer
            )));
        }
        let spec = CodeSpec::with_outer_len(j.n, j.s_outer, j.block_len / symbols)?;
        spec.with_grid(j.padded_rows, j.padded_cols)
    }
}

impl CodeSpec {
    /// The default code for `n`-bit inputs: the smallest symbol size `s`
    /// with `3 * ceil(n / s) <= 2^s`, outer length exactly three times the
    /// message length, and a square grid.
    pub fn for_input_len(n: usize) -> Result<Self> {
        if n == 0 {
            return Err(Error::InvalidParameter("input length must be positive".into()));
        }
        let mut s = 2u32;
        while 3 * n.div_ceil(s as usize) > (1usize << s) {
            s += 1;
        }
        CodeSpec::with_outer_len(n, s, 3 * n.div_ceil(s as usize))
    }

    /// A code with explicit symbol size and outer length. Any outer length
    /// between the message length and the field size is accepted, so rates
    /// above 1/3 can be built on purpose (distance is then not guaranteed).
    pub fn with_outer_len(n: usize, symbol_bits: u32, outer_len: usize) -> Result<Self> {
        if n == 0 {
            return Err(Error::InvalidParameter("input length must be positive".into()));
        }
        Gf2m::new(symbol_bits)?;
        let message_len = n.div_ceil(symbol_bits as usize);
        if outer_len < message_len || outer_len > (1usize << symbol_bits) {
            return Err(Error::InvalidParameter(format!(
                "outer length {outer_len} must lie in {message_len}..={}",
                1usize << symbol_bits
            )));
        }
        let block_len = outer_len << symbol_bits;
        Ok(CodeSpec {
            input_len: n,
            symbol_bits,
            outer_len,
            grid: GridShape::square_for(block_len),
        })
    }

    /// Same code, viewed as a `rows x cols` grid (row-major, zero padded).
    pub fn with_grid(mut self, rows: usize, cols: usize) -> Result<Self> {
        self.grid = GridShape::new(rows, cols, self.block_len())?;
        Ok(self)
    }

    /// Same code, viewed with `cols` columns and as few rows as fit.
    pub fn with_cols(self, cols: usize) -> Result<Self> {
        if cols == 0 {
            return Err(Error::InvalidParameter("grid needs at least one column".into()));
        }
        let rows = self.block_len().div_ceil(cols);
        self.with_grid(rows, cols)
    }

    pub fn input_len(&self) -> usize {
        self.input_len
    }

    pub fn symbol_bits(&self) -> u32 {
        self.symbol_bits
    }

    pub fn message_symbols(&self) -> usize {
        self.input_len.div_ceil(self.symbol_bits as usize)
    }

    pub fn outer_len(&self) -> usize {
        self.outer_len
    }

    /// Codeword length N before grid padding.
    pub fn block_len(&self) -> usize {
        self.outer_len << self.symbol_bits
    }

    pub fn rate(&self) -> f64 {
        self.message_symbols() as f64 / self.outer_len as f64
    }

    pub fn grid(&self) -> GridShape {
        self.grid
    }

    /// Minimum distance implied by the construction:
    /// `(L - K + 1) * 2^(s-1)`.
    pub fn designed_distance(&self) -> usize {
        (self.outer_len - self.message_symbols() + 1) << (self.symbol_bits - 1)
    }

    /// Whether the designed distance is at least `N/3`.
    pub fn distance_guaranteed(&self) -> bool {
        3 * self.designed_distance() >= self.block_len()
    }

    /// Whether the designed distance forces some grid row to differ in at
    /// least `ceil(cols/3)` places for every pair of distinct inputs.
    pub fn row_guarantee(&self) -> bool {
        self.designed_distance() > self.grid.rows * (self.grid.cols.div_ceil(3) - 1)
    }
}

pub fn encode(spec: &CodeSpec, x: &BitString) -> Result<BitString> {
    if x.len() != spec.input_len {
        return Err(Error::LengthMismatch {
            expected: spec.input_len,
            got: x.len(),
        });
    }
    let field = Gf2m::new(spec.symbol_bits)?;
    let s = spec.symbol_bits as usize;
    let message: Vec<u16> = (0..spec.message_symbols())
        .map(|k| {
            (0..s).fold(0u16, |acc, b| {
                let pos = k * s + b;
                let bit = pos < x.len() && x.get(pos);
                acc | ((bit as u16) << b)
            })
        })
        .collect();

    let inner_len = 1usize << s;
    let mut out = BitString::zeros(spec.block_len());
    for point in 0..spec.outer_len {
        let symbol = field.eval(&message, point as u16);
        for (z, bit) in hadamard(symbol, spec.symbol_bits).into_iter().enumerate() {
            if bit {
                out.set(point * inner_len + z, true);
            }
        }
    }
    Ok(out)
}

/// Hadamard encoding of an `s`-bit word: bit `z` is the parity of
/// `word & z`, for every `z` in `0..2^s`.
pub fn hadamard(word: u16, s: u32) -> Vec<bool> {
    (0..1u32 << s)
        .map(|z| (word as u32 & z).count_ones() % 2 == 1)
        .collect()
}

/// Smallest Hamming distance between codewords of distinct inputs, over all
/// `2^n` inputs. Only feasible for small `n`.
pub fn exhaustive_min_distance(spec: &CodeSpec) -> Result<usize> {
    let n = spec.input_len();
    if n > 16 {
        return Err(Error::InvalidParameter(format!(
            "exhaustive enumeration over 2^{n} inputs refused"
        )));
    }
    let words: Vec<BitString> = (0..1u64 << n)
        .map(|v| encode(spec, &BitString::from_u64(v, n)))
        .collect::<Result<_>>()?;
    let mut best = usize::MAX;
    for i in 0..words.len() {
        for j in i + 1..words.len() {
            best = best.min(hamming_distance(&words[i], &words[j])?);
        }
    }
    Ok(best)
}
