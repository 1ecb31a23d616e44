//! Non-equality with an untrusted prover. Codewords are viewed as
//! `a x m` matrices; Merlin names a row where `C(x)` and `C(y)` differ a lot
//! and sends that row of each, and each player sends one random column so
//! the referee can spot-check Merlin's rows.

use rand::Rng;
use serde::{Deserialize, Serialize};

use super::Exact;
use crate::adversaries::{ne_message, MerlinStrategy};
use crate::codes::{best_row, encode, CodeSpec, GridCodeword};
use crate::error::{Error, Result};
use crate::model::{hamming_distance, index_bits, BitString, Decision, Message, ProtocolType, Transcript};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NeRrrParams {
    pub n: usize,
    pub spec: CodeSpec,
    pub repetitions: usize,
}

impl NeRrrParams {
    /// Default code for `n` viewed with `cols` columns; fails unless every
    /// pair of distinct codewords has a row differing in `ceil(cols/3)`
    /// places.
    pub fn new(n: usize, cols: usize, repetitions: usize) -> Result<Self> {
        NeRrrParams::from_spec(CodeSpec::for_input_len(n)?.with_cols(cols)?, repetitions)
    }

    /// Default code with the square grid's column count.
    pub fn square(n: usize, repetitions: usize) -> Result<Self> {
        NeRrrParams::from_spec(CodeSpec::for_input_len(n)?, repetitions)
    }

    pub fn from_spec(spec: CodeSpec, repetitions: usize) -> Result<Self> {
        if repetitions == 0 {
            return Err(Error::InvalidParameter("need at least one repetition".into()));
        }
        if !spec.row_guarantee() {
            return Err(Error::InvalidParameter(format!(
                "a {}x{} grid does not guarantee a qualifying row",
                spec.grid().rows,
                spec.grid().cols
            )));
        }
        Ok(NeRrrParams { n: spec.input_len(), spec, repetitions })
    }

    pub fn spec(&self) -> &CodeSpec {
        &self.spec
    }

    pub fn rows(&self) -> usize {
        self.spec.grid().rows
    }

    pub fn cols(&self) -> usize {
        self.spec.grid().cols
    }

    pub fn threshold(&self) -> usize {
        self.spec.grid().row_threshold()
    }
}

/// Merlin's claim: row `row` of `C(x)` is `r` and of `C(y)` is `s`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct NeMerlinMsg {
    pub row: usize,
    pub r: BitString,
    pub s: BitString,
}

impl NeMerlinMsg {
    fn well_formed(&self, p: &NeRrrParams) -> bool {
        (1..=p.rows()).contains(&self.row) && self.r.len() == p.cols() && self.s.len() == p.cols()
    }

    fn to_bits(&self, p: &NeRrrParams) -> BitString {
        let mut bits = BitString::zeros(0);
        bits.push_uint(self.row.saturating_sub(1) as u64, index_bits(p.rows()));
        bits.extend(&self.r);
        bits.extend(&self.s);
        bits
    }
}

/// The true rows at the first qualifying row, or row 1 when `x = y`.
pub fn ne_honest_message(x: &BitString, y: &BitString, p: &NeRrrParams) -> Result<NeMerlinMsg> {
    let (gx, gy) = grids(x, y, p)?;
    let row = if x == y { 1 } else { best_row(&gx, &gy)? };
    Ok(NeMerlinMsg { row, r: gx.row(row)?, s: gy.row(row)? })
}

fn grids(x: &BitString, y: &BitString, p: &NeRrrParams) -> Result<(GridCodeword, GridCodeword)> {
    let shape = p.spec.grid();
    Ok((
        GridCodeword::new(&encode(&p.spec, x)?, shape)?,
        GridCodeword::new(&encode(&p.spec, y)?, shape)?,
    ))
}

fn round_accepts(msg: &NeMerlinMsg, col_x: &BitString, i: usize, col_y: &BitString, j: usize, p: &NeRrrParams) -> bool {
    msg.well_formed(p)
        && col_x.get(msg.row - 1) == msg.r.get(i - 1)
        && col_y.get(msg.row - 1) == msg.s.get(j - 1)
        && hamming_distance(&msg.r, &msg.s).is_ok_and(|d| d >= p.threshold())
}

pub fn ne_rrr_run<R: Rng + ?Sized>(
    x: &BitString,
    y: &BitString,
    merlin: &MerlinStrategy,
    p: &NeRrrParams,
    rng: &mut R,
) -> Result<(Decision, Transcript)> {
    let (gx, gy) = grids(x, y, p)?;
    let msg = ne_message(merlin, x, y, p)?;
    let (m, a) = (p.cols(), p.rows());
    let mut abits = BitString::zeros(0);
    let mut bbits = BitString::zeros(0);
    let mut mbits = BitString::zeros(0);
    let mut accept = true;
    for _ in 0..p.repetitions {
        let i = rng.random_range(1..=m);
        let j = rng.random_range(1..=m);
        let col_x = gx.column(i)?;
        let col_y = gy.column(j)?;
        accept &= round_accepts(&msg, &col_x, i, &col_y, j, p);
        abits.push_uint((i - 1) as u64, index_bits(m));
        abits.extend(&col_x);
        bbits.push_uint((j - 1) as u64, index_bits(m));
        bbits.extend(&col_y);
        if msg.well_formed(p) {
            mbits.extend(&msg.to_bits(p));
        } else {
            // A malformed claim still costs what it would have cost.
            mbits.extend(&BitString::zeros(index_bits(a) + msg.r.len() + msg.s.len()));
        }
    }
    let decision = if accept { Decision::Accept } else { Decision::Reject };
    Ok((
        decision,
        Transcript {
            protocol: ProtocolType::new("RRR")?,
            alice: Message::classical(abits),
            bob: Message::classical(bbits),
            merlin: Some(Message::classical(mbits)),
        },
    ))
}

/// One-round acceptance, enumerating all column pairs.
pub fn ne_rrr_round_exact(x: &BitString, y: &BitString, msg: &NeMerlinMsg, p: &NeRrrParams) -> Result<Exact> {
    let (gx, gy) = grids(x, y, p)?;
    let m = p.cols();
    let cols_x: Vec<BitString> = (1..=m).map(|i| gx.column(i)).collect::<Result<_>>()?;
    let cols_y: Vec<BitString> = (1..=m).map(|j| gy.column(j)).collect::<Result<_>>()?;
    let mut hits = 0u128;
    for (i, cx) in cols_x.iter().enumerate() {
        for (j, cy) in cols_y.iter().enumerate() {
            hits += u128::from(round_accepts(msg, cx, i + 1, cy, j + 1, p));
        }
    }
    Ok(Exact::new(hits, (m * m) as u128))
}

/// Acceptance over all repetitions when Merlin repeats `msg` every round.
pub fn ne_rrr_exact(x: &BitString, y: &BitString, msg: &NeMerlinMsg, p: &NeRrrParams) -> Result<Exact> {
    let round = ne_rrr_round_exact(x, y, msg, p)?;
    Ok((0..p.repetitions).fold(Exact::from_integer(1), |acc, _| acc * round))
}
