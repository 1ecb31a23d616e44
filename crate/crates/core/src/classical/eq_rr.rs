//! Plain equality baseline without Merlin: Alice sends a random row of
//! `C(x)`, Bob a random column of `C(y)`, the referee compares the entry
//! where they cross.

use rand::Rng;
use serde::{Deserialize, Serialize};

use super::Exact;
use crate::codes::{encode, CodeSpec, GridCodeword};
use crate::error::{Error, Result};
use crate::model::{hamming_distance, index_bits, BitString, Decision, Message, ProtocolType, Transcript};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EqRrParams {
    pub n: usize,
    pub spec: CodeSpec,
}

impl EqRrParams {
    pub fn new(n: usize) -> Result<Self> {
        Ok(EqRrParams { n, spec: CodeSpec::for_input_len(n)? })
    }
}

pub fn eq_rr_run<R: Rng + ?Sized>(x: &BitString, y: &BitString, p: &EqRrParams, rng: &mut R) -> Result<(Decision, Transcript)> {
    let shape = p.spec.grid();
    let gx = GridCodeword::new(&encode(&p.spec, x)?, shape)?;
    let gy = GridCodeword::new(&encode(&p.spec, y)?, shape)?;
    let j = rng.random_range(1..=shape.rows);
    let i = rng.random_range(1..=shape.cols);
    let row = gx.row(j)?;
    let col = gy.column(i)?;
    let decision = if row.get(i - 1) == col.get(j - 1) { Decision::Accept } else { Decision::Reject };

    let mut abits = BitString::zeros(0);
    abits.push_uint((j - 1) as u64, index_bits(shape.rows));
    abits.extend(&row);
    let mut bbits = BitString::zeros(0);
    bbits.push_uint((i - 1) as u64, index_bits(shape.cols));
    bbits.extend(&col);
    Ok((
        decision,
        Transcript {
            protocol: ProtocolType::new("RR")?,
            alice: Message::classical(abits),
            bob: Message::classical(bbits),
            merlin: None,
        },
    ))
}

/// Acceptance probability `1 - d / (rows * cols)` with `d` the codeword
/// distance.
pub fn eq_rr_exact(x: &BitString, y: &BitString, p: &EqRrParams) -> Result<Exact> {
    if x.len() != p.n || y.len() != p.n {
        return Err(Error::LengthMismatch { expected: p.n, got: x.len().max(y.len()) });
    }
    let d = hamming_distance(&encode(&p.spec, x)?, &encode(&p.spec, y)?)? as u128;
    let cells = p.spec.grid().padded_len() as u128;
    Ok(Exact::new(cells - d, cells))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::RandomSource;

    #[test]
    fn equal_inputs_always_accept() {
        let p = EqRrParams::new(16).unwrap();
        let mut rng = RandomSource::new(1, 0).rng();
        let x = BitString::random(16, &mut rng);
        assert_eq!(eq_rr_exact(&x, &x, &p).unwrap(), Exact::from_integer(1));
        for _ in 0..50 {
            assert_eq!(eq_rr_run(&x, &x, &p, &mut rng).unwrap().0, Decision::Accept);
        }
    }

    #[test]
    fn exact_matches_cell_enumeration() {
        let p = EqRrParams::new(8).unwrap();
        let shape = p.spec.grid();
        let x = BitString::from_u64(0x12, 8);
        let y = BitString::from_u64(0x13, 8);
        let gx = GridCodeword::new(&encode(&p.spec, &x).unwrap(), shape).unwrap();
        let gy = GridCodeword::new(&encode(&p.spec, &y).unwrap(), shape).unwrap();
        let mut agree = 0u128;
        for r in 1..=shape.rows {
            for c in 1..=shape.cols {
                agree += u128::from(gx.entry(r, c).unwrap() == gy.entry(r, c).unwrap());
            }
        }
        let total = (shape.rows * shape.cols) as u128;
        assert_eq!(eq_rr_exact(&x, &y, &p).unwrap(), Exact::new(agree, total));
        assert!(eq_rr_exact(&x, &y, &p).unwrap() <= Exact::new(2, 3));
    }
}
