//! Deciding which of two strings Bob holds: Alice sends one grid row of
//! both codewords, Bob one column of his.

use rand::Rng;
use serde::{Deserialize, Serialize};

use super::Exact;
use crate::codes::{best_row, encode, CodeSpec, GridCodeword};
use crate::error::{Error, Result};
use crate::model::{index_bits, BitString, Decision, Message, ProtocolType, Transcript};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OneOutOfTwoParams {
    pub n: usize,
    pub spec: CodeSpec,
}

impl OneOutOfTwoParams {
    pub fn new(n: usize) -> Result<Self> {
        OneOutOfTwoParams::from_spec(CodeSpec::for_input_len(n)?)
    }

    pub fn from_spec(spec: CodeSpec) -> Result<Self> {
        let g = spec.grid();
        if g.rows != g.cols {
            return Err(Error::InvalidParameter(format!("grid {}x{} is not square", g.rows, g.cols)));
        }
        Ok(OneOutOfTwoParams { n: spec.input_len(), spec })
    }

    pub fn k(&self) -> usize {
        self.spec.grid().cols
    }
}

fn check_promise(x1: &BitString, x2: &BitString, y: &BitString) -> Result<bool> {
    if x1 == x2 {
        return Err(Error::PromiseViolation("x1 = x2".into()));
    }
    match (x1 == y, x2 == y) {
        (true, false) => Ok(true),
        (false, true) => Ok(false),
        _ => Err(Error::PromiseViolation("y equals neither x1 nor x2".into())),
    }
}

struct AliceView {
    row: usize,
    r1: BitString,
    r2: BitString,
}

fn alice(x1: &BitString, x2: &BitString, p: &OneOutOfTwoParams) -> Result<AliceView> {
    let shape = p.spec.grid();
    let g1 = GridCodeword::new(&encode(&p.spec, x1)?, shape)?;
    let g2 = GridCodeword::new(&encode(&p.spec, x2)?, shape)?;
    let row = best_row(&g1, &g2)?;
    Ok(AliceView { row, r1: g1.row(row)?, r2: g2.row(row)? })
}

pub fn one_out_of_two_run<R: Rng + ?Sized>(
    x1: &BitString,
    x2: &BitString,
    y: &BitString,
    p: &OneOutOfTwoParams,
    rng: &mut R,
) -> Result<(Decision, Transcript)> {
    check_promise(x1, x2, y)?;
    let k = p.k();
    let a = alice(x1, x2, p)?;
    let gy = GridCodeword::new(&encode(&p.spec, y)?, p.spec.grid())?;
    let i = rng.random_range(1..=k);
    let column = gy.column(i)?;

    let (e1, e2, eb) = (a.r1.get(i - 1), a.r2.get(i - 1), column.get(a.row - 1));
    let decision = if e1 != e2 {
        if e1 == eb { Decision::FirstEqual } else { Decision::SecondEqual }
    } else if rng.random_bool(0.5) {
        Decision::FirstEqual
    } else {
        Decision::SecondEqual
    };

    let mut abits = BitString::zeros(0);
    abits.push_uint((a.row - 1) as u64, index_bits(k));
    abits.extend(&a.r1);
    abits.extend(&a.r2);
    let mut bbits = BitString::zeros(0);
    bbits.push_uint((i - 1) as u64, index_bits(k));
    bbits.extend(&column);
    let transcript = Transcript {
        protocol: ProtocolType::new("DR")?,
        alice: Message::classical(abits),
        bob: Message::classical(bbits),
        merlin: None,
    };
    Ok((decision, transcript))
}

/// Probability the referee names the right string, over Bob's column and
/// the referee's tie-breaking coin.
pub fn one_out_of_two_exact(x1: &BitString, x2: &BitString, y: &BitString, p: &OneOutOfTwoParams) -> Result<Exact> {
    check_promise(x1, x2, y)?;
    let k = p.k() as u128;
    let a = alice(x1, x2, p)?;
    let twice_hits: u128 = (0..p.k()).map(|i| if a.r1.get(i) != a.r2.get(i) { 2 } else { 1 }).sum();
    Ok(Exact::new(twice_hits, 2 * k))
}
