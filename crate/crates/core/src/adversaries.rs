//! Merlin strategies, honest and cheating, for every protocol with a prover.
//!
//! Strategies are plain data (so they can live in a harness config) plus
//! message factories that turn a strategy and the inputs into what Merlin
//! actually sends.

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::classical::{ne_honest_message, DisjParams, NeMerlinMsg, NeRrrParams};
use crate::codes::{encode, GridCodeword};
use crate::error::{Error, Result};
use crate::field::{poly_eval, s_polynomial, EvalTable, UniPoly};
use crate::model::BitString;
use crate::qprotocols::UqstParams;
use crate::quantum::{
    dephase_across_blocks, MixedEnsemble, ProductState, StateVec, Subspace, MAX_JOINT_DIM,
};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "variant", rename_all = "snake_case")]
pub enum MerlinStrategy {
    /// Rows of a qualifying grid row for `x != y`; true (equal) rows of
    /// row 1 when `x = y`.
    NeHonest,
    /// Row `row` of `C(x)` sent twice, with the lowest `u` entries flipped
    /// in the first copy and the lowest `v` in the second.
    NeTamper {
        u: usize,
        v: usize,
        #[serde(default = "first_row")]
        row: usize,
    },
    NeArbitrary { message: NeMerlinMsg },
    DisjHonest,
    /// `s + Δ` for a random `Δ` chosen so the node sum vanishes.
    DisjWrongPoly {
        #[serde(default)]
        seed: u64,
    },
    UqstHonest,
    /// Every block is the same state at trace distance `gamma` from the
    /// target.
    UqstFarProduct { gamma: f64 },
    /// With probability `far_weight` the far-product message, otherwise
    /// the honest one.
    UqstMixed { far_weight: f64, gamma: f64 },
    /// A maximally entangled pair of blocks; only meaningful for the
    /// dephasing check, never as a full protocol message.
    UqstEntangledPair { d1: usize, d2: usize },
    /// Honest blocks, but the wrong number of them.
    UqstWrongCount { count: usize },
    /// For the composed equality protocols: copies of the fingerprint of
    /// the other player's input.
    SwappedFingerprint,
}

fn first_row() -> usize {
    1
}

impl MerlinStrategy {
    pub fn name(&self) -> &'static str {
        match self {
            MerlinStrategy::NeHonest => "ne_honest",
            MerlinStrategy::NeTamper { .. } => "ne_tamper",
            MerlinStrategy::NeArbitrary { .. } => "ne_arbitrary",
            MerlinStrategy::DisjHonest => "disj_honest",
            MerlinStrategy::DisjWrongPoly { .. } => "disj_wrong_poly",
            MerlinStrategy::UqstHonest => "uqst_honest",
            MerlinStrategy::UqstFarProduct { .. } => "uqst_far_product",
            MerlinStrategy::UqstMixed { .. } => "uqst_mixed",
            MerlinStrategy::UqstEntangledPair { .. } => "uqst_entangled_pair",
            MerlinStrategy::UqstWrongCount { .. } => "uqst_wrong_count",
            MerlinStrategy::SwappedFingerprint => "swapped_fingerprint",
        }
    }

    pub fn is_honest(&self) -> bool {
        matches!(
            self,
            MerlinStrategy::NeHonest | MerlinStrategy::DisjHonest | MerlinStrategy::UqstHonest
        )
    }
}

/// Merlin's message in the NE protocol.
pub fn ne_message(strategy: &MerlinStrategy, x: &BitString, y: &BitString, params: &NeRrrParams) -> Result<NeMerlinMsg> {
    match strategy {
        MerlinStrategy::NeHonest => ne_honest_message(x, y, params),
        MerlinStrategy::NeTamper { u, v, row } => ne_tamper_message(x, *u, *v, *row, params),
        MerlinStrategy::NeArbitrary { message } => Ok(message.clone()),
        other => Err(Error::Config(format!("strategy {} does not apply to ne-rrr", other.name()))),
    }
}

/// Row `row` of `C(x)` twice, with the lowest `u` positions flipped in the
/// first copy and the lowest `v` in the second, so the copies differ in
/// exactly `u + v` places.
pub fn ne_tamper_message(x: &BitString, u: usize, v: usize, row: usize, params: &NeRrrParams) -> Result<NeMerlinMsg> {
    let m = params.cols();
    if u + v > m {
        return Err(Error::InvalidParameter(format!("u + v = {} exceeds row length {m}", u + v)));
    }
    let grid = GridCodeword::new(&encode(params.spec(), x)?, params.spec().grid())?;
    let base = grid.row(row)?;
    let mut r = base.clone();
    let mut s = base;
    for k in 0..u {
        r.flip(k);
    }
    for k in u..u + v {
        s.flip(k);
    }
    Ok(NeMerlinMsg { row, r, s })
}

/// Merlin's polynomial in the disjointness protocol.
pub fn disj_message(strategy: &MerlinStrategy, x: &BitString, y: &BitString, params: &DisjParams) -> Result<UniPoly> {
    match strategy {
        MerlinStrategy::DisjHonest => honest_s(x, y, params),
        MerlinStrategy::DisjWrongPoly { seed } => {
            let mut rng = crate::model::RandomSource::new(*seed, 0x5151).rng();
            disj_wrong_poly(x, y, params, &mut rng)
        }
        other => Err(Error::Config(format!("strategy {} does not apply to disj-rrr", other.name()))),
    }
}

fn honest_s(x: &BitString, y: &BitString, params: &DisjParams) -> Result<UniPoly> {
    let a = EvalTable::from_bits(params.field(), x, params.rows(), params.cols())?;
    let b = EvalTable::from_bits(params.field(), y, params.rows(), params.cols())?;
    s_polynomial(&a, &b)
}

/// `s + Δ` with `Δ` random of degree at most the degree bound and
/// `sum_i Δ(i) = -sum_i s(i)` over the nodes, so the sum test passes; never
/// equal to `s`.
pub fn disj_wrong_poly<R: Rng + ?Sized>(x: &BitString, y: &BitString, params: &DisjParams, rng: &mut R) -> Result<UniPoly> {
    let f = params.field();
    let s = honest_s(x, y, params)?;
    let nodes = params.rows() as u64;
    let node_sum = |p: &UniPoly| (1..=nodes).fold(0, |acc, i| f.add(acc, poly_eval(p, i, &f)));
    let target = f.neg(node_sum(&s));
    let inv_nodes = f.inv(nodes).expect("node count is below the modulus");
    loop {
        let mut coeffs: Vec<u64> = (0..=params.degree_bound())
            .map(|_| rng.random_range(0..f.modulus()))
            .collect();
        // Shift the constant term so the node sum hits the target.
        let current = node_sum(&UniPoly::new(coeffs.clone()));
        let shift = f.mul(f.sub(target, current), inv_nodes);
        coeffs[0] = f.add(coeffs[0], shift);
        let delta = UniPoly::new(coeffs);
        if !delta.is_zero() {
            return Ok(s.add(&delta, &f));
        }
    }
}

/// What Merlin hands the UQST referee.
#[derive(Debug, Clone, PartialEq)]
pub enum UqstMessage {
    Product(ProductState),
    Mixed(MixedEnsemble),
}

impl UqstMessage {
    /// One pure product message; mixtures are sampled once per trial.
    pub fn realize<R: Rng + ?Sized>(&self, rng: &mut R) -> ProductState {
        match self {
            UqstMessage::Product(p) => p.clone(),
            UqstMessage::Mixed(m) => m.sample(rng).clone(),
        }
    }
}

pub fn uqst_honest_message(phi: &StateVec, params: &UqstParams) -> ProductState {
    ProductState::copies(phi, params.m_copies)
}

/// Merlin's UQST message when the state to transfer is `phi`.
pub fn uqst_message<R: Rng + ?Sized>(
    strategy: &MerlinStrategy,
    phi: &StateVec,
    params: &UqstParams,
    rng: &mut R,
) -> Result<UqstMessage> {
    Ok(match strategy {
        MerlinStrategy::UqstHonest => UqstMessage::Product(uqst_honest_message(phi, params)),
        MerlinStrategy::UqstFarProduct { gamma } => {
            UqstMessage::Product(uqst_far_product(phi, *gamma, params, rng)?)
        }
        MerlinStrategy::UqstMixed { far_weight, gamma } => {
            if !(0.0..=1.0).contains(far_weight) {
                return Err(Error::Config(format!("far_weight {far_weight} not in [0, 1]")));
            }
            let far = uqst_far_product(phi, *gamma, params, rng)?;
            let honest = uqst_honest_message(phi, params);
            UqstMessage::Mixed(MixedEnsemble::new(vec![(*far_weight, far), (1.0 - far_weight, honest)])?)
        }
        MerlinStrategy::UqstWrongCount { count } => {
            UqstMessage::Product(ProductState::copies(phi, *count))
        }
        other => {
            return Err(Error::Config(format!(
                "strategy {} does not apply to uqst",
                other.name()
            )))
        }
    })
}

/// `phi` rotated towards a random orthogonal direction by `arcsin(gamma)`,
/// i.e. at trace distance exactly `gamma`.
pub fn far_state<R: Rng + ?Sized>(phi: &StateVec, gamma: f64, rng: &mut R) -> Result<StateVec> {
    if !(0.0..=1.0).contains(&gamma) {
        return Err(Error::InvalidParameter(format!("gamma {gamma} not in [0, 1]")));
    }
    if phi.dim() < 2 && gamma > 0.0 {
        return Err(Error::InvalidParameter("no orthogonal direction in dimension 1".into()));
    }
    if gamma == 0.0 {
        return Ok(phi.clone());
    }
    let perp = loop {
        let r = StateVec::random(phi.dim(), rng);
        let c = phi.inner(&r)?;
        let v: Vec<_> = r
            .amplitudes()
            .iter()
            .zip(phi.amplitudes())
            .map(|(ri, pi)| ri - c * pi)
            .collect();
        if let Ok(v) = StateVec::try_normalized(v) {
            break v;
        }
    };
    let theta = gamma.asin();
    let (s, c) = theta.sin_cos();
    Ok(StateVec::normalized(
        phi.amplitudes()
            .iter()
            .zip(perp.amplitudes())
            .map(|(p, q)| p * c + q * s)
            .collect(),
    ))
}

pub fn uqst_far_product<R: Rng + ?Sized>(phi: &StateVec, gamma: f64, params: &UqstParams, rng: &mut R) -> Result<ProductState> {
    Ok(ProductState::copies(&far_state(phi, gamma, rng)?, params.m_copies))
}

/// A maximally entangled state of two blocks together with its dephased
/// ensemble in the given local bases.
pub fn uqst_entangled_pair(d1: usize, d2: usize, basis_a: &Subspace, basis_b: &Subspace) -> Result<(StateVec, MixedEnsemble)> {
    if d1 * d2 > MAX_JOINT_DIM.min(16) {
        return Err(Error::DimensionTooLarge(d1 * d2));
    }
    let r = d1.min(d2);
    let amp = num_complex::Complex64::new(1.0 / (r as f64).sqrt(), 0.0);
    let mut amps = vec![num_complex::Complex64::new(0.0, 0.0); d1 * d2];
    for k in 0..r {
        amps[k * d2 + k] = amp;
    }
    let joint = StateVec::new(amps)?;
    let ens = dephase_across_blocks(&joint, d1, d2, basis_a, basis_b)?;
    Ok((joint, ens))
}
