//! Untrusted quantum state transfer.
//!
//! Alice knows a pure state `φ` and shares a Haar-random subspace `V` with
//! the referee. She sends a quantised description of `φ` projected onto
//! `V`; Merlin sends `m` blocks that should each be `φ`. The referee sets
//! one block aside, measures every other block with `{V, I - V}`, swap-tests
//! `k` survivors against Alice's description and, if all pass, outputs the
//! untouched block.

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::adversaries::{uqst_message, MerlinStrategy, UqstMessage};
use crate::error::{Error, Result};
use crate::model::{index_bits, Message, ProtocolType, RandomSource, Transcript};
use crate::quantum::{
    bits_for_target, dequantize, haar_subspace, project, quantize, swap_test_prob, ProductState,
    QuantizedState, StateStore, StateVec, Subspace, SwapTarget, SURVIVAL_FLOOR,
};

/// Uniform constant multiplier that brings `(n, a, ε, δ) = (16, 4, 1/2, 1/4)`
/// down to 64 copies with 8 kept survivors.
pub const DESK_SCALE: f64 = 1.0 / 3200.0;

/// Stream label for the Alice-referee shared subspace.
const SHARED: u64 = 1;
const MERLIN: u64 = 2;
const REFEREE: u64 = 3;

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RefereeTest {
    /// Swap test against a fresh copy of Alice's state.
    #[default]
    Swap,
    /// Projective measurement onto Alice's state.
    Projective,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct UqstParams {
    pub n: usize,
    pub a: usize,
    pub epsilon: f64,
    pub delta: f64,
    pub scale: f64,
    pub m_copies: usize,
    pub k_surv: usize,
    pub tau: f64,
    #[serde(rename = "B")]
    pub bits: u32,
    #[serde(default)]
    pub test: RefereeTest,
}

fn scaled_ceil(x: f64) -> usize {
    // Guard against products like 204800 * (1/3200) landing just above 64.
    (x - 1e-9).ceil().max(1.0) as usize
}

impl UqstParams {
    /// `m = ⌈scale · 200n/(aε²δ³)⌉`, `k = ⌈scale · 100/(δ³ε²)⌉`, precision
    /// `τ = ε²δ⁴/100`.
    pub fn scaled(n: usize, a: usize, epsilon: f64, delta: f64, scale: f64) -> Result<Self> {
        if !(epsilon > 0.0 && epsilon <= 1.0) || !(delta > 0.0 && delta < 1.0) {
            return Err(Error::InvalidParameter(format!("need 0 < ε <= 1 and 0 < δ < 1, got {epsilon}, {delta}")));
        }
        if !(scale > 0.0 && scale.is_finite()) {
            return Err(Error::InvalidParameter(format!("scale {scale} must be positive")));
        }
        if a == 0 || a > n {
            return Err(Error::InvalidParameter(format!("need 1 <= a <= n, got a = {a}, n = {n}")));
        }
        if a as f64 > epsilon * n as f64 {
            return Err(Error::InvalidParameter(format!("a = {a} exceeds εn = {}", epsilon * n as f64)));
        }
        let (e2, d3) = (epsilon * epsilon, delta.powi(3));
        let m_copies = scaled_ceil(scale * 200.0 * n as f64 / (a as f64 * e2 * d3)).max(2);
        let k_surv = scaled_ceil(scale * 100.0 / (d3 * e2));
        let tau = e2 * delta.powi(4) / 100.0;
        let bits = bits_for_target(a, tau)?;
        Ok(UqstParams { n, a, epsilon, delta, scale, m_copies, k_surv, tau, bits, test: RefereeTest::Swap })
    }

    pub fn full_scale(n: usize, a: usize, epsilon: f64, delta: f64) -> Result<Self> {
        UqstParams::scaled(n, a, epsilon, delta, 1.0)
    }

    pub fn with_test(mut self, test: RefereeTest) -> Self {
        self.test = test;
        self
    }

    /// Classical bits in Alice's message.
    pub fn alice_bits(&self) -> usize {
        2 * self.a * self.bits as usize
    }

    /// Qubits in an honest Merlin message.
    pub fn merlin_qubits(&self) -> usize {
        self.m_copies * index_bits(self.n)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct UqstOutcome {
    pub accepted: bool,
    /// The reserved block, present exactly when the run accepted.
    pub output_state: Option<StateVec>,
    pub survivors: usize,
    pub reserved_block: Option<usize>,
    /// Measurement result for every block; `None` for the reserved one.
    pub block_survival: Vec<Option<bool>>,
    pub swap_results: Vec<bool>,
    pub reject_reason: Option<String>,
}

impl UqstOutcome {
    fn reject(reason: &str, reserved: Option<usize>, survival: Vec<Option<bool>>, swaps: Vec<bool>) -> Self {
        let survivors = survival.iter().filter(|s| **s == Some(true)).count();
        UqstOutcome {
            accepted: false,
            output_state: None,
            survivors,
            reserved_block: reserved,
            block_survival: survival,
            swap_results: swaps,
            reject_reason: Some(reason.to_string()),
        }
    }

    /// Trace distance of the output from `phi`, when there is an output.
    pub fn output_distance(&self, phi: &StateVec) -> Result<Option<f64>> {
        self.output_state
            .as_ref()
            .map(|s| crate::quantum::trace_distance_pure(phi, s))
            .transpose()
    }
}

/// Alice's classical message: `φ` projected onto `V`, quantised. A state
/// orthogonal to `V` (a probability-zero event) is described by the first
/// basis vector.
pub fn uqst_alice(phi: &StateVec, v: &Subspace, bits: u32) -> Result<QuantizedState> {
    let coords = project(phi, v)?.coords.unwrap_or_else(|| StateVec::basis(v.dim(), 0));
    quantize(&coords, bits)
}

/// Per-run measurement statistics: the probability a block of the run
/// lands in `V`, and the probability its post-measurement state then passes
/// the test against `psi`.
pub(crate) struct RunStats {
    survival: Vec<f64>,
    pass: Vec<f64>,
}

impl RunStats {
    pub(crate) fn new(message: &ProductState, v: &Subspace, psi: &StateVec, test: RefereeTest) -> Result<Self> {
        let mut survival = Vec::with_capacity(message.runs().len());
        let mut pass = Vec::with_capacity(message.runs().len());
        for (block, _) in message.runs() {
            let proj = project(block, v)?;
            survival.push(proj.survival);
            pass.push(match proj.coords {
                None => 0.0,
                Some(coords) => match test {
                    RefereeTest::Swap => swap_test_prob(psi, SwapTarget::Pure(&coords))?,
                    RefereeTest::Projective => psi.inner(&coords)?.norm_sqr().min(1.0),
                },
            });
        }
        Ok(RunStats { survival, pass })
    }

    /// Outcome of `{V, I - V}` on one block of run `r`.
    pub(crate) fn measure<R: Rng + ?Sized>(&self, r: usize, rng: &mut R) -> bool {
        let p = self.survival[r];
        p >= 1.0 || (p >= SURVIVAL_FLOOR && rng.random::<f64>() < p)
    }

    /// Test of a surviving block of run `r` against Alice's state.
    pub(crate) fn test<R: Rng + ?Sized>(&self, r: usize, rng: &mut R) -> bool {
        rng.random::<f64>() < self.pass[r]
    }
}

pub(crate) fn well_formed(message: &ProductState, params: &UqstParams) -> bool {
    message.len() == params.m_copies && message.runs().iter().all(|(b, _)| b.dim() == params.n)
}

/// The referee's side given Merlin's (pure, product) message.
pub fn uqst_referee<R: Rng + ?Sized>(
    message: &ProductState,
    v: &Subspace,
    alice: &QuantizedState,
    params: &UqstParams,
    rng: &mut R,
) -> Result<UqstOutcome> {
    let m = params.m_copies;
    if !well_formed(message, params) {
        return Ok(UqstOutcome::reject("malformed merlin message", None, vec![], vec![]));
    }
    let psi = dequantize(alice)?;
    let stats = RunStats::new(message, v, &psi, params.test)?;
    let reserved = rng.random_range(0..m);
    let mut survival = vec![None; m];
    let mut kept = Vec::with_capacity(params.k_surv);
    for (b, r) in message.run_of_block().into_iter().enumerate() {
        if b == reserved {
            continue;
        }
        let inside = stats.measure(r, rng);
        survival[b] = Some(inside);
        if inside && kept.len() < params.k_surv {
            kept.push(r);
        }
    }
    if kept.len() < params.k_surv {
        return Ok(UqstOutcome::reject("too few survivors", Some(reserved), survival, vec![]));
    }
    let swaps: Vec<bool> = kept.iter().map(|&r| stats.test(r, rng)).collect();
    if swaps.iter().any(|ok| !ok) {
        return Ok(UqstOutcome::reject("test failed", Some(reserved), survival, swaps));
    }
    let survivors = survival.iter().filter(|s| **s == Some(true)).count();
    Ok(UqstOutcome {
        accepted: true,
        output_state: message.block(reserved).cloned(),
        survivors,
        reserved_block: Some(reserved),
        block_survival: survival,
        swap_results: swaps,
        reject_reason: None,
    })
}

/// Handles for a product message, storing each run once.
pub(crate) fn store_blocks(store: &StateStore, msg: &ProductState) -> Vec<crate::model::StateHandle> {
    let mut handles = Vec::with_capacity(msg.len());
    for (b, count) in msg.runs() {
        let h = store.insert(b.clone());
        handles.extend(std::iter::repeat_n(h, *count));
    }
    handles
}

pub(crate) fn product_qubits(msg: &ProductState) -> usize {
    msg.runs().iter().map(|(b, c)| c * index_bits(b.dim())).sum()
}

/// One full transfer of `phi`. All coins come from `rng`; the shared
/// subspace is drawn from a child stream seeded by it.
pub fn uqst_run<R: Rng + ?Sized>(
    phi: &StateVec,
    params: &UqstParams,
    merlin: &MerlinStrategy,
    rng: &mut R,
) -> Result<(UqstOutcome, Transcript, StateStore)> {
    if phi.dim() != params.n {
        return Err(Error::DimensionMismatch(phi.dim(), params.n));
    }
    let src = RandomSource::new(rng.random(), 0);
    let v = haar_subspace(params.n, params.a, &mut src.derive(SHARED).rng())?;
    let alice = uqst_alice(phi, &v, params.bits)?;
    let mut merlin_rng = src.derive(MERLIN).rng();
    let message = match uqst_message(merlin, phi, params, &mut merlin_rng)? {
        UqstMessage::Product(p) => p,
        m @ UqstMessage::Mixed(_) => m.realize(&mut merlin_rng),
    };
    let outcome = uqst_referee(&message, &v, &alice, params, &mut src.derive(REFEREE).rng())?;

    let store = StateStore::new();
    let handles = store_blocks(&store, &message);
    let transcript = Transcript {
        protocol: ProtocolType::new("RDQ")?,
        alice: Message::classical(alice.to_bits()),
        bob: Message::classical(crate::model::BitString::zeros(0)),
        merlin: Some(Message::quantum(handles, product_qubits(&message))),
    };
    Ok((outcome, transcript, store))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::quantum::trace_distance_pure;

    fn desk() -> UqstParams {
        UqstParams::scaled(16, 4, 0.5, 0.25, DESK_SCALE).unwrap()
    }

    #[test]
    fn desk_parameters() {
        let p = desk();
        assert_eq!((p.m_copies, p.k_surv, p.bits), (64, 8, 22));
        let full = UqstParams::full_scale(16, 4, 0.5, 0.25).unwrap();
        assert_eq!((full.m_copies, full.k_surv), (204_800, 25_600));
        assert!(UqstParams::full_scale(16, 9, 0.5, 0.25).is_err());
    }

    #[test]
    fn honest_runs_accept_with_exact_output() {
        let p = desk();
        let mut rng = RandomSource::new(1, 0).rng();
        let mut accepted = 0;
        for _ in 0..100 {
            let phi = StateVec::random(16, &mut rng);
            let (o, t, store) = uqst_run(&phi, &p, &MerlinStrategy::UqstHonest, &mut rng).unwrap();
            t.validate(Some(&store)).unwrap();
            assert_eq!(t.lengths(), (p.alice_bits(), 0, p.merlin_qubits()));
            assert_eq!(o.output_state.is_some(), o.accepted);
            if o.accepted {
                accepted += 1;
                assert_eq!(o.output_distance(&phi).unwrap(), Some(0.0));
            }
            assert_eq!(o.block_survival[o.reserved_block.unwrap()], None);
        }
        assert!(accepted >= 75, "{accepted}");
    }

    #[test]
    fn wrong_count_rejects() {
        let p = desk();
        let mut rng = RandomSource::new(2, 0).rng();
        let phi = StateVec::random(16, &mut rng);
        let (o, _, _) = uqst_run(&phi, &p, &MerlinStrategy::UqstWrongCount { count: 63 }, &mut rng).unwrap();
        assert!(!o.accepted);
        assert_eq!(o.reject_reason.as_deref(), Some("malformed merlin message"));
    }

    #[test]
    fn orthogonal_blocks_mostly_fail() {
        let p = desk();
        let mut rng = RandomSource::new(3, 0).rng();
        let mut accepted = 0;
        for _ in 0..200 {
            let phi = StateVec::random(16, &mut rng);
            let (o, _, _) = uqst_run(&phi, &p, &MerlinStrategy::UqstFarProduct { gamma: 1.0 }, &mut rng).unwrap();
            if let Some(d) = o.output_distance(&phi).unwrap() {
                assert!((d - 1.0).abs() < 1e-9);
                accepted += 1;
            }
        }
        assert!(accepted < 20, "{accepted}");
    }

    #[test]
    fn projective_mode_accepts_honest_and_rejects_orthogonal() {
        let p = desk().with_test(RefereeTest::Projective);
        let mut rng = RandomSource::new(4, 0).rng();
        let phi = StateVec::random(16, &mut rng);
        let v = haar_subspace(16, 4, &mut rng).unwrap();
        let alice = uqst_alice(&phi, &v, p.bits).unwrap();
        let honest = ProductState::copies(&phi, p.m_copies);
        let mut accepted = 0;
        for _ in 0..50 {
            accepted += usize::from(uqst_referee(&honest, &v, &alice, &p, &mut rng).unwrap().accepted);
        }
        assert!(accepted >= 45);
        let psi = dequantize(&alice).unwrap();
        assert!(trace_distance_pure(&psi, &StateVec::try_normalized(v.coords_of(phi.amplitudes())).unwrap()).unwrap() <= p.tau);
    }

    #[test]
    fn mixed_strategy_and_entangled_pair_is_refused() {
        let p = desk();
        let mut rng = RandomSource::new(5, 0).rng();
        let phi = StateVec::random(16, &mut rng);
        let mixed = MerlinStrategy::UqstMixed { far_weight: 0.5, gamma: 0.9 };
        assert!(uqst_run(&phi, &p, &mixed, &mut rng).is_ok());
        let ent = MerlinStrategy::UqstEntangledPair { d1: 2, d2: 2 };
        assert!(matches!(uqst_run(&phi, &p, &ent, &mut rng), Err(Error::Config(_))));
    }
}
