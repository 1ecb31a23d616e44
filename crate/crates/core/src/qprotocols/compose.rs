//! Equality protocols that swap a quantum player for a classical one plus
//! Merlin.
//!
//! In QRQ Bob's fingerprint is delivered through state transfer and then
//! swap-tested against Alice's. In RRQ both players are classical: Merlin
//! sends copies of the (common) fingerprint, half of which are checked
//! against each player's projected description.

use rand::seq::SliceRandom;
use rand::Rng;
use serde::{Deserialize, Serialize};

use super::uqst::{product_qubits, store_blocks, uqst_alice, uqst_referee, well_formed, RunStats, UqstParams};
use crate::adversaries::{uqst_message, MerlinStrategy};
use crate::codes::CodeSpec;
use crate::error::{Error, Result};
use crate::model::{index_bits, BitString, Decision, Message, ProtocolType, RandomSource, Transcript};
use crate::quantum::{
    dequantize, fingerprint, haar_subspace, swap_test_prob, ProductState, StateStore, StateVec, SwapTarget,
};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ComposedOutcome {
    pub decision: Decision,
    /// Survivor counts per measured group (per round for QRQ, per half
    /// for RRQ).
    pub survivors: Vec<usize>,
    pub reject_reason: Option<String>,
}

fn check_dim(spec: &CodeSpec, params: &UqstParams) -> Result<()> {
    if params.n != 2 * spec.block_len() {
        return Err(Error::Config(format!(
            "state dimension {} does not match fingerprint dimension {}",
            params.n,
            2 * spec.block_len()
        )));
    }
    Ok(())
}

/// Merlin's blocks when the honest content is `honest` and the swapped
/// content is `other`.
fn merlin_blocks<R: Rng + ?Sized>(
    merlin: &MerlinStrategy,
    honest: &StateVec,
    other: &StateVec,
    params: &UqstParams,
    rng: &mut R,
) -> Result<ProductState> {
    let target = match merlin {
        MerlinStrategy::SwappedFingerprint => other,
        _ => honest,
    };
    let strategy = match merlin {
        MerlinStrategy::SwappedFingerprint => &MerlinStrategy::UqstHonest,
        s => s,
    };
    Ok(uqst_message(strategy, target, params, rng)?.realize(rng))
}

pub fn qrq_eq_run<R: Rng + ?Sized>(
    x: &BitString,
    y: &BitString,
    spec: &CodeSpec,
    params: &UqstParams,
    merlin: &MerlinStrategy,
    repetitions: usize,
    rng: &mut R,
) -> Result<(ComposedOutcome, Transcript, StateStore)> {
    check_dim(spec, params)?;
    if repetitions == 0 {
        return Err(Error::InvalidParameter("need at least one repetition".into()));
    }
    let hx = fingerprint(spec, x)?;
    let hy = fingerprint(spec, y)?;
    let store = StateStore::new();
    let hx_handle = store.insert(hx.clone());
    let (mut bob_bits, mut merlin_handles, mut merlin_qubits) = (BitString::zeros(0), Vec::new(), 0);
    let mut survivors = Vec::with_capacity(repetitions);
    let mut reason = None;

    for round in 0..repetitions as u64 {
        let src = RandomSource::new(rng.random(), round);
        let v = haar_subspace(params.n, params.a, &mut src.derive(1).rng())?;
        let bob = uqst_alice(&hy, &v, params.bits)?;
        let message = merlin_blocks(merlin, &hy, &hx, params, &mut src.derive(2).rng())?;
        let mut referee_rng = src.derive(3).rng();
        let outcome = uqst_referee(&message, &v, &bob, params, &mut referee_rng)?;

        bob_bits.extend(&bob.to_bits());
        merlin_handles.extend(store_blocks(&store, &message));
        merlin_qubits += product_qubits(&message);
        survivors.push(outcome.survivors);

        if reason.is_some() {
            continue;
        }
        match outcome.output_state {
            None => reason = Some(format!("transfer rejected: {}", outcome.reject_reason.unwrap_or_default())),
            Some(rho) => {
                let p = swap_test_prob(&hx, SwapTarget::Pure(&rho))?;
                if referee_rng.random::<f64>() >= p {
                    reason = Some("final swap test failed".into());
                }
            }
        }
    }

    let qubits = index_bits(hx.dim());
    let transcript = Transcript {
        protocol: ProtocolType::new("QRQ")?,
        alice: Message::quantum(vec![hx_handle; repetitions], qubits * repetitions),
        bob: Message::classical(bob_bits),
        merlin: Some(Message::quantum(merlin_handles, merlin_qubits)),
    };
    let decision = if reason.is_none() { Decision::Accept } else { Decision::Reject };
    Ok((ComposedOutcome { decision, survivors, reject_reason: reason }, transcript, store))
}

pub fn rrq_eq_run<R: Rng + ?Sized>(
    x: &BitString,
    y: &BitString,
    spec: &CodeSpec,
    params: &UqstParams,
    merlin: &MerlinStrategy,
    rng: &mut R,
) -> Result<(ComposedOutcome, Transcript, StateStore)> {
    check_dim(spec, params)?;
    let hx = fingerprint(spec, x)?;
    let hy = fingerprint(spec, y)?;
    let src = RandomSource::new(rng.random(), 0);
    let va = haar_subspace(params.n, params.a, &mut src.derive(1).rng())?;
    let vb = haar_subspace(params.n, params.a, &mut src.derive(4).rng())?;
    let alice = uqst_alice(&hx, &va, params.bits)?;
    let bob = uqst_alice(&hy, &vb, params.bits)?;
    let message = merlin_blocks(merlin, &hx, &hy, params, &mut src.derive(2).rng())?;

    let store = StateStore::new();
    let transcript = Transcript {
        protocol: ProtocolType::new("RRQ")?,
        alice: Message::classical(alice.to_bits()),
        bob: Message::classical(bob.to_bits()),
        merlin: Some(Message::quantum(store_blocks(&store, &message), product_qubits(&message))),
    };
    let reject = |reason: &str, survivors: Vec<usize>| ComposedOutcome {
        decision: Decision::Reject,
        survivors,
        reject_reason: Some(reason.into()),
    };

    if !well_formed(&message, params) {
        return Ok((reject("malformed merlin message", vec![]), transcript, store));
    }
    let mut referee_rng = src.derive(3).rng();
    let mut order: Vec<usize> = (0..message.len()).collect();
    order.shuffle(&mut referee_rng);
    let (half_a, half_b) = order.split_at(message.len() / 2);
    let run_of = message.run_of_block();

    let mut survivors = vec![0, 0];
    let mut failed = false;
    for (side, (half, v, desc)) in [(half_a, &va, &alice), (half_b, &vb, &bob)].into_iter().enumerate() {
        let stats = RunStats::new(&message, v, &dequantize(desc)?, params.test)?;
        for &b in half {
            if stats.measure(run_of[b], &mut referee_rng) {
                survivors[side] += 1;
                failed |= !stats.test(run_of[b], &mut referee_rng);
            }
        }
    }
    let outcome = if failed {
        reject("test failed", survivors)
    } else if survivors.contains(&0) {
        reject("a half had no survivors", survivors)
    } else {
        ComposedOutcome { decision: Decision::Accept, survivors, reject_reason: None }
    };
    Ok((outcome, transcript, store))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::qprotocols::DESK_SCALE;

    fn setup(n: usize) -> (CodeSpec, UqstParams) {
        let spec = CodeSpec::for_input_len(n).unwrap();
        let params = UqstParams::scaled(2 * spec.block_len(), 4, 0.5, 0.25, DESK_SCALE).unwrap();
        (spec, params)
    }

    #[test]
    fn dimension_mismatch_is_config_error() {
        let spec = CodeSpec::for_input_len(8).unwrap();
        let params = UqstParams::scaled(16, 4, 0.5, 0.25, DESK_SCALE).unwrap();
        let x = BitString::zeros(8);
        let mut rng = RandomSource::new(0, 0).rng();
        assert!(matches!(qrq_eq_run(&x, &x, &spec, &params, &MerlinStrategy::UqstHonest, 1, &mut rng), Err(Error::Config(_))));
    }

    #[test]
    fn qrq_equal_inputs_mostly_accept() {
        let (spec, params) = setup(8);
        let mut rng = RandomSource::new(1, 0).rng();
        let mut accepted = 0;
        for _ in 0..100 {
            let x = BitString::random(8, &mut rng);
            let (o, t, store) = qrq_eq_run(&x, &x, &spec, &params, &MerlinStrategy::UqstHonest, 1, &mut rng).unwrap();
            t.validate(Some(&store)).unwrap();
            accepted += usize::from(o.decision.accepted());
        }
        // Identical blocks share one survival probability, so the
        // survivor count is overdispersed and some honest runs fall short.
        assert!(accepted >= 65, "{accepted}");
    }

    #[test]
    fn rrq_rejects_swapped_and_junk() {
        let (spec, params) = setup(8);
        let mut rng = RandomSource::new(2, 0).rng();
        let mut honest_eq = 0;
        let mut honest_ne = 0;
        let mut junk = 0;
        for _ in 0..40 {
            let x = BitString::random(8, &mut rng);
            let mut y = x.clone();
            y.flip(0);
            let (o, t, store) = rrq_eq_run(&x, &x, &spec, &params, &MerlinStrategy::UqstHonest, &mut rng).unwrap();
            t.validate(Some(&store)).unwrap();
            honest_eq += usize::from(o.decision.accepted());
            let (o, _, _) = rrq_eq_run(&x, &y, &spec, &params, &MerlinStrategy::UqstHonest, &mut rng).unwrap();
            honest_ne += usize::from(o.decision.accepted());
            let (o, _, _) =
                rrq_eq_run(&x, &x, &spec, &params, &MerlinStrategy::UqstFarProduct { gamma: 1.0 }, &mut rng).unwrap();
            junk += usize::from(o.decision.accepted());
        }
        assert!(honest_eq >= 30, "{honest_eq}");
        assert!(honest_ne <= 10, "{honest_ne}");
        assert!(junk <= 5, "{junk}");
    }
}
