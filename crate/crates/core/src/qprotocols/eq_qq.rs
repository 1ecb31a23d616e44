use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::classical::{exact_to_f64, Exact};
use crate::codes::{encode, CodeSpec};
use crate::error::Result;
use crate::model::{hamming_distance, index_bits, BitString, Decision, Message, ProtocolType, Transcript};
use crate::quantum::{fingerprint, StateStore};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EqQqOutcome {
    pub per_round: f64,
    pub acceptance: f64,
    pub decision: Decision,
}

/// Per-round swap-test acceptance `1/2 + <h_x|h_y>^2 / 2`, with
/// `<h_x|h_y> = 1 - d/N`.
pub fn eq_qq_exact(x: &BitString, y: &BitString, spec: &CodeSpec) -> Result<Exact> {
    let n = spec.block_len() as u128;
    let d = hamming_distance(&encode(spec, x)?, &encode(spec, y)?)? as u128;
    Ok(Exact::new(n * n + (n - d) * (n - d), 2 * n * n))
}

/// `t` rounds of fingerprint swap tests; accepts iff every round does.
pub fn eq_qq_run<R: Rng + ?Sized>(
    x: &BitString,
    y: &BitString,
    spec: &CodeSpec,
    repetitions: usize,
    rng: &mut R,
) -> Result<(EqQqOutcome, Transcript, StateStore)> {
    let per_round = exact_to_f64(&eq_qq_exact(x, y, spec)?);
    let accept = (0..repetitions).all(|_| rng.random::<f64>() < per_round);
    let store = StateStore::new();
    let hx = store.insert(fingerprint(spec, x)?);
    let hy = store.insert(fingerprint(spec, y)?);
    let qubits = index_bits(2 * spec.block_len());
    let transcript = Transcript {
        protocol: ProtocolType::new("QQ")?,
        alice: Message::quantum(vec![hx; repetitions], qubits * repetitions),
        bob: Message::quantum(vec![hy; repetitions], qubits * repetitions),
        merlin: None,
    };
    let outcome = EqQqOutcome {
        per_round,
        acceptance: per_round.powi(repetitions as i32),
        decision: if accept { Decision::Accept } else { Decision::Reject },
    };
    Ok((outcome, transcript, store))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::RandomSource;
    use crate::quantum::{swap_test_prob, SwapTarget};

    #[test]
    fn closed_form_matches_state_overlap() {
        let spec = CodeSpec::for_input_len(8).unwrap();
        let mut rng = RandomSource::new(1, 0).rng();
        for _ in 0..50 {
            let x = BitString::random(8, &mut rng);
            let y = BitString::random(8, &mut rng);
            let hx = fingerprint(&spec, &x).unwrap();
            let hy = fingerprint(&spec, &y).unwrap();
            let direct = swap_test_prob(&hx, SwapTarget::Pure(&hy)).unwrap();
            let exact = exact_to_f64(&eq_qq_exact(&x, &y, &spec).unwrap());
            assert!((direct - exact).abs() < 1e-12);
            if x != y {
                assert!(eq_qq_exact(&x, &y, &spec).unwrap() <= Exact::new(13, 18));
            }
        }
    }

    #[test]
    fn repetitions_multiply() {
        let spec = CodeSpec::for_input_len(8).unwrap();
        let x = BitString::from_u64(1, 8);
        let y = BitString::from_u64(2, 8);
        let mut rng = RandomSource::new(2, 0).rng();
        let (o, t, store) = eq_qq_run(&x, &y, &spec, 8, &mut rng).unwrap();
        assert!(o.acceptance < 0.08);
        t.validate(Some(&store)).unwrap();
        assert_eq!(t.lengths().0, 8 * index_bits(2 * spec.block_len()));
        let (o, _, _) = eq_qq_run(&x, &x, &spec, 8, &mut rng).unwrap();
        assert_eq!(o.decision, Decision::Accept);
    }
}
