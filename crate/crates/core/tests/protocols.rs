use proptest::prelude::*;
use smp_core::adversaries::{ne_tamper_message, MerlinStrategy};
use smp_core::classical::{
    eq_rr_exact, eq_rr_run, exact_to_f64, ne_rrr_round_exact, one_out_of_two_exact, EqRrParams, NeRrrParams,
    OneOutOfTwoParams,
};
use smp_core::codes::{encode, CodeSpec};
use smp_core::model::{hamming_distance, BitString, RandomSource};
use smp_core::qprotocols::{eq_qq_exact, uqst_run, UqstParams, DESK_SCALE};
use smp_core::quantum::{ProductState, StateVec};

fn bits(n: usize) -> impl Strategy<Value = BitString> {
    proptest::collection::vec(any::<bool>(), n).prop_map(|v| BitString::from_bools(&v))
}

proptest! {
    #![proptest_config(ProptestConfig { cases: 64, failure_persistence: None, ..ProptestConfig::default() })]

    #[test]
    fn eq_rr_exact_is_one_minus_distance_over_cells(x in bits(16), y in bits(16)) {
        let p = EqRrParams::new(16).unwrap();
        let g = p.spec.grid();
        let d = hamming_distance(&encode(&p.spec, &x).unwrap(), &encode(&p.spec, &y).unwrap()).unwrap();
        let cells = g.rows * g.cols;
        prop_assert!((exact_to_f64(&eq_rr_exact(&x, &y, &p).unwrap()) - (cells - d) as f64 / cells as f64).abs() < 1e-12);
    }

    #[test]
    fn eq_qq_round_closed_form(x in bits(12), y in bits(12)) {
        let spec = CodeSpec::for_input_len(12).unwrap();
        let big_n = spec.block_len() as f64;
        let d = hamming_distance(&encode(&spec, &x).unwrap(), &encode(&spec, &y).unwrap()).unwrap() as f64;
        let want = (big_n * big_n + (big_n - d).powi(2)) / (2.0 * big_n * big_n);
        prop_assert!((exact_to_f64(&eq_qq_exact(&x, &y, &spec).unwrap()) - want).abs() < 1e-12);
    }

    #[test]
    fn one_out_of_two_never_below_two_thirds(x1 in bits(20), x2 in bits(20), first in any::<bool>()) {
        prop_assume!(x1 != x2);
        let p = OneOutOfTwoParams::new(20).unwrap();
        let y = if first { x1.clone() } else { x2.clone() };
        prop_assert!(exact_to_f64(&one_out_of_two_exact(&x1, &x2, &y, &p).unwrap()) >= 2.0 / 3.0 - 1e-12);
    }

    #[test]
    fn tamper_acceptance_matches_product_formula(x in bits(16), u in 0usize..12, v in 0usize..12) {
        let p = NeRrrParams::new(16, 12, 1).unwrap();
        prop_assume!(u + v <= p.cols() && u + v >= p.threshold());
        let msg = ne_tamper_message(&x, u, v, 1, &p).unwrap();
        let m = p.cols() as f64;
        let want = (m - u as f64) * (m - v as f64) / (m * m);
        prop_assert!((exact_to_f64(&ne_rrr_round_exact(&x, &x, &msg, &p).unwrap()) - want).abs() < 1e-12);
    }
}

#[test]
fn equal_inputs_always_accepted_by_eq_rr() {
    let p = EqRrParams::new(32).unwrap();
    let mut rng = RandomSource::new(3, 0).rng();
    for _ in 0..200 {
        let x = BitString::random(32, &mut rng);
        assert!(eq_rr_run(&x, &x, &p, &mut rng).unwrap().0.accepted());
    }
}

#[test]
fn product_state_runs_round_trip() {
    let a = StateVec::basis(3, 0);
    let b = StateVec::basis(3, 1);
    let s = ProductState::new(vec![a.clone(), a.clone(), b.clone(), a.clone()]);
    assert_eq!(s.len(), 4);
    assert_eq!(s.runs().len(), 3);
    assert_eq!(s.run_of_block(), vec![0, 0, 1, 2]);
    assert_eq!(s.block(2), Some(&b));
    assert_eq!(s.block(4), None);
    assert_eq!(s.blocks().cloned().collect::<Vec<_>>(), vec![a.clone(), a.clone(), b, a]);
}

#[test]
fn wrong_copy_count_never_accepted() {
    let p = UqstParams::scaled(16, 4, 0.5, 0.25, DESK_SCALE).unwrap();
    let mut rng = RandomSource::new(8, 0).rng();
    let phi = StateVec::random(16, &mut rng);
    for count in [0, 1, 63, 65] {
        let (o, _, _) = uqst_run(&phi, &p, &MerlinStrategy::UqstWrongCount { count }, &mut rng).unwrap();
        assert!(!o.accepted);
    }
}
