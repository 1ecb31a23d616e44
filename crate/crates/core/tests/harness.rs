use serde_json::json;
use smp_core::adversaries::MerlinStrategy;
use smp_core::harness::{hoeffding_half_width, run, run_with_workers, sweep, ExperimentConfig, Mode, ProtocolId};
use smp_core::verify::{criterion, verify_suite, Fault, VerifyOptions};
use smp_core::Error;

#[test]
fn reports_are_reproducible_and_worker_independent() {
    for protocol in [ProtocolId::EqQq, ProtocolId::Uqst, ProtocolId::DisjRrr] {
        let mut c = ExperimentConfig::new(protocol, 16);
        if protocol == ProtocolId::DisjRrr {
            c.params.alpha = [1, 2];
            c.params.sample_scale = 0.1;
        }
        c.trials = 200;
        c.seed = 99;
        let serial = serde_json::to_string(&run_with_workers(&c, 1).unwrap()).unwrap();
        let parallel = serde_json::to_string(&run_with_workers(&c, 3).unwrap()).unwrap();
        assert_eq!(serial, parallel, "{protocol}");
    }
}

#[test]
fn ci_half_width_at_ten_thousand_trials() {
    assert!((hoeffding_half_width(10_000, 0.01) - 0.016276).abs() < 1e-6);
}

#[test]
fn tamper_sweep_decreases() {
    let mut c = ExperimentConfig::new(ProtocolId::NeRrr, 16);
    c.params.cols = Some(12);
    c.mode = Mode::Exact;
    c.adversary = Some(MerlinStrategy::NeTamper { u: 0, v: 0, row: 1 });
    let grid: Vec<_> = [4, 6, 12]
        .iter()
        .map(|&u| json!({"adversary": {"variant": "ne_tamper", "u": u, "v": 0, "row": 1}}))
        .collect();
    let exact: Vec<f64> = sweep(&c, &grid).unwrap().iter().map(|r| r.exact.unwrap()).collect();
    assert!(exact.windows(2).all(|w| w[0] > w[1]), "{exact:?}");
    assert_eq!(exact[2], 0.0);
}

#[test]
fn incompatible_adversary_is_a_config_error() {
    let mut c = ExperimentConfig::new(ProtocolId::NeRrr, 16);
    c.adversary = Some(MerlinStrategy::DisjHonest);
    assert!(matches!(run(&c), Err(Error::Config(_))));
    let mut c = ExperimentConfig::new(ProtocolId::Uqst, 16);
    c.adversary = Some(MerlinStrategy::UqstEntangledPair { d1: 2, d2: 2 });
    assert!(matches!(run(&c), Err(Error::Config(_))));
}

#[test]
fn config_json_round_trip() {
    let c = ExperimentConfig::from_json(
        r#"{"protocol": "uqst", "n": 16, "trials": 10, "adversary": {"variant": "uqst_far_product", "gamma": 0.9}}"#,
    )
    .unwrap();
    assert_eq!(c.protocol, ProtocolId::Uqst);
    let back = ExperimentConfig::from_json(&serde_json::to_string(&c).unwrap()).unwrap();
    assert_eq!(back, c);
    assert!(ExperimentConfig::from_json(r#"{"protocol": "uqst", "n": 16, "bogus": 1}"#).is_err());
}

#[test]
fn injected_fault_fails_only_the_distance_criterion() {
    let opts = VerifyOptions { fault: Some(Fault::BrokenCodeRate), ..Default::default() };
    assert!(!criterion(12, &opts).passed);
    assert!(criterion(12, &VerifyOptions::default()).passed);
}

#[test]
fn other_seeds_give_the_same_verdicts() {
    let base = verify_suite(&VerifyOptions::default());
    let other = verify_suite(&VerifyOptions { seed: 7, fault: None });
    for (a, b) in base.criteria.iter().zip(&other.criteria) {
        assert_eq!(a.passed, b.passed, "{} / {}", a.line(), b.line());
    }
}
