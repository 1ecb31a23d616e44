//! The acceptance battery: every criterion as a function returning a
//! result record, plus a suite runner that collects them into a manifest.

use std::time::Instant;

use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use serde_json::{json, Value};

use crate::adversaries::{disj_wrong_poly, ne_tamper_message, MerlinStrategy};
use crate::classical::{
    disj_rrr_soundness_exact, exact_to_f64, ne_honest_message, ne_rrr_exact, one_out_of_two_exact, DisjParams,
    Exact, NeMerlinMsg, NeRrrParams, OneOutOfTwoParams,
};
use crate::codes::{encode, exhaustive_min_distance, CodeSpec};
use crate::error::Result;
use crate::field::{agreement_count, s_polynomial, EvalTable};
use crate::harness::{bernoulli_stderr, hoeffding_half_width, run, sweep, ExperimentConfig, Mode, ProtocolId};
use crate::model::{hamming_distance, sample_instance, BitString, InstanceKind, RandomSource};
use crate::qprotocols::{eq_qq_exact, uqst_run, UqstParams, DESK_SCALE};
use crate::quantum::{
    dephase_across_blocks, ensemble_outcome_probs, fidelity, haar_subspace, product_outcome_probs, project,
    swap_test_circuit, StateVec, Subspace,
};

pub const DEFAULT_SEED: u64 = 20_240_601;

/// A deliberately injected defect, used to check the battery can fail.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Fault {
    /// Replace the code under test with one of rate above 1/3.
    BrokenCodeRate,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct VerifyOptions {
    pub seed: u64,
    pub fault: Option<Fault>,
}

impl Default for VerifyOptions {
    fn default() -> Self {
        VerifyOptions { seed: DEFAULT_SEED, fault: None }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CriterionResult {
    pub id: u8,
    pub name: String,
    pub passed: bool,
    pub detail: String,
    pub elapsed_secs: f64,
    /// Parameters and constants the check ran with.
    pub params: Value,
}

impl CriterionResult {
    /// One human-readable line.
    pub fn line(&self) -> String {
        format!(
            "[{}] {:>2} {} ({:.2}s): {}",
            if self.passed { "PASS" } else { "FAIL" },
            self.id,
            self.name,
            self.elapsed_secs,
            self.detail
        )
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Manifest {
    pub seed: u64,
    pub fault: Option<Fault>,
    pub passed: bool,
    pub criteria: Vec<CriterionResult>,
}

/// Criterion ids and names, in order.
pub const CRITERIA: [(u8, &str); 13] = [
    (1, "one-out-of-two success"),
    (2, "ne-rrr completeness"),
    (3, "ne-rrr soundness"),
    (4, "swap test"),
    (5, "fingerprint equality"),
    (6, "haar survival mean"),
    (7, "projection lower tail"),
    (8, "dephasing"),
    (9, "state transfer contract"),
    (10, "disj-rrr completeness"),
    (11, "disj-rrr soundness"),
    (12, "code distance"),
    (13, "message lengths"),
];

struct Check {
    passed: bool,
    detail: String,
    params: Value,
}

/// Runs criterion `id` (1 to 13). Errors inside a check count as a failure.
pub fn criterion(id: u8, opts: &VerifyOptions) -> CriterionResult {
    let name = CRITERIA
        .iter()
        .find(|(i, _)| *i == id)
        .map_or("unknown criterion", |(_, n)| n)
        .to_string();
    let seed = opts.seed;
    let start = Instant::now();
    let outcome = match id {
        1 => one_out_of_two(seed),
        2 => ne_completeness(seed),
        3 => ne_soundness(seed),
        4 => swap_test(seed),
        5 => fingerprint_eq(),
        6 => haar_mean(seed),
        7 => lower_tail(seed),
        8 => dephasing(seed),
        9 => state_transfer(seed),
        10 => disj_completeness(seed),
        11 => disj_soundness(seed),
        12 => code_distance(opts.fault),
        13 => message_lengths(seed),
        _ => Ok(Check { passed: false, detail: format!("no criterion {id}"), params: Value::Null }),
    };
    let check = outcome.unwrap_or_else(|e| Check { passed: false, detail: format!("error: {e}"), params: Value::Null });
    CriterionResult {
        id,
        name,
        passed: check.passed,
        detail: check.detail,
        elapsed_secs: start.elapsed().as_secs_f64(),
        params: check.params,
    }
}

pub fn verify_suite(opts: &VerifyOptions) -> Manifest {
    let criteria: Vec<CriterionResult> = CRITERIA.iter().map(|(id, _)| criterion(*id, opts)).collect();
    Manifest {
        seed: opts.seed,
        fault: opts.fault,
        passed: criteria.iter().all(|c| c.passed),
        criteria,
    }
}

fn rng_for(seed: u64, id: u64) -> rand_chacha::ChaCha8Rng {
    RandomSource::new(seed, 0).derive(id).rng()
}

fn one_out_of_two(seed: u64) -> Result<Check> {
    let floor = Exact::new(2, 3);
    let p8 = OneOutOfTwoParams::new(8)?;
    let inputs: Vec<BitString> = (0..256).map(|v| BitString::from_u64(v, 8)).collect();
    let worst8 = inputs
        .par_iter()
        .map(|x1| {
            let mut worst = Exact::from_integer(1);
            for x2 in inputs.iter().filter(|x2| *x2 != x1) {
                for y in [x1, x2] {
                    worst = worst.min(one_out_of_two_exact(x1, x2, y, &p8)?);
                }
            }
            Ok(worst)
        })
        .collect::<Result<Vec<_>>>()?
        .into_iter()
        .min()
        .expect("non-empty");

    let p48 = OneOutOfTwoParams::new(48)?;
    let mut rng = rng_for(seed, 1);
    let mut worst48 = Exact::from_integer(1);
    for _ in 0..100 {
        let (x1, x2, y) = sample_instance(InstanceKind::OneOutOfTwoTriple, 48, &mut rng)?.triple().expect("triple");
        worst48 = worst48.min(one_out_of_two_exact(&x1, &x2, &y, &p48)?);
    }
    Ok(Check {
        passed: worst8 >= floor && worst48 >= floor,
        detail: format!("min success {worst8} over all n=8 promise triples, {worst48} over 100 n=48 triples"),
        params: json!({"k_n8": p8.k(), "k_n48": p48.k(), "random_triples": 100}),
    })
}

fn ne_completeness(seed: u64) -> Result<Check> {
    let mut rng = rng_for(seed, 2);
    let one = Exact::from_integer(1);
    let mut worst = one;
    for t in [1, 5] {
        let p = NeRrrParams::square(64, t)?;
        for _ in 0..100 {
            let (x, y) = sample_instance(InstanceKind::NePair, 64, &mut rng)?.pair().expect("pair");
            let msg = ne_honest_message(&x, &y, &p)?;
            worst = worst.min(ne_rrr_exact(&x, &y, &msg, &p)?);
        }
    }
    let p = NeRrrParams::square(64, 1)?;
    Ok(Check {
        passed: worst == one,
        detail: format!("min exact acceptance {worst} over 200 honest runs (t = 1 and t = 5)"),
        params: json!({"n": 64, "grid": [p.rows(), p.cols()], "pairs": 100, "repetitions": [1, 5]}),
    })
}

fn ne_soundness(seed: u64) -> Result<Check> {
    let n = 16;
    let p1 = NeRrrParams::square(n, 1)?;
    let p5 = NeRrrParams::square(n, 5)?;
    let (a, m) = (p1.rows(), p1.cols());
    let mut rng = rng_for(seed, 3);
    let x = BitString::random(n, &mut rng);
    let bound = Exact::new(2, 3);
    let bound5 = (0..5).fold(Exact::from_integer(1), |acc, _| acc * bound);

    let mut best = (Exact::from_integer(0), String::new());
    let mut best5 = Exact::from_integer(0);
    let mut violations = 0usize;
    let mut checked = 0usize;
    let mut consider = |msg: &NeMerlinMsg, label: String| -> Result<()> {
        let e = ne_rrr_exact(&x, &x, msg, &p1)?;
        let e5 = ne_rrr_exact(&x, &x, msg, &p5)?;
        checked += 1;
        if e > bound {
            violations += 1;
        }
        if e > best.0 {
            best = (e, label);
        }
        best5 = best5.max(e5);
        Ok(())
    };
    let low = m.div_ceil(3);
    for row in 1..=a {
        for u in 0..=m {
            for v in 0..=m - u {
                if u + v >= low {
                    consider(&ne_tamper_message(&x, u, v, row, &p1)?, format!("tamper u={u} v={v} row={row}"))?;
                }
            }
        }
    }
    for i in 0..200 {
        let msg = NeMerlinMsg {
            row: rng.random_range(1..=a),
            r: BitString::random(m, &mut rng),
            s: BitString::random(m, &mut rng),
        };
        consider(&msg, format!("random message {i}"))?;
    }
    let passed = violations == 0 && best5 <= bound5;
    Ok(Check {
        passed,
        detail: format!(
            "{violations} of {checked} messages above 2/3; best {} ({:.4}) from {}; best at t=5 {best5} ({:.5}) vs bound {bound5} ({:.5})",
            best.0,
            exact_to_f64(&best.0),
            best.1,
            exact_to_f64(&best5),
            exact_to_f64(&bound5),
        ),
        params: json!({"n": n, "grid": [a, m], "u_plus_v_min": low, "random_messages": 200, "repetitions": 5}),
    })
}

fn swap_test(seed: u64) -> Result<Check> {
    let worst = (0..1000u64)
        .into_par_iter()
        .map(|i| {
            let mut rng = RandomSource::new(seed, 4).derive(i).rng();
            let d = rng.random_range(2..=16);
            let phi = StateVec::random(d, &mut rng);
            let psi = StateVec::random(d, &mut rng);
            let f = fidelity(&phi, &psi)?;
            Ok((swap_test_circuit(&phi, &psi)? - (0.5 + 0.5 * f * f)).abs())
        })
        .collect::<Result<Vec<f64>>>()?
        .into_iter()
        .fold(0.0, f64::max);
    Ok(Check {
        passed: worst <= 1e-9,
        detail: format!("max |circuit - (1 + F^2)/2| = {worst:.3e} over 1000 pairs"),
        params: json!({"pairs": 1000, "dims": [2, 16], "tolerance": 1e-9}),
    })
}

fn fingerprint_eq() -> Result<Check> {
    let spec = CodeSpec::for_input_len(8)?;
    let inputs: Vec<BitString> = (0..256).map(|v| BitString::from_u64(v, 8)).collect();
    let cap = Exact::new(13, 18);
    let one = Exact::from_integer(1);
    let rows = inputs
        .par_iter()
        .map(|x| {
            let mut same_ok = true;
            let mut worst = Exact::from_integer(0);
            for y in &inputs {
                let e = eq_qq_exact(x, y, &spec)?;
                if x == y {
                    same_ok &= e == one;
                } else {
                    worst = worst.max(e);
                }
            }
            Ok((same_ok, worst))
        })
        .collect::<Result<Vec<_>>>()?;
    let same_ok = rows.iter().all(|r| r.0);
    let worst = rows.iter().map(|r| r.1).max().expect("non-empty");
    Ok(Check {
        passed: same_ok && worst <= cap,
        detail: format!("x=y always 1: {same_ok}; max over x!=y {worst} ({:.4}) vs 13/18", exact_to_f64(&worst)),
        params: json!({"n": 8, "block_len": spec.block_len()}),
    })
}

fn haar_mean(seed: u64) -> Result<Check> {
    let draws = 10_000u64;
    let mut lines = Vec::new();
    let mut passed = true;
    for (n, a) in [(8usize, 2usize), (16, 4), (32, 8)] {
        let lens = (0..draws)
            .into_par_iter()
            .map(|i| {
                let mut rng = RandomSource::new(seed, 6).derive(n as u64).derive(i).rng();
                let v = haar_subspace(n, a, &mut rng)?;
                Ok(project(&StateVec::basis(n, 0), &v)?.survival)
            })
            .collect::<Result<Vec<f64>>>()?;
        let k = lens.len() as f64;
        let mean = lens.iter().sum::<f64>() / k;
        let var = lens.iter().map(|l| (l - mean).powi(2)).sum::<f64>() / (k - 1.0);
        let se = (var / k).sqrt();
        let target = a as f64 / n as f64;
        let ok = (mean - target).abs() <= 3.0 * se;
        passed &= ok;
        lines.push(format!("(n={n}, a={a}) mean {mean:.5} vs {target:.5} +- {:.5}", 3.0 * se));
    }
    Ok(Check {
        passed,
        detail: lines.join("; "),
        params: json!({"draws": draws, "pairs": [[8, 2], [16, 4], [32, 8]]}),
    })
}

fn lower_tail(seed: u64) -> Result<Check> {
    let mut template = ExperimentConfig::new(ProtocolId::JlTail, 32);
    template.params.a = 8;
    template.trials = 10_000;
    template.seed = seed;
    let grid = [json!({"params": {"tail_beta": 0.1}}), json!({"params": {"tail_beta": 0.3}})];
    let mut passed = true;
    let mut lines = Vec::new();
    for r in sweep(&template, &grid)? {
        let beta = r.config.params.tail_beta;
        let bound = (-8.0 * beta * beta / 4.0).exp();
        let p = r.estimate.unwrap_or(1.0);
        let se = bernoulli_stderr(p, r.trials);
        let ok = p <= bound + 3.0 * se;
        passed &= ok;
        lines.push(format!("beta={beta}: frequency {p:.4} vs bound {bound:.4} + {:.4}", 3.0 * se));
    }
    Ok(Check {
        passed,
        detail: lines.join("; "),
        params: json!({"n": 32, "a": 8, "draws": 10_000, "betas": [0.1, 0.3]}),
    })
}

/// An orthonormal basis of `C^d` whose first vectors span `p`.
fn extend_basis(p: &Subspace, rng: &mut impl Rng) -> Result<Subspace> {
    let d = p.ambient_dim();
    loop {
        let mut cols = p.basis().to_vec();
        cols.extend(haar_subspace(d, d, rng)?.basis().iter().take(d - p.dim()).cloned());
        if let Ok(s) = Subspace::from_columns(d, cols) {
            return Ok(s);
        }
    }
}

fn dephasing(seed: u64) -> Result<Check> {
    let worst = (0..50u64)
        .into_par_iter()
        .map(|i| {
            let mut rng = RandomSource::new(seed, 8).derive(i).rng();
            let joint = StateVec::random(9, &mut rng);
            let mut worst: f64 = 0.0;
            for _ in 0..20 {
                let p = haar_subspace(3, rng.random_range(1..=3), &mut rng)?;
                let q = haar_subspace(3, rng.random_range(1..=3), &mut rng)?;
                let ens = dephase_across_blocks(&joint, 3, 3, &extend_basis(&p, &mut rng)?, &extend_basis(&q, &mut rng)?)?;
                let direct = product_outcome_probs(&joint, 3, 3, &p, &q)?;
                let dephased = ensemble_outcome_probs(&ens, &p, &q)?;
                for (x, y) in direct.iter().zip(&dephased) {
                    worst = worst.max((x - y).abs());
                }
            }
            Ok(worst)
        })
        .collect::<Result<Vec<f64>>>()?
        .into_iter()
        .fold(0.0, f64::max);
    Ok(Check {
        passed: worst <= 1e-9,
        detail: format!("max outcome-probability gap {worst:.3e} over 50 states x 20 projector pairs"),
        params: json!({"states": 50, "projectors_per_state": 20, "dims": [3, 3], "tolerance": 1e-9}),
    })
}

fn state_transfer(seed: u64) -> Result<Check> {
    let p = UqstParams::scaled(16, 4, 0.5, 0.25, DESK_SCALE)?;
    let trials = 2000u64;
    let batch = |strategy: MerlinStrategy, label: u64| {
        (0..trials)
            .into_par_iter()
            .map(|i| {
                let mut rng = RandomSource::new(seed, 9).derive(label).derive(i).rng();
                let phi = StateVec::random(p.n, &mut rng);
                let (o, _, _) = uqst_run(&phi, &p, &strategy, &mut rng)?;
                Ok((o.accepted, o.output_distance(&phi)?))
            })
            .collect::<Result<Vec<(bool, Option<f64>)>>>()
    };
    let t = trials as f64;
    let honest = batch(MerlinStrategy::UqstHonest, 0)?;
    let acc = honest.iter().filter(|r| r.0).count() as f64 / t;
    let max_dist = honest.iter().filter_map(|r| r.1).fold(0.0, f64::max);
    let acc_floor = 1.0 - p.delta - 3.0 * bernoulli_stderr(acc, trials as usize);

    let far = batch(MerlinStrategy::UqstFarProduct { gamma: 0.9 }, 1)?;
    let far_rate = far.iter().filter(|r| r.0 && r.1.is_some_and(|d| d > p.epsilon)).count() as f64 / t;
    let far_cap = p.delta + 3.0 * bernoulli_stderr(far_rate, trials as usize);

    Ok(Check {
        passed: acc >= acc_floor && max_dist == 0.0 && far_rate <= far_cap,
        detail: format!(
            "honest acceptance {acc:.4} (floor {acc_floor:.4}), max accepted output distance {max_dist}; far-product accept-and-far {far_rate:.4} (cap {far_cap:.4})"
        ),
        params: json!({"trials": trials, "uqst": p, "gamma": 0.9, "scale": DESK_SCALE}),
    })
}

fn disj_completeness(seed: u64) -> Result<Check> {
    let mut c = ExperimentConfig::new(ProtocolId::DisjRrr, 64);
    c.trials = 2000;
    c.seed = seed;
    let r = run(&c)?;
    let p = r.estimate.unwrap_or(0.0);
    let ci = hoeffding_half_width(c.trials, c.beta);

    let params = DisjParams::new(64, (2, 3), 1.0)?;
    let mut rng = rng_for(seed, 10);
    let mut worst: f64 = 0.0;
    for _ in 0..50 {
        let (x, y) = sample_instance(InstanceKind::IntersectPair, 64, &mut rng)?.pair().expect("pair");
        let (a, b) = (EvalTable::from_bits(params.field(), &x, params.rows(), params.cols())?, EvalTable::from_bits(params.field(), &y, params.rows(), params.cols())?);
        let s = s_polynomial(&a, &b)?;
        worst = worst.max(disj_rrr_soundness_exact(&x, &y, &s, &params)?.acceptance);
    }
    let mut ci_cfg = c.clone();
    ci_cfg.instance = Some(InstanceKind::IntersectPair);
    ci_cfg.trials = 200;
    let mc_intersect = run(&ci_cfg)?.accepted.unwrap_or(u64::MAX);

    Ok(Check {
        passed: p >= 0.9 - ci && worst == 0.0 && mc_intersect == 0,
        detail: format!(
            "disjoint acceptance {p:.4} (need >= {:.4}); intersecting honest exact max {worst}, {mc_intersect} of 200 sampled accepts",
            0.9 - ci
        ),
        params: json!({"n": 64, "alpha": [2, 3], "trials": 2000, "metadata": r.metadata}),
    })
}

fn disj_soundness(seed: u64) -> Result<Check> {
    let p = DisjParams::new(64, (2, 3), 1.0)?;
    let mut rng = rng_for(seed, 11);
    let mut bad = 0usize;
    let mut max_agree = 0usize;
    for _ in 0..1000 {
        let kind = if rng.random::<bool>() { InstanceKind::IntersectPair } else { InstanceKind::DisjPair };
        let (x, y) = sample_instance(kind, 64, &mut rng)?.pair().expect("pair");
        let a = EvalTable::from_bits(p.field(), &x, p.rows(), p.cols())?;
        let b = EvalTable::from_bits(p.field(), &y, p.rows(), p.cols())?;
        let s = s_polynomial(&a, &b)?;
        let cheat = disj_wrong_poly(&x, &y, &p, &mut rng)?;
        let f = p.field();
        let deg = s.sub(&cheat, &f).degree().unwrap_or(0);
        let agree = agreement_count(&s, &cheat, p.points(), &f);
        max_agree = max_agree.max(agree);
        if cheat == s || agree > deg {
            bad += 1;
        }
    }

    let mut lines = Vec::new();
    let mut mc_ok = true;
    for (i, scale) in [1.0, 0.01, 0.005].into_iter().enumerate() {
        let mut c = ExperimentConfig::new(ProtocolId::DisjRrr, 64);
        c.params.sample_scale = scale;
        c.adversary = Some(MerlinStrategy::DisjWrongPoly { seed: i as u64 });
        c.mode = Mode::Both;
        c.trials = 2000;
        c.seed = seed ^ (i as u64 + 1);
        let r = run(&c)?;
        let (est, exact) = (r.estimate.unwrap_or(1.0), r.exact.unwrap_or(-1.0));
        let se = bernoulli_stderr(exact, c.trials);
        let ok = (est - exact).abs() <= 3.0 * se;
        mc_ok &= ok;
        lines.push(format!("scale {scale}: {est:.4} vs exact {exact:.4}"));
    }
    Ok(Check {
        passed: bad == 0 && mc_ok,
        detail: format!(
            "{bad} of 1000 cheats violate agreement <= deg(s - s'), max agreement {max_agree}; {}",
            lines.join(", ")
        ),
        params: json!({"n": 64, "alpha": [2, 3], "points": p.points().len(), "q": p.field().modulus(), "mc_scales": [1.0, 0.01, 0.005]}),
    })
}

fn code_distance(fault: Option<Fault>) -> Result<Check> {
    let specs: Vec<CodeSpec> = match fault {
        Some(Fault::BrokenCodeRate) => vec![CodeSpec::with_outer_len(8, 4, 2)?],
        None => (1..=10).map(CodeSpec::for_input_len).collect::<Result<_>>()?,
    };
    let mut worst = (1.0f64, 0usize);
    let mut passed = true;
    for spec in &specs {
        let d = exhaustive_min_distance(spec)?;
        let big_n = spec.block_len();
        passed &= 3 * d >= big_n;
        if (d as f64) / (big_n as f64) < worst.0 {
            worst = (d as f64 / big_n as f64, spec.input_len());
        }
    }
    // Spot-check the exhaustive routine against a direct pair.
    let spec = &specs[0];
    let n = spec.input_len();
    let a = encode(spec, &BitString::zeros(n))?;
    let b = encode(spec, &BitString::from_u64(1, n))?;
    let direct = hamming_distance(&a, &b)?;
    passed &= direct >= exhaustive_min_distance(spec)?;
    Ok(Check {
        passed,
        detail: format!("min relative distance {:.4} (at n = {})", worst.0, worst.1),
        params: json!({
            "fault": fault,
            "codes": specs.iter().map(|s| json!({"n": s.input_len(), "symbol_bits": s.symbol_bits(), "outer_len": s.outer_len(), "block_len": s.block_len()})).collect::<Vec<_>>(),
        }),
    })
}

fn message_lengths(seed: u64) -> Result<Check> {
    let mut mismatches = Vec::new();
    let mut table = Vec::new();
    for n in [16usize, 64, 256] {
        for protocol in ProtocolId::ALL.into_iter().filter(|p| *p != ProtocolId::JlTail) {
            let mut c = ExperimentConfig::new(protocol, n);
            c.trials = 1;
            c.seed = seed;
            if protocol == ProtocolId::DisjRrr && n != 64 {
                c.params.alpha = [1, 2];
            }
            let r = run(&c)?;
            if !r.shape_ok {
                mismatches.push(format!("{protocol} n={n}: {:?} vs {:?}", r.lengths, r.declared));
            }
            table.push(json!({"protocol": protocol.as_str(), "n": n, "lengths": r.lengths}));
        }
    }
    Ok(Check {
        passed: mismatches.is_empty(),
        detail: if mismatches.is_empty() {
            format!("{} protocol/size pairs match their declared shape", table.len())
        } else {
            mismatches.join("; ")
        },
        params: json!({"runs": table, "disj_alpha": {"16": [1, 2], "64": [2, 3], "256": [1, 2]}, "uqst_scale": DESK_SCALE}),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn broken_code_fails_distance() {
        let opts = VerifyOptions { fault: Some(Fault::BrokenCodeRate), ..Default::default() };
        let r = criterion(12, &opts);
        assert!(!r.passed, "{}", r.line());
    }

    #[test]
    fn unknown_criterion_is_a_failure() {
        assert!(!criterion(99, &VerifyOptions::default()).passed);
    }
}
