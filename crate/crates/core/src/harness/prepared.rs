use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};
use serde_json::{json, Value};

use super::config::{ExperimentConfig, ProtocolId};
use crate::adversaries::{disj_message, ne_message, MerlinStrategy};
use crate::classical::{
    disj_rrr_run, disj_rrr_soundness_exact, eq_rr_exact, eq_rr_run, exact_to_f64, ne_rrr_exact, ne_rrr_run,
    one_out_of_two_exact, one_out_of_two_run, DisjParams, EqRrParams, Exact, NeMerlinMsg, NeRrrParams,
    OneOutOfTwoParams,
};
use crate::codes::CodeSpec;
use crate::error::{Error, Result};
use crate::field::UniPoly;
use crate::model::{index_bits, sample_instance, BitString, Decision, RandomSource, Transcript};
use crate::qprotocols::{eq_qq_exact, eq_qq_run, qrq_eq_run, rrq_eq_run, uqst_run, UqstParams};
use crate::quantum::{haar_subspace, project, StateVec};

const INSTANCE_STREAM: u64 = 0x1157;

/// Message lengths in bits (classical) or qubits (quantum).
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct Lengths {
    pub alice: usize,
    pub bob: usize,
    pub merlin: usize,
}

impl From<&Transcript> for Lengths {
    fn from(t: &Transcript) -> Self {
        let (alice, bob, merlin) = t.lengths();
        Lengths { alice, bob, merlin }
    }
}

/// What one trial reports back.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TrialOutcome {
    /// Accepted, or for `one-of-two` answered correctly, or for `jl-tail`
    /// hit the lower tail.
    pub hit: bool,
    /// Accepted with output farther than `ε` from the target (`uqst`).
    pub far_hit: Option<bool>,
    /// A per-trial measurement: survivors for `uqst`, squared projected
    /// length for `jl-tail`.
    pub value: Option<f64>,
    pub lengths: Lengths,
}

/// A validated configuration with its fixed inputs sampled.
#[derive(Debug, Clone)]
pub enum Prepared {
    EqRr { p: EqRrParams, x: BitString, y: BitString },
    OneOfTwo { p: OneOutOfTwoParams, x1: BitString, x2: BitString, y: BitString },
    Ne { p: NeRrrParams, x: BitString, y: BitString, merlin: MerlinStrategy, msg: NeMerlinMsg },
    EqQq { spec: CodeSpec, x: BitString, y: BitString, t: usize },
    Uqst { p: UqstParams, phi: StateVec, merlin: MerlinStrategy },
    Qrq { spec: CodeSpec, p: UqstParams, x: BitString, y: BitString, merlin: MerlinStrategy, t: usize },
    Rrq { spec: CodeSpec, p: UqstParams, x: BitString, y: BitString, merlin: MerlinStrategy },
    Disj { p: DisjParams, x: BitString, y: BitString, merlin: MerlinStrategy, s_prime: UniPoly },
    JlTail { n: usize, a: usize, beta: f64 },
}

fn uqst_params(c: &ExperimentConfig, dim: usize) -> Result<UqstParams> {
    let q = &c.params;
    Ok(UqstParams::scaled(dim, q.a, q.epsilon, q.delta, q.scale)
        .map_err(|e| Error::Config(e.to_string()))?
        .with_test(q.referee_test))
}

fn config_err(e: Error) -> Error {
    match e {
        Error::Config(_) => e,
        other => Error::Config(other.to_string()),
    }
}

impl Prepared {
    pub fn new(c: &ExperimentConfig) -> Result<Self> {
        c.validate()?;
        Prepared::build(c).map_err(config_err)
    }

    fn build(c: &ExperimentConfig) -> Result<Self> {
        let mut rng = RandomSource::new(c.seed, 0).derive(INSTANCE_STREAM).rng();
        let merlin = c.adversary();
        let pair = |rng: &mut rand_chacha::ChaCha8Rng| -> Result<(BitString, BitString)> {
            sample_instance(c.instance_kind(), c.n, rng)?
                .pair()
                .ok_or_else(|| Error::Config("expected a pair instance".into()))
        };
        let t = c.params.repetitions;
        Ok(match c.protocol {
            ProtocolId::EqRr => {
                let (x, y) = pair(&mut rng)?;
                Prepared::EqRr { p: EqRrParams::new(c.n)?, x, y }
            }
            ProtocolId::OneOfTwo => {
                let (x1, x2, y) = sample_instance(c.instance_kind(), c.n, &mut rng)?
                    .triple()
                    .ok_or_else(|| Error::Config("expected a triple instance".into()))?;
                Prepared::OneOfTwo { p: OneOutOfTwoParams::new(c.n)?, x1, x2, y }
            }
            ProtocolId::NeRrr => {
                let p = match c.params.cols {
                    Some(cols) => NeRrrParams::new(c.n, cols, t)?,
                    None => NeRrrParams::square(c.n, t)?,
                };
                let (x, y) = pair(&mut rng)?;
                let merlin = merlin.expect("ne-rrr has a default Merlin");
                let msg = ne_message(&merlin, &x, &y, &p)?;
                Prepared::Ne { p, x, y, merlin, msg }
            }
            ProtocolId::EqQq => {
                let (x, y) = pair(&mut rng)?;
                Prepared::EqQq { spec: CodeSpec::for_input_len(c.n)?, x, y, t }
            }
            ProtocolId::Uqst => Prepared::Uqst {
                p: uqst_params(c, c.n)?,
                phi: StateVec::random(c.n, &mut rng),
                merlin: merlin.expect("uqst has a default Merlin"),
            },
            ProtocolId::QrqEq | ProtocolId::RrqEq => {
                let spec = CodeSpec::for_input_len(c.n)?;
                let p = uqst_params(c, 2 * spec.block_len())?;
                let (x, y) = pair(&mut rng)?;
                let merlin = merlin.expect("composed protocols have a default Merlin");
                if c.protocol == ProtocolId::QrqEq {
                    Prepared::Qrq { spec, p, x, y, merlin, t }
                } else {
                    Prepared::Rrq { spec, p, x, y, merlin }
                }
            }
            ProtocolId::DisjRrr => {
                let [num, den] = c.params.alpha;
                let p = DisjParams::new(c.n, (num, den), c.params.sample_scale)?;
                let (x, y) = pair(&mut rng)?;
                let merlin = merlin.expect("disj-rrr has a default Merlin");
                let s_prime = disj_message(&merlin, &x, &y, &p)?;
                Prepared::Disj { p, x, y, merlin, s_prime }
            }
            ProtocolId::JlTail => {
                let (a, beta) = (c.params.a, c.params.tail_beta);
                if a == 0 || a > c.n || !(0.0..1.0).contains(&beta) {
                    return Err(Error::Config(format!("need 1 <= a <= n and 0 <= beta < 1, got a = {a}, beta = {beta}")));
                }
                Prepared::JlTail { n: c.n, a, beta }
            }
        })
    }

    /// Runs one trial on its own random stream.
    pub fn trial(&self, src: RandomSource) -> Result<TrialOutcome> {
        let mut rng = src.rng();
        let plain = |d: Decision, t: &Transcript| TrialOutcome {
            hit: d.accepted(),
            far_hit: None,
            value: None,
            lengths: t.into(),
        };
        Ok(match self {
            Prepared::EqRr { p, x, y } => {
                let (d, t) = eq_rr_run(x, y, p, &mut rng)?;
                plain(d, &t)
            }
            Prepared::OneOfTwo { p, x1, x2, y } => {
                let (d, t) = one_out_of_two_run(x1, x2, y, p, &mut rng)?;
                let right = if x1 == y { Decision::FirstEqual } else { Decision::SecondEqual };
                TrialOutcome { hit: d == right, ..plain(d, &t) }
            }
            Prepared::Ne { p, x, y, merlin, .. } => {
                let (d, t) = ne_rrr_run(x, y, merlin, p, &mut rng)?;
                plain(d, &t)
            }
            Prepared::EqQq { spec, x, y, t } => {
                let (o, tr, _) = eq_qq_run(x, y, spec, *t, &mut rng)?;
                plain(o.decision, &tr)
            }
            Prepared::Uqst { p, phi, merlin } => {
                let (o, t, _) = uqst_run(phi, p, merlin, &mut rng)?;
                let far = o.output_distance(phi)?.is_some_and(|d| d > p.epsilon);
                TrialOutcome {
                    hit: o.accepted,
                    far_hit: Some(far),
                    value: Some(o.survivors as f64),
                    lengths: (&t).into(),
                }
            }
            Prepared::Qrq { spec, p, x, y, merlin, t } => {
                let (o, tr, _) = qrq_eq_run(x, y, spec, p, merlin, *t, &mut rng)?;
                plain(o.decision, &tr)
            }
            Prepared::Rrq { spec, p, x, y, merlin } => {
                let (o, tr, _) = rrq_eq_run(x, y, spec, p, merlin, &mut rng)?;
                plain(o.decision, &tr)
            }
            Prepared::Disj { p, x, y, merlin, .. } => {
                let (d, t) = disj_rrr_run(x, y, merlin, p, &mut rng)?;
                plain(d, &t)
            }
            Prepared::JlTail { n, a, beta } => {
                let v = haar_subspace(*n, *a, &mut rng)?;
                let len = project(&StateVec::basis(*n, 0), &v)?.survival;
                TrialOutcome {
                    hit: len <= (1.0 - beta) * *a as f64 / *n as f64,
                    far_hit: None,
                    value: Some(len),
                    lengths: Lengths::default(),
                }
            }
        })
    }

    /// Exact acceptance (or success) probability, with its rational form
    /// when there is one.
    pub fn exact(&self) -> Result<Option<(f64, Option<Exact>)>> {
        let rational = |r: Exact| Some((exact_to_f64(&r), Some(r)));
        Ok(match self {
            Prepared::EqRr { p, x, y } => rational(eq_rr_exact(x, y, p)?),
            Prepared::OneOfTwo { p, x1, x2, y } => rational(one_out_of_two_exact(x1, x2, y, p)?),
            Prepared::Ne { p, x, y, msg, .. } => rational(ne_rrr_exact(x, y, msg, p)?),
            Prepared::EqQq { spec, x, y, t } => {
                let round = eq_qq_exact(x, y, spec)?;
                rational((0..*t).fold(Exact::from_integer(1), |acc, _| acc * round))
            }
            Prepared::Disj { p, x, y, s_prime, .. } => {
                Some((disj_rrr_soundness_exact(x, y, s_prime, p)?.acceptance, None))
            }
            _ => None,
        })
    }

    /// The `(a, b, m)` lengths an honest run of this protocol sends.
    pub fn declared(&self) -> Lengths {
        let l = |alice, bob, merlin| Lengths { alice, bob, merlin };
        match self {
            Prepared::EqRr { p, .. } => {
                let g = p.spec.grid();
                l(index_bits(g.rows) + g.cols, index_bits(g.cols) + g.rows, 0)
            }
            Prepared::OneOfTwo { p, .. } => {
                let k = p.k();
                l(index_bits(k) + 2 * k, index_bits(k) + k, 0)
            }
            Prepared::Ne { p, .. } => {
                let (a, m, t) = (p.rows(), p.cols(), p.repetitions);
                l(t * (index_bits(m) + a), t * (index_bits(m) + a), t * (index_bits(a) + 2 * m))
            }
            Prepared::EqQq { spec, t, .. } => {
                let q = index_bits(2 * spec.block_len());
                l(t * q, t * q, 0)
            }
            Prepared::Uqst { p, .. } => l(p.alice_bits(), 0, p.merlin_qubits()),
            Prepared::Qrq { spec, p, t, .. } => {
                l(t * index_bits(2 * spec.block_len()), t * p.alice_bits(), t * p.merlin_qubits())
            }
            Prepared::Rrq { p, .. } => l(p.alice_bits(), p.alice_bits(), p.merlin_qubits()),
            Prepared::Disj { p, .. } => {
                let w = p.field().element_bits();
                let per = p.samples_per_player * (1 + p.cols()) * w;
                l(per, per, (p.degree_bound() + 1) * w)
            }
            Prepared::JlTail { .. } => Lengths::default(),
        }
    }

    /// Derived parameters worth recording next to the results.
    pub fn metadata(&self) -> BTreeMap<String, Value> {
        let mut m = BTreeMap::new();
        let mut code = |spec: &CodeSpec| {
            m.insert("code".to_string(), serde_json::to_value(spec).unwrap_or(Value::Null));
        };
        match self {
            Prepared::EqRr { p, .. } => code(&p.spec),
            Prepared::OneOfTwo { p, .. } => code(&p.spec),
            Prepared::Ne { p, msg, .. } => {
                code(&p.spec);
                m.insert("merlin_message".into(), serde_json::to_value(msg).unwrap_or(Value::Null));
            }
            Prepared::EqQq { spec, .. } => code(spec),
            Prepared::Uqst { p, .. } | Prepared::Rrq { p, .. } | Prepared::Qrq { p, .. } => {
                if let Prepared::Qrq { spec, .. } | Prepared::Rrq { spec, .. } = self {
                    code(spec);
                }
                m.insert("uqst".into(), serde_json::to_value(p).unwrap_or(Value::Null));
                m.insert("entangled_adversaries".into(), json!("dephasing check only"));
            }
            Prepared::Disj { p, s_prime, .. } => {
                m.insert("q".into(), json!(p.field().modulus()));
                m.insert("field_enlarged".into(), json!(p.field_enlarged));
                m.insert("blocks".into(), json!([p.rows(), p.cols()]));
                m.insert("points".into(), json!(p.points().len()));
                m.insert("samples_per_player".into(), json!(p.samples_per_player));
                m.insert("merlin_polynomial".into(), serde_json::to_value(s_prime).unwrap_or(Value::Null));
            }
            Prepared::JlTail { a, n, beta } => {
                m.insert("tail_bound".into(), json!((-(*a as f64) * beta * beta / 4.0).exp()));
                m.insert("mean_target".into(), json!(*a as f64 / *n as f64));
            }
        }
        m
    }
}
