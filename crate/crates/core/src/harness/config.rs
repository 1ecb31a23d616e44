use std::fmt;
use std::path::PathBuf;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::adversaries::MerlinStrategy;
use crate::error::{Error, Result};
use crate::model::InstanceKind;
use crate::qprotocols::{RefereeTest, DESK_SCALE};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ProtocolId {
    EqRr,
    OneOfTwo,
    NeRrr,
    EqQq,
    Uqst,
    QrqEq,
    RrqEq,
    DisjRrr,
    /// Not a protocol: the squared length of a fixed unit vector projected
    /// onto a Haar-random subspace, counted as a lower-tail event.
    JlTail,
}

impl ProtocolId {
    pub const ALL: [ProtocolId; 9] = [
        ProtocolId::EqRr,
        ProtocolId::OneOfTwo,
        ProtocolId::NeRrr,
        ProtocolId::EqQq,
        ProtocolId::Uqst,
        ProtocolId::QrqEq,
        ProtocolId::RrqEq,
        ProtocolId::DisjRrr,
        ProtocolId::JlTail,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            ProtocolId::EqRr => "eq-rr",
            ProtocolId::OneOfTwo => "one-of-two",
            ProtocolId::NeRrr => "ne-rrr",
            ProtocolId::EqQq => "eq-qq",
            ProtocolId::Uqst => "uqst",
            ProtocolId::QrqEq => "qrq-eq",
            ProtocolId::RrqEq => "rrq-eq",
            ProtocolId::DisjRrr => "disj-rrr",
            ProtocolId::JlTail => "jl-tail",
        }
    }

    pub fn has_exact(self) -> bool {
        matches!(
            self,
            ProtocolId::EqRr | ProtocolId::OneOfTwo | ProtocolId::NeRrr | ProtocolId::EqQq | ProtocolId::DisjRrr
        )
    }

    pub fn default_adversary(self) -> Option<MerlinStrategy> {
        match self {
            ProtocolId::NeRrr => Some(MerlinStrategy::NeHonest),
            ProtocolId::DisjRrr => Some(MerlinStrategy::DisjHonest),
            ProtocolId::Uqst | ProtocolId::QrqEq | ProtocolId::RrqEq => Some(MerlinStrategy::UqstHonest),
            _ => None,
        }
    }

    /// Whether `strategy` can play Merlin in this protocol.
    pub fn accepts(self, strategy: &MerlinStrategy) -> bool {
        use MerlinStrategy as M;
        match self {
            ProtocolId::NeRrr => matches!(strategy, M::NeHonest | M::NeTamper { .. } | M::NeArbitrary { .. }),
            ProtocolId::DisjRrr => matches!(strategy, M::DisjHonest | M::DisjWrongPoly { .. }),
            ProtocolId::Uqst => matches!(
                strategy,
                M::UqstHonest | M::UqstFarProduct { .. } | M::UqstMixed { .. } | M::UqstWrongCount { .. }
            ),
            ProtocolId::QrqEq | ProtocolId::RrqEq => matches!(
                strategy,
                M::UqstHonest
                    | M::UqstFarProduct { .. }
                    | M::UqstMixed { .. }
                    | M::UqstWrongCount { .. }
                    | M::SwappedFingerprint
            ),
            _ => false,
        }
    }
}

impl fmt::Display for ProtocolId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for ProtocolId {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        ProtocolId::ALL
            .into_iter()
            .find(|p| p.as_str() == s)
            .ok_or_else(|| Error::Config(format!("unknown protocol {s:?}")))
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Mode {
    #[default]
    MonteCarlo,
    Exact,
    Both,
}

impl FromStr for Mode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "monte_carlo" | "monte-carlo" => Ok(Mode::MonteCarlo),
            "exact" => Ok(Mode::Exact),
            "both" => Ok(Mode::Both),
            _ => Err(Error::Config(format!("unknown mode {s:?}"))),
        }
    }
}

/// Protocol knobs; each protocol reads only the ones it needs.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ProtocolParams {
    /// NE grid columns; the square grid when absent.
    pub cols: Option<usize>,
    pub repetitions: usize,
    /// Disjointness block exponent as `[num, den]`.
    pub alpha: [u32; 2],
    /// Multiplier on the disjointness sample count.
    pub sample_scale: f64,
    /// Subspace dimension for state transfer.
    pub a: usize,
    pub epsilon: f64,
    pub delta: f64,
    /// Multiplier on the state-transfer copy and survivor counts.
    pub scale: f64,
    pub referee_test: RefereeTest,
    /// Relative deviation for the lower-tail experiment.
    pub tail_beta: f64,
}

impl Default for ProtocolParams {
    fn default() -> Self {
        ProtocolParams {
            cols: None,
            repetitions: 1,
            alpha: [2, 3],
            sample_scale: 1.0,
            a: 4,
            epsilon: 0.5,
            delta: 0.25,
            scale: DESK_SCALE,
            referee_test: RefereeTest::Swap,
            tail_beta: 0.1,
        }
    }
}

fn default_trials() -> usize {
    1000
}

fn default_beta() -> f64 {
    0.01
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub protocol: ProtocolId,
    /// Input length, or state dimension for `uqst` and `jl-tail`.
    pub n: usize,
    #[serde(default)]
    pub params: ProtocolParams,
    #[serde(default)]
    pub adversary: Option<MerlinStrategy>,
    /// Which inputs to sample; a protocol-specific default when absent.
    #[serde(default)]
    pub instance: Option<InstanceKind>,
    #[serde(default = "default_trials")]
    pub trials: usize,
    #[serde(default)]
    pub seed: u64,
    /// Confidence intervals hold with probability `1 - beta`.
    #[serde(default = "default_beta")]
    pub beta: f64,
    #[serde(default)]
    pub mode: Mode,
    /// Results go to `<out>.jsonl` and `<out>.csv`.
    #[serde(default)]
    pub out: Option<PathBuf>,
}

impl ExperimentConfig {
    pub fn new(protocol: ProtocolId, n: usize) -> Self {
        ExperimentConfig {
            protocol,
            n,
            params: ProtocolParams::default(),
            adversary: None,
            instance: None,
            trials: default_trials(),
            seed: 0,
            beta: default_beta(),
            mode: Mode::MonteCarlo,
            out: None,
        }
    }

    pub fn from_json(s: &str) -> Result<Self> {
        let c: ExperimentConfig = serde_json::from_str(s)?;
        c.validate()?;
        Ok(c)
    }

    pub fn adversary(&self) -> Option<MerlinStrategy> {
        self.adversary.clone().or_else(|| self.protocol.default_adversary())
    }

    /// Inputs to sample when none are configured.
    pub fn instance_kind(&self) -> InstanceKind {
        use MerlinStrategy as M;
        self.instance.unwrap_or(match (self.protocol, self.adversary()) {
            (ProtocolId::OneOfTwo, _) => InstanceKind::OneOutOfTwoTriple,
            (ProtocolId::NeRrr, Some(M::NeTamper { .. })) => InstanceKind::EqPair,
            (ProtocolId::DisjRrr, Some(M::DisjWrongPoly { .. })) => InstanceKind::IntersectPair,
            (ProtocolId::DisjRrr, _) => InstanceKind::DisjPair,
            (ProtocolId::QrqEq | ProtocolId::RrqEq, _) => InstanceKind::EqPair,
            _ => InstanceKind::NePair,
        })
    }

    /// Checks everything that can be checked before any trial runs.
    pub fn validate(&self) -> Result<()> {
        if self.trials == 0 {
            return Err(Error::Config("trials must be at least 1".into()));
        }
        if !(self.beta > 0.0 && self.beta < 1.0) {
            return Err(Error::Config(format!("beta {} not in (0, 1)", self.beta)));
        }
        if self.n < 2 {
            return Err(Error::Config(format!("n = {} is too small", self.n)));
        }
        if self.params.repetitions == 0 {
            return Err(Error::Config("repetitions must be at least 1".into()));
        }
        if self.mode != Mode::MonteCarlo && !self.protocol.has_exact() {
            return Err(Error::Config(format!("{} has no exact evaluator", self.protocol)));
        }
        match (&self.adversary, self.protocol.default_adversary()) {
            (Some(MerlinStrategy::UqstEntangledPair { .. }), _) => {
                return Err(Error::Config(
                    "entangled pairs are only exercised by the dephasing check, not by protocol runs".into(),
                ))
            }
            (Some(s), None) => {
                return Err(Error::Config(format!("{} has no Merlin, but adversary {} was given", self.protocol, s.name())))
            }
            (Some(s), Some(_)) if !self.protocol.accepts(s) => {
                return Err(Error::Config(format!("adversary {} does not apply to {}", s.name(), self.protocol)))
            }
            _ => {}
        }
        let kind = self.instance_kind();
        let ok = match self.protocol {
            ProtocolId::OneOfTwo => kind == InstanceKind::OneOutOfTwoTriple,
            ProtocolId::Uqst | ProtocolId::JlTail => true,
            _ => kind != InstanceKind::OneOutOfTwoTriple,
        };
        if !ok {
            return Err(Error::Config(format!("instance {kind:?} does not fit {}", self.protocol)));
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn minimal_json_uses_defaults() {
        let c = ExperimentConfig::from_json(r#"{"protocol":"ne-rrr","n":16}"#).unwrap();
        assert_eq!(c.trials, 1000);
        assert_eq!(c.params.repetitions, 1);
        assert_eq!(c.adversary(), Some(MerlinStrategy::NeHonest));
        assert_eq!(c.instance_kind(), InstanceKind::NePair);
    }

    #[test]
    fn incompatible_pairs_are_config_errors() {
        let bad = [
            r#"{"protocol":"ne-rrr","n":16,"adversary":{"variant":"disj_honest"}}"#,
            r#"{"protocol":"eq-rr","n":16,"adversary":{"variant":"ne_honest"}}"#,
            r#"{"protocol":"uqst","n":16,"mode":"exact"}"#,
            r#"{"protocol":"uqst","n":16,"adversary":{"variant":"uqst_entangled_pair","d1":2,"d2":2}}"#,
            r#"{"protocol":"ne-rrr","n":16,"trials":0}"#,
            r#"{"protocol":"ne-rrr","n":16,"bogus":1}"#,
            r#"{"protocol":"one-of-two","n":16,"instance":"eq_pair"}"#,
        ];
        for json in bad {
            assert!(matches!(ExperimentConfig::from_json(json), Err(Error::Config(_))), "{json}");
        }
    }

    #[test]
    fn protocol_names_round_trip() {
        for p in ProtocolId::ALL {
            assert_eq!(p.as_str().parse::<ProtocolId>().unwrap(), p);
            assert_eq!(serde_json::to_string(&p).unwrap(), format!("\"{}\"", p.as_str()));
        }
    }
}
