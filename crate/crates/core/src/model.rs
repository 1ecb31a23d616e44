//! Shared vocabulary: player inputs, message payloads, transcripts, verdicts
//! and the seeded randomness contract every protocol draws from.

use std::fmt;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::{Error, Result};
use crate::quantum::StateStore;

/// A fixed-length string of bits, packed 64 to a word.
///
/// Bits past `len` in the last word are always zero, so word-wise XOR and
/// popcount give Hamming distances directly.
#[derive(Clone, PartialEq, Eq, Hash, Default)]
pub struct BitString {
    words: Vec<u64>,
    len: usize,
}

impl BitString {
    pub fn zeros(len: usize) -> Self {
        BitString {
            words: vec![0; len.div_ceil(64)],
            len,
        }
    }

    pub fn from_bools(bits: &[bool]) -> Self {
        let mut out = BitString::zeros(bits.len());
        for (i, &b) in bits.iter().enumerate() {
            out.set(i, b);
        }
        out
    }

    /// Parses a string of `'0'`/`'1'` characters.
    pub fn parse(s: &str) -> Result<Self> {
        let mut out = BitString::zeros(s.len());
        for (i, c) in s.chars().enumerate() {
            match c {
                '0' => {}
                '1' => out.set(i, true),
                other => {
                    return Err(Error::InvalidParameter(format!(
                        "bit string contains {other:?}"
                    )))
                }
            }
        }
        Ok(out)
    }

    /// The low `len` bits of `value`, most significant bit first.
    pub fn from_u64(value: u64, len: usize) -> Self {
        let mut out = BitString::zeros(len);
        for i in 0..len {
            let shift = len - 1 - i;
            if shift < 64 && (value >> shift) & 1 == 1 {
                out.set(i, true);
            }
        }
        out
    }

    pub fn random<R: Rng + ?Sized>(len: usize, rng: &mut R) -> Self {
        let mut out = BitString::zeros(len);
        for w in out.words.iter_mut() {
            *w = rng.random();
        }
        out.mask_tail();
        out
    }

    pub fn len(&self) -> usize {
        self.len
    }

    pub fn is_empty(&self) -> bool {
        self.len == 0
    }

    #[inline]
    pub fn get(&self, i: usize) -> bool {
        debug_assert!(i < self.len);
        (self.words[i / 64] >> (i % 64)) & 1 == 1
    }

    #[inline]
    pub fn set(&mut self, i: usize, value: bool) {
        assert!(i < self.len, "bit index {i} out of range for length {}", self.len);
        let mask = 1u64 << (i % 64);
        if value {
            self.words[i / 64] |= mask;
        } else {
            self.words[i / 64] &= !mask;
        }
    }

    pub fn flip(&mut self, i: usize) {
        let v = self.get(i);
        self.set(i, !v);
    }

    pub fn iter(&self) -> impl Iterator<Item = bool> + '_ {
        (0..self.len).map(move |i| self.get(i))
    }

    pub fn count_ones(&self) -> usize {
        self.words.iter().map(|w| w.count_ones() as usize).sum()
    }

    pub fn words(&self) -> &[u64] {
        &self.words
    }

    /// Bitwise AND of two equal-length strings.
    pub fn and(&self, other: &BitString) -> Result<BitString> {
        check_same_len(self.len, other.len)?;
        Ok(BitString {
            words: self
                .words
                .iter()
                .zip(&other.words)
                .map(|(a, b)| a & b)
                .collect(),
            len: self.len,
        })
    }

    /// Appends all bits of `other`.
    pub fn extend(&mut self, other: &BitString) {
        let start = self.len;
        self.len += other.len;
        self.words.resize(self.len.div_ceil(64), 0);
        for (k, b) in other.iter().enumerate() {
            if b {
                self.set(start + k, true);
            }
        }
    }

    /// Appends `value` as a `width`-bit big-endian integer.
    pub fn push_uint(&mut self, value: u64, width: usize) {
        self.extend(&BitString::from_u64(value, width));
    }

    /// Reads `width` bits starting at `offset` as a big-endian integer.
    pub fn read_uint(&self, offset: usize, width: usize) -> u64 {
        (0..width).fold(0u64, |acc, k| (acc << 1) | self.get(offset + k) as u64)
    }

    pub fn slice(&self, start: usize, len: usize) -> BitString {
        let mut out = BitString::zeros(len);
        for k in 0..len {
            if self.get(start + k) {
                out.set(k, true);
            }
        }
        out
    }

    fn mask_tail(&mut self) {
        let rem = self.len % 64;
        if rem != 0 {
            if let Some(last) = self.words.last_mut() {
                *last &= (1u64 << rem) - 1;
            }
        }
    }
}

impl fmt::Display for BitString {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for b in self.iter() {
            f.write_str(if b { "1" } else { "0" })?;
        }
        Ok(())
    }
}

impl fmt::Debug for BitString {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "BitString({self})")
    }
}

impl Serialize for BitString {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.serialize_str(&self.to_string())
    }
}

impl<'de> Deserialize<'de> for BitString {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let s = String::deserialize(d)?;
        BitString::parse(&s).map_err(serde::de::Error::custom)
    }
}

fn check_same_len(a: usize, b: usize) -> Result<()> {
    if a != b {
        return Err(Error::LengthMismatch {
            expected: a,
            got: b,
        });
    }
    Ok(())
}

pub fn hamming_distance(x: &BitString, y: &BitString) -> Result<usize> {
    check_same_len(x.len, y.len)?;
    Ok(x.words
        .iter()
        .zip(&y.words)
        .map(|(a, b)| (a ^ b).count_ones() as usize)
        .sum())
}

/// Bits needed to name one of `count` indices.
pub fn index_bits(count: usize) -> usize {
    if count <= 1 {
        0
    } else {
        (usize::BITS - (count - 1).leading_zeros()) as usize
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Decision {
    Accept,
    Reject,
    FirstEqual,
    SecondEqual,
}

impl Decision {
    pub fn accepted(self) -> bool {
        self == Decision::Accept
    }
}

/// Opaque reference to a state held by a [`StateStore`].
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct StateHandle(pub u64);

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Payload {
    Classical { bits: BitString },
    /// One handle per register; registers of dimension `d` cost
    /// `index_bits(d)` qubits each.
    Quantum { handles: Vec<StateHandle> },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Message {
    pub payload: Payload,
    /// Declared length in bits (classical) or qubits (quantum).
    pub declared_len: usize,
}

impl Message {
    pub fn classical(bits: BitString) -> Self {
        Message {
            declared_len: bits.len(),
            payload: Payload::Classical { bits },
        }
    }

    pub fn quantum(handles: Vec<StateHandle>, qubits: usize) -> Self {
        Message {
            payload: Payload::Quantum { handles },
            declared_len: qubits,
        }
    }

    pub fn is_quantum(&self) -> bool {
        matches!(self.payload, Payload::Quantum { .. })
    }
}

/// Which kind of message each party sends, e.g. `RRR` or `QRQ`.
///
/// `D` marks a deterministic classical player, `R` a randomised classical
/// one and `Q` a quantum one. Two letters means there is no Merlin.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct ProtocolType(String);

impl ProtocolType {
    pub fn new(s: &str) -> Result<Self> {
        let ok = (s.len() == 2 || s.len() == 3) && s.chars().all(|c| matches!(c, 'D' | 'R' | 'Q'));
        if !ok {
            return Err(Error::InvalidParameter(format!("bad protocol type {s:?}")));
        }
        Ok(ProtocolType(s.to_string()))
    }

    pub fn as_str(&self) -> &str {
        &self.0
    }

    fn letter(&self, k: usize) -> Option<char> {
        self.0.chars().nth(k)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Transcript {
    pub protocol: ProtocolType,
    pub alice: Message,
    pub bob: Message,
    pub merlin: Option<Message>,
}

impl Transcript {
    /// Lengths sent by (Alice, Bob, Merlin).
    pub fn lengths(&self) -> (usize, usize, usize) {
        (
            self.alice.declared_len,
            self.bob.declared_len,
            self.merlin.as_ref().map_or(0, |m| m.declared_len),
        )
    }

    /// Checks declared lengths against payloads and payload kinds against
    /// the protocol type. Quantum lengths are checked only when a store is
    /// supplied.
    pub fn validate(&self, store: Option<&StateStore>) -> Result<()> {
        let parties = [
            ("alice", Some(&self.alice)),
            ("bob", Some(&self.bob)),
            ("merlin", self.merlin.as_ref()),
        ];
        for (k, (name, msg)) in parties.into_iter().enumerate() {
            let letter = self.protocol.letter(k);
            let msg = match (letter, msg) {
                (None, None) => continue,
                (Some(_), Some(m)) => m,
                _ => {
                    return Err(Error::InvalidParameter(format!(
                        "{name}'s message does not match protocol type {}",
                        self.protocol.as_str()
                    )))
                }
            };
            if (letter == Some('Q')) != msg.is_quantum() {
                return Err(Error::InvalidParameter(format!(
                    "{name}'s payload kind does not match protocol type {}",
                    self.protocol.as_str()
                )));
            }
            match &msg.payload {
                Payload::Classical { bits } => check_same_len(msg.declared_len, bits.len())?,
                Payload::Quantum { handles } => {
                    if let Some(store) = store {
                        let mut qubits = 0;
                        for h in handles {
                            let state = store.get(*h).ok_or_else(|| {
                                Error::InvalidParameter(format!("dangling state handle {}", h.0))
                            })?;
                            qubits += index_bits(state.dim());
                        }
                        check_same_len(msg.declared_len, qubits)?;
                    }
                }
            }
        }
        Ok(())
    }
}

/// Counter-based randomness: a master seed plus a stream id select an
/// independent ChaCha stream, so trial `t` always sees the same coins no
/// matter which worker runs it.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct RandomSource {
    pub master_seed: u64,
    pub stream_id: u64,
}

impl RandomSource {
    pub fn new(master_seed: u64, stream_id: u64) -> Self {
        RandomSource {
            master_seed,
            stream_id,
        }
    }

    pub fn rng(&self) -> ChaCha8Rng {
        let mut rng = ChaCha8Rng::seed_from_u64(self.master_seed);
        rng.set_stream(self.stream_id);
        rng
    }

    /// A child stream, e.g. one per party or per trial.
    pub fn derive(&self, label: u64) -> RandomSource {
        RandomSource {
            master_seed: self.master_seed,
            stream_id: splitmix64(self.stream_id ^ splitmix64(label.wrapping_add(0x5851_f42d_4c95_7f2d))),
        }
    }
}

fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9e37_79b9_7f4a_7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum InstanceKind {
    EqPair,
    NePair,
    OneOutOfTwoTriple,
    DisjPair,
    IntersectPair,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub enum Instance {
    Pair(BitString, BitString),
    Triple(BitString, BitString, BitString),
}

impl Instance {
    pub fn pair(self) -> Option<(BitString, BitString)> {
        match self {
            Instance::Pair(x, y) => Some((x, y)),
            Instance::Triple(..) => None,
        }
    }

    pub fn triple(self) -> Option<(BitString, BitString, BitString)> {
        match self {
            Instance::Triple(a, b, c) => Some((a, b, c)),
            Instance::Pair(..) => None,
        }
    }
}

pub fn sample_instance<R: Rng + ?Sized>(kind: InstanceKind, n: usize, rng: &mut R) -> Result<Instance> {
    if n < 2 {
        return Err(Error::InvalidParameter(format!("instance length {n} < 2")));
    }
    let distinct_from = |x: &BitString, rng: &mut R| loop {
        let y = BitString::random(n, rng);
        if &y != x {
            return y;
        }
    };
    Ok(match kind {
        InstanceKind::EqPair => {
            let x = BitString::random(n, rng);
            Instance::Pair(x.clone(), x)
        }
        InstanceKind::NePair => {
            let x = BitString::random(n, rng);
            let y = distinct_from(&x, rng);
            Instance::Pair(x, y)
        }
        InstanceKind::OneOutOfTwoTriple => {
            let x1 = BitString::random(n, rng);
            let x2 = distinct_from(&x1, rng);
            let y = if rng.random::<bool>() { x1.clone() } else { x2.clone() };
            Instance::Triple(x1, x2, y)
        }
        InstanceKind::DisjPair => {
            let (x, y) = disjoint_pair(n, rng);
            Instance::Pair(x, y)
        }
        InstanceKind::IntersectPair => {
            let (mut x, mut y) = disjoint_pair(n, rng);
            let common = rng.random_range(0..n);
            x.set(common, true);
            y.set(common, true);
            Instance::Pair(x, y)
        }
    })
}

fn disjoint_pair<R: Rng + ?Sized>(n: usize, rng: &mut R) -> (BitString, BitString) {
    let mut x = BitString::zeros(n);
    let mut y = BitString::zeros(n);
    for i in 0..n {
        match rng.random_range(0..3u8) {
            0 => x.set(i, true),
            1 => y.set(i, true),
            _ => {}
        }
    }
    (x, y)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn hamming_basic_cases() {
        let z = BitString::parse("0000").unwrap();
        let o = BitString::parse("1111").unwrap();
        assert_eq!(hamming_distance(&z, &z).unwrap(), 0);
        assert_eq!(hamming_distance(&z, &o).unwrap(), 4);
        assert!(hamming_distance(&z, &BitString::zeros(5)).is_err());
    }

    #[test]
    fn hamming_matches_positionwise_loop() {
        let mut rng = RandomSource::new(7, 0).rng();
        for _ in 0..50 {
            let x = BitString::random(64, &mut rng);
            let y = BitString::random(64, &mut rng);
            let mut count = 0;
            for i in 0..64 {
                if x.get(i) != y.get(i) {
                    count += 1;
                }
            }
            assert_eq!(hamming_distance(&x, &y).unwrap(), count);
        }
    }

    #[test]
    fn random_source_is_reproducible_and_streams_differ() {
        let a = RandomSource::new(42, 3);
        let draws = |s: RandomSource| {
            let mut r = s.rng();
            (0..8).map(|_| r.random::<u64>()).collect::<Vec<_>>()
        };
        assert_eq!(draws(a), draws(a));
        assert_ne!(draws(a), draws(RandomSource::new(42, 4)));
        assert_ne!(draws(a.derive(1)), draws(a.derive(2)));
        assert_eq!(draws(a.derive(1)), draws(a.derive(1)));
    }

    #[test]
    fn instances_satisfy_promises() {
        let mut rng = RandomSource::new(1, 0).rng();
        let (x, y) = sample_instance(InstanceKind::EqPair, 8, &mut rng).unwrap().pair().unwrap();
        assert_eq!(hamming_distance(&x, &y).unwrap(), 0);
        for _ in 0..100 {
            let (x, y) = sample_instance(InstanceKind::NePair, 2, &mut rng).unwrap().pair().unwrap();
            assert_ne!(x, y);
            let (x1, x2, y) = sample_instance(InstanceKind::OneOutOfTwoTriple, 8, &mut rng)
                .unwrap()
                .triple()
                .unwrap();
            assert!((x1 == y) ^ (x2 == y));
            let (x, y) = sample_instance(InstanceKind::IntersectPair, 16, &mut rng)
                .unwrap()
                .pair()
                .unwrap();
            assert!(x.and(&y).unwrap().count_ones() >= 1);
        }
        assert!(sample_instance(InstanceKind::EqPair, 1, &mut rng).is_err());
    }

    #[test]
    fn disjoint_pairs_never_share_a_one() {
        for seed in 0..1000 {
            let mut rng = RandomSource::new(seed, 0).rng();
            let (x, y) = sample_instance(InstanceKind::DisjPair, 16, &mut rng).unwrap().pair().unwrap();
            for i in 0..16 {
                assert!(!(x.get(i) && y.get(i)));
            }
        }
    }

    #[test]
    fn uint_round_trip_and_index_bits() {
        let mut b = BitString::zeros(0);
        b.push_uint(5, 4);
        b.push_uint(1, 1);
        assert_eq!(b.to_string(), "01011");
        assert_eq!(b.read_uint(0, 4), 5);
        assert_eq!(index_bits(1), 0);
        assert_eq!(index_bits(2), 1);
        assert_eq!(index_bits(16), 4);
        assert_eq!(index_bits(17), 5);
    }

    #[test]
    fn transcript_validation_checks_kinds_and_lengths() {
        let t = Transcript {
            protocol: ProtocolType::new("RRR").unwrap(),
            alice: Message::classical(BitString::zeros(3)),
            bob: Message::classical(BitString::zeros(3)),
            merlin: Some(Message::classical(BitString::zeros(5))),
        };
        t.validate(None).unwrap();
        assert_eq!(t.lengths(), (3, 3, 5));

        let mut bad = t.clone();
        bad.alice.declared_len = 4;
        assert!(bad.validate(None).is_err());

        let mut wrong_kind = t.clone();
        wrong_kind.protocol = ProtocolType::new("QRR").unwrap();
        assert!(wrong_kind.validate(None).is_err());

        let mut missing = t;
        missing.merlin = None;
        assert!(missing.validate(None).is_err());
    }
}
