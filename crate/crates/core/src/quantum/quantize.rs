//! Fixed-point classical descriptions of states.
//!
//! Each real and imaginary part is stored in `B` bits: a sign bit followed by
//! a `B - 1` bit magnitude `round(|x| * (2^(B-1) - 1))`. Components are packed
//! big-endian into 64-bit words, real part before imaginary part.

use num_complex::Complex64;
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use super::state::StateVec;
use crate::error::{Error, Result};
use crate::model::BitString;

pub const MIN_BITS: u32 = 4;
pub const MAX_BITS: u32 = 53;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct QuantizedState {
    dim: usize,
    bits: u32,
    words: Vec<u64>,
}

impl QuantizedState {
    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn bits_per_component(&self) -> u32 {
        self.bits
    }

    /// Length of the classical message in bits.
    pub fn message_bits(&self) -> usize {
        2 * self.dim * self.bits as usize
    }

    /// The packed description as a bit string of length
    /// [`message_bits`](Self::message_bits).
    pub fn to_bits(&self) -> BitString {
        let mut out = BitString::zeros(0);
        for k in 0..2 * self.dim {
            out.push_uint(self.component(k), self.bits as usize);
        }
        out
    }

    fn component(&self, k: usize) -> u64 {
        let b = self.bits as usize;
        let start = k * b;
        (0..b).fold(0u64, |acc, off| {
            let pos = start + off;
            let bit = (self.words[pos / 64] >> (63 - pos % 64)) & 1;
            (acc << 1) | bit
        })
    }
}

#[derive(Serialize, Deserialize)]
struct QuantizedJson {
    a: usize,
    #[serde(rename = "B")]
    bits: u32,
    words: String,
}

impl Serialize for QuantizedState {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        let mut bytes = Vec::with_capacity(self.words.len() * 8);
        for w in &self.words {
            bytes.extend_from_slice(&w.to_be_bytes());
        }
        QuantizedJson {
            a: self.dim,
            bits: self.bits,
            words: hex::encode(bytes),
        }
        .serialize(s)
    }
}

impl<'de> Deserialize<'de> for QuantizedState {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        use serde::de::Error as _;
        let j = QuantizedJson::deserialize(d)?;
        let bytes = hex::decode(&j.words).map_err(D::Error::custom)?;
        if bytes.len() % 8 != 0 {
            return Err(D::Error::custom("packed words are not whole u64s"));
        }
        let words: Vec<u64> = bytes
            .chunks_exact(8)
            .map(|c| u64::from_be_bytes(c.try_into().expect("8 bytes")))
            .collect();
        let expected = (2 * j.a * j.bits as usize).div_ceil(64);
        if words.len() != expected || !(MIN_BITS..=MAX_BITS).contains(&j.bits) {
            return Err(D::Error::custom("packed words do not match a and B"));
        }
        Ok(QuantizedState {
            dim: j.a,
            bits: j.bits,
            words,
        })
    }
}

/// Bits per real component for a target trace distance `tau`:
/// `ceil(log2(8a / tau))`, never below [`MIN_BITS`].
pub fn bits_for_target(a: usize, tau: f64) -> Result<u32> {
    if !(tau > 0.0 && tau <= 1.0) {
        return Err(Error::InvalidParameter(format!("target distance {tau} not in (0, 1]")));
    }
    let b = (8.0 * a as f64 / tau).log2().ceil() as u32;
    let b = b.max(MIN_BITS);
    if b > MAX_BITS {
        return Err(Error::InvalidParameter(format!("target {tau} needs {b} > {MAX_BITS} bits")));
    }
    Ok(b)
}

/// Round-trip trace-distance bound `4 a 2^-B` for the encoding above.
pub fn distance_bound(a: usize, bits: u32) -> f64 {
    4.0 * a as f64 * (-(bits as f64)).exp2()
}

pub fn quantize(coords: &StateVec, bits: u32) -> Result<QuantizedState> {
    if !(MIN_BITS..=MAX_BITS).contains(&bits) {
        return Err(Error::InvalidParameter(format!(
            "B = {bits} outside {MIN_BITS}..={MAX_BITS}"
        )));
    }
    let scale = ((1u64 << (bits - 1)) - 1) as f64;
    let b = bits as usize;
    let dim = coords.dim();
    let total_bits = 2 * dim * b;
    let mut words = vec![0u64; total_bits.div_ceil(64)];
    let mut pos = 0usize;
    let mut push = |value: u64| {
        for off in (0..b).rev() {
            if (value >> off) & 1 == 1 {
                words[pos / 64] |= 1 << (63 - pos % 64);
            }
            pos += 1;
        }
    };
    for c in coords.amplitudes() {
        for x in [c.re, c.im] {
            let magnitude = (x.abs().min(1.0) * scale).round() as u64;
            let sign = u64::from(x < 0.0 && magnitude != 0);
            push((sign << (bits - 1)) | magnitude);
        }
    }
    Ok(QuantizedState { dim, bits, words })
}

pub fn dequantize(q: &QuantizedState) -> Result<StateVec> {
    let scale = ((1u64 << (q.bits - 1)) - 1) as f64;
    let sign_bit = 1u64 << (q.bits - 1);
    let decode = |v: u64| {
        let magnitude = (v & (sign_bit - 1)) as f64 / scale;
        if v & sign_bit != 0 {
            -magnitude
        } else {
            magnitude
        }
    };
    let amps: Vec<Complex64> = (0..q.dim)
        .map(|k| Complex64::new(decode(q.component(2 * k)), decode(q.component(2 * k + 1))))
        .collect();
    StateVec::try_normalized(amps)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::RandomSource;
    use crate::quantum::state::trace_distance_pure;

    #[test]
    fn basis_vectors_round_trip_exactly() {
        for bits in [4, 8, 16, 24] {
            let e = StateVec::basis(5, 2);
            let back = dequantize(&quantize(&e, bits).unwrap()).unwrap();
            assert_eq!(trace_distance_pure(&e, &back).unwrap(), 0.0);
        }
    }

    #[test]
    fn distance_shrinks_with_more_bits() {
        let mut rng = RandomSource::new(8, 0).rng();
        let s = StateVec::random(6, &mut rng);
        let d: Vec<f64> = [8, 16, 24]
            .iter()
            .map(|&b| trace_distance_pure(&s, &dequantize(&quantize(&s, b).unwrap()).unwrap()).unwrap())
            .collect();
        assert!(d[0] >= d[1] && d[1] >= d[2], "{d:?}");
        assert!(d[2] < 1e-6);
    }

    #[test]
    fn round_trip_respects_bound() {
        let mut rng = RandomSource::new(9, 0).rng();
        for a in [1, 2, 4, 8, 16] {
            for bits in [4, 6, 10, 20] {
                for _ in 0..50 {
                    let s = StateVec::random(a, &mut rng);
                    let back = dequantize(&quantize(&s, bits).unwrap()).unwrap();
                    let d = trace_distance_pure(&s, &back).unwrap();
                    assert!(d <= distance_bound(a, bits), "a={a} B={bits}: {d}");
                }
            }
        }
    }

    #[test]
    fn chosen_precision_meets_target() {
        let mut rng = RandomSource::new(10, 0).rng();
        let tau = 0.5f64.powi(2) * 0.25f64.powi(4) / 100.0;
        let a = 4;
        let bits = bits_for_target(a, tau).unwrap();
        assert_eq!(bits, 22);
        for _ in 0..1000 {
            let s = StateVec::random(a, &mut rng);
            let back = dequantize(&quantize(&s, bits).unwrap()).unwrap();
            assert!(trace_distance_pure(&s, &back).unwrap() <= tau);
        }
    }

    #[test]
    fn json_round_trip_is_bit_exact() {
        let mut rng = RandomSource::new(11, 0).rng();
        let s = StateVec::random(7, &mut rng);
        let q = quantize(&s, 13).unwrap();
        let json = serde_json::to_string(&q).unwrap();
        let back: QuantizedState = serde_json::from_str(&json).unwrap();
        assert_eq!(back, q);
        assert_eq!(serde_json::to_string(&back).unwrap(), json);
        assert_eq!(q.message_bits(), 2 * 7 * 13);
        assert_eq!(q.to_bits().len(), q.message_bits());
    }

    #[test]
    fn rejects_too_few_bits() {
        assert!(quantize(&StateVec::basis(2, 0), 3).is_err());
        assert!(bits_for_target(4, 0.0).is_err());
    }
}
