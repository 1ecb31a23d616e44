//! Prime-field arithmetic, univariate polynomials and low-degree extensions
//! of Boolean tables, as used by the disjointness protocol.

mod lde;
mod poly;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub use lde::{lagrange_basis_at, lde_eval, s_polynomial, s_value, EvalTable};
pub use poly::{agreement_count, interpolate, poly_eval, UniPoly};

/// The field of integers modulo a prime `q < 2^63`. Elements are canonical
/// residues in `0..q`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(try_from = "u64", into = "u64")]
pub struct PrimeField {
    q: u64,
}

impl TryFrom<u64> for PrimeField {
    type Error = Error;

    fn try_from(q: u64) -> Result<Self> {
        PrimeField::new(q)
    }
}

impl From<PrimeField> for u64 {
    fn from(f: PrimeField) -> u64 {
        f.q
    }
}

impl PrimeField {
    pub fn new(q: u64) -> Result<Self> {
        if q >= 1 << 63 || !is_prime(q) {
            return Err(Error::InvalidParameter(format!("{q} is not a supported prime")));
        }
        Ok(PrimeField { q })
    }

    pub fn modulus(&self) -> u64 {
        self.q
    }

    /// Bits needed to send one element.
    pub fn element_bits(&self) -> usize {
        crate::model::index_bits(self.q as usize)
    }

    #[inline]
    pub fn elem(&self, v: u64) -> u64 {
        v % self.q
    }

    #[inline]
    pub fn from_i64(&self, v: i64) -> u64 {
        v.rem_euclid(self.q as i64) as u64
    }

    #[inline]
    pub fn add(&self, a: u64, b: u64) -> u64 {
        let s = a + b;
        if s >= self.q {
            s - self.q
        } else {
            s
        }
    }

    #[inline]
    pub fn sub(&self, a: u64, b: u64) -> u64 {
        if a >= b {
            a - b
        } else {
            a + self.q - b
        }
    }

    #[inline]
    pub fn neg(&self, a: u64) -> u64 {
        self.sub(0, a)
    }

    #[inline]
    pub fn mul(&self, a: u64, b: u64) -> u64 {
        ((a as u128 * b as u128) % self.q as u128) as u64
    }

    pub fn pow(&self, mut base: u64, mut exp: u64) -> u64 {
        let mut acc = 1 % self.q;
        base %= self.q;
        while exp > 0 {
            if exp & 1 == 1 {
                acc = self.mul(acc, base);
            }
            base = self.mul(base, base);
            exp >>= 1;
        }
        acc
    }

    /// Multiplicative inverse; `None` for zero.
    pub fn inv(&self, a: u64) -> Option<u64> {
        let a = a % self.q;
        if a == 0 {
            None
        } else {
            Some(self.pow(a, self.q - 2))
        }
    }
}

/// Deterministic Miller-Rabin; the fixed witness set is exact for all
/// 64-bit integers.
pub fn is_prime(n: u64) -> bool {
    if n < 2 {
        return false;
    }
    const WITNESSES: [u64; 12] = [2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37];
    for p in WITNESSES {
        if n % p == 0 {
            return n == p;
        }
    }
    let mulmod = |a: u64, b: u64| ((a as u128 * b as u128) % n as u128) as u64;
    let powmod = |mut b: u64, mut e: u64| {
        let mut r = 1u64;
        while e > 0 {
            if e & 1 == 1 {
                r = mulmod(r, b);
            }
            b = mulmod(b, b);
            e >>= 1;
        }
        r
    };
    let d_shift = (n - 1).trailing_zeros();
    let d = (n - 1) >> d_shift;
    'witness: for a in WITNESSES {
        let mut x = powmod(a, d);
        if x == 1 || x == n - 1 {
            continue;
        }
        for _ in 1..d_shift {
            x = mulmod(x, x);
            if x == n - 1 {
                continue 'witness;
            }
        }
        return false;
    }
    true
}

/// Smallest prime `q` with `n < q <= 2n`.
pub fn find_prime(n: u64) -> Result<PrimeField> {
    if n < 2 {
        return Err(Error::InvalidParameter(format!("find_prime needs n >= 2, got {n}")));
    }
    let q = smallest_prime_above(n);
    debug_assert!(q <= 2 * n);
    PrimeField::new(q)
}

/// Smallest prime strictly greater than `n`.
pub fn smallest_prime_above(n: u64) -> u64 {
    let mut q = n + 1;
    while !is_prime(q) {
        q += 1;
    }
    q
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::Rng;

    fn sieve(limit: usize) -> Vec<bool> {
        let mut is = vec![true; limit + 1];
        is[0] = false;
        is[1] = false;
        let mut p = 2;
        while p * p <= limit {
            if is[p] {
                let mut m = p * p;
                while m <= limit {
                    is[m] = false;
                    m += p;
                }
            }
            p += 1;
        }
        is
    }

    #[test]
    fn miller_rabin_agrees_with_sieve() {
        let table = sieve(100_000);
        for (v, &expected) in table.iter().enumerate() {
            assert_eq!(is_prime(v as u64), expected, "{v}");
        }
        assert!(is_prime(18_446_744_073_709_551_557));
        assert!(!is_prime(3_215_031_751)); // strong pseudoprime to bases 2, 3, 5, 7
    }

    #[test]
    fn find_prime_examples() {
        let table = sieve(256);
        let by_sieve = |n: usize| (n + 1..=2 * n).find(|&q| table[q]).unwrap() as u64;
        assert_eq!(by_sieve(64), 67);
        assert_eq!(find_prime(64).unwrap().modulus(), 67);
        assert_eq!(find_prime(2).unwrap().modulus(), 3);
        assert_eq!(find_prime(100).unwrap().modulus(), 101);
        for n in 2..128 {
            assert_eq!(find_prime(n as u64).unwrap().modulus(), by_sieve(n));
        }
        assert!(find_prime(1).is_err());
    }

    #[test]
    fn field_axioms_on_random_triples() {
        let f = PrimeField::new(307).unwrap();
        let mut rng = crate::model::RandomSource::new(5, 0).rng();
        for _ in 0..2000 {
            let (a, b, c) = (
                rng.random_range(0..307),
                rng.random_range(0..307),
                rng.random_range(0..307),
            );
            assert_eq!(f.mul(f.mul(a, b), c), f.mul(a, f.mul(b, c)));
            assert_eq!(f.add(f.add(a, b), c), f.add(a, f.add(b, c)));
            assert_eq!(f.mul(a, f.add(b, c)), f.add(f.mul(a, b), f.mul(a, c)));
            assert_eq!(f.add(a, f.neg(a)), 0);
            if a != 0 {
                assert_eq!(f.mul(a, f.inv(a).unwrap()), 1);
            }
        }
        assert_eq!(f.inv(0), None);
        assert!(PrimeField::new(300).is_err());
    }
}
