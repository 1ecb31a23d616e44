//! Arithmetic in GF(2^s) for the outer Reed-Solomon code, via log/antilog
//! tables over a primitive polynomial.

use crate::error::{Error, Result};

/// Primitive polynomials indexed by degree, including the x^s term.
const PRIMITIVE: [u32; 17] = [
    0, 0, 0x7, 0xb, 0x13, 0x25, 0x43, 0x89, 0x11d, 0x211, 0x409, 0x805, 0x1053, 0x201b, 0x4443,
    0x8003, 0x1100b,
];

pub const MAX_DEGREE: u32 = 16;

#[derive(Debug, Clone)]
pub struct Gf2m {
    degree: u32,
    exp: Vec<u16>,
    log: Vec<u16>,
}

impl Gf2m {
    pub fn new(degree: u32) -> Result<Self> {
        if !(2..=MAX_DEGREE).contains(&degree) {
            return Err(Error::InvalidParameter(format!(
                "GF(2^{degree}) unsupported, degree must be in 2..={MAX_DEGREE}"
            )));
        }
        let order = 1usize << degree;
        let poly = PRIMITIVE[degree as usize];
        let mut exp = vec![0u16; 2 * order];
        let mut log = vec![0u16; order];
        let mut x: u32 = 1;
        for i in 0..order - 1 {
            exp[i] = x as u16;
            log[x as usize] = i as u16;
            x <<= 1;
            if x & (1 << degree) != 0 {
                x ^= poly;
            }
        }
        for i in order - 1..2 * order {
            exp[i] = exp[i - (order - 1)];
        }
        Ok(Gf2m { degree, exp, log })
    }

    pub fn degree(&self) -> u32 {
        self.degree
    }

    pub fn order(&self) -> usize {
        1 << self.degree
    }

    #[inline]
    pub fn add(&self, a: u16, b: u16) -> u16 {
        a ^ b
    }

    #[inline]
    pub fn mul(&self, a: u16, b: u16) -> u16 {
        if a == 0 || b == 0 {
            return 0;
        }
        self.exp[self.log[a as usize] as usize + self.log[b as usize] as usize]
    }

    /// Horner evaluation of `coeffs` (constant term first) at `x`.
    pub fn eval(&self, coeffs: &[u16], x: u16) -> u16 {
        coeffs.iter().rev().fold(0, |acc, &c| self.add(self.mul(acc, x), c))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn multiplicative_group_is_cyclic() {
        for degree in 2..=MAX_DEGREE {
            let f = Gf2m::new(degree).unwrap();
            let mut seen = vec![false; f.order()];
            for i in 0..f.order() - 1 {
                let v = f.exp[i] as usize;
                assert!(!seen[v], "degree {degree}: generator repeats");
                seen[v] = true;
            }
        }
    }

    #[test]
    fn mul_matches_carryless_reduction() {
        let f = Gf2m::new(4).unwrap();
        for a in 0..16u16 {
            for b in 0..16u16 {
                let mut prod: u32 = 0;
                for k in 0..4 {
                    if (b >> k) & 1 == 1 {
                        prod ^= (a as u32) << k;
                    }
                }
                for k in (4..8).rev() {
                    if prod & (1 << k) != 0 {
                        prod ^= 0x13 << (k - 4);
                    }
                }
                assert_eq!(f.mul(a, b) as u32, prod);
            }
        }
    }

    #[test]
    fn rejects_unsupported_degree() {
        assert!(Gf2m::new(1).is_err());
        assert!(Gf2m::new(17).is_err());
    }
}
