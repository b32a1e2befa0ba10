//! Arithmetic in GF(2^n), n <= 16, polynomial basis.

use crate::error::{Error, Result};

/// Reduction polynomials, including the x^n term. Index n-1.
const MODULI: [u32; 16] = [
    0b11,    // x + 1
    0x7,     // x^2 + x + 1
    0xB,     // x^3 + x + 1
    0x13,    // x^4 + x + 1
    0x25,    // x^5 + x^2 + 1
    0x43,    // x^6 + x + 1
    0x83,    // x^7 + x + 1
    0x11D,   // x^8 + x^4 + x^3 + x^2 + 1
    0x211,   // x^9 + x^4 + 1
    0x409,   // x^10 + x^3 + 1
    0x805,   // x^11 + x^2 + 1
    0x1053,  // x^12 + x^6 + x^4 + x + 1
    0x201B,  // x^13 + x^4 + x^3 + x + 1
    0x4443,  // x^14 + x^10 + x^6 + x + 1
    0x8003,  // x^15 + x + 1
    0x1002D, // x^16 + x^5 + x^3 + x^2 + 1
];

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Gf2n {
    n: u32,
    modulus: u32,
}

impl Gf2n {
    pub fn new(n: u32) -> Result<Self> {
        if !(1..=16).contains(&n) {
            return Err(Error::InvalidArgument(format!("field degree {n} outside 1..=16")));
        }
        Ok(Gf2n {
            n,
            modulus: MODULI[n as usize - 1],
        })
    }

    pub fn degree(&self) -> u32 {
        self.n
    }

    pub fn modulus(&self) -> u32 {
        self.modulus
    }

    pub fn order(&self) -> u64 {
        1u64 << self.n
    }

    pub fn mask(&self) -> u64 {
        self.order() - 1
    }

    pub fn mul(&self, a: u64, b: u64) -> u64 {
        let mut a = a & self.mask();
        let mut b = b & self.mask();
        let mut acc = 0u64;
        let top = 1u64 << self.n;
        while b != 0 {
            if b & 1 == 1 {
                acc ^= a;
            }
            b >>= 1;
            a <<= 1;
            if a & top != 0 {
                a ^= self.modulus as u64;
            }
        }
        acc
    }

    pub fn pow(&self, a: u64, mut e: u64) -> u64 {
        let mut base = a & self.mask();
        let mut acc = 1u64;
        while e > 0 {
            if e & 1 == 1 {
                acc = self.mul(acc, base);
            }
            base = self.mul(base, base);
            e >>= 1;
        }
        acc
    }

    /// a^(2^n - 2); `None` for zero.
    pub fn inv(&self, a: u64) -> Option<u64> {
        let a = a & self.mask();
        if a == 0 {
            None
        } else {
            Some(self.pow(a, self.order() - 2))
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn every_modulus_is_irreducible() {
        // In a field every nonzero element satisfies a^(2^n - 1) = 1, and a
        // reducible modulus always admits a zero divisor.
        for n in 1..=16 {
            let f = Gf2n::new(n).unwrap();
            for a in 1..f.order() {
                assert_eq!(f.pow(a, f.order() - 1), 1, "n={n} a={a}");
            }
            if n <= 8 {
                for a in 1..f.order() {
                    for b in 1..f.order() {
                        assert_ne!(f.mul(a, b), 0);
                    }
                }
            }
        }
    }

    #[test]
    fn f4_table() {
        let f = Gf2n::new(2).unwrap();
        // x * x = x + 1 modulo x^2 + x + 1
        assert_eq!(f.mul(2, 2), 3);
        assert_eq!(f.mul(3, 1), 3);
        assert_eq!(f.mul(3, 3), 2);
        assert_eq!(f.inv(2), Some(3));
    }

    #[test]
    fn distributive_and_invertible_small_fields() {
        for n in 1..=4 {
            let f = Gf2n::new(n).unwrap();
            for a in 0..f.order() {
                for x in 0..f.order() {
                    for y in 0..f.order() {
                        assert_eq!(f.mul(a, x ^ y), f.mul(a, x) ^ f.mul(a, y));
                    }
                }
                if a != 0 {
                    assert_eq!(f.mul(a, f.inv(a).unwrap()), 1);
                }
            }
        }
    }

    #[test]
    fn degree_range_checked() {
        assert!(Gf2n::new(0).is_err());
        assert!(Gf2n::new(17).is_err());
    }
}
