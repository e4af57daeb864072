//! Arithmetic in `GF(2^ℓ)` for `1 <= ℓ <= 64`.

use crate::error::{Error, Result};

/// Low-order coefficients of an irreducible `x^ℓ + low(x)` for
/// `ℓ = 1..=64`; the leading `x^ℓ` term is implicit.
const IRREDUCIBLE_LOW: [u64; 64] = [
    0x1, 0x3, 0x3, 0x3, 0x5, 0x3, 0x3, 0x1b, 0x3, 0x9, 0x5, 0x9, 0x1b, 0x21, 0x3, 0x2b, 0x9, 0x9,
    0x27, 0x9, 0x5, 0x3, 0x21, 0x1b, 0x9, 0x1b, 0x27, 0x3, 0x5, 0x3, 0x9, 0x8d, 0x401, 0x81, 0x5,
    0x201, 0x53, 0x63, 0x11, 0x39, 0x9, 0x81, 0x59, 0x21, 0x1b, 0x3, 0x21, 0x2d, 0x201, 0x1d, 0x4b,
    0x9, 0x47, 0x201, 0x81, 0x95, 0x11, 0x80001, 0x95, 0x3, 0x27, 0x20000001, 0x3, 0x1b,
];

/// The field `GF(2)[x] / (x^ℓ + low(x))`; elements are the low `ℓ` bits of a
/// `u64`, bit `i` being the coefficient of `x^i`.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Gf2Field {
    ell: u32,
    low: u64,
    mask: u64,
}

impl Gf2Field {
    pub fn new(ell: u32) -> Result<Self> {
        if !(1..=64).contains(&ell) {
            return Err(Error::InvalidParameter(format!(
                "field degree {ell} outside 1..=64"
            )));
        }
        Ok(Gf2Field {
            ell,
            low: IRREDUCIBLE_LOW[ell as usize - 1],
            mask: mask(ell),
        })
    }

    pub fn degree(&self) -> u32 {
        self.ell
    }

    /// The modulus without its leading term.
    pub fn modulus_low(&self) -> u64 {
        self.low
    }

    pub fn mask(&self) -> u64 {
        self.mask
    }

    fn mul_x(&self, a: u64) -> u64 {
        let carry = (a >> (self.ell - 1)) & 1 == 1;
        let shifted = (a << 1) & self.mask;
        if carry {
            shifted ^ self.low
        } else {
            shifted
        }
    }

    pub fn mul(&self, mut a: u64, mut b: u64) -> u64 {
        let mut acc = 0;
        while b != 0 {
            if b & 1 == 1 {
                acc ^= a;
            }
            b >>= 1;
            a = self.mul_x(a);
        }
        acc
    }

    pub fn pow(&self, mut a: u64, mut e: u64) -> u64 {
        let mut acc = 1;
        while e > 0 {
            if e & 1 == 1 {
                acc = self.mul(acc, a);
            }
            a = self.mul(a, a);
            e >>= 1;
        }
        acc
    }
}

fn mask(ell: u32) -> u64 {
    if ell == 64 {
        u64::MAX
    } else {
        (1u64 << ell) - 1
    }
}

fn poly_degree(p: u128) -> i32 {
    127 - p.leading_zeros() as i32
}

fn poly_mod(mut a: u128, b: u128) -> u128 {
    let db = poly_degree(b);
    while a != 0 && poly_degree(a) >= db {
        a ^= b << (poly_degree(a) - db);
    }
    a
}

fn poly_gcd(mut a: u128, mut b: u128) -> u128 {
    while b != 0 {
        let r = poly_mod(a, b);
        a = b;
        b = r;
    }
    a
}

/// Ben-Or's test: `x^ℓ + low` is irreducible iff
/// `gcd(x^{2^i} - x, f) = 1` for every `1 <= i <= ℓ/2`.
pub fn is_irreducible(ell: u32, low: u64) -> bool {
    if !(1..=64).contains(&ell) || low & !mask(ell) != 0 {
        return false;
    }
    let f = (1u128 << ell) | u128::from(low);
    let field = Gf2Field {
        ell,
        low,
        mask: mask(ell),
    };
    if ell == 1 {
        return true;
    }
    let x = 2u64;
    let mut t = x;
    for _ in 1..=ell / 2 {
        t = field.mul(t, t);
        if poly_gcd(f, u128::from(t ^ x)) != 1 {
            return false;
        }
    }
    true
}
