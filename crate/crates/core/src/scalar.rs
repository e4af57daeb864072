use std::fmt::Debug;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{Num, One, Signed, ToPrimitive};

/// Arbitrary-precision rational, the exact arithmetic mode.
pub type Rational = BigRational;

/// Number type shared by the exact (`Rational`) and floating (`f64`) modes.
pub trait Scalar: Clone + Debug + PartialOrd + Num + Signed {
    /// Whether arithmetic is exact, so comparisons need no tolerance.
    const EXACT: bool;

    /// Exact conversion for rationals; panics on non-finite input.
    fn from_f64(x: f64) -> Self;

    fn to_f64(&self) -> f64;

    fn half() -> Self {
        Self::one() / (Self::one() + Self::one())
    }

    fn pow_u(&self, mut e: usize) -> Self {
        let mut base = self.clone();
        let mut acc = Self::one();
        while e > 0 {
            if e & 1 == 1 {
                acc = acc * base.clone();
            }
            base = base.clone() * base;
            e >>= 1;
        }
        acc
    }
}

impl Scalar for f64 {
    const EXACT: bool = false;

    fn from_f64(x: f64) -> Self {
        x
    }

    fn to_f64(&self) -> f64 {
        *self
    }
}

impl Scalar for Rational {
    const EXACT: bool = true;

    fn from_f64(x: f64) -> Self {
        Rational::from_float(x).expect("finite float")
    }

    fn to_f64(&self) -> f64 {
        ToPrimitive::to_f64(self).unwrap_or_else(|| {
            if self.is_negative() {
                f64::NEG_INFINITY
            } else {
                f64::INFINITY
            }
        })
    }
}

/// `num / 2^k` as an exact rational.
pub(crate) fn dyadic(num: i128, k: usize) -> Rational {
    Rational::new(BigInt::from(num), BigInt::one() << k)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn pow_matches_repeated_multiplication() {
        let r = Rational::new(3.into(), 7.into());
        assert_eq!(r.pow_u(5), r.clone() * &r * &r * &r * &r);
        assert_eq!(0.5f64.pow_u(10), 1.0 / 1024.0);
        assert_eq!(2.0f64.pow_u(0), 1.0);
    }

    #[test]
    fn tiny_rationals_convert_to_float() {
        let r = dyadic(3, 1100);
        let f = Scalar::to_f64(&r);
        assert!((0.0..1e-300).contains(&f));
        assert_eq!(Scalar::to_f64(&dyadic(1, 3)), 0.125);
        assert_eq!(Rational::from_f64(0.375), dyadic(3, 3));
    }
}
