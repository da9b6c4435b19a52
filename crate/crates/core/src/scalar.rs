//! Scalar abstraction for density and bound arithmetic.
//!
//! Verdicts compare counts against parameter-scaled bounds. With
//! [`Rational`](crate::Rational) they are exact; with `f64`/`f32` they are the
//! usual floating-point comparisons.

use std::fmt::Debug;

use num_rational::Ratio;
use num_traits::{FromPrimitive, Num, Signed, ToPrimitive};

pub trait Scalar: Num + Signed + Clone + PartialOrd + Debug + Send + Sync {
    fn from_count(c: u64) -> Self;
    /// Best-effort conversion of an `f64` parameter (exact for dyadic
    /// rationals when `Self` is a ratio type).
    fn from_f64_lossy(x: f64) -> Option<Self>;
    fn to_f64_lossy(&self) -> f64;

    fn from_ratio(num: i64, den: i64) -> Self {
        Self::from_count(num.unsigned_abs()) * if num < 0 { -Self::one() } else { Self::one() }
            / Self::from_count(den.unsigned_abs())
            * if den < 0 { -Self::one() } else { Self::one() }
    }

    fn ceil_to_u64(&self) -> u64 {
        let f = self.to_f64_lossy();
        if f <= 0.0 {
            0
        } else {
            f.ceil() as u64
        }
    }
}

macro_rules! float_scalar {
    ($t:ty) => {
        impl Scalar for $t {
            fn from_count(c: u64) -> Self {
                c as $t
            }
            fn from_f64_lossy(x: f64) -> Option<Self> {
                x.is_finite().then_some(x as $t)
            }
            fn to_f64_lossy(&self) -> f64 {
                *self as f64
            }
        }
    };
}

float_scalar!(f32);
float_scalar!(f64);

macro_rules! ratio_scalar {
    ($t:ty) => {
        impl Scalar for Ratio<$t> {
            fn from_count(c: u64) -> Self {
                Ratio::from_integer(c as $t)
            }
            fn from_f64_lossy(x: f64) -> Option<Self> {
                Ratio::<$t>::from_f64(x)
            }
            fn to_f64_lossy(&self) -> f64 {
                self.to_f64().unwrap_or(f64::NAN)
            }
            fn ceil_to_u64(&self) -> u64 {
                let c = self.ceil().to_integer();
                if c <= 0 {
                    0
                } else {
                    c as u64
                }
            }
        }
    };
}

ratio_scalar!(i64);
ratio_scalar!(i128);

#[cfg(test)]
mod tests {
    use super::*;
    use crate::Rational;

    #[test]
    fn ceil_is_exact_for_ratios() {
        assert_eq!(Rational::new(21, 5).ceil_to_u64(), 5);
        assert_eq!(Rational::new(20, 5).ceil_to_u64(), 4);
        assert_eq!(Rational::from_ratio(-3, 4).ceil_to_u64(), 0);
        assert_eq!(2.0001f64.ceil_to_u64(), 3);
    }
}
