//! Numeric abstractions.
//!
//! Two layers: [`Field`] covers everything that only needs ordered field
//! arithmetic (energy ledgers, schedulers, the exact solver) and is also
//! implemented for exact rationals. [`Scalar`] adds the transcendental
//! functions needed by the channel and harvesting physics.

use std::fmt::{Debug, Display};
use std::iter::Sum;

use num_rational::Ratio;
use num_traits::{Float, FloatConst, FromPrimitive, Num, ToPrimitive};
use serde::de::DeserializeOwned;
use serde::Serialize;

/// Ordered field arithmetic.
pub trait Field:
    Num + Copy + PartialOrd + FromPrimitive + ToPrimitive + Debug + Send + Sync + 'static
{
    /// Absolute tolerance used when comparing accumulated deliveries against
    /// payload and fairness thresholds. Zero for exact types.
    fn tolerance() -> Self;

    /// Converts a literal. Panics only for non-finite input.
    fn lit(x: f64) -> Self {
        Self::from_f64(x).expect("finite literal")
    }

    fn from_count(n: u64) -> Self {
        Self::from_u64(n).expect("count fits scalar")
    }

    fn to_f64_lossy(self) -> f64 {
        self.to_f64().unwrap_or(f64::NAN)
    }
}

/// Floating-point scalar used by the physics and the simulator.
pub trait Scalar:
    Field + Float + FloatConst + Display + Default + Sum + Serialize + DeserializeOwned
{
}

macro_rules! impl_float {
    ($f:ty) => {
        impl Field for $f {
            fn tolerance() -> Self {
                (1e-9 as $f).max(<$f>::EPSILON * 1024.0)
            }
        }
        impl Scalar for $f {}
    };
}

impl_float!(f32);
impl_float!(f64);

macro_rules! impl_ratio {
    ($i:ty) => {
        impl Field for Ratio<$i> {
            fn tolerance() -> Self {
                Ratio::from_integer(0)
            }
        }
    };
}

impl_ratio!(i64);
impl_ratio!(i128);

pub(crate) fn min<T: PartialOrd>(a: T, b: T) -> T {
    if b < a {
        b
    } else {
        a
    }
}

pub(crate) fn max<T: PartialOrd>(a: T, b: T) -> T {
    if b > a {
        b
    } else {
        a
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rational_tolerance_is_zero() {
        assert_eq!(Ratio::<i128>::tolerance(), Ratio::from_integer(0));
        assert!(f64::tolerance() == 1e-9);
        assert!(f32::tolerance() > 0.0);
    }

    #[test]
    fn lit_round_trips_simple_decimals() {
        let r: Ratio<i64> = Field::lit(0.5);
        assert_eq!(r, Ratio::new(1, 2));
        assert_eq!(<f64 as Field>::lit(0.25), 0.25);
    }
}
