use std::fmt::Debug;

use num_rational::BigRational;
use num_traits::{FromPrimitive, Num, One, Signed, ToPrimitive};

/// Number types used for gap probabilities and CDF values.
///
/// Exact rationals are used for everything derived from periodic sequences;
/// `f64` is used once irrational quantities (Golden Ratio gap laws) or
/// sampled trajectories are involved.
pub trait Scalar: Num + Clone + Debug + PartialOrd + FromPrimitive + ToPrimitive {
    /// Whether a sum of probabilities is one: exactly for rationals,
    /// within `1e-12` for floats.
    fn is_unit(&self) -> bool;

    fn is_negative_scalar(&self) -> bool {
        *self < Self::zero()
    }

    fn from_count(n: u64) -> Self {
        Self::from_u64(n).expect("u64 is representable")
    }

    fn as_f64(&self) -> f64 {
        self.to_f64().unwrap_or(f64::NAN)
    }
}

impl Scalar for BigRational {
    fn is_unit(&self) -> bool {
        self.is_one()
    }

    fn is_negative_scalar(&self) -> bool {
        self.is_negative()
    }
}

impl Scalar for f64 {
    fn is_unit(&self) -> bool {
        (self - 1.0).abs() <= 1e-12
    }
}
