use std::fmt::Debug;

use num_traits::{FromPrimitive, Num, ToPrimitive};

/// Numeric type the probability and utility code is written against.
///
/// Implemented for `f32`, `f64` and `Ratio<i64>`. The rational backend is exact
/// but its numerators grow quickly under repeated normalisation, so it is only
/// suitable for short propensity sequences (a dozen steps or so).
pub trait Scalar:
    Num + Copy + PartialOrd + FromPrimitive + ToPrimitive + Debug + Send + Sync + 'static
{
    fn two() -> Self {
        Self::one() + Self::one()
    }

    fn half() -> Self {
        Self::one() / Self::two()
    }

    /// `num / den`, built from integers so rationals stay exact.
    fn ratio(num: u32, den: u32) -> Self {
        Self::from_u32(num).expect("u32 fits every scalar")
            / Self::from_u32(den).expect("u32 fits every scalar")
    }

    fn to_f64_lossy(self) -> f64 {
        self.to_f64().unwrap_or(f64::NAN)
    }

    fn min_of(self, other: Self) -> Self {
        if other < self {
            other
        } else {
            self
        }
    }

    fn max_of(self, other: Self) -> Self {
        if other > self {
            other
        } else {
            self
        }
    }
}

impl<T> Scalar for T where
    T: Num + Copy + PartialOrd + FromPrimitive + ToPrimitive + Debug + Send + Sync + 'static
{
}
