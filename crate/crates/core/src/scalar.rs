//! Scalar abstraction shared by every numeric routine in the crate.
//!
//! All geometry, section and energy code is written against [`Scalar`], which is
//! implemented for `f32` and `f64`. The finite-difference step sizes are carried
//! on the trait because the right balance between truncation and roundoff error
//! depends on the precision of the type.

use std::fmt::{Debug, Display};
use std::iter::Sum;

use num_traits::{Float, FloatConst, FromPrimitive, NumAssign, ToPrimitive};

/// Floating point type usable by the library: `f32` or `f64`.
pub trait Scalar:
    Float + FloatConst + FromPrimitive + ToPrimitive + NumAssign + Sum + Debug + Display + Send + Sync + 'static
{
    /// Default step for first-order central differences.
    const FIRST_STEP: f64;
    /// Default step for nested (second-order) central differences.
    const SECOND_STEP: f64;

    /// Converts an `f64` literal into `Self`.
    #[inline]
    fn lit(x: f64) -> Self {
        Self::from_f64(x).expect("f64 literal representable in scalar type")
    }

    /// Converts a count into `Self`.
    #[inline]
    fn from_count(n: usize) -> Self {
        Self::from_usize(n).expect("count representable in scalar type")
    }

    /// Lossy conversion to `f64`, used for reporting.
    #[inline]
    fn as_f64(self) -> f64 {
        self.to_f64().unwrap_or(f64::NAN)
    }

    /// A tolerance of `x`, widened to a few hundred ulps for low-precision types.
    #[inline]
    fn tolerance(x: f64) -> Self {
        let floor = Self::epsilon() * Self::lit(512.0);
        Self::lit(x).max(floor)
    }
}

impl Scalar for f32 {
    const FIRST_STEP: f64 = 5e-3;
    const SECOND_STEP: f64 = 3e-2;
}

impl Scalar for f64 {
    const FIRST_STEP: f64 = 1e-5;
    const SECOND_STEP: f64 = 1e-3;
}

/// Sums a slice in a fixed pairwise order.
///
/// The reduction tree depends only on the slice length, so results are
/// bitwise reproducible regardless of how the input values were produced.
pub fn pairwise_sum<T: Scalar>(values: &[T]) -> T {
    const LEAF: usize = 16;
    if values.len() <= LEAF {
        let mut acc = T::zero();
        for &v in values {
            acc += v;
        }
        return acc;
    }
    let mid = values.len() / 2;
    pairwise_sum(&values[..mid]) + pairwise_sum(&values[mid..])
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn pairwise_sum_matches_naive_on_integers() {
        let v: Vec<f64> = (1..=1000).map(|i| i as f64).collect();
        assert_eq!(pairwise_sum(&v), 500500.0);
        assert_eq!(pairwise_sum::<f64>(&[]), 0.0);
    }

    #[test]
    fn tolerance_widens_for_f32() {
        assert_eq!(<f64 as Scalar>::tolerance(1e-10), 1e-10);
        assert!(<f32 as Scalar>::tolerance(1e-10) > 1e-5);
    }
}
