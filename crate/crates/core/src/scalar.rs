//! Scalar abstractions shared by the numeric modules.
//!
//! Fitting, kernels and metrics are written against [`Real`] (`f32`/`f64`).
//! Overlap ratios and hierarchy path weights are written against [`Weight`],
//! which additionally admits exact rationals so that path comparisons can be
//! made without rounding.

use std::fmt::{Debug, Display};
use std::iter::Sum;
use std::ops::Add;

use num_bigint::BigInt;
use num_rational::{BigRational, Ratio};
use num_traits::{Float, FromPrimitive, ToPrimitive, Zero};

/// Floating point: f32 or f64.
pub trait Real:
    Float + FromPrimitive + Debug + Display + Sum + Default + Send + Sync + 'static
{
    /// Lossy conversion from a count.
    fn from_count(n: usize) -> Self {
        Self::from_usize(n).unwrap_or_else(Self::infinity)
    }

    /// Lossy conversion from an `f64` literal.
    fn lit(v: f64) -> Self {
        Self::from_f64(v).unwrap_or_else(Self::nan)
    }
}

impl Real for f32 {}
impl Real for f64 {}

/// Overlap ratio / path weight scalar.
///
/// Values are built only from pixel-count ratios and sums of those ratios.
pub trait Weight: Clone + PartialOrd + Zero + Add<Output = Self> + Debug + Send + Sync {
    /// `num / den` in this representation. `den` must be non-zero.
    fn ratio(num: u64, den: u64) -> Self;

    /// Conversion from a user supplied threshold such as `0.9`.
    ///
    /// Exact types take the simplest rational within `f64` precision, so
    /// `0.9` becomes `9/10` rather than the binary expansion of the double.
    fn from_threshold(v: f64) -> Option<Self>;

    fn to_f64(&self) -> f64;
}

impl Weight for f64 {
    fn ratio(num: u64, den: u64) -> Self {
        num as f64 / den as f64
    }

    fn from_threshold(v: f64) -> Option<Self> {
        v.is_finite().then_some(v)
    }

    fn to_f64(&self) -> f64 {
        *self
    }
}

impl Weight for f32 {
    fn ratio(num: u64, den: u64) -> Self {
        (num as f64 / den as f64) as f32
    }

    fn from_threshold(v: f64) -> Option<Self> {
        v.is_finite().then_some(v as f32)
    }

    fn to_f64(&self) -> f64 {
        f64::from(*self)
    }
}

impl Weight for BigRational {
    fn ratio(num: u64, den: u64) -> Self {
        BigRational::new(BigInt::from(num), BigInt::from(den))
    }

    fn from_threshold(v: f64) -> Option<Self> {
        let approx = Ratio::<i64>::approximate_float(v)?;
        Some(BigRational::new(
            BigInt::from(*approx.numer()),
            BigInt::from(*approx.denom()),
        ))
    }

    fn to_f64(&self) -> f64 {
        ToPrimitive::to_f64(self).unwrap_or(f64::NAN)
    }
}
