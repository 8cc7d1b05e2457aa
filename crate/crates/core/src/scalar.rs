//! Scalar abstractions.
//!
//! The coefficient recurrence and polynomial arithmetic only need ring
//! operations plus an absolute value, so they are written against [`Scalar`]
//! and run unchanged on `f32`, `f64` and exact rationals. Anything that needs
//! square roots, transcendental functions or complex roots requires [`Real`].

use std::fmt::{Debug, Display};

use num_bigint::BigInt;
use num_rational::Ratio;
use num_traits::{Float, FloatConst, FromPrimitive, Num, Signed, ToPrimitive};

/// A ring element with an absolute value.
pub trait Scalar: Clone + PartialOrd + Debug + Num {
    fn magnitude(&self) -> Self;

    /// Exact types are always finite.
    fn is_finite_value(&self) -> bool {
        true
    }
}

impl Scalar for f32 {
    fn magnitude(&self) -> Self {
        self.abs()
    }
    fn is_finite_value(&self) -> bool {
        self.is_finite()
    }
}

impl Scalar for f64 {
    fn magnitude(&self) -> Self {
        self.abs()
    }
    fn is_finite_value(&self) -> bool {
        self.is_finite()
    }
}

impl Scalar for Ratio<i64> {
    fn magnitude(&self) -> Self {
        Signed::abs(self)
    }
}

impl Scalar for Ratio<i128> {
    fn magnitude(&self) -> Self {
        Signed::abs(self)
    }
}

impl Scalar for Ratio<BigInt> {
    fn magnitude(&self) -> Self {
        Signed::abs(self)
    }
}

/// floating point: f32 or f64
pub trait Real:
    Scalar + Float + FloatConst + FromPrimitive + ToPrimitive + Display + Send + Sync + 'static
{
    /// Converts an `f64` literal. Every finite `f64` is representable (possibly
    /// rounded) in both supported float types.
    #[inline]
    fn lit(v: f64) -> Self {
        <Self as FromPrimitive>::from_f64(v).expect("f64 literal representable")
    }

    #[inline]
    fn to_f64_lossy(self) -> f64 {
        ToPrimitive::to_f64(&self).unwrap_or(f64::NAN)
    }
}

impl Real for f32 {}
impl Real for f64 {}
