//! Scalar abstraction shared by the analytic and optimization code.
//!
//! Everything that is pure math is written against [`Real`], so the same code
//! runs in `f64` (the default everywhere) and `f32` (useful for checking how
//! much precision a formula actually needs). The simulator is `f64` only.

use std::fmt::{Debug, Display};
use std::iter::Sum;
use std::ops::{AddAssign, MulAssign, SubAssign};

use num_traits::{Float, FloatConst, FromPrimitive, ToPrimitive};

pub trait Real:
    Float
    + FloatConst
    + FromPrimitive
    + ToPrimitive
    + Debug
    + Display
    + Default
    + Sum
    + AddAssign
    + SubAssign
    + MulAssign
    + Send
    + Sync
    + 'static
{
    /// Converts an `f64` literal. Never fails for the float types we implement.
    #[inline]
    fn of(x: f64) -> Self {
        Self::from_f64(x).expect("f64 literal representable in scalar type")
    }

    #[inline]
    fn as_f64(self) -> f64 {
        self.to_f64().expect("scalar convertible to f64")
    }

    #[inline]
    fn two() -> Self {
        Self::one() + Self::one()
    }

    #[inline]
    fn half() -> Self {
        Self::of(0.5)
    }
}

impl<T> Real for T where
    T: Float
        + FloatConst
        + FromPrimitive
        + ToPrimitive
        + Debug
        + Display
        + Default
        + Sum
        + AddAssign
        + SubAssign
        + MulAssign
        + Send
        + Sync
        + 'static
{
}

/// `sinh(z) / z`, continuous through `z = 0`.
pub(crate) fn sinhc<T: Real>(z: T) -> T {
    if z.abs() < T::of(0.5) {
        // sum z^(2n) / (2n+1)!
        let z2 = z * z;
        let mut term = T::one();
        let mut acc = T::one();
        for n in 1..16 {
            let k = T::of((2 * n) as f64) * T::of((2 * n + 1) as f64);
            term = term * z2 / k;
            acc += term;
        }
        acc
    } else {
        z.sinh() / z
    }
}
