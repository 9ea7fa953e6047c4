//! Scalar abstraction shared by every numerical routine in the crate.

use std::fmt::{Debug, Display};
use std::iter::Sum;

use num_traits::{Float, FloatConst, FromPrimitive, ToPrimitive};

/// Floating point type the laboratory can run on (`f32` or `f64`).
pub trait Scalar:
    Float
    + FloatConst
    + FromPrimitive
    + ToPrimitive
    + Sum
    + Debug
    + Display
    + Default
    + Send
    + Sync
    + 'static
{
    /// Converts an `f64` literal.
    #[inline]
    fn lit(x: f64) -> Self {
        Self::from_f64(x).expect("literal representable in scalar type")
    }

    #[inline]
    fn from_usize_lossy(n: usize) -> Self {
        Self::from_usize(n).expect("count representable in scalar type")
    }

    #[inline]
    fn as_f64(self) -> f64 {
        self.to_f64().unwrap_or(f64::NAN)
    }

    /// Smallest relative tolerance worth requesting from an iterative routine.
    #[inline]
    fn tol_floor() -> Self {
        Self::epsilon() * Self::lit(64.0)
    }

    /// Clamps a requested tolerance to what the type can deliver.
    #[inline]
    fn clamp_tol(tol: Self) -> Self {
        tol.max(Self::tol_floor())
    }

    fn gamma(self) -> Self;
}

impl Scalar for f32 {
    fn gamma(self) -> Self {
        libm::tgammaf(self)
    }
}

impl Scalar for f64 {
    fn gamma(self) -> Self {
        libm::tgamma(self)
    }
}

/// `true` when `x` is within `rel` (relative) of an integer; returns that integer.
pub(crate) fn near_integer<T: Scalar>(x: T, rel: T) -> Option<i64> {
    let r = x.round();
    if (x - r).abs() <= rel * x.abs().max(T::one()) {
        r.to_i64()
    } else {
        None
    }
}
