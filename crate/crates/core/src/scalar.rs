//! Scalar abstraction shared by every numeric routine in the crate.

use std::fmt::{Debug, Display};

use nalgebra::RealField;
use num_traits::{FromPrimitive, ToPrimitive};

/// Real floating-point scalar: `f32` or `f64`.
///
/// Everything numeric in this crate is written against this trait. Thresholds
/// are given as `f64` literals and converted with [`lit`].
pub trait Scalar:
    RealField + Copy + FromPrimitive + ToPrimitive + Display + Debug + Send + Sync + 'static
{
}

impl Scalar for f32 {}
impl Scalar for f64 {}

/// Converts an `f64` constant into the working scalar.
#[inline]
pub fn lit<T: Scalar>(x: f64) -> T {
    nalgebra::convert(x)
}

/// Lossy conversion to `f64` for reporting and diagnostics.
#[inline]
pub fn to_f64<T: Scalar>(x: T) -> f64 {
    x.to_f64().unwrap_or(f64::NAN)
}

/// Relative threshold `x`, raised to a small multiple of machine epsilon when
/// the scalar cannot resolve it.
#[inline]
pub fn tol<T: Scalar>(x: f64) -> T {
    lit::<T>(x).max(T::default_epsilon() * lit(64.0))
}
