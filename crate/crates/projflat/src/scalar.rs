use std::fmt::{Debug, Display};
use std::iter::Sum;

use num_traits::{Float, FloatConst};

/// Floating point scalar accepted by every routine in the crate (`f32`, `f64`).
pub trait Real: Float + FloatConst + Debug + Display + Sum + Send + Sync + 'static {}

impl<T> Real for T where T: Float + FloatConst + Debug + Display + Sum + Send + Sync + 'static {}

/// Converts an `f64` literal into the working scalar.
#[inline]
pub fn lit<T: Real>(v: f64) -> T {
    T::from(v).expect("literal representable in scalar type")
}

#[inline]
pub(crate) fn to_f64<T: Real>(v: T) -> f64 {
    v.to_f64().unwrap_or(f64::NAN)
}
