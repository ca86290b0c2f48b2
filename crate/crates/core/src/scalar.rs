//! Scalar abstraction for the numeric pipeline.

use std::fmt::{Debug, Display};
use std::iter::Sum;

use num_traits::{Float, FromPrimitive, ToPrimitive};

/// Floating-point scalar the signal and model math is generic over.
///
/// Implemented for `f32` and `f64`. `f64` is the default type parameter on
/// every public container, so callers that do not care about precision never
/// see the generics.
pub trait Real:
    Float + FromPrimitive + ToPrimitive + Sum + Debug + Display + Send + Sync + 'static
{
}

impl Real for f32 {}
impl Real for f64 {}

/// Shorthand for converting an `f64` constant into the working scalar type.
#[inline]
pub fn real<R: Real>(x: f64) -> R {
    R::from_f64(x).expect("f64 constant representable in scalar type")
}

/// Converts a count into the working scalar type.
#[inline]
pub fn real_of<R: Real>(n: usize) -> R {
    R::from_usize(n).expect("usize representable in scalar type")
}
