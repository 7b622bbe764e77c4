//! Floating-point scalar abstraction for the numeric core.

use std::fmt::{Debug, Display};
use std::iter::Sum;

use num_traits::{Float, FromPrimitive, NumAssign};

/// Scalar type the numeric core is generic over (`f32` or `f64`).
///
/// Everything needed by the special functions and the Bernstein-form
/// evaluations: ordinary float arithmetic, casts from literals and
/// counters, and assign-ops for accumulation loops.
pub trait Real: Float + FromPrimitive + NumAssign + Sum + Debug + Display + 'static {}

impl<T> Real for T where T: Float + FromPrimitive + NumAssign + Sum + Debug + Display + 'static {}

/// Cast an `f64` literal into the working scalar type.
#[inline]
pub(crate) fn cast<T: Real>(v: f64) -> T {
    T::from(v).expect("literal not representable in scalar type")
}

/// Cast a count into the working scalar type.
#[inline]
pub(crate) fn cast_usize<T: Real>(n: usize) -> T {
    T::from_usize(n).expect("count not representable in scalar type")
}
