//! Scalar abstraction: all numeric kernels are generic over [`Real`].
//!
//! The crate-level aliases instantiate everything at `f64`, which is what the
//! experiment presets use; `f32` is supported for callers that want it.

use std::fmt::{Debug, Display};

/// Floating-point scalar usable by the numeric kernels (`f32` or `f64`).
pub trait Real:
    num_traits::Float + num_traits::NumAssignOps + Debug + Display + Send + Sync + 'static
{
    /// Lossy conversion from `f64`; exact for `f64` itself.
    #[inline]
    fn from_f64(x: f64) -> Self {
        <Self as num_traits::NumCast>::from(x).expect("f64 conversion")
    }

    #[inline]
    fn from_usize(n: usize) -> Self {
        <Self as num_traits::NumCast>::from(n).expect("usize conversion")
    }

    #[inline]
    fn to_f64(self) -> f64 {
        num_traits::ToPrimitive::to_f64(&self).expect("to_f64")
    }

    #[inline]
    fn half() -> Self {
        Self::from_f64(0.5)
    }

    #[inline]
    fn two() -> Self {
        Self::from_f64(2.0)
    }
}

impl Real for f32 {}
impl Real for f64 {}
