//! Scalar abstraction shared by the floating-point modules.

use std::fmt::{Debug, Display};

use num_traits::{Float, FloatConst, FromPrimitive};
use rustfft::FftNum;

/// Floating-point scalar usable by the propagators: `f32` or `f64`.
pub trait Real:
    Float + FloatConst + FromPrimitive + FftNum + Debug + Display + Send + Sync + 'static
{
    /// Converts an `f64` literal into `Self`.
    #[inline]
    fn lit(x: f64) -> Self {
        Self::from_f64(x).expect("f64 literal representable")
    }

    /// Widens `self` to `f64`.
    #[inline]
    fn as_f64(self) -> f64 {
        self.to_f64().expect("finite scalar")
    }
}

impl Real for f32 {}
impl Real for f64 {}
