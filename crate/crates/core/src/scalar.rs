//! Scalar abstraction shared by every numerical routine in the crate.

use std::fmt::{Debug, Display};

use num_traits::{Float, FloatConst, FromPrimitive, ToPrimitive};
use rustfft::FftNum;

/// Real floating-point scalar: `f32` or `f64`.
///
/// Everything in the crate is written against this trait; the concrete
/// `f64` aliases at the crate root are what the CLI and the acceptance
/// suite use.
pub trait Real:
    Float + FloatConst + FromPrimitive + ToPrimitive + FftNum + Debug + Display + Default + Send + Sync
{
    /// Converts an `f64` literal into `Self`.
    #[inline]
    fn lit(x: f64) -> Self {
        Self::from_f64(x).expect("f64 literal representable")
    }

    #[inline]
    fn from_usize_exact(n: usize) -> Self {
        Self::from_usize(n).expect("usize representable")
    }

    #[inline]
    fn to_f64_lossy(self) -> f64 {
        self.to_f64().unwrap_or(f64::NAN)
    }
}

impl Real for f32 {}
impl Real for f64 {}

/// Relative difference `|a - b| / |b|`, falling back to the absolute
/// difference when `b == 0`.
pub fn rel_diff<T: Real>(a: T, b: T) -> T {
    let d = (a - b).abs();
    if b == T::zero() {
        d
    } else {
        d / b.abs()
    }
}
