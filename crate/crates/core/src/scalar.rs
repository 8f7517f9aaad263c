//! Floating-point scalar abstraction shared by every numerical routine.

use std::fmt::{Debug, Display};
use std::iter::Sum;

use num_traits::{Float, FloatConst, FromPrimitive, NumAssign};

/// Real scalar the estimators are generic over: `f32` or `f64`.
pub trait Scalar:
    Float + FloatConst + FromPrimitive + NumAssign + Sum + Debug + Display + Default + Send + Sync + 'static
{
    /// Converts an `f64` literal into this scalar type.
    #[inline]
    fn of(x: f64) -> Self {
        // from_f64 never fails for f32/f64; overflow saturates to inf.
        Self::from_f64(x).unwrap_or_else(Self::nan)
    }

    /// Converts a count into this scalar type.
    #[inline]
    fn of_usize(n: usize) -> Self {
        Self::from_usize(n).unwrap_or_else(Self::nan)
    }

    #[inline]
    fn as_f64(self) -> f64 {
        self.to_f64().unwrap_or(f64::NAN)
    }

    /// Machine epsilon of the type.
    #[inline]
    fn eps() -> Self {
        Self::epsilon()
    }
}

impl Scalar for f32 {}
impl Scalar for f64 {}
