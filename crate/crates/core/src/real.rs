//! Scalar abstraction shared by every numeric module.

use std::fmt::{Debug, Display};

use nalgebra as na;
use num_traits as nt;

/// Floating point scalar the simulation can run on.
///
/// Bounds are taken from nalgebra's `RealField` (for vector and quaternion
/// math) plus the num-traits conversions. `num_traits::Float` is left out on
/// purpose: its method names collide with `RealField`'s and make every
/// `x.sqrt()` ambiguous.
pub trait Real:
    na::RealField + Copy + nt::FromPrimitive + nt::ToPrimitive + Debug + Display + Send + Sync + 'static
{
    /// Converts an `f64` literal. Panics only if the target type cannot
    /// represent a finite `f64`, which never happens for `f32`/`f64`.
    #[inline(always)]
    fn lit(x: f64) -> Self {
        <Self as nt::FromPrimitive>::from_f64(x).expect("scalar conversion from f64")
    }

    #[inline(always)]
    fn count(n: usize) -> Self {
        <Self as nt::FromPrimitive>::from_usize(n).expect("scalar conversion from usize")
    }

    #[inline(always)]
    fn as_f64(self) -> f64 {
        <Self as nt::ToPrimitive>::to_f64(&self).expect("scalar conversion to f64")
    }

    /// Largest integer not greater than `self`, as `i64`.
    #[inline(always)]
    fn floor_i64(self) -> i64 {
        <Self as nt::ToPrimitive>::to_f64(&self.floor()).map_or(i64::MIN, |v| v as i64)
    }

    fn is_finite_value(self) -> bool {
        self.as_f64().is_finite()
    }
}

impl Real for f32 {}
impl Real for f64 {}
