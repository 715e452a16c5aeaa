use std::fmt::{Debug, Display};

use num_traits::{Float, FloatConst, FromPrimitive, NumAssign};
use serde::{de::DeserializeOwned, Serialize};

/// Floating-point scalar underlying all gate parameters and amplitudes.
///
/// Everything in this crate is generic over `Scalar` so the same passes run
/// in `f32` or `f64`. The acceptance tolerances quoted in the test suite
/// assume `f64`; `f32` works but meets correspondingly looser bounds.
pub trait Scalar:
    Float
    + FloatConst
    + FromPrimitive
    + NumAssign
    + Debug
    + Display
    + Serialize
    + DeserializeOwned
    + Send
    + Sync
    + 'static
{
    /// Tolerance used for structural validation (unitarity of user-supplied
    /// matrices, calibration identity checks). Scales with the precision so
    /// that `f32` inputs built from `f32` arithmetic still validate.
    fn validation_tol() -> Self {
        let floor = Self::from_f64(1e-10).unwrap();
        let eps_based = Self::epsilon() * Self::from_f64(1e4).unwrap();
        floor.max(eps_based)
    }
}

impl Scalar for f32 {}
impl Scalar for f64 {}

/// Converts an `f64` literal into the working precision.
#[inline]
pub fn lit<T: Scalar>(x: f64) -> T {
    T::from_f64(x).expect("f64 literal representable in scalar type")
}
