//! Scalar abstraction: all numeric code in this crate is generic over the
//! floating-point element type.

use ndarray::{LinalgScalar, ScalarOperand};
use num_traits::{Float, FromPrimitive, ToPrimitive};

/// Floating-point scalar usable throughout the crate: `f32` or `f64`.
///
/// Randomized quantities (feature maps, synthetic data) are always drawn as
/// `f64` from the seeded generator and then converted, so the same seed
/// produces the same model up to rounding regardless of the scalar type.
pub trait Scalar:
    Float
    + FromPrimitive
    + ToPrimitive
    + LinalgScalar
    + ScalarOperand
    + std::iter::Sum
    + std::fmt::Debug
    + std::fmt::Display
    + Send
    + Sync
    + 'static
{
    /// Convert from `f64`, the type all configuration and RNG output uses.
    fn cast(v: f64) -> Self {
        Self::from_f64(v).expect("f64 -> scalar conversion")
    }

    /// Convert to `f64` for reporting and serialization.
    fn as_f64(self) -> f64 {
        self.to_f64().expect("scalar -> f64 conversion")
    }
}

impl<T> Scalar for T where
    T: Float
        + FromPrimitive
        + ToPrimitive
        + LinalgScalar
        + ScalarOperand
        + std::iter::Sum
        + std::fmt::Debug
        + std::fmt::Display
        + Send
        + Sync
        + 'static
{
}
