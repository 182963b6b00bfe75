//! Floating point abstraction used by every numeric routine in the crate.

use std::fmt::{Debug, Display};

use num_traits::{Float, FloatConst, FromPrimitive};

/// Real scalar: `f32` or `f64`.
pub trait Scalar:
    Float + FloatConst + FromPrimitive + Debug + Display + Default + Send + Sync + 'static
{
    /// Converts an `f64` literal. Total for the built-in float types.
    #[inline]
    fn of(v: f64) -> Self {
        Self::from_f64(v).expect("f64 literal representable")
    }

    /// Converts a count.
    #[inline]
    fn of_u64(v: u64) -> Self {
        Self::from_u64(v).expect("count representable")
    }

    #[inline]
    fn as_f64(self) -> f64 {
        self.to_f64().expect("scalar representable as f64")
    }

    /// Slack allowed when a probability leaves [0, 1] through round-off
    /// alone. Larger excursions are reported as errors.
    fn round_off() -> Self {
        Self::of(1e-12).max(Self::epsilon() * Self::of(256.0))
    }

    /// Default central-difference step for numerical derivatives.
    fn fd_step() -> Self {
        Self::of(1e-5).max(Self::epsilon().cbrt())
    }

    /// Smallest probability that numerical differentiation of `log P` accepts.
    fn underflow_floor() -> Self {
        Self::of(1e-300).max(Self::min_positive_value())
    }

    fn deg(degrees: f64) -> Self {
        Self::of(degrees.to_radians())
    }
}

impl Scalar for f32 {}
impl Scalar for f64 {}
