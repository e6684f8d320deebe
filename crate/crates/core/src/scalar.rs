//! Scalar abstraction shared by every geometric stage.
//!
//! Pixel-level work (rasters, thinning) is integer based. Everything from the
//! simplified graph upward is generic over [`Real`], so the same code runs in
//! `f32` or `f64`. The crate root exposes `f64` aliases for the common case.

use std::fmt::{Debug, Display};

use num_traits::{Float, FloatConst, FromPrimitive, ToPrimitive};
use serde::de::DeserializeOwned;
use serde::Serialize;

/// Floating point scalar: `f32` or `f64`.
pub trait Real:
    Float
    + FloatConst
    + FromPrimitive
    + ToPrimitive
    + Default
    + Debug
    + Display
    + Send
    + Sync
    + Serialize
    + DeserializeOwned
    + 'static
{
    /// Converts an `f64` literal. Infallible for the supported float types.
    fn lit(v: f64) -> Self {
        Self::from_f64(v).expect("f64 literal representable")
    }

    fn from_usize_lossy(v: usize) -> Self {
        Self::from_usize(v).expect("usize representable")
    }

    fn to_f64_lossy(self) -> f64 {
        self.to_f64().expect("finite float")
    }

    /// 360 in this scalar.
    fn full_turn() -> Self {
        Self::lit(360.0)
    }

    /// 180 in this scalar.
    fn half_turn() -> Self {
        Self::lit(180.0)
    }
}

impl Real for f32 {}
impl Real for f64 {}
