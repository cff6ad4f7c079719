//! Scalar abstraction for probabilities and rewards.
//!
//! All quantitative code is generic over [`Real`]; the qualitative
//! algorithms only ever look at supports (strictly positive entries), so
//! the choice of scalar does not affect decisions, only reported values.

use std::fmt;
use std::iter::Sum;
use std::ops::{AddAssign, SubAssign};

use num_traits::{Float, FromPrimitive, ToPrimitive};

pub trait Real:
    Float
    + FromPrimitive
    + ToPrimitive
    + Sum<Self>
    + AddAssign
    + SubAssign
    + fmt::Debug
    + fmt::Display
    + Send
    + Sync
    + 'static
{
    fn of(v: f64) -> Self {
        <Self as FromPrimitive>::from_f64(v).expect("scalar conversion")
    }

    fn as_f64(self) -> f64 {
        self.to_f64().expect("scalar conversion")
    }

    /// Tolerance on a distribution summing to one.
    fn sum_tolerance() -> Self {
        Self::of(1e-9).max(Self::epsilon() * Self::of(64.0))
    }

    /// Entries below this are rejected as ambiguous (is it zero or a typo?).
    fn support_cutoff() -> Self {
        Self::of(1e-12).max(Self::epsilon() * Self::of(16.0))
    }

    /// "Reward exactly 1" is tested against this slack to absorb
    /// format round-trip noise.
    fn reward_one_slack() -> Self {
        Self::of(1e-12).max(Self::epsilon() * Self::of(16.0))
    }

    /// Acceptable residual of a stationary-distribution solve.
    fn residual_tolerance() -> Self {
        Self::of(1e-10).max(Self::epsilon() * Self::of(1024.0))
    }

    /// Strictness margin for quantitative threshold comparisons.
    fn threshold_margin() -> Self {
        Self::of(1e-9).max(Self::epsilon() * Self::of(64.0))
    }
}

impl<T> Real for T where
    T: Float
        + FromPrimitive
        + ToPrimitive
        + Sum<T>
        + AddAssign
        + SubAssign
        + fmt::Debug
        + fmt::Display
        + Send
        + Sync
        + 'static
{
}
