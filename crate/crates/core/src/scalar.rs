//! Floating-point scalar abstraction shared by every amplitude-carrying type.

use std::fmt::{Debug, Display};
use std::iter::Sum;

use num_complex::Complex;
use num_traits::{Float, FloatConst, FromPrimitive, ToPrimitive};
use serde::de::DeserializeOwned;
use serde::Serialize;

/// Real scalar used for amplitudes, phases and frequencies: `f32` or `f64`.
///
/// The documented tolerances (1e-12 on amplitudes) only hold for `f64`;
/// `f32` is supported for memory-bound sweeps where 1e-5 is acceptable.
pub trait Scalar:
    Float
    + FloatConst
    + FromPrimitive
    + ToPrimitive
    + Sum
    + Debug
    + Display
    + Default
    + Send
    + Sync
    + Serialize
    + DeserializeOwned
    + 'static
{
    /// Converts an `f64` literal. Never fails for `f32`/`f64`.
    #[inline]
    fn lit(x: f64) -> Self {
        Self::from_f64(x).expect("f64 literal representable")
    }

    #[inline]
    fn as_f64(self) -> f64 {
        self.to_f64().expect("scalar convertible to f64")
    }
}

impl Scalar for f32 {}
impl Scalar for f64 {}

/// Complex amplitude over a [`Scalar`].
pub type Amplitude<T> = Complex<T>;

/// `e^{iθ}`.
#[inline]
pub fn phase<T: Scalar>(theta: T) -> Complex<T> {
    Complex::new(theta.cos(), theta.sin())
}

/// Absolute tolerance for amplitude comparisons.
pub const AMPLITUDE_TOL: f64 = 1e-12;
/// Tolerance for user-supplied preparation coefficients.
pub const INPUT_TOL: f64 = 1e-9;
/// Tolerance for the on-demand unitarity check of dense operators.
pub const UNITARY_TOL: f64 = 1e-10;
