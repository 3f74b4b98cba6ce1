//! Scalar abstraction: all numerics in this crate are generic over the
//! floating-point type, with `f64` as the default instantiation.

use nalgebra::RealField;
use num_traits::{FromPrimitive, ToPrimitive};

/// Floating-point scalar the crate is generic over (`f32` or `f64`).
///
/// `RealField` supplies field arithmetic and the elementary functions;
/// `FromPrimitive`/`ToPrimitive` cover the conversions used for tolerance
/// constants and diagnostics.
pub trait Real: RealField + FromPrimitive + ToPrimitive + Copy {
    /// The `f64` literal `x` as `Self`.
    #[inline]
    fn of(x: f64) -> Self {
        Self::from_f64(x).expect("finite f64 literal")
    }

    /// `self` widened to `f64`, for error messages and reports.
    #[inline]
    fn as_f64(self) -> f64 {
        self.to_f64().expect("scalar widens to f64")
    }

    /// `tol` floored at 16 machine epsilons of `Self`.
    ///
    /// Iteration residuals are stated at `f64` scale; flooring keeps the
    /// same algorithms terminating when instantiated at lower precision.
    #[inline]
    fn floored(tol: f64) -> Self {
        let floor = Self::default_epsilon() * Self::of(16.0);
        let t = Self::of(tol);
        if t < floor {
            floor
        } else {
            t
        }
    }
}

impl<T: RealField + FromPrimitive + ToPrimitive + Copy> Real for T {}
