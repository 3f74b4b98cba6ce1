//! Numeric thresholds shared across the crate.
//!
//! All values are stated at `f64` scale; generic code floors them at a
//! multiple of the scalar epsilon (see [`crate::scalar::Real::floored`]) so
//! that `f32` instantiations stay usable at reduced precision.

/// Two base points are considered the same fiber when their max-norm
/// distance is below this. Base points compared here always come from
/// identical computations, so this is a pure roundoff allowance.
pub const FIBER_EQ: f64 = 1e-12;

/// Residual allowed when a matrix claimed to lie in the algebra is
/// projected onto the basis (relative to `1 + ||m||`).
pub const ALGEBRA_SPAN: f64 = 1e-10;

/// Residual allowed for algebra projections of finite-difference data,
/// which carry stencil truncation error on top of roundoff.
pub const FD_ALGEBRA_SPAN: f64 = 1e-6;

/// Residual allowed when a vector claimed tangent to a fiber space is
/// projected onto the tangent space (relative to `1 + ||v||`).
pub const TANGENT_RESIDUAL: f64 = 1e-6;

/// Tolerance of the equivariance spot check run when a fiber map is
/// registered (relative to `1 + ||f(y)||`).
pub const EQUIVARIANCE_CHECK: f64 = 1e-7;

/// Target residual of the Denman-Beavers square-root iteration inside the
/// matrix logarithm (relative to `1 + ||a||`).
pub const SQRT_RESIDUAL: f64 = 1e-13;

/// Default deviation allowed by the group membership predicates.
pub const MEMBERSHIP: f64 = 1e-8;

/// Determinant floor below which a matrix is rejected as a GL(n) element.
pub const DET_FLOOR: f64 = 1e-10;

/// Step used by finite-difference Jacobians of vector fields (second-order
/// central differences).
pub const JACOBIAN_EPS: f64 = 1e-5;

/// The Mercator series for `log(I + X)` is summed once square roots have
/// brought `||X||_F` below this radius.
pub const LOG_SERIES_RADIUS: f64 = 0.25;

/// The exponential halves its argument until the Frobenius norm is at or
/// below this bound before summing the series.
pub const EXP_SCALE_LIMIT: f64 = 0.5;

/// Number of terms summed by the scaled exponential series.
pub const EXP_SERIES_TERMS: usize = 18;

/// Iteration cap of the Denman-Beavers square root.
pub const SQRT_MAX_ITERS: usize = 20;
