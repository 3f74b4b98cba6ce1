//! Error type shared by the whole crate.

use thiserror::Error;

/// Failures surfaced by construction checks and numerical operations.
#[derive(Debug, Clone, Error)]
pub enum Error {
    /// The principal logarithm is only evaluated for `||g - I||_2 < 1`.
    #[error("matrix lies outside the logarithm branch: ||g - I||_2 = {norm:.3e} >= 1")]
    OutOfBranch { norm: f64 },

    /// Projection onto the algebra basis left too large a residual.
    #[error("projection onto the algebra basis leaves residual {residual:.3e} (tol {tol:.3e})")]
    ProjectionResidual { residual: f64, tol: f64 },

    /// A matrix failed the group membership predicate.
    #[error("matrix fails the group membership test (deviation {deviation:.3e})")]
    NotInGroup { deviation: f64 },

    /// A flow stepped outside the guarded chart domain.
    #[error("flow left the guarded chart domain near t = {t:.6e}")]
    LeftDomain { t: f64 },

    /// Two bundle points were expected over the same base point.
    #[error("points lie over different base points (distance {distance:.3e})")]
    DifferentFibers { distance: f64 },

    /// A vector failed the tangency check at a fiber-space point.
    #[error("vector is not tangent at the given point (residual {residual:.3e})")]
    NotTangent { residual: f64 },

    /// A fiber point (or map) of one bundle kind was fed where another was
    /// expected.
    #[error("fiber kind mismatch: expected {expected}, found {found}")]
    KindMismatch { expected: String, found: String },

    /// The operation is only defined for maps into a linear (module) fiber.
    #[error("operation requires a module target fiber")]
    TargetNotModule,

    /// A registered fiber map failed its equivariance spot check.
    #[error("map fails the equivariance spot check (error {error:.3e})")]
    NotEquivariant { error: f64 },

    /// Incompatible dimensions or charts.
    #[error("dimension mismatch: {context}")]
    Dimension { context: String },
}

pub type Result<T> = std::result::Result<T, Error>;
