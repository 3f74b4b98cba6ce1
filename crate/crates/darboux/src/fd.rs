//! Central finite-difference stencils.
//!
//! Two fixed stencils are provided, second and fourth order:
//!
//! ```text
//! central-2:  f'(0) ~ (  f(e) - f(-e) ) / (2 e)
//! central-4:  f'(0) ~ ( -f(2e) + 8 f(e) - 8 f(-e) + f(-2e) ) / (12 e)
//! ```
//!
//! Curves are re-evaluated at every node; nothing is cached between calls,
//! so a caller that flows to each node always integrates from `t = 0`.

use nalgebra::{DMatrix, DVector};

use crate::error::Result;
use crate::scalar::Real;
use crate::tol;

/// Which central stencil to use.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum FdScheme {
    Central2,
    Central4,
}

/// A stencil together with its step.
#[derive(Clone, Copy, Debug)]
pub struct FdConfig<S: Real = f64> {
    pub scheme: FdScheme,
    pub eps: S,
}

impl<S: Real> Default for FdConfig<S> {
    fn default() -> Self {
        Self { scheme: FdScheme::Central4, eps: S::of(1e-3) }
    }
}

impl<S: Real> FdConfig<S> {
    pub fn new(scheme: FdScheme, eps: S) -> Self {
        Self { scheme, eps }
    }

    pub fn central2(eps: S) -> Self {
        Self::new(FdScheme::Central2, eps)
    }

    pub fn central4(eps: S) -> Self {
        Self::new(FdScheme::Central4, eps)
    }

    /// Sample nodes and quadrature weights so that `f'(0) ~ sum w_i f(t_i)`.
    pub fn nodes_weights(&self) -> Vec<(S, S)> {
        let e = self.eps;
        match self.scheme {
            FdScheme::Central2 => {
                let w = S::of(0.5) / e;
                vec![(e, w), (-e, -w)]
            }
            FdScheme::Central4 => {
                let w1 = S::of(8.0 / 12.0) / e;
                let w2 = S::of(1.0 / 12.0) / e;
                let two = S::of(2.0);
                vec![(two * e, -w2), (e, w1), (-e, -w1), (-two * e, w2)]
            }
        }
    }

    /// Derivative at 0 of a curve of column vectors.
    pub fn derivative<F: Fn(S) -> DVector<S>>(&self, f: F) -> DVector<S> {
        let mut acc: Option<DVector<S>> = None;
        for (t, w) in self.nodes_weights() {
            let v = f(t) * w;
            acc = Some(match acc {
                None => v,
                Some(a) => a + v,
            });
        }
        acc.expect("stencil has nodes")
    }

    /// Derivative at 0 of a curve of column vectors whose evaluation can
    /// fail (for instance because a flow leaves its chart).
    pub fn try_derivative<F: Fn(S) -> Result<DVector<S>>>(&self, f: F) -> Result<DVector<S>> {
        let mut acc: Option<DVector<S>> = None;
        for (t, w) in self.nodes_weights() {
            let v = f(t)? * w;
            acc = Some(match acc {
                None => v,
                Some(a) => a + v,
            });
        }
        Ok(acc.expect("stencil has nodes"))
    }

    /// Derivative at 0 of a curve of matrices.
    pub fn derivative_matrix<F: Fn(S) -> DMatrix<S>>(&self, f: F) -> DMatrix<S> {
        let mut acc: Option<DMatrix<S>> = None;
        for (t, w) in self.nodes_weights() {
            let m = f(t) * w;
            acc = Some(match acc {
                None => m,
                Some(a) => a + m,
            });
        }
        acc.expect("stencil has nodes")
    }
}

/// Jacobian of `f` at `x` by second-order central differences.
///
/// This is the fallback used when a vector field carries no analytic
/// Jacobian; the step is fixed at [`tol::JACOBIAN_EPS`] independently of
/// any stencil configuration.
pub fn jacobian<S: Real>(
    f: &dyn Fn(&DVector<S>) -> DVector<S>,
    x: &DVector<S>,
) -> DMatrix<S> {
    let eps = S::of(tol::JACOBIAN_EPS);
    let n = x.len();
    let half = S::of(0.5) / eps;
    let mut cols: Vec<DVector<S>> = Vec::with_capacity(n);
    for j in 0..n {
        let mut xp = x.clone();
        let mut xm = x.clone();
        xp[j] += eps;
        xm[j] -= eps;
        cols.push((f(&xp) - f(&xm)) * half);
    }
    DMatrix::from_columns(&cols)
}
