//! Trivialized principal bundles `U x G`, right-invariant vector fields,
//! principal connections, and the division operator.
//!
//! A right-invariant field is determined by a base field `X` on the chart
//! and a vertical generator `A : U -> g`; at a bundle point `(x, g)` it
//! reads `(X(x), A(x) g)`, which is invariant under right translation.
//!
//! Division is the fiberwise difference: for `p = (x, g1)` and
//! `p' = (x, g2)` over the same base point, `p \ p' = g1^-1 g2`, the unique
//! group element with `p . (p \ p') = p'`.

use std::sync::Arc;

use nalgebra::{DMatrix, DVector};

use crate::chart::{Chart, FlowConfig, VectorField};
use crate::error::{Error, Result};
use crate::group::{AlgebraElement, GroupElement, LieGroup};
use crate::scalar::Real;
use crate::tol;

/// A point of the trivialized bundle: base coordinates plus a group
/// element.
#[derive(Clone, Debug)]
pub struct PrincipalPoint<S: Real = f64> {
    pub x: DVector<S>,
    pub g: GroupElement<S>,
}

impl<S: Real> PrincipalPoint<S> {
    pub fn new(x: DVector<S>, g: GroupElement<S>) -> Self {
        Self { x, g }
    }

    /// The identity-frame point over `x`.
    pub fn frame(group: &LieGroup<S>, x: DVector<S>) -> Self {
        Self { x, g: group.identity() }
    }

    /// Right translation `p . h`.
    pub fn translate(&self, h: &GroupElement<S>) -> Self {
        Self { x: self.x.clone(), g: self.g.mul(h) }
    }
}

/// Base distance used by the same-fiber checks.
pub(crate) fn fiber_distance<S: Real>(a: &DVector<S>, b: &DVector<S>) -> S {
    (a - b).amax()
}

/// Division operator: the unique `g` with `p1 . g = p2`; the points must
/// lie over the same base point.
pub fn divide<S: Real>(p1: &PrincipalPoint<S>, p2: &PrincipalPoint<S>) -> Result<GroupElement<S>> {
    let d = fiber_distance(&p1.x, &p2.x);
    if d > S::floored(tol::FIBER_EQ) {
        return Err(Error::DifferentFibers { distance: d.as_f64() });
    }
    Ok(p1.g.inverse().mul(&p2.g))
}

type VerticalFn<S> = dyn Fn(&DVector<S>) -> AlgebraElement<S> + Send + Sync;

/// A right-invariant vector field on `U x G`.
#[derive(Clone)]
pub struct InvariantVectorField<S: Real = f64> {
    base: VectorField<S>,
    vertical: Arc<VerticalFn<S>>,
}

impl<S: Real> std::fmt::Debug for InvariantVectorField<S> {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "InvariantVectorField(base dim {})", self.base.chart().dim())
    }
}

impl<S: Real> InvariantVectorField<S> {
    pub fn new<F>(base: VectorField<S>, vertical: F) -> Self
    where
        F: Fn(&DVector<S>) -> AlgebraElement<S> + Send + Sync + 'static,
    {
        Self { base, vertical: Arc::new(vertical) }
    }

    /// A purely vertical field with generator `a`.
    pub fn vertical<F>(chart: Chart<S>, a: F) -> Self
    where
        F: Fn(&DVector<S>) -> AlgebraElement<S> + Send + Sync + 'static,
    {
        Self::new(VectorField::zero(chart), a)
    }

    pub fn base(&self) -> &VectorField<S> {
        &self.base
    }

    /// The vertical generator at `x` (the algebra value `A(x)` such that
    /// the field at `(x, g)` is `(X(x), A(x) g)`).
    pub fn vertical_at(&self, x: &DVector<S>) -> AlgebraElement<S> {
        (self.vertical)(x)
    }

    /// Ambient value of the field at a bundle point.
    pub fn value_at(&self, p: &PrincipalPoint<S>) -> (DVector<S>, DMatrix<S>) {
        (self.base.eval(&p.x), self.vertical_at(&p.x).matrix() * p.g.matrix())
    }

    /// Pointwise linear combination `self + c * other` (same chart, same
    /// group).
    pub fn add_scaled(&self, other: &Self, c: S) -> Self {
        let base = self.base.add_scaled(other.base(), c);
        let (va, vb) = (self.vertical.clone(), other.vertical.clone());
        Self::new(base, move |x| va(x).add(&vb(x).scale(c)))
    }
}

/// Flow of a right-invariant field: jointly integrates `x' = X(x)` and the
/// matrix equation `g' = A(x) g` with fixed-step RK4. The base trajectory
/// is checked against the guarded chart; the final matrix is validated as
/// a group element.
pub fn flow_invariant<S: Real>(
    field: &InvariantVectorField<S>,
    p: &PrincipalPoint<S>,
    t: S,
    cfg: &FlowConfig<S>,
) -> Result<PrincipalPoint<S>> {
    let chart = field.base.chart();
    let m = cfg.domain_guard;
    let group = p.g.group().clone();
    let check = |x: &DVector<S>, tc: S| -> Result<()> {
        if chart.contains_guarded(x, m) {
            Ok(())
        } else {
            Err(Error::LeftDomain { t: tc.as_f64() })
        }
    };
    check(&p.x, S::zero())?;
    let steps = cfg.rk4_steps.max(1);
    let h = t / S::of(steps as f64);
    let half = S::of(0.5);
    let sixth = S::of(1.0 / 6.0);
    let two = S::of(2.0);
    let mut x = p.x.clone();
    let mut g = p.g.matrix().clone();
    let mut tcur = S::zero();
    for _ in 0..steps {
        let k1 = field.base.eval(&x);
        let m1 = field.vertical_at(&x).matrix() * &g;
        let a2 = &x + &k1 * (h * half);
        check(&a2, tcur)?;
        let k2 = field.base.eval(&a2);
        let m2 = field.vertical_at(&a2).matrix() * (&g + &m1 * (h * half));
        let a3 = &x + &k2 * (h * half);
        check(&a3, tcur)?;
        let k3 = field.base.eval(&a3);
        let m3 = field.vertical_at(&a3).matrix() * (&g + &m2 * (h * half));
        let a4 = &x + &k3 * h;
        check(&a4, tcur)?;
        let k4 = field.base.eval(&a4);
        let m4 = field.vertical_at(&a4).matrix() * (&g + &m3 * h);
        x += (k1 + k2 * two + k3 * two + k4) * (h * sixth);
        g += (m1 + m2 * two + m3 * two + m4) * (h * sixth);
        tcur += h;
        check(&x, tcur)?;
    }
    let g = group.element(g)?;
    Ok(PrincipalPoint { x, g })
}

type CoeffFn<S> = dyn Fn(&DVector<S>, &DVector<S>) -> AlgebraElement<S> + Send + Sync;

/// A principal connection form on the trivialized bundle, given by its
/// coefficient: the algebra-valued linear map `v -> omega_x(v)` on base
/// tangents.
#[derive(Clone)]
pub struct ConnectionForm<S: Real = f64> {
    chart: Chart<S>,
    group: LieGroup<S>,
    coeff: Arc<CoeffFn<S>>,
}

impl<S: Real> std::fmt::Debug for ConnectionForm<S> {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "ConnectionForm({:?}, dim {})", self.group.name(), self.chart.dim())
    }
}

impl<S: Real> ConnectionForm<S> {
    /// From a closure `(x, v) -> omega_x(v)`; linearity in `v` is the
    /// caller's contract.
    pub fn new<F>(chart: Chart<S>, group: LieGroup<S>, coeff: F) -> Self
    where
        F: Fn(&DVector<S>, &DVector<S>) -> AlgebraElement<S> + Send + Sync + 'static,
    {
        Self { chart, group, coeff: Arc::new(coeff) }
    }

    /// From one algebra-coordinate function per chart direction:
    /// `omega_x(v) = sum_i v_i a_i(x)`.
    pub fn from_coordinate_functions(
        chart: Chart<S>,
        group: LieGroup<S>,
        coords: Vec<Arc<dyn Fn(&DVector<S>) -> DVector<S> + Send + Sync>>,
    ) -> Self {
        assert_eq!(coords.len(), chart.dim(), "one coordinate function per chart direction");
        let g = group.clone();
        Self::new(chart, group, move |x, v| {
            let mut acc = g.zero_algebra();
            for (vi, f) in v.iter().zip(&coords) {
                acc = acc.add(&g.algebra_from_coords(&f(x)).scale(*vi));
            }
            acc
        })
    }

    /// The flat connection (zero coefficient).
    pub fn flat(chart: Chart<S>, group: LieGroup<S>) -> Self {
        let g = group.clone();
        Self::new(chart, group, move |_, _| g.zero_algebra())
    }

    pub fn chart(&self) -> &Chart<S> {
        &self.chart
    }

    pub fn group(&self) -> &LieGroup<S> {
        &self.group
    }

    pub fn apply(&self, x: &DVector<S>, v: &DVector<S>) -> AlgebraElement<S> {
        (self.coeff)(x, v)
    }
}

/// Horizontal lift of a base field through a connection: base part `X`,
/// vertical generator `-omega_x(X(x))`.
pub fn horizontal_lift<S: Real>(conn: &ConnectionForm<S>, x_field: &VectorField<S>) -> InvariantVectorField<S> {
    assert_eq!(conn.chart(), x_field.chart(), "connection and field share the chart");
    let c = conn.clone();
    let xf = x_field.clone();
    InvariantVectorField::new(x_field.clone(), move |x| {
        c.apply(x, &xf.eval(x)).scale(-S::one())
    })
}

/// The vertical difference of the horizontal lifts of `x_field` through
/// two connections, as an algebra-valued function of the base point:
/// `X^H(conn) - X^H(conn2) = X^a` with `a(x) = omega2_x(X(x)) - omega_x(X(x))`.
pub fn connection_difference<S: Real>(
    conn: &ConnectionForm<S>,
    conn2: &ConnectionForm<S>,
    x_field: &VectorField<S>,
) -> impl Fn(&DVector<S>) -> AlgebraElement<S> + Send + Sync {
    let (c1, c2, xf) = (conn.clone(), conn2.clone(), x_field.clone());
    move |x| {
        let v = xf.eval(x);
        c2.apply(x, &v).sub(&c1.apply(x, &v))
    }
}
