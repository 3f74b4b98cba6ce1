//! Charts, vector fields, and fixed-step flows.
//!
//! A chart is an open box in R^n. Vector fields are evaluator closures on
//! the chart, optionally with an analytic Jacobian; without one, Jacobians
//! fall back to central differences at a fixed small step.
//!
//! Flows integrate with classical fixed-step RK4. Every point at which the
//! field is about to be evaluated (the start, each stage argument, each
//! step result) must stay inside the chart shrunk by `domain_guard`, a
//! fraction of each interval's width; leaving it raises `LeftDomain`.

use std::sync::Arc;

use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};
use crate::fd::{self, FdConfig};
use crate::scalar::Real;

/// An open box in R^n.
#[derive(Clone, Debug, PartialEq)]
pub struct Chart<S: Real = f64> {
    bounds: Vec<(S, S)>,
}

impl<S: Real> Chart<S> {
    pub fn new(bounds: Vec<(S, S)>) -> Self {
        for (lo, hi) in &bounds {
            assert!(lo < hi, "chart intervals are nonempty");
        }
        Self { bounds }
    }

    /// The box `(-r, r)^n`.
    pub fn centered(dim: usize, r: f64) -> Self {
        Self::new(vec![(S::of(-r), S::of(r)); dim])
    }

    pub fn dim(&self) -> usize {
        self.bounds.len()
    }

    pub fn bounds(&self) -> &[(S, S)] {
        &self.bounds
    }

    pub fn contains(&self, x: &DVector<S>) -> bool {
        self.contains_guarded(x, S::zero())
    }

    /// Containment in the box with each interval shrunk on both sides by
    /// `margin` times its width.
    pub fn contains_guarded(&self, x: &DVector<S>, margin: S) -> bool {
        if x.len() != self.bounds.len() {
            return false;
        }
        for (xi, (lo, hi)) in x.iter().zip(&self.bounds) {
            let w = (*hi - *lo) * margin;
            if *xi <= *lo + w || *xi >= *hi - w {
                return false;
            }
        }
        true
    }
}

/// Configuration shared by flows and flow-based derivatives.
#[derive(Clone, Copy, Debug)]
pub struct FlowConfig<S: Real = f64> {
    /// Fixed RK4 step count per flow evaluation.
    pub rk4_steps: u32,
    /// Stencil used for derivatives of flow curves.
    pub fd: FdConfig<S>,
    /// Fraction of each chart interval's width kept as a safety margin.
    pub domain_guard: S,
}

impl<S: Real> Default for FlowConfig<S> {
    fn default() -> Self {
        Self { rk4_steps: 32, fd: FdConfig::default(), domain_guard: S::of(0.05) }
    }
}

type EvalFn<S> = dyn Fn(&DVector<S>) -> DVector<S> + Send + Sync;
type JacFn<S> = dyn Fn(&DVector<S>) -> DMatrix<S> + Send + Sync;

/// A vector field on a chart.
#[derive(Clone)]
pub struct VectorField<S: Real = f64> {
    chart: Chart<S>,
    eval: Arc<EvalFn<S>>,
    jacobian: Option<Arc<JacFn<S>>>,
}

impl<S: Real> std::fmt::Debug for VectorField<S> {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(
            f,
            "VectorField(dim {}, {} Jacobian)",
            self.chart.dim(),
            if self.jacobian.is_some() { "analytic" } else { "fd" }
        )
    }
}

impl<S: Real> VectorField<S> {
    pub fn new<F>(chart: Chart<S>, eval: F) -> Self
    where
        F: Fn(&DVector<S>) -> DVector<S> + Send + Sync + 'static,
    {
        Self { chart, eval: Arc::new(eval), jacobian: None }
    }

    pub fn with_jacobian<J>(mut self, jac: J) -> Self
    where
        J: Fn(&DVector<S>) -> DMatrix<S> + Send + Sync + 'static,
    {
        self.jacobian = Some(Arc::new(jac));
        self
    }

    pub fn zero(chart: Chart<S>) -> Self {
        let n = chart.dim();
        Self::new(chart, move |_| DVector::zeros(n)).with_jacobian(move |_| DMatrix::zeros(n, n))
    }

    pub fn constant(chart: Chart<S>, v: DVector<S>) -> Self {
        let n = chart.dim();
        assert_eq!(v.len(), n, "constant value matches the chart dimension");
        Self::new(chart, move |_| v.clone()).with_jacobian(move |_| DMatrix::zeros(n, n))
    }

    pub fn chart(&self) -> &Chart<S> {
        &self.chart
    }

    pub fn eval(&self, x: &DVector<S>) -> DVector<S> {
        (self.eval)(x)
    }

    /// Analytic Jacobian when available, else central differences.
    pub fn jacobian_at(&self, x: &DVector<S>) -> DMatrix<S> {
        match &self.jacobian {
            Some(j) => j(x),
            None => {
                let f = self.eval.clone();
                fd::jacobian(&move |y: &DVector<S>| f(y), x)
            }
        }
    }

    /// Pointwise linear combination `self + c * other` on the same chart.
    pub fn add_scaled(&self, other: &Self, c: S) -> Self {
        assert_eq!(self.chart, other.chart, "fields on the same chart");
        let (fa, fb) = (self.eval.clone(), other.eval.clone());
        let jac = match (self.jacobian.clone(), other.jacobian.clone()) {
            (Some(ja), Some(jb)) => Some(Arc::new(move |x: &DVector<S>| ja(x) + jb(x) * c) as Arc<JacFn<S>>),
            _ => None,
        };
        Self {
            chart: self.chart.clone(),
            eval: Arc::new(move |x| fa(x) + fb(x) * c),
            jacobian: jac,
        }
    }

    pub fn scale(&self, c: S) -> Self {
        let f = self.eval.clone();
        let jac = self
            .jacobian
            .clone()
            .map(|j| Arc::new(move |x: &DVector<S>| j(x) * c) as Arc<JacFn<S>>);
        Self { chart: self.chart.clone(), eval: Arc::new(move |x| f(x) * c), jacobian: jac }
    }
}

fn guard<S: Real>(chart: &Chart<S>, x: &DVector<S>, margin: S, t: S) -> Result<()> {
    if chart.contains_guarded(x, margin) {
        Ok(())
    } else {
        Err(Error::LeftDomain { t: t.as_f64() })
    }
}

/// Flow of `field` from `x0` for time `t` (possibly negative) with fixed
/// `cfg.rk4_steps` RK4 steps.
pub fn flow<S: Real>(
    field: &VectorField<S>,
    x0: &DVector<S>,
    t: S,
    cfg: &FlowConfig<S>,
) -> Result<DVector<S>> {
    let chart = field.chart();
    let m = cfg.domain_guard;
    guard(chart, x0, m, S::zero())?;
    let steps = cfg.rk4_steps.max(1);
    let h = t / S::of(steps as f64);
    let half = S::of(0.5);
    let sixth = S::of(1.0 / 6.0);
    let two = S::of(2.0);
    let mut x = x0.clone();
    let mut tcur = S::zero();
    for _ in 0..steps {
        let k1 = field.eval(&x);
        let a2 = &x + &k1 * (h * half);
        guard(chart, &a2, m, tcur)?;
        let k2 = field.eval(&a2);
        let a3 = &x + &k2 * (h * half);
        guard(chart, &a3, m, tcur)?;
        let k3 = field.eval(&a3);
        let a4 = &x + &k3 * h;
        guard(chart, &a4, m, tcur)?;
        let k4 = field.eval(&a4);
        x += (k1 + k2 * two + k3 * two + k4) * (h * sixth);
        tcur += h;
        guard(chart, &x, m, tcur)?;
    }
    Ok(x)
}

/// Joint flow of a base point and a list of tangent vectors: the vectors
/// follow the variational equation `v' = J(x) v` alongside `x' = X(x)`, all
/// integrated in one RK4 pass so every vector sees the same base
/// trajectory.
pub fn tangent_flow_multi<S: Real>(
    field: &VectorField<S>,
    x0: &DVector<S>,
    vs: &[DVector<S>],
    t: S,
    cfg: &FlowConfig<S>,
) -> Result<(DVector<S>, Vec<DVector<S>>)> {
    let chart = field.chart();
    let m = cfg.domain_guard;
    guard(chart, x0, m, S::zero())?;
    let steps = cfg.rk4_steps.max(1);
    let h = t / S::of(steps as f64);
    let half = S::of(0.5);
    let sixth = S::of(1.0 / 6.0);
    let two = S::of(2.0);
    let mut x = x0.clone();
    let mut v: Vec<DVector<S>> = vs.to_vec();
    let mut tcur = S::zero();
    for _ in 0..steps {
        let k1 = field.eval(&x);
        let j1 = field.jacobian_at(&x);
        let a2 = &x + &k1 * (h * half);
        guard(chart, &a2, m, tcur)?;
        let k2 = field.eval(&a2);
        let j2 = field.jacobian_at(&a2);
        let a3 = &x + &k2 * (h * half);
        guard(chart, &a3, m, tcur)?;
        let k3 = field.eval(&a3);
        let j3 = field.jacobian_at(&a3);
        let a4 = &x + &k3 * h;
        guard(chart, &a4, m, tcur)?;
        let k4 = field.eval(&a4);
        let j4 = field.jacobian_at(&a4);
        for vi in v.iter_mut() {
            let l1 = &j1 * &*vi;
            let l2 = &j2 * (&*vi + &l1 * (h * half));
            let l3 = &j3 * (&*vi + &l2 * (h * half));
            let l4 = &j4 * (&*vi + &l3 * h);
            *vi += (l1 + l2 * two + l3 * two + l4) * (h * sixth);
        }
        x += (k1 + k2 * two + k3 * two + k4) * (h * sixth);
        tcur += h;
        guard(chart, &x, m, tcur)?;
    }
    Ok((x, v))
}

/// Tangent (variational) flow of a single vector.
pub fn tangent_flow<S: Real>(
    field: &VectorField<S>,
    x0: &DVector<S>,
    v0: &DVector<S>,
    t: S,
    cfg: &FlowConfig<S>,
) -> Result<(DVector<S>, DVector<S>)> {
    let (x, mut v) = tangent_flow_multi(field, x0, std::slice::from_ref(v0), t, cfg)?;
    Ok((x, v.pop().expect("one vector in, one out")))
}

/// Lie bracket `[X, Y](x) = J_Y(x) X(x) - J_X(x) Y(x)`.
///
/// The result evaluates through the operands' Jacobians (analytic where
/// available) and carries no analytic Jacobian of its own.
pub fn lie_bracket<S: Real>(x_field: &VectorField<S>, y_field: &VectorField<S>) -> VectorField<S> {
    assert_eq!(x_field.chart(), y_field.chart(), "fields on the same chart");
    let xf = x_field.clone();
    let yf = y_field.clone();
    VectorField::new(x_field.chart().clone(), move |p| {
        yf.jacobian_at(p) * xf.eval(p) - xf.jacobian_at(p) * yf.eval(p)
    })
}

type MapFn<S> = dyn Fn(&DVector<S>) -> DVector<S> + Send + Sync;

/// A smooth map between charts, given by its evaluator.
#[derive(Clone)]
pub struct ChartMap<S: Real = f64> {
    source: Chart<S>,
    target: Chart<S>,
    map: Arc<MapFn<S>>,
}

impl<S: Real> ChartMap<S> {
    pub fn new<F>(source: Chart<S>, target: Chart<S>, map: F) -> Self
    where
        F: Fn(&DVector<S>) -> DVector<S> + Send + Sync + 'static,
    {
        Self { source, target, map: Arc::new(map) }
    }

    pub fn source(&self) -> &Chart<S> {
        &self.source
    }

    pub fn target(&self) -> &Chart<S> {
        &self.target
    }

    pub fn eval(&self, x: &DVector<S>) -> DVector<S> {
        (self.map)(x)
    }

    /// `other` after `self` (so `(self.then(other))(x) = other(self(x))`).
    pub fn then(&self, other: &ChartMap<S>) -> ChartMap<S> {
        let f = self.map.clone();
        let g = other.map.clone();
        ChartMap {
            source: self.source.clone(),
            target: other.target.clone(),
            map: Arc::new(move |x| g(&f(x))),
        }
    }

    /// Jacobian by central differences (maps carry no analytic Jacobian).
    pub fn jacobian_at(&self, x: &DVector<S>) -> DMatrix<S> {
        let f = self.map.clone();
        fd::jacobian(&move |y: &DVector<S>| f(y), x)
    }
}
