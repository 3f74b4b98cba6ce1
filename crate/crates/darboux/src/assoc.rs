//! Associated bundles in the identity frame: G-spaces, equivariant fiber
//! forms, sections, and bundle maps.
//!
//! With the principal bundle trivialized as `U x G`, a point of the
//! associated bundle `P x_G N` is written through its identity-frame
//! representative: the pair `(x, y)` stands for `[(x, e), y]`. Bundle maps
//! and sections are stored as evaluators of exactly these representatives.
//!
//! A `GSpace` is a concrete fiber space `N` embedded in `R^m`: a linear
//! G-module, the group itself under conjugation (matrices vectorized
//! row-major), the unit sphere in R^3 under rotations, or a product of two
//! of these. Each supplies the action, the tangent projection at a point,
//! and a derivative of curves that projects finite-difference noise out of
//! the tangent space.

use std::sync::Arc;

use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};
use crate::fd::FdConfig;
use crate::group::{AlgebraElement, GroupElement, LieGroup, Representation};
use crate::natural::{FiberData, FiberPoint, NaturalBundleKind};
use crate::principal::{fiber_distance, InvariantVectorField, PrincipalPoint};
use crate::rng::SplitMix64;
use crate::scalar::Real;
use crate::{chart::Chart, tol};

/// Row-major vectorization of a square matrix.
pub fn vec_matrix<S: Real>(m: &DMatrix<S>) -> DVector<S> {
    DVector::from_iterator(m.nrows() * m.ncols(), m.transpose().iter().copied())
}

/// Inverse of [`vec_matrix`] for an n x n matrix.
pub fn unvec_matrix<S: Real>(v: &DVector<S>, n: usize) -> DMatrix<S> {
    DMatrix::from_row_slice(n, n, v.as_slice())
}

#[derive(Clone, Debug)]
enum GSpaceKind<S: Real> {
    Module(Representation<S>),
    Conjugation(LieGroup<S>),
    Sphere2(LieGroup<S>),
    Product(Box<GSpace<S>>, Box<GSpace<S>>),
}

/// A concrete fiber space `N` with its G-action, embedded in `R^m`.
#[derive(Clone, Debug)]
pub struct GSpace<S: Real = f64> {
    kind: GSpaceKind<S>,
}

impl<S: Real> GSpace<S> {
    /// A linear G-module.
    pub fn module(rep: Representation<S>) -> Self {
        Self { kind: GSpaceKind::Module(rep) }
    }

    /// The group itself with the conjugation action, vectorized row-major.
    pub fn conjugation(group: &LieGroup<S>) -> Self {
        Self { kind: GSpaceKind::Conjugation(group.clone()) }
    }

    /// The unit sphere in R^3 under the rotation action.
    pub fn sphere2(group: &LieGroup<S>) -> Self {
        assert_eq!(
            group.ambient_dim(),
            3,
            "the sphere fiber expects a group acting on R^3"
        );
        Self { kind: GSpaceKind::Sphere2(group.clone()) }
    }

    /// Product of two fiber spaces over the same group, with concatenated
    /// coordinates.
    pub fn product(a: GSpace<S>, b: GSpace<S>) -> Self {
        assert_eq!(a.group(), b.group(), "product factors share the group");
        Self { kind: GSpaceKind::Product(Box::new(a), Box::new(b)) }
    }

    pub fn group(&self) -> &LieGroup<S> {
        match &self.kind {
            GSpaceKind::Module(rep) => rep.group(),
            GSpaceKind::Conjugation(g) | GSpaceKind::Sphere2(g) => g,
            GSpaceKind::Product(a, _) => a.group(),
        }
    }

    pub fn ambient_dim(&self) -> usize {
        match &self.kind {
            GSpaceKind::Module(rep) => rep.dim(),
            GSpaceKind::Conjugation(g) => g.ambient_dim() * g.ambient_dim(),
            GSpaceKind::Sphere2(_) => 3,
            GSpaceKind::Product(a, b) => a.ambient_dim() + b.ambient_dim(),
        }
    }

    /// The module representation, when the space is one.
    pub fn module_rep(&self) -> Option<&Representation<S>> {
        match &self.kind {
            GSpaceKind::Module(rep) => Some(rep),
            _ => None,
        }
    }

    /// The group, when the space is the conjugation fiber.
    pub fn conjugation_group(&self) -> Option<&LieGroup<S>> {
        match &self.kind {
            GSpaceKind::Conjugation(g) => Some(g),
            _ => None,
        }
    }

    pub fn factors(&self) -> Option<(&GSpace<S>, &GSpace<S>)> {
        match &self.kind {
            GSpaceKind::Product(a, b) => Some((a, b)),
            _ => None,
        }
    }

    fn split<'a>(&self, y: &'a DVector<S>) -> (DVector<S>, DVector<S>, &'a ()) {
        let (a, b) = self.factors().expect("product space");
        let da = a.ambient_dim();
        let db = b.ambient_dim();
        (y.rows(0, da).into_owned(), y.rows(da, db).into_owned(), &())
    }

    pub fn contains(&self, y: &DVector<S>) -> bool {
        if y.len() != self.ambient_dim() {
            return false;
        }
        match &self.kind {
            GSpaceKind::Module(_) => true,
            GSpaceKind::Conjugation(g) => g.element(unvec_matrix(y, g.ambient_dim())).is_ok(),
            GSpaceKind::Sphere2(_) => {
                (y.norm() - S::one()).abs() <= S::floored(tol::MEMBERSHIP)
            }
            GSpaceKind::Product(a, b) => {
                let (ya, yb, _) = self.split(y);
                a.contains(&ya) && b.contains(&yb)
            }
        }
    }

    /// The group action on fiber points.
    pub fn act(&self, g: &GroupElement<S>, y: &DVector<S>) -> DVector<S> {
        match &self.kind {
            GSpaceKind::Module(rep) => rep.apply(g, y),
            GSpaceKind::Conjugation(grp) => {
                let n = grp.ambient_dim();
                let h = unvec_matrix(y, n);
                let gi = g.inverse();
                vec_matrix(&(g.matrix() * h * gi.matrix()))
            }
            GSpaceKind::Sphere2(_) => g.matrix() * y,
            GSpaceKind::Product(a, b) => {
                let (ya, yb, _) = self.split(y);
                let mut out = DVector::zeros(self.ambient_dim());
                out.rows_mut(0, a.ambient_dim()).copy_from(&a.act(g, &ya));
                out.rows_mut(a.ambient_dim(), b.ambient_dim()).copy_from(&b.act(g, &yb));
                out
            }
        }
    }

    /// Orthogonal-ish projection of an ambient vector onto the tangent
    /// space at `y`: the identity on modules, removal of the radial
    /// component on the sphere, left translation to the algebra and back
    /// on the conjugation fiber.
    pub fn tangent_project(&self, y: &DVector<S>, w: &DVector<S>) -> DVector<S> {
        match &self.kind {
            GSpaceKind::Module(_) => w.clone(),
            GSpaceKind::Conjugation(g) => {
                let n = g.ambient_dim();
                let h = unvec_matrix(y, n);
                let hi = h.clone().try_inverse().expect("fiber point is invertible");
                let (proj, _, _) = g.project_to_algebra(&(hi * unvec_matrix(w, n)));
                vec_matrix(&(h * proj))
            }
            GSpaceKind::Sphere2(_) => w - y * y.dot(w),
            GSpaceKind::Product(a, b) => {
                let (ya, yb, _) = self.split(y);
                let (wa, wb, _) = self.split(w);
                let mut out = DVector::zeros(self.ambient_dim());
                out.rows_mut(0, a.ambient_dim()).copy_from(&a.tangent_project(&ya, &wa));
                out.rows_mut(a.ambient_dim(), b.ambient_dim())
                    .copy_from(&b.tangent_project(&yb, &wb));
                out
            }
        }
    }

    /// Stencil derivative of a fiber curve at 0, projected onto the
    /// tangent space at the curve's starting point.
    pub fn curve_derivative<F: Fn(S) -> DVector<S>>(&self, c: F, fd: &FdConfig<S>) -> DVector<S> {
        let y0 = c(S::zero());
        let raw = fd.derivative(c);
        self.tangent_project(&y0, &raw)
    }

    /// As [`Self::curve_derivative`], for curves whose evaluation can fail.
    pub fn try_curve_derivative<F: Fn(S) -> Result<DVector<S>>>(
        &self,
        y0: &DVector<S>,
        c: F,
        fd: &FdConfig<S>,
    ) -> Result<DVector<S>> {
        let raw = fd.try_derivative(c)?;
        Ok(self.tangent_project(y0, &raw))
    }

    /// A curve through `y` with initial velocity `v` (assumed tangent):
    /// straight lines on modules, exponential curves on the conjugation
    /// fiber, normalized chords on the sphere.
    pub fn curve_through(&self, y: &DVector<S>, v: &DVector<S>) -> Box<dyn Fn(S) -> DVector<S> + Send + Sync> {
        match &self.kind {
            GSpaceKind::Module(_) => {
                let (y, v) = (y.clone(), v.clone());
                Box::new(move |t| &y + &v * t)
            }
            GSpaceKind::Conjugation(g) => {
                let n = g.ambient_dim();
                let h = unvec_matrix(y, n);
                let hi = h.clone().try_inverse().expect("fiber point is invertible");
                let (b, _, _) = g.project_to_algebra(&(hi * unvec_matrix(v, n)));
                let g = g.clone();
                Box::new(move |t| {
                    let a = g.algebra(&b * t).expect("scaled algebra element");
                    vec_matrix(&(&h * g.exp(&a).matrix()))
                })
            }
            GSpaceKind::Sphere2(_) => {
                let (y, v) = (y.clone(), v.clone());
                Box::new(move |t| {
                    let p = &y + &v * t;
                    &p / p.norm()
                })
            }
            GSpaceKind::Product(a, b) => {
                let (ya, yb, _) = self.split(y);
                let (va, vb, _) = self.split(v);
                let ca = a.curve_through(&ya, &va);
                let cb = b.curve_through(&yb, &vb);
                let (da, db) = (a.ambient_dim(), b.ambient_dim());
                Box::new(move |t| {
                    let mut out = DVector::zeros(da + db);
                    out.rows_mut(0, da).copy_from(&ca(t));
                    out.rows_mut(da, db).copy_from(&cb(t));
                    out
                })
            }
        }
    }

    /// Deterministic sample point, for registration spot checks.
    pub fn sample(&self, rng: &mut SplitMix64) -> DVector<S> {
        match &self.kind {
            GSpaceKind::Module(rep) => {
                DVector::from_fn(rep.dim(), |_, _| S::of(rng.uniform(-1.0, 1.0)))
            }
            GSpaceKind::Conjugation(g) => {
                let coords = DVector::from_fn(g.dim(), |_, _| S::of(rng.uniform(-0.8, 0.8)));
                vec_matrix(g.exp(&g.algebra_from_coords(&coords)).matrix())
            }
            GSpaceKind::Sphere2(_) => {
                loop {
                    let v = DVector::from_fn(3, |_, _| S::of(rng.uniform(-1.0, 1.0)));
                    let n = v.norm();
                    if n > S::of(0.1) {
                        return v / n;
                    }
                }
            }
            GSpaceKind::Product(a, b) => {
                let va = a.sample(rng);
                let vb = b.sample(rng);
                let mut out = DVector::zeros(self.ambient_dim());
                out.rows_mut(0, a.ambient_dim()).copy_from(&va);
                out.rows_mut(a.ambient_dim(), b.ambient_dim()).copy_from(&vb);
                out
            }
        }
    }
}

type FormFn<S> = dyn Fn(&DVector<S>, &DVector<S>) -> DVector<S> + Send + Sync;

/// An equivariant fiber form: a module-valued linear form on the tangent
/// spaces of a G-space, satisfying `omega(Tg . w) = g . omega(w)`.
#[derive(Clone)]
pub struct EquivariantForm<S: Real = f64> {
    space: GSpace<S>,
    module: Representation<S>,
    eval: Arc<FormFn<S>>,
}

impl<S: Real> std::fmt::Debug for EquivariantForm<S> {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "EquivariantForm(dim {} -> {})", self.space.ambient_dim(), self.module.dim())
    }
}

impl<S: Real> EquivariantForm<S> {
    /// The canonical parallelization of a module: `omega_y(w) = w`.
    pub fn canonical(rep: &Representation<S>) -> Self {
        Self {
            space: GSpace::module(rep.clone()),
            module: rep.clone(),
            eval: Arc::new(|_, w| w.clone()),
        }
    }

    /// The Maurer-Cartan form on the conjugation fiber: left translation
    /// of tangents back to the algebra, in basis coordinates.
    pub fn maurer_cartan(group: &LieGroup<S>) -> Self {
        let g = group.clone();
        Self {
            space: GSpace::conjugation(group),
            module: Representation::adjoint(group),
            eval: Arc::new(move |y, w| {
                let n = g.ambient_dim();
                let h = unvec_matrix(y, n);
                let hi = h.try_inverse().expect("fiber point is invertible");
                let (_, coords, _) = g.project_to_algebra(&(hi * unvec_matrix(w, n)));
                coords
            }),
        }
    }

    /// The ambient inclusion of sphere tangents into R^3.
    pub fn ambient_sphere(group: &LieGroup<S>) -> Self {
        Self {
            space: GSpace::sphere2(group),
            module: Representation::standard(group),
            eval: Arc::new(|_, w| w.clone()),
        }
    }

    /// Product form on a product space, valued in the direct sum.
    pub fn product(a: &EquivariantForm<S>, b: &EquivariantForm<S>) -> Self {
        let space = GSpace::product(a.space.clone(), b.space.clone());
        let module = Representation::direct_sum(&a.module, &b.module);
        let (fa, fb) = (a.clone(), b.clone());
        Self {
            space,
            module,
            eval: Arc::new(move |y, w| {
                let da = fa.space.ambient_dim();
                let db = fb.space.ambient_dim();
                let ya = y.rows(0, da).into_owned();
                let yb = y.rows(da, db).into_owned();
                let wa = w.rows(0, da).into_owned();
                let wb = w.rows(da, db).into_owned();
                let va = (fa.eval)(&ya, &wa);
                let vb = (fb.eval)(&yb, &wb);
                let mut out = DVector::zeros(va.len() + vb.len());
                out.rows_mut(0, va.len()).copy_from(&va);
                out.rows_mut(va.len(), vb.len()).copy_from(&vb);
                out
            }),
        }
    }

    /// Pullback of `form` along an equivariant map: the tangent is pushed
    /// forward by differentiating the image of a curve with the given
    /// stencil.
    pub fn pullback(map: &EquivariantMap<S>, form: &EquivariantForm<S>, fd: FdConfig<S>) -> Self {
        let m = map.clone();
        let f = form.clone();
        Self {
            space: map.source().clone(),
            module: form.module.clone(),
            eval: Arc::new(move |y, w| {
                let c = m.source().curve_through(y, w);
                let img = |t: S| m.eval(&c(t));
                let pushed = m.target().curve_derivative(img, &fd);
                (f.eval)(&m.eval(y), &pushed)
            }),
        }
    }

    pub fn space(&self) -> &GSpace<S> {
        &self.space
    }

    pub fn module(&self) -> &Representation<S> {
        &self.module
    }

    /// Evaluate on a tangent vector at `y`. The vector is projected onto
    /// the tangent space first; a projection residual above
    /// [`tol::TANGENT_RESIDUAL`] (relative) is rejected.
    pub fn apply(&self, y: &DVector<S>, w: &DVector<S>) -> Result<DVector<S>> {
        let proj = self.space.tangent_project(y, w);
        let res = (w - &proj).norm() / (S::one() + w.norm());
        if res > S::floored(tol::TANGENT_RESIDUAL) {
            return Err(Error::NotTangent { residual: res.as_f64() });
        }
        Ok((self.eval)(y, &proj))
    }

    /// Evaluate on a vector already known to be tangent at `y`.
    pub fn apply_tangent(&self, y: &DVector<S>, w: &DVector<S>) -> DVector<S> {
        (self.eval)(y, w)
    }
}

type SectionFn<S> = dyn Fn(&DVector<S>) -> DVector<S> + Send + Sync;

/// A section in the identity frame: an evaluator `x -> N` on the chart.
#[derive(Clone)]
pub struct Section<S: Real = f64> {
    chart: Chart<S>,
    dim: usize,
    rep: Arc<SectionFn<S>>,
}

impl<S: Real> std::fmt::Debug for Section<S> {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "Section(dim {} on chart dim {})", self.dim, self.chart.dim())
    }
}

impl<S: Real> Section<S> {
    pub fn new<F>(chart: Chart<S>, dim: usize, rep: F) -> Self
    where
        F: Fn(&DVector<S>) -> DVector<S> + Send + Sync + 'static,
    {
        Self { chart, dim, rep: Arc::new(rep) }
    }

    pub fn chart(&self) -> &Chart<S> {
        &self.chart
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn eval(&self, x: &DVector<S>) -> DVector<S> {
        (self.rep)(x)
    }
}

/// A purely vertical right-invariant field generated by an algebra-valued
/// section (given in basis coordinates).
pub fn vertical_from_section<S: Real>(
    a: &Section<S>,
    group: &LieGroup<S>,
) -> InvariantVectorField<S> {
    assert_eq!(a.dim(), group.dim(), "section is algebra-valued");
    let sec = a.clone();
    let g = group.clone();
    InvariantVectorField::vertical(a.chart().clone(), move |x| g.algebra_from_coords(&sec.eval(x)))
}

type BundleMapFn<S> = dyn Fn(&FiberPoint<S>) -> DVector<S> + Send + Sync;

/// A fiber-bundle map from a natural bundle into an associated bundle,
/// stored through its identity-frame representative.
#[derive(Clone)]
pub struct BundleMap<S: Real = f64> {
    source: NaturalBundleKind,
    target: GSpace<S>,
    linear: bool,
    rep: Arc<BundleMapFn<S>>,
}

impl<S: Real> std::fmt::Debug for BundleMap<S> {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "BundleMap({} -> dim {})", self.source, self.target.ambient_dim())
    }
}

impl<S: Real> BundleMap<S> {
    /// From a representative that handles its own fiber data (including
    /// formal sums, if the source kind carries them).
    pub fn new<F>(source: NaturalBundleKind, target: GSpace<S>, linear: bool, rep: F) -> Self
    where
        F: Fn(&FiberPoint<S>) -> DVector<S> + Send + Sync + 'static,
    {
        Self { source, target, linear, rep: Arc::new(rep) }
    }

    /// A fiberwise-linear map given on single decomposable terms; formal
    /// sums are expanded by linearity before evaluation.
    pub fn linear_on_decomposables<F>(
        source: NaturalBundleKind,
        target: GSpace<S>,
        rep: F,
    ) -> Self
    where
        F: Fn(&FiberPoint<S>) -> DVector<S> + Send + Sync + 'static,
    {
        let dim_hint = target.ambient_dim();
        let f = Arc::new(rep);
        let g = f.clone();
        Self {
            source,
            target,
            linear: true,
            rep: Arc::new(move |y: &FiberPoint<S>| match &y.data {
                FiberData::ExtPower { k, terms } => {
                    let mut out = DVector::zeros(dim_hint);
                    for (c, vs) in terms {
                        let single = FiberPoint {
                            x: y.x.clone(),
                            data: FiberData::ExtPower { k: *k, terms: vec![(S::one(), vs.clone())] },
                        };
                        out += g(&single) * *c;
                    }
                    out
                }
                FiberData::TensorSquare(terms) => {
                    let mut out = DVector::zeros(dim_hint);
                    for (c, u, v) in terms {
                        let single = FiberPoint {
                            x: y.x.clone(),
                            data: FiberData::TensorSquare(vec![(S::one(), u.clone(), v.clone())]),
                        };
                        out += g(&single) * *c;
                    }
                    out
                }
                _ => g(y),
            }),
        }
    }

    /// A section viewed as a bundle map from the base.
    pub fn from_section(sec: &Section<S>, target: GSpace<S>) -> Self {
        assert_eq!(sec.dim(), target.ambient_dim(), "section values live in the fiber space");
        let s = sec.clone();
        Self::new(NaturalBundleKind::Base, target, false, move |y| s.eval(&y.x))
    }

    pub fn source(&self) -> &NaturalBundleKind {
        &self.source
    }

    pub fn target(&self) -> &GSpace<S> {
        &self.target
    }

    pub fn linear(&self) -> bool {
        self.linear
    }

    /// Identity-frame value at a fiber point of the source kind.
    pub fn eval(&self, y: &FiberPoint<S>) -> Result<DVector<S>> {
        let y = y.coerce(&self.source)?;
        Ok((self.rep)(&y))
    }

    /// Pointwise inverse of a conjugation-valued map.
    pub fn conj_inverse(&self) -> Self {
        let group = self.target.conjugation_group().expect("conjugation-valued map").clone();
        let f = self.rep.clone();
        let n = group.ambient_dim();
        Self {
            source: self.source.clone(),
            target: self.target.clone(),
            linear: false,
            rep: Arc::new(move |y| {
                let h = unvec_matrix(&f(y), n);
                vec_matrix(&h.try_inverse().expect("fiber value is invertible"))
            }),
        }
    }

    /// Pointwise product of two conjugation-valued maps with the same
    /// source.
    pub fn conj_product(&self, other: &Self) -> Self {
        let group = self.target.conjugation_group().expect("conjugation-valued map").clone();
        assert!(other.target.conjugation_group().is_some(), "conjugation-valued map");
        assert!(self.source.matches(other.source()), "maps share the source kind");
        let n = group.ambient_dim();
        let (fa, fb) = (self.rep.clone(), other.rep.clone());
        Self {
            source: self.source.clone(),
            target: self.target.clone(),
            linear: false,
            rep: Arc::new(move |y| {
                vec_matrix(&(unvec_matrix(&fa(y), n) * unvec_matrix(&fb(y), n)))
            }),
        }
    }

    /// Pointwise sum of two maps into the same module target.
    pub fn add(&self, other: &Self) -> Self {
        assert!(self.source.matches(other.source()), "maps share the source kind");
        let (fa, fb) = (self.rep.clone(), other.rep.clone());
        Self {
            source: self.source.clone(),
            target: self.target.clone(),
            linear: self.linear && other.linear,
            rep: Arc::new(move |y| fa(y) + fb(y)),
        }
    }

    pub fn scale(&self, c: S) -> Self {
        let f = self.rep.clone();
        Self {
            source: self.source.clone(),
            target: self.target.clone(),
            linear: self.linear,
            rep: Arc::new(move |y| f(y) * c),
        }
    }
}

/// Division against the associated bundle: for `p = (x, g)` over the same
/// base point as the associated point `(zx, zy)` (identity frame), returns
/// the fiber representative `p \ [z] = g^-1 . zy`.
pub fn assoc_divide<S: Real>(
    p: &PrincipalPoint<S>,
    zx: &DVector<S>,
    zy: &DVector<S>,
    space: &GSpace<S>,
) -> Result<DVector<S>> {
    let d = fiber_distance(&p.x, zx);
    if d > S::floored(tol::FIBER_EQ) {
        return Err(Error::DifferentFibers { distance: d.as_f64() });
    }
    Ok(space.act(&p.g.inverse(), zy))
}

/// The bilinear pairing `b *_omega z`: the form evaluated on the orbit
/// derivative `d/dt|_0 exp(t b) . z`.
pub fn star_omega<S: Real>(
    b: &AlgebraElement<S>,
    z: &DVector<S>,
    form: &EquivariantForm<S>,
    fd: &FdConfig<S>,
) -> DVector<S> {
    let group = form.space().group().clone();
    let d = form.space().curve_derivative(
        |t| {
            let g = group.exp(&b.scale(t));
            form.space().act(&g, z)
        },
        fd,
    );
    form.apply_tangent(z, &d)
}

type EqMapFn<S> = dyn Fn(&DVector<S>) -> DVector<S> + Send + Sync;
type PhiFn<S> = dyn Fn(&DVector<S>) -> DMatrix<S> + Send + Sync;

/// An equivariant map of G-spaces `f : N -> N'`, optionally carrying the
/// fiberwise linear map `phi(z)` that intertwines a form on `N` with a
/// form on `N'` (the chain-rule datum).
#[derive(Clone)]
pub struct EquivariantMap<S: Real = f64> {
    source: GSpace<S>,
    target: GSpace<S>,
    map: Arc<EqMapFn<S>>,
    phi: Option<Arc<PhiFn<S>>>,
}

impl<S: Real> std::fmt::Debug for EquivariantMap<S> {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(
            f,
            "EquivariantMap(dim {} -> dim {}, {} phi)",
            self.source.ambient_dim(),
            self.target.ambient_dim(),
            if self.phi.is_some() { "with" } else { "no" }
        )
    }
}

impl<S: Real> EquivariantMap<S> {
    /// Register a map after a deterministic equivariance spot check:
    /// `f(g . y) = g . f(y)` on a few sampled pairs, within
    /// [`tol::EQUIVARIANCE_CHECK`] relative.
    pub fn new<F>(
        source: GSpace<S>,
        target: GSpace<S>,
        map: F,
        phi: Option<Arc<PhiFn<S>>>,
    ) -> Result<Self>
    where
        F: Fn(&DVector<S>) -> DVector<S> + Send + Sync + 'static,
    {
        assert_eq!(source.group(), target.group(), "spaces share the group");
        let this = Self { source, target, map: Arc::new(map), phi };
        let group = this.source.group().clone();
        let mut rng = SplitMix64::new(0x5eed_cafe);
        let mut worst = S::zero();
        for _ in 0..8 {
            let y = this.source.sample(&mut rng);
            let coords = DVector::from_fn(group.dim(), |_, _| S::of(rng.uniform(-0.9, 0.9)));
            let g = group.exp(&group.algebra_from_coords(&coords));
            let lhs = this.eval(&this.source.act(&g, &y));
            let rhs = this.target.act(&g, &this.eval(&y));
            let err = (&lhs - &rhs).amax() / (S::one() + rhs.amax());
            if err > worst {
                worst = err;
            }
        }
        if worst > S::floored(tol::EQUIVARIANCE_CHECK) {
            return Err(Error::NotEquivariant { error: worst.as_f64() });
        }
        Ok(this)
    }

    pub fn source(&self) -> &GSpace<S> {
        &self.source
    }

    pub fn target(&self) -> &GSpace<S> {
        &self.target
    }

    pub fn eval(&self, y: &DVector<S>) -> DVector<S> {
        (self.map)(y)
    }

    /// The chain-rule matrix at `z`, when registered.
    pub fn phi_at(&self, z: &DVector<S>) -> Option<DMatrix<S>> {
        self.phi.as_ref().map(|p| p(z))
    }
}
