//! The flow-based derivative of fiber-bundle maps, and its calculus.
//!
//! For a right-invariant field `X~` on the principal bundle, a bundle map
//! `h` from a natural bundle into an associated bundle `P x_G N`, and an
//! equivariant fiber form `omega` on `N`, the derivative at a fiber point
//! `y` is
//!
//! ```text
//! L_{X~} h (y) = omega( d/dt|_0  Phi_t(p) \ h(y_t) )
//! ```
//!
//! where `p` is a frame over the base point of `y`, `Phi_t` is the flow of
//! `X~`, `y_t` is the canonically lifted flow of the base part of `X~`
//! applied to `y`, and `\` is division against the associated bundle. The
//! value does not depend on the choice of frame; with the identity frame
//! the curve is `t -> g_t^{-1} . h(y_t)` in fiber coordinates.
//!
//! The derivative of a module-valued map is another module-valued map, so
//! the operation iterates; [`ModuleMap`] is the common currency. On top of
//! the stencil evaluator this module provides the closed forms for purely
//! vertical fields, the Leibniz-type combinations (products, tensor
//! products, postcomposition, wedges), the interior product, and the
//! exterior covariant derivative of module-valued alternating maps.

use std::sync::Arc;

use nalgebra::{DMatrix, DVector};

use crate::assoc::{star_omega, BundleMap, EquivariantForm, EquivariantMap, GSpace, Section};
use crate::chart::{FlowConfig, VectorField};
use crate::error::{Error, Result};
use crate::fd::FdConfig;
use crate::group::{GroupElement, Representation};
use crate::natural::{
    canonical_flow, eval_natural_map, FiberData, FiberPoint, NaturalBundleKind, NaturalImage,
    NaturalMap,
};
use crate::principal::{flow_invariant, ConnectionForm, InvariantVectorField, PrincipalPoint};
use crate::scalar::Real;

type FallibleFiberFn<S> = dyn Fn(&FiberPoint<S>) -> Result<DVector<S>> + Send + Sync;

/// A module-valued map on a natural bundle, in the identity frame. Unlike
/// [`BundleMap`], evaluation may fail (derivatives flow the base point, so
/// a value near the chart boundary can leave the domain).
#[derive(Clone)]
pub struct ModuleMap<S: Real = f64> {
    source: NaturalBundleKind,
    module: Representation<S>,
    eval: Arc<FallibleFiberFn<S>>,
}

impl<S: Real> std::fmt::Debug for ModuleMap<S> {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "ModuleMap({} -> dim {})", self.source, self.module.dim())
    }
}

impl<S: Real> ModuleMap<S> {
    pub fn new<F>(source: NaturalBundleKind, module: Representation<S>, eval: F) -> Self
    where
        F: Fn(&FiberPoint<S>) -> Result<DVector<S>> + Send + Sync + 'static,
    {
        Self { source, module, eval: Arc::new(eval) }
    }

    /// View a module-targeted [`BundleMap`] as a [`ModuleMap`].
    pub fn from_bundle(h: &BundleMap<S>) -> Result<Self> {
        let module = h.target().module_rep().ok_or(Error::TargetNotModule)?.clone();
        let hh = h.clone();
        Ok(Self::new(h.source().clone(), module, move |y| hh.eval(y)))
    }

    pub fn source(&self) -> &NaturalBundleKind {
        &self.source
    }

    pub fn module(&self) -> &Representation<S> {
        &self.module
    }

    pub fn eval(&self, y: &FiberPoint<S>) -> Result<DVector<S>> {
        let y = y.coerce(&self.source)?;
        (self.eval)(&y)
    }

    pub fn add(&self, other: &Self) -> Self {
        assert!(self.source.matches(other.source()), "maps share the source kind");
        assert_eq!(self.module.dim(), other.module.dim(), "maps share the module");
        let (fa, fb) = (self.clone(), other.clone());
        Self::new(self.source.clone(), self.module.clone(), move |y| {
            Ok(fa.eval(y)? + fb.eval(y)?)
        })
    }

    pub fn scale(&self, c: S) -> Self {
        let f = self.clone();
        Self::new(self.source.clone(), self.module.clone(), move |y| Ok(f.eval(y)? * c))
    }

    /// Concatenation into the direct sum, for maps with the same source.
    pub fn concat(a: &Self, b: &Self) -> Self {
        assert!(a.source.matches(b.source()), "maps share the source kind");
        let module = Representation::direct_sum(&a.module, &b.module);
        let (fa, fb) = (a.clone(), b.clone());
        Self::new(a.source.clone(), module, move |y| {
            let va = fa.eval(y)?;
            let vb = fb.eval(y)?;
            let mut out = DVector::zeros(va.len() + vb.len());
            out.rows_mut(0, va.len()).copy_from(&va);
            out.rows_mut(va.len(), vb.len()).copy_from(&vb);
            Ok(out)
        })
    }

    /// The tensor product on a pair source: `(y1, y2) -> f(y1) (x) g(y2)`,
    /// flattened row-major.
    pub fn tensor_pair(a: &Self, b: &Self) -> Self {
        let source = NaturalBundleKind::pair(a.source.clone(), b.source.clone());
        let module = Representation::tensor(&a.module, &b.module);
        let (fa, fb) = (a.clone(), b.clone());
        Self::new(source, module, move |y| {
            let (ya, yb) = split_pair(y)?;
            Ok(kron(&fa.eval(&ya)?, &fb.eval(&yb)?))
        })
    }
}

/// Row-major flattening of the outer product `a b^T`.
pub(crate) fn kron<S: Real>(a: &DVector<S>, b: &DVector<S>) -> DVector<S> {
    let mut out = DVector::zeros(a.len() * b.len());
    for i in 0..a.len() {
        for j in 0..b.len() {
            out[i * b.len() + j] = a[i] * b[j];
        }
    }
    out
}

/// Split a pair point into its two halves over the same base point.
pub fn split_pair<S: Real>(y: &FiberPoint<S>) -> Result<(FiberPoint<S>, FiberPoint<S>)> {
    match &y.data {
        FiberData::Pair(a, b) => Ok((
            FiberPoint { x: y.x.clone(), data: (**a).clone() },
            FiberPoint { x: y.x.clone(), data: (**b).clone() },
        )),
        _ => Err(Error::KindMismatch {
            expected: "pair".into(),
            found: y.kind().to_string(),
        }),
    }
}

/// Core stencil evaluator in an arbitrary frame `p = (x, g0)` over the
/// base point of `y`. Returns the identity-frame representative of the
/// derivative, which is frame-independent.
fn darboux_lie_frame_raw<S: Real>(
    eval: &FallibleFiberFn<S>,
    xi: &InvariantVectorField<S>,
    form: &EquivariantForm<S>,
    cfg: &FlowConfig<S>,
    y: &FiberPoint<S>,
    g0: &GroupElement<S>,
) -> Result<DVector<S>> {
    let space = form.space();
    let z0 = eval(y)?;
    let z0_frame = space.act(&g0.inverse(), &z0);
    let p0 = PrincipalPoint::new(y.x.clone(), g0.clone());
    let curve = |t: S| -> Result<DVector<S>> {
        let pt = flow_invariant(xi, &p0, t, cfg)?;
        let yt = canonical_flow(xi.base(), y, t, cfg)?;
        Ok(space.act(&pt.g.inverse(), &eval(&yt)?))
    };
    let d = space.try_curve_derivative(&z0_frame, curve, &cfg.fd)?;
    let w = form.apply_tangent(&z0_frame, &d);
    Ok(form.module().apply(g0, &w))
}

/// The derivative of `h` along `X~` at one fiber point, via the flow
/// stencil in the identity frame.
pub fn darboux_lie_at<S: Real>(
    h: &BundleMap<S>,
    xi: &InvariantVectorField<S>,
    form: &EquivariantForm<S>,
    cfg: &FlowConfig<S>,
    y: &FiberPoint<S>,
) -> Result<DVector<S>> {
    let hh = h.clone();
    let id = form.space().group().identity();
    darboux_lie_frame_raw(&move |p| hh.eval(p), xi, form, cfg, y, &id)
}

/// As [`darboux_lie_at`], computed in the frame `(x, g0)` instead of the
/// identity frame. The result is the identity-frame representative, so it
/// must agree with [`darboux_lie_at`] up to discretization error.
pub fn darboux_lie_at_frame<S: Real>(
    h: &BundleMap<S>,
    xi: &InvariantVectorField<S>,
    form: &EquivariantForm<S>,
    cfg: &FlowConfig<S>,
    y: &FiberPoint<S>,
    g0: &GroupElement<S>,
) -> Result<DVector<S>> {
    let hh = h.clone();
    darboux_lie_frame_raw(&move |p| hh.eval(p), xi, form, cfg, y, g0)
}

/// Product-rule split of the same derivative: the vertical part acts
/// through the orbit derivative of `exp(-t a)` at the frozen fiber value,
/// the horizontal part differentiates `h` along the lifted base flow with
/// the frame frozen. Useful as an independent cross-check of the joint
/// flow stencil.
pub fn darboux_lie_direct<S: Real>(
    h: &BundleMap<S>,
    xi: &InvariantVectorField<S>,
    form: &EquivariantForm<S>,
    cfg: &FlowConfig<S>,
    y: &FiberPoint<S>,
) -> Result<DVector<S>> {
    let space = form.space();
    let group = space.group().clone();
    let z0 = h.eval(y)?;
    let a = xi.vertical_at(&y.x);
    let vertical = space.curve_derivative(
        |t| space.act(&group.exp(&a.scale(-t)), &z0),
        &cfg.fd,
    );
    let horizontal = space.try_curve_derivative(
        &z0,
        |t| h.eval(&canonical_flow(xi.base(), y, t, cfg)?),
        &cfg.fd,
    )?;
    Ok(form.apply_tangent(&z0, &(vertical + horizontal)))
}

/// The derivative as a map: same source kind, valued in the form's module.
pub fn lie_map<S: Real>(
    h: &BundleMap<S>,
    xi: &InvariantVectorField<S>,
    form: &EquivariantForm<S>,
    cfg: &FlowConfig<S>,
) -> ModuleMap<S> {
    let (hh, xx, ff, cc) = (h.clone(), xi.clone(), form.clone(), *cfg);
    ModuleMap::new(h.source().clone(), form.module().clone(), move |y| {
        darboux_lie_at(&hh, &xx, &ff, &cc, y)
    })
}

/// The derivative of a module-valued map with its canonical fiber form.
/// This is the form in which the operation iterates.
pub fn lie_module_map<S: Real>(
    h: &ModuleMap<S>,
    xi: &InvariantVectorField<S>,
    cfg: &FlowConfig<S>,
) -> ModuleMap<S> {
    let form = EquivariantForm::canonical(h.module());
    let id = h.module().group().identity();
    let (hh, xx, cc) = (h.clone(), xi.clone(), *cfg);
    ModuleMap::new(h.source().clone(), h.module().clone(), move |y| {
        let f = hh.clone();
        darboux_lie_frame_raw(&move |p| f.eval(p), &xx, &form, &cc, y, &id)
    })
}

/// Closed form for a purely vertical field on a module-valued map:
/// `L_{a~} h (y) = -a(x) . h(y)` through the infinitesimal action.
pub fn vertical_lie_module<S: Real>(
    h: &BundleMap<S>,
    a: &Section<S>,
    fd: FdConfig<S>,
) -> Result<ModuleMap<S>> {
    let rep = h.target().module_rep().ok_or(Error::TargetNotModule)?.clone();
    let group = rep.group().clone();
    assert_eq!(a.dim(), group.dim(), "section is algebra-valued");
    let (hh, sec) = (h.clone(), a.clone());
    Ok(ModuleMap::new(h.source().clone(), rep.clone(), move |y| {
        let av = group.algebra_from_coords(&sec.eval(&y.x));
        Ok(-rep.algebra_action(&av, &hh.eval(y)?, &fd))
    }))
}

/// Closed form for a purely vertical field on a conjugation-valued map,
/// with the fiber Maurer-Cartan form:
/// `L_{a~} h (y) = a(x) - Ad_{h(y)^{-1}}(a(x))`, in basis coordinates.
pub fn vertical_lie_conjugation<S: Real>(
    h: &BundleMap<S>,
    a: &Section<S>,
) -> Result<ModuleMap<S>> {
    let group = h
        .target()
        .conjugation_group()
        .ok_or_else(|| Error::KindMismatch {
            expected: "conjugation-valued map".into(),
            found: "other target fiber".into(),
        })?
        .clone();
    assert_eq!(a.dim(), group.dim(), "section is algebra-valued");
    let n = group.ambient_dim();
    let (hh, sec, g2) = (h.clone(), a.clone(), group.clone());
    Ok(ModuleMap::new(h.source().clone(), Representation::adjoint(&group), move |y| {
        let av = g2.algebra_from_coords(&sec.eval(&y.x));
        let hv = crate::assoc::unvec_matrix(&hh.eval(y)?, n);
        let he = g2.element(hv).expect("fiber value lies in the group");
        let transported = g2.adjoint(&he.inverse(), &av);
        Ok(av.sub(&transported).coords().clone())
    }))
}

/// Closed form for a purely vertical field on a map into an arbitrary
/// fiber space with form `omega`: `L_{a~} h (y) = -(a(x) *_omega h(y))`.
pub fn vertical_lie_generic<S: Real>(
    h: &BundleMap<S>,
    a: &Section<S>,
    form: &EquivariantForm<S>,
    fd: FdConfig<S>,
) -> ModuleMap<S> {
    let group = form.space().group().clone();
    assert_eq!(a.dim(), group.dim(), "section is algebra-valued");
    let (hh, sec, ff) = (h.clone(), a.clone(), form.clone());
    ModuleMap::new(h.source().clone(), form.module().clone(), move |y| {
        let av = group.algebra_from_coords(&sec.eval(&y.x));
        Ok(-star_omega(&av, &hh.eval(y)?, &ff, &fd))
    })
}

/// Pair two maps with the same source into the product fiber space.
pub fn pair_into_product<S: Real>(h1: &BundleMap<S>, h2: &BundleMap<S>) -> BundleMap<S> {
    assert!(h1.source().matches(h2.source()), "maps share the source kind");
    let target = GSpace::product(h1.target().clone(), h2.target().clone());
    let (f1, f2) = (h1.clone(), h2.clone());
    let (d1, d2) = (h1.target().ambient_dim(), h2.target().ambient_dim());
    BundleMap::new(h1.source().clone(), target, false, move |y| {
        let v1 = f1.eval(y).expect("source kind checked by the outer map");
        let v2 = f2.eval(y).expect("source kind checked by the outer map");
        let mut out = DVector::zeros(d1 + d2);
        out.rows_mut(0, d1).copy_from(&v1);
        out.rows_mut(d1, d2).copy_from(&v2);
        out
    })
}

/// The tensor product of two module-valued bundle maps, on the pair of
/// their sources.
pub fn tensor_map<S: Real>(h1: &BundleMap<S>, h2: &BundleMap<S>) -> Result<BundleMap<S>> {
    let r1 = h1.target().module_rep().ok_or(Error::TargetNotModule)?;
    let r2 = h2.target().module_rep().ok_or(Error::TargetNotModule)?;
    let source = NaturalBundleKind::pair(h1.source().clone(), h2.source().clone());
    let target = GSpace::module(Representation::tensor(r1, r2));
    let (f1, f2) = (h1.clone(), h2.clone());
    Ok(BundleMap::new(source, target, false, move |y| {
        let (ya, yb) = split_pair(y).expect("source kind checked by the outer map");
        let v1 = f1.eval(&ya).expect("pair halves match the factor sources");
        let v2 = f2.eval(&yb).expect("pair halves match the factor sources");
        kron(&v1, &v2)
    }))
}

/// Postcomposition with an equivariant fiber map.
pub fn postcompose<S: Real>(psi: &EquivariantMap<S>, h: &BundleMap<S>) -> BundleMap<S> {
    assert_eq!(
        psi.source().ambient_dim(),
        h.target().ambient_dim(),
        "fiber map composes with the bundle map"
    );
    let (p, hh) = (psi.clone(), h.clone());
    BundleMap::new(h.source().clone(), psi.target().clone(), false, move |y| {
        p.eval(&hh.eval(y).expect("source kind checked by the outer map"))
    })
}

/// Precomposition with a natural map between bundle kinds. When the
/// natural map is valued in a tensor product of exterior powers, the
/// bundle map must be module-valued and is extended additively over the
/// signed pair terms.
pub fn compose_natural<S: Real>(h: &BundleMap<S>, nat: NaturalMap) -> Result<BundleMap<S>> {
    if matches!(nat, NaturalMap::ShuffleSplit { .. }) && h.target().module_rep().is_none() {
        return Err(Error::TargetNotModule);
    }
    let hh = h.clone();
    let dim = h.target().ambient_dim();
    Ok(BundleMap::new(nat.source_kind(), h.target().clone(), false, move |y| {
        match eval_natural_map(nat, y).expect("source kind checked by the outer map") {
            NaturalImage::Point(p) => hh.eval(&p).expect("natural image matches the source"),
            NaturalImage::TensorSum(terms) => {
                let mut out = DVector::zeros(dim);
                for (c, a, b) in terms {
                    let p = FiberPoint::pair(a.x.clone(), a.data, b.data);
                    out += hh.eval(&p).expect("natural image matches the source") * c;
                }
                out
            }
        }
    }))
}

/// Precomposition of a module-valued map with a natural bundle map,
/// extended linearly over formal sums in the natural image.
pub fn compose_natural_module<S: Real>(h: &ModuleMap<S>, nat: NaturalMap) -> ModuleMap<S> {
    let hh = h.clone();
    let dim = h.module().dim();
    ModuleMap::new(nat.source_kind(), h.module().clone(), move |y| {
        match eval_natural_map(nat, y)? {
            NaturalImage::Point(p) => hh.eval(&p),
            NaturalImage::TensorSum(terms) => {
                let mut out = DVector::zeros(dim);
                for (c, a, b) in terms {
                    let p = FiberPoint::pair(a.x.clone(), a.data, b.data);
                    out += hh.eval(&p)? * c;
                }
                Ok(out)
            }
        }
    })
}

/// The wedge of an algebra-valued alternating map with a module-valued
/// one: degrees `k` and `l` combine into degree `k + l` with value
///
/// ```text
/// sum over (k, l)-shuffles of  sign * alpha(left) . beta(right)
/// ```
///
/// where `.` is the module's infinitesimal action. For `k = l = 1` this
/// is `alpha(Z1) . beta(Z2) - alpha(Z2) . beta(Z1)`.
pub fn wedge<S: Real>(alpha: &ModuleMap<S>, beta: &ModuleMap<S>, fd: FdConfig<S>) -> ModuleMap<S> {
    let k = degree_of(alpha.source());
    let l = degree_of(beta.source());
    assert!(k >= 1 && l >= 1, "wedge factors have positive degree");
    let group = alpha.module().group().clone();
    assert_eq!(alpha.module().dim(), group.dim(), "left factor is algebra-valued");
    let source = NaturalBundleKind::ExtPower((k + l) as u8);
    let module = beta.module().clone();
    let dim = module.dim();
    let (fa, fb, rep) = (alpha.clone(), beta.clone(), module.clone());
    ModuleMap::new(source, module, move |y| {
        let split = NaturalMap::ShuffleSplit { k: k as u8, l: l as u8 };
        let terms = match eval_natural_map(split, y)? {
            NaturalImage::TensorSum(terms) => terms,
            NaturalImage::Point(_) => unreachable!("shuffle splitting yields a tensor sum"),
        };
        let mut out = DVector::zeros(dim);
        for (c, left, right) in terms {
            let a = group.algebra_from_coords(&fa.eval(&left)?);
            out += rep.algebra_action(&a, &fb.eval(&right)?, &fd) * c;
        }
        Ok(out)
    })
}

/// Degree of an alternating source kind.
fn degree_of(kind: &NaturalBundleKind) -> usize {
    match kind {
        NaturalBundleKind::Base => 0,
        NaturalBundleKind::Tangent => 1,
        NaturalBundleKind::ExtPower(k) => *k as usize,
        other => panic!("not an alternating source kind: {other}"),
    }
}

/// Interior product with a vector field: plugs `Z(x)` into the first slot
/// of a module-valued alternating map.
pub fn interior_product<S: Real>(z_field: &VectorField<S>, beta: &ModuleMap<S>) -> ModuleMap<S> {
    let k = degree_of(beta.source());
    assert!(k >= 1, "interior product lowers positive degree");
    let source = if k == 1 {
        NaturalBundleKind::Base
    } else {
        NaturalBundleKind::ExtPower((k - 1) as u8)
    };
    let (zf, fb) = (z_field.clone(), beta.clone());
    ModuleMap::new(source, beta.module().clone(), move |y| {
        let z = zf.eval(&y.x);
        let mut out = DVector::zeros(fb.module().dim());
        for (c, vs) in alternating_terms(y) {
            let mut vecs = Vec::with_capacity(vs.len() + 1);
            vecs.push(z.clone());
            vecs.extend(vs);
            out += fb.eval(&FiberPoint::wedge(y.x.clone(), vecs))? * c;
        }
        Ok(out)
    })
}

/// Decomposable terms of base (one empty term), tangent, or exterior
/// power data.
fn alternating_terms<S: Real>(y: &FiberPoint<S>) -> Vec<(S, Vec<DVector<S>>)> {
    match &y.data {
        FiberData::Base => vec![(S::one(), Vec::new())],
        FiberData::Tangent(v) => vec![(S::one(), vec![v.clone()])],
        FiberData::ExtPower { terms, .. } => terms.clone(),
        other => panic!("not alternating data: {}", other.kind()),
    }
}

/// The exterior covariant derivative of a module-valued alternating map
/// of degree `k`, as a degree `k + 1` map. Each argument of a decomposable
/// is extended constantly, so the bracket corrections vanish and the value
/// is the alternating sum of derivatives along horizontal lifts of the
/// constant fields:
///
/// ```text
/// (D beta)(v_0 ^ ... ^ v_k) at x
///     = sum_j (-1)^j  L_{v_j^H} [ x' -> beta(x', rest_j) ] (x)
/// ```
pub fn exterior_covariant<S: Real>(
    beta: &ModuleMap<S>,
    conn: &ConnectionForm<S>,
    cfg: &FlowConfig<S>,
) -> ModuleMap<S> {
    let k = degree_of(beta.source());
    assert!(k + 1 <= 3, "exterior powers up to degree 3");
    let source = NaturalBundleKind::ExtPower((k + 1) as u8);
    let (fb, cn, cc) = (beta.clone(), conn.clone(), *cfg);
    ModuleMap::new(source, beta.module().clone(), move |y| {
        let chart = cn.chart().clone();
        let mut out = DVector::zeros(fb.module().dim());
        for (c, vs) in alternating_terms(y) {
            for j in 0..vs.len() {
                let rest: Vec<DVector<S>> =
                    vs.iter().enumerate().filter(|(i, _)| *i != j).map(|(_, v)| v.clone()).collect();
                let frozen = fb.clone();
                let hj = ModuleMap::new(
                    NaturalBundleKind::Base,
                    fb.module().clone(),
                    move |p: &FiberPoint<S>| {
                        let arg = if rest.is_empty() {
                            FiberPoint::base(p.x.clone())
                        } else {
                            FiberPoint::wedge(p.x.clone(), rest.clone())
                        };
                        frozen.eval(&arg)
                    },
                );
                let xj = VectorField::constant(chart.clone(), vs[j].clone());
                let lifted = crate::principal::horizontal_lift(&cn, &xj);
                let sign = if j % 2 == 0 { S::one() } else { -S::one() };
                let term =
                    lie_module_map(&hj, &lifted, &cc).eval(&FiberPoint::base(y.x.clone()))?;
                out += term * (c * sign);
            }
        }
        Ok(out)
    })
}

/// The derivative along a horizontal lift, as one operation: used with
/// [`exterior_covariant`] and [`interior_product`] in the Cartan-style
/// identity `L_{Z^H} beta = i_Z D beta + D i_Z beta`.
pub fn covariant_lie<S: Real>(
    z_field: &VectorField<S>,
    beta: &ModuleMap<S>,
    conn: &ConnectionForm<S>,
    cfg: &FlowConfig<S>,
) -> ModuleMap<S> {
    let lifted = crate::principal::horizontal_lift(conn, z_field);
    lie_module_map(beta, &lifted, cfg)
}

/// Chain-rule composition: the fiberwise linear datum of `psi` applied to
/// a derivative of `h`. The caller supplies `lie_h = L h` computed with
/// the form that `psi`'s datum intertwines.
pub fn chain_rhs<S: Real>(
    psi: &EquivariantMap<S>,
    h: &BundleMap<S>,
    lie_h: &ModuleMap<S>,
    module: &Representation<S>,
) -> ModuleMap<S> {
    let (p, hh, lh) = (psi.clone(), h.clone(), lie_h.clone());
    ModuleMap::new(h.source().clone(), module.clone(), move |y| {
        let z = hh.eval(y)?;
        let phi: DMatrix<S> = p.phi_at(&z).expect("chain-rule datum registered");
        Ok(phi * lh.eval(y)?)
    })
}

/// The action of a group-valued section (a conjugation-valued base map)
/// on a module-valued map over the same base: `(s . h)(y) = s(x) . h(y)`.
pub fn module_act_section<S: Real>(s: &BundleMap<S>, h: &ModuleMap<S>) -> Result<ModuleMap<S>> {
    let group = s
        .target()
        .conjugation_group()
        .ok_or_else(|| Error::KindMismatch {
            expected: "conjugation-valued section".into(),
            found: "other target fiber".into(),
        })?
        .clone();
    let n = group.ambient_dim();
    let (ss, hh) = (s.clone(), h.clone());
    Ok(ModuleMap::new(h.source().clone(), h.module().clone(), move |y| {
        let sv = ss.eval(&FiberPoint::base(y.x.clone()))?;
        let e = group
            .element(crate::assoc::unvec_matrix(&sv, n))
            .expect("fiber value lies in the group");
        Ok(hh.module().apply(&e, &hh.eval(y)?))
    }))
}

/// Pointwise infinitesimal action of an algebra-valued base map:
/// `y -> a(x) . h(y)` through the module's action.
pub fn algebra_act_map<S: Real>(
    a: &ModuleMap<S>,
    h: &ModuleMap<S>,
    fd: FdConfig<S>,
) -> ModuleMap<S> {
    let group = a.module().group().clone();
    assert_eq!(a.module().dim(), group.dim(), "left map is algebra-valued");
    let (fa, fh) = (a.clone(), h.clone());
    ModuleMap::new(h.source().clone(), h.module().clone(), move |y| {
        let av = group.algebra_from_coords(&fa.eval(&FiberPoint::base(y.x.clone()))?);
        Ok(fh.module().algebra_action(&av, &fh.eval(y)?, &fd))
    })
}

/// Adjoint transport by the inverse of a group-valued section:
/// `y -> Ad_{s(x)^{-1}}(w(y))`, in algebra coordinates.
pub fn ad_inverse_transport<S: Real>(s: &BundleMap<S>, w: &ModuleMap<S>) -> Result<ModuleMap<S>> {
    let group = s
        .target()
        .conjugation_group()
        .ok_or_else(|| Error::KindMismatch {
            expected: "conjugation-valued section".into(),
            found: "other target fiber".into(),
        })?
        .clone();
    assert_eq!(w.module().dim(), group.dim(), "transported map is algebra-valued");
    let n = group.ambient_dim();
    let (ss, ww, g2) = (s.clone(), w.clone(), group.clone());
    Ok(ModuleMap::new(w.source().clone(), w.module().clone(), move |y| {
        let sv = ss.eval(&FiberPoint::base(y.x.clone()))?;
        let e = g2
            .element(crate::assoc::unvec_matrix(&sv, n))
            .expect("fiber value lies in the group");
        let a = g2.algebra_from_coords(&ww.eval(y)?);
        Ok(g2.adjoint(&e.inverse(), &a).coords().clone())
    }))
}
