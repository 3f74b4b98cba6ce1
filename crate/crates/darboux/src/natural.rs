//! Natural bundles over a chart, their canonical flow lifts, and the
//! natural (flow-commuting) maps between them.
//!
//! The bundle kinds form a closed set: the base itself, the tangent bundle,
//! exterior powers `Λ^k T` for `k` in 1..=3, the tensor square `T (x) T`,
//! and fibered products of two kinds (which several product rules consume).
//! `Λ^1 T` and `T` are interchangeable everywhere.
//!
//! Fiber data above a point is stored concretely: a single vector for the
//! tangent bundle, and formal sums of decomposables (with scalar
//! coefficients) for exterior powers and the tensor square. Canonical flows
//! transport every constituent vector by the variational flow in a single
//! joint integration, so all of them see the same base trajectory.

use nalgebra::DVector;

use crate::chart::{flow, tangent_flow_multi, FlowConfig, VectorField};
use crate::error::{Error, Result};
use crate::scalar::Real;

/// The closed set of natural bundle kinds.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum NaturalBundleKind {
    Base,
    Tangent,
    ExtPower(u8),
    TensorSquare,
    Pair(Box<NaturalBundleKind>, Box<NaturalBundleKind>),
}

impl std::fmt::Display for NaturalBundleKind {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Self::Base => write!(f, "base"),
            Self::Tangent => write!(f, "tangent"),
            Self::ExtPower(k) => write!(f, "ext({k})"),
            Self::TensorSquare => write!(f, "tensor-square"),
            Self::Pair(a, b) => write!(f, "pair({a}, {b})"),
        }
    }
}

impl NaturalBundleKind {
    /// Kind equality with `Λ^1 T` and `T` identified.
    pub fn matches(&self, other: &Self) -> bool {
        use NaturalBundleKind::*;
        match (self, other) {
            (Tangent, ExtPower(1)) | (ExtPower(1), Tangent) => true,
            (Pair(a1, b1), Pair(a2, b2)) => a1.matches(a2) && b1.matches(b2),
            (a, b) => a == b,
        }
    }

    pub fn pair(a: NaturalBundleKind, b: NaturalBundleKind) -> Self {
        Self::Pair(Box::new(a), Box::new(b))
    }
}

/// Fiber data above a base point.
#[derive(Clone, Debug)]
pub enum FiberData<S: Real = f64> {
    Base,
    Tangent(DVector<S>),
    /// Formal sum of decomposables: each term is a coefficient together
    /// with `k` factor vectors.
    ExtPower { k: u8, terms: Vec<(S, Vec<DVector<S>>)> },
    /// Formal sum of pairs `coeff * u (x) v`.
    TensorSquare(Vec<(S, DVector<S>, DVector<S>)>),
    Pair(Box<FiberData<S>>, Box<FiberData<S>>),
}

impl<S: Real> FiberData<S> {
    pub fn kind(&self) -> NaturalBundleKind {
        match self {
            Self::Base => NaturalBundleKind::Base,
            Self::Tangent(_) => NaturalBundleKind::Tangent,
            Self::ExtPower { k, .. } => NaturalBundleKind::ExtPower(*k),
            Self::TensorSquare(_) => NaturalBundleKind::TensorSquare,
            Self::Pair(a, b) => NaturalBundleKind::pair(a.kind(), b.kind()),
        }
    }

    fn collect_vectors(&self, out: &mut Vec<DVector<S>>) {
        match self {
            Self::Base => {}
            Self::Tangent(v) => out.push(v.clone()),
            Self::ExtPower { terms, .. } => {
                for (_, vs) in terms {
                    out.extend(vs.iter().cloned());
                }
            }
            Self::TensorSquare(terms) => {
                for (_, u, v) in terms {
                    out.push(u.clone());
                    out.push(v.clone());
                }
            }
            Self::Pair(a, b) => {
                a.collect_vectors(out);
                b.collect_vectors(out);
            }
        }
    }

    fn rebuild<I: Iterator<Item = DVector<S>>>(&self, it: &mut I) -> Self {
        match self {
            Self::Base => Self::Base,
            Self::Tangent(_) => Self::Tangent(it.next().expect("vector count")),
            Self::ExtPower { k, terms } => Self::ExtPower {
                k: *k,
                terms: terms
                    .iter()
                    .map(|(c, vs)| (*c, vs.iter().map(|_| it.next().expect("vector count")).collect()))
                    .collect(),
            },
            Self::TensorSquare(terms) => Self::TensorSquare(
                terms
                    .iter()
                    .map(|(c, _, _)| {
                        let u = it.next().expect("vector count");
                        let v = it.next().expect("vector count");
                        (*c, u, v)
                    })
                    .collect(),
            ),
            Self::Pair(a, b) => {
                let ra = a.rebuild(it);
                let rb = b.rebuild(it);
                Self::Pair(Box::new(ra), Box::new(rb))
            }
        }
    }

    fn flatten_into(&self, out: &mut Vec<S>) {
        match self {
            Self::Base => {}
            Self::Tangent(v) => out.extend(v.iter().copied()),
            Self::ExtPower { terms, .. } => {
                for (c, vs) in terms {
                    out.push(*c);
                    for v in vs {
                        out.extend(v.iter().copied());
                    }
                }
            }
            Self::TensorSquare(terms) => {
                for (c, u, v) in terms {
                    out.push(*c);
                    out.extend(u.iter().copied());
                    out.extend(v.iter().copied());
                }
            }
            Self::Pair(a, b) => {
                a.flatten_into(out);
                b.flatten_into(out);
            }
        }
    }
}

/// A point of a natural bundle: a base point plus fiber data.
#[derive(Clone, Debug)]
pub struct FiberPoint<S: Real = f64> {
    pub x: DVector<S>,
    pub data: FiberData<S>,
}

impl<S: Real> FiberPoint<S> {
    pub fn base(x: DVector<S>) -> Self {
        Self { x, data: FiberData::Base }
    }

    pub fn tangent(x: DVector<S>, v: DVector<S>) -> Self {
        Self { x, data: FiberData::Tangent(v) }
    }

    /// A single decomposable `v1 ^ ... ^ vk`.
    pub fn wedge(x: DVector<S>, vs: Vec<DVector<S>>) -> Self {
        let k = vs.len() as u8;
        assert!((1..=3).contains(&k), "exterior powers up to degree 3");
        Self { x, data: FiberData::ExtPower { k, terms: vec![(S::one(), vs)] } }
    }

    pub fn tensor_square(x: DVector<S>, terms: Vec<(S, DVector<S>, DVector<S>)>) -> Self {
        Self { x, data: FiberData::TensorSquare(terms) }
    }

    pub fn pair(x: DVector<S>, a: FiberData<S>, b: FiberData<S>) -> Self {
        Self { x, data: FiberData::Pair(Box::new(a), Box::new(b)) }
    }

    pub fn kind(&self) -> NaturalBundleKind {
        self.data.kind()
    }

    /// Base point and all fiber numbers (coefficients and vector entries)
    /// as one flat vector; curves of structurally identical points
    /// flatten compatibly, which is what the stencils differentiate.
    pub fn flatten(&self) -> DVector<S> {
        let mut out: Vec<S> = Vec::new();
        out.extend(self.x.iter().copied());
        self.data.flatten_into(&mut out);
        DVector::from_vec(out)
    }

    /// Reshape to the expected kind, using the degree-1 identification of
    /// `ExtPower(1)` with `Tangent` where needed. Errors when the kinds
    /// do not match at all.
    pub fn coerce(&self, expected: &NaturalBundleKind) -> Result<FiberPoint<S>> {
        expect_kind(expected, &self.kind())?;
        match (expected, &self.data) {
            (NaturalBundleKind::Tangent, FiberData::ExtPower { .. }) => {
                Ok(Self { x: self.x.clone(), data: FiberData::Tangent(tangent_value(self)) })
            }
            (NaturalBundleKind::ExtPower(1), FiberData::Tangent(v)) => {
                Ok(Self::wedge(self.x.clone(), vec![v.clone()]))
            }
            _ => Ok(self.clone()),
        }
    }
}

pub(crate) fn expect_kind(expected: &NaturalBundleKind, found: &NaturalBundleKind) -> Result<()> {
    if expected.matches(found) {
        Ok(())
    } else {
        Err(Error::KindMismatch { expected: expected.to_string(), found: found.to_string() })
    }
}

/// Canonical lift of the flow of `field` to a natural bundle point: the
/// base point flows, every fiber vector follows the variational equation,
/// and formal-sum coefficients ride along unchanged.
pub fn canonical_flow<S: Real>(
    field: &VectorField<S>,
    y: &FiberPoint<S>,
    t: S,
    cfg: &FlowConfig<S>,
) -> Result<FiberPoint<S>> {
    let mut vs = Vec::new();
    y.data.collect_vectors(&mut vs);
    if vs.is_empty() {
        let x = flow(field, &y.x, t, cfg)?;
        return Ok(FiberPoint { x, data: y.data.clone() });
    }
    let (x, moved) = tangent_flow_multi(field, &y.x, &vs, t, cfg)?;
    let mut it = moved.into_iter();
    let data = y.data.rebuild(&mut it);
    Ok(FiberPoint { x, data })
}

/// The natural maps between bundle kinds.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum NaturalMap {
    /// `x -> (x, x)`: base into base x base.
    DiagonalBase,
    /// `Z -> (x, Z)`: tangent into base x tangent.
    InsertBase,
    /// `Z1 ^ Z2 -> Z1 (x) Z2 - Z2 (x) Z1`.
    WedgeToTensor,
    /// The (k, l)-shuffle splitting `Λ^(k+l) -> Λ^k (x) Λ^l`.
    ShuffleSplit { k: u8, l: u8 },
}

impl NaturalMap {
    pub fn source_kind(&self) -> NaturalBundleKind {
        match self {
            Self::DiagonalBase => NaturalBundleKind::Base,
            Self::InsertBase => NaturalBundleKind::Tangent,
            Self::WedgeToTensor => NaturalBundleKind::ExtPower(2),
            Self::ShuffleSplit { k, l } => NaturalBundleKind::ExtPower(k + l),
        }
    }
}

/// Value of a natural map: either a point of a natural bundle, or a signed
/// sum of factor pairs when the target is a tensor product of two exterior
/// powers.
#[derive(Clone, Debug)]
pub enum NaturalImage<S: Real = f64> {
    Point(FiberPoint<S>),
    TensorSum(Vec<(S, FiberPoint<S>, FiberPoint<S>)>),
}

impl<S: Real> NaturalImage<S> {
    pub fn point(self) -> FiberPoint<S> {
        match self {
            Self::Point(p) => p,
            Self::TensorSum(_) => panic!("natural image is a tensor sum, not a point"),
        }
    }

    /// Flat numeric embedding, structure-compatible along flows.
    pub fn flatten(&self) -> DVector<S> {
        match self {
            Self::Point(p) => p.flatten(),
            Self::TensorSum(terms) => {
                let mut out: Vec<S> = Vec::new();
                for (c, a, b) in terms {
                    out.push(*c);
                    out.extend(a.flatten().iter().copied());
                    out.extend(b.flatten().iter().copied());
                }
                DVector::from_vec(out)
            }
        }
    }
}

/// All k-element ascending index tuples from `0..n`.
pub(crate) fn combinations(n: usize, k: usize) -> Vec<Vec<usize>> {
    if k > n {
        return Vec::new();
    }
    if k == 0 {
        return vec![Vec::new()];
    }
    let mut out = Vec::new();
    let mut idx: Vec<usize> = (0..k).collect();
    loop {
        out.push(idx.clone());
        // Advance the rightmost index that can still move.
        let mut i = k;
        loop {
            if i == 0 {
                return out;
            }
            i -= 1;
            if idx[i] != i + n - k {
                break;
            }
            if i == 0 {
                return out;
            }
        }
        idx[i] += 1;
        for j in i + 1..k {
            idx[j] = idx[j - 1] + 1;
        }
    }
}

/// Sign of the permutation sorting `(chosen, complement)` back to
/// ascending order: the parity of pairs (a, b) with a chosen, b not,
/// and a > b.
fn shuffle_sign<S: Real>(chosen: &[usize], total: usize) -> S {
    let mut inversions = 0usize;
    for &a in chosen {
        for b in 0..total {
            if !chosen.contains(&b) && a > b {
                inversions += 1;
            }
        }
    }
    if inversions % 2 == 0 {
        S::one()
    } else {
        -S::one()
    }
}

/// Evaluate a natural map on a fiber point of its source kind.
pub fn eval_natural_map<S: Real>(map: NaturalMap, y: &FiberPoint<S>) -> Result<NaturalImage<S>> {
    expect_kind(&map.source_kind(), &y.kind())?;
    match map {
        NaturalMap::DiagonalBase => {
            Ok(NaturalImage::Point(FiberPoint::pair(y.x.clone(), FiberData::Base, FiberData::Base)))
        }
        NaturalMap::InsertBase => {
            let v = tangent_value(y);
            Ok(NaturalImage::Point(FiberPoint::pair(
                y.x.clone(),
                FiberData::Base,
                FiberData::Tangent(v),
            )))
        }
        NaturalMap::WedgeToTensor => {
            let terms = wedge_terms(&y.data);
            let mut out = Vec::with_capacity(2 * terms.len());
            for (c, vs) in terms {
                let (u, v) = (vs[0].clone(), vs[1].clone());
                out.push((c, u.clone(), v.clone()));
                out.push((-c, v, u));
            }
            Ok(NaturalImage::Point(FiberPoint::tensor_square(y.x.clone(), out)))
        }
        NaturalMap::ShuffleSplit { k, l } => {
            let total = (k + l) as usize;
            let terms = wedge_terms(&y.data);
            let mut out = Vec::new();
            for (c, vs) in terms {
                for chosen in combinations(total, k as usize) {
                    let sign: S = shuffle_sign(&chosen, total);
                    let left: Vec<DVector<S>> = chosen.iter().map(|&i| vs[i].clone()).collect();
                    let right: Vec<DVector<S>> =
                        (0..total).filter(|i| !chosen.contains(i)).map(|i| vs[i].clone()).collect();
                    out.push((
                        c * sign,
                        FiberPoint::wedge(y.x.clone(), left),
                        FiberPoint::wedge(y.x.clone(), right),
                    ));
                }
            }
            Ok(NaturalImage::TensorSum(out))
        }
    }
}

/// The tangent vector of `Tangent` or degree-1 `ExtPower` data.
pub(crate) fn tangent_value<S: Real>(y: &FiberPoint<S>) -> DVector<S> {
    match &y.data {
        FiberData::Tangent(v) => v.clone(),
        FiberData::ExtPower { k: 1, terms } => {
            let n = y.x.len();
            let mut out = DVector::zeros(n);
            for (c, vs) in terms {
                out += &vs[0] * *c;
            }
            out
        }
        other => panic!("expected tangent data, found {}", other.kind()),
    }
}

/// Exterior-power data as a list of weighted decomposable terms. `Tangent`
/// counts as degree 1 and `Base` as the empty product.
pub(crate) fn wedge_terms<S: Real>(data: &FiberData<S>) -> Vec<(S, Vec<DVector<S>>)> {
    match data {
        FiberData::Base => vec![(S::one(), Vec::new())],
        FiberData::Tangent(v) => vec![(S::one(), vec![v.clone()])],
        FiberData::ExtPower { terms, .. } => terms.clone(),
        other => panic!("expected exterior-power data, found {}", other.kind()),
    }
}

/// Coordinates of exterior-power data in the basis `e_I`, `I` an ascending
/// k-tuple (lexicographic order): each decomposable contributes the k x k
/// minors of its factor matrix.
pub fn ext_coords<S: Real>(data: &FiberData<S>, n: usize) -> DVector<S> {
    let (k, terms) = match data {
        FiberData::Tangent(v) => (1usize, vec![(S::one(), vec![v.clone()])]),
        FiberData::ExtPower { k, terms } => (*k as usize, terms.clone()),
        other => panic!("expected exterior-power data, found {}", other.kind()),
    };
    let tuples = combinations(n, k);
    let mut out = DVector::zeros(tuples.len());
    for (c, vs) in &terms {
        for (slot, tuple) in tuples.iter().enumerate() {
            let mut minor = nalgebra::DMatrix::<S>::zeros(k, k);
            for (row, &i) in tuple.iter().enumerate() {
                for (col, v) in vs.iter().enumerate() {
                    minor[(row, col)] = v[i];
                }
            }
            out[slot] += *c * minor.determinant();
        }
    }
    out
}

/// Coordinates of tensor-square data in the row-major basis `e_i (x) e_j`.
pub fn tensor_square_coords<S: Real>(data: &FiberData<S>, n: usize) -> DVector<S> {
    let terms = match data {
        FiberData::TensorSquare(terms) => terms,
        other => panic!("expected tensor-square data, found {}", other.kind()),
    };
    let mut out = DVector::zeros(n * n);
    for (c, u, v) in terms {
        for i in 0..n {
            for j in 0..n {
                out[i * n + j] += *c * u[i] * v[j];
            }
        }
    }
    out
}
