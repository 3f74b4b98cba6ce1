//! Matrix Lie groups with explicit algebra bases.
//!
//! A [`LieGroup`] couples an ambient matrix size with a basis of its Lie
//! algebra. Three families are provided:
//!
//! * `GL(n)`: invertible n x n matrices, algebra all of gl(n);
//! * `SO(3)`: rotations of R^3, algebra spanned by the three hat matrices;
//! * `T(d)`: translations of R^d as (d+1) x (d+1) unitriangular matrices,
//!   with `d = 0` giving the trivial group.
//!
//! Elements and algebra vectors are dense matrices validated on
//! construction: group membership within `membership_tol`, algebra
//! membership by least squares onto the basis.
//!
//! The exponential is scaling-and-squaring of the truncated series (halve
//! until `||a||_F <= 0.5`, 18 terms, square back). The logarithm is inverse
//! scaling (Denman-Beavers square roots) followed by the Mercator series,
//! restricted to the principal branch `||g - I||_2 < 1`.

use std::sync::Arc;

use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};
use crate::fd::FdConfig;
use crate::scalar::Real;
use crate::tol;

/// Which group family a descriptor denotes.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum GroupName {
    /// Invertible n x n matrices.
    GeneralLinear(usize),
    /// Rotations of R^3.
    SpecialOrthogonal3,
    /// Translations of R^d in unitriangular form.
    Translation(usize),
}

struct GroupData<S: Real> {
    name: GroupName,
    ambient: usize,
    basis: Vec<DMatrix<S>>,
    /// Inverse Gram matrix of the basis under the Frobenius inner product.
    gram_inv: DMatrix<S>,
    membership_tol: S,
}

/// A matrix Lie group descriptor. Cloning is cheap (shared data).
#[derive(Clone)]
pub struct LieGroup<S: Real = f64> {
    data: Arc<GroupData<S>>,
}

impl<S: Real> std::fmt::Debug for LieGroup<S> {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "LieGroup({:?})", self.data.name)
    }
}

impl<S: Real> PartialEq for LieGroup<S> {
    fn eq(&self, other: &Self) -> bool {
        self.data.name == other.data.name
    }
}

fn gram_inverse<S: Real>(basis: &[DMatrix<S>]) -> DMatrix<S> {
    let dim = basis.len();
    let mut gram = DMatrix::zeros(dim, dim);
    for i in 0..dim {
        for j in 0..dim {
            gram[(i, j)] = basis[i].dot(&basis[j]);
        }
    }
    if dim == 0 {
        gram
    } else {
        gram.try_inverse().expect("algebra basis is linearly independent")
    }
}

impl<S: Real> LieGroup<S> {
    fn from_parts(name: GroupName, ambient: usize, basis: Vec<DMatrix<S>>) -> Self {
        let gram_inv = gram_inverse(&basis);
        Self {
            data: Arc::new(GroupData {
                name,
                ambient,
                basis,
                gram_inv,
                membership_tol: S::of(tol::MEMBERSHIP),
            }),
        }
    }

    /// GL(n): basis of gl(n) given by the elementary matrices.
    pub fn general_linear(n: usize) -> Self {
        assert!(n >= 1, "GL(n) needs n >= 1");
        let mut basis = Vec::with_capacity(n * n);
        for i in 0..n {
            for j in 0..n {
                let mut e = DMatrix::zeros(n, n);
                e[(i, j)] = S::one();
                basis.push(e);
            }
        }
        Self::from_parts(GroupName::GeneralLinear(n), n, basis)
    }

    /// SO(3): basis of so(3) given by the hat matrices of e1, e2, e3.
    pub fn special_orthogonal3() -> Self {
        let basis = (0..3)
            .map(|i| {
                let mut e = DVector::zeros(3);
                e[i] = S::one();
                hat3(&e)
            })
            .collect();
        Self::from_parts(GroupName::SpecialOrthogonal3, 3, basis)
    }

    /// T(d): translations of R^d as (d+1) x (d+1) unitriangular matrices.
    /// `d = 0` is the trivial group with an empty algebra basis.
    pub fn translation(d: usize) -> Self {
        let n = d + 1;
        let mut basis = Vec::with_capacity(d);
        for i in 0..d {
            let mut e = DMatrix::zeros(n, n);
            e[(i, d)] = S::one();
            basis.push(e);
        }
        Self::from_parts(GroupName::Translation(d), n, basis)
    }

    pub fn name(&self) -> &GroupName {
        &self.data.name
    }

    /// Side length of the ambient matrices.
    pub fn ambient_dim(&self) -> usize {
        self.data.ambient
    }

    /// Dimension of the Lie algebra.
    pub fn dim(&self) -> usize {
        self.data.basis.len()
    }

    pub fn basis(&self) -> &[DMatrix<S>] {
        &self.data.basis
    }

    pub fn membership_tol(&self) -> S {
        self.data.membership_tol
    }

    pub fn identity(&self) -> GroupElement<S> {
        let n = self.data.ambient;
        GroupElement { group: self.clone(), m: DMatrix::identity(n, n) }
    }

    /// How far `m` is from satisfying the membership predicate. The exact
    /// metric is family specific; values at roundoff scale are expected for
    /// genuine elements.
    fn membership_deviation(&self, m: &DMatrix<S>) -> S {
        let n = self.data.ambient;
        match self.data.name {
            GroupName::GeneralLinear(_) => {
                // Invertibility: penalize only a vanishing determinant.
                let det = m.determinant().abs();
                let floor = S::of(tol::DET_FLOOR);
                if det >= floor {
                    S::zero()
                } else {
                    S::one()
                }
            }
            GroupName::SpecialOrthogonal3 => {
                let gram = m.transpose() * m - DMatrix::identity(n, n);
                let dev = gram.amax();
                if m.determinant() > S::zero() {
                    dev
                } else {
                    S::one()
                }
            }
            GroupName::Translation(d) => {
                // Everything except the translation column must match the
                // identity pattern.
                let mut dev = S::zero();
                for i in 0..n {
                    for j in 0..n {
                        if j == d && i < d {
                            continue;
                        }
                        let want = if i == j { S::one() } else { S::zero() };
                        let e = (m[(i, j)] - want).abs();
                        if e > dev {
                            dev = e;
                        }
                    }
                }
                dev
            }
        }
    }

    /// Wrap `m` as a group element, validating membership.
    pub fn element(&self, m: DMatrix<S>) -> Result<GroupElement<S>> {
        let n = self.data.ambient;
        if m.nrows() != n || m.ncols() != n {
            return Err(Error::Dimension {
                context: format!("expected {n} x {n} matrix, got {} x {}", m.nrows(), m.ncols()),
            });
        }
        let dev = self.membership_deviation(&m);
        if dev > self.data.membership_tol {
            return Err(Error::NotInGroup { deviation: dev.as_f64() });
        }
        Ok(GroupElement { group: self.clone(), m })
    }

    /// Least-squares projection of `m` onto the span of the basis. Returns
    /// the projected matrix, its basis coordinates, and the relative
    /// residual `||m - proj|| / (1 + ||m||)`.
    pub fn project_to_algebra(&self, m: &DMatrix<S>) -> (DMatrix<S>, DVector<S>, S) {
        let dim = self.dim();
        let n = self.data.ambient;
        if dim == 0 {
            let zero = DMatrix::zeros(n, n);
            let residual = m.norm() / (S::one() + m.norm());
            return (zero, DVector::zeros(0), residual);
        }
        let rhs = DVector::from_iterator(dim, self.data.basis.iter().map(|b| b.dot(m)));
        let coords = &self.data.gram_inv * rhs;
        let mut proj = DMatrix::zeros(n, n);
        for (c, b) in coords.iter().zip(&self.data.basis) {
            proj += b * *c;
        }
        let residual = (m - &proj).norm() / (S::one() + m.norm());
        (proj, coords, residual)
    }

    /// Wrap `m` as an algebra element; it must lie in the basis span.
    pub fn algebra(&self, m: DMatrix<S>) -> Result<AlgebraElement<S>> {
        let n = self.data.ambient;
        if m.nrows() != n || m.ncols() != n {
            return Err(Error::Dimension {
                context: format!("expected {n} x {n} matrix, got {} x {}", m.nrows(), m.ncols()),
            });
        }
        let (proj, coords, residual) = self.project_to_algebra(&m);
        let tol = S::floored(tol::ALGEBRA_SPAN);
        if residual > tol {
            return Err(Error::ProjectionResidual {
                residual: residual.as_f64(),
                tol: tol.as_f64(),
            });
        }
        Ok(AlgebraElement { group: self.clone(), m: proj, coords })
    }

    /// Algebra element with the given basis coordinates.
    pub fn algebra_from_coords(&self, coords: &DVector<S>) -> AlgebraElement<S> {
        assert_eq!(coords.len(), self.dim(), "coordinate count matches the algebra dimension");
        let n = self.data.ambient;
        let mut m = DMatrix::zeros(n, n);
        for (c, b) in coords.iter().zip(&self.data.basis) {
            m += b * *c;
        }
        AlgebraElement { group: self.clone(), m, coords: coords.clone() }
    }

    pub fn zero_algebra(&self) -> AlgebraElement<S> {
        self.algebra_from_coords(&DVector::zeros(self.dim()))
    }

    /// Exponential by scaling and squaring of the truncated series.
    pub fn exp(&self, a: &AlgebraElement<S>) -> GroupElement<S> {
        let n = self.data.ambient;
        let mut k = 0u32;
        let mut nrm = a.m.norm();
        let limit = S::of(tol::EXP_SCALE_LIMIT);
        let half = S::of(0.5);
        while nrm > limit {
            nrm *= half;
            k += 1;
        }
        let b = &a.m * half.powi(k as i32);
        let mut term = DMatrix::identity(n, n);
        let mut sum = term.clone();
        for j in 1..tol::EXP_SERIES_TERMS {
            term = (&term * &b) / S::of(j as f64);
            sum += &term;
        }
        for _ in 0..k {
            sum = &sum * &sum;
        }
        self.element(sum).expect("exponential lands in the group")
    }

    /// Principal logarithm: inverse scaling by Denman-Beavers square roots,
    /// then the Mercator series. Only defined on `||g - I||_2 < 1`.
    pub fn log(&self, g: &GroupElement<S>) -> Result<AlgebraElement<S>> {
        let n = self.data.ambient;
        let id = DMatrix::identity(n, n);
        let branch = spectral_norm(&(&g.m - &id));
        if branch >= S::one() {
            return Err(Error::OutOfBranch { norm: branch.as_f64() });
        }
        let radius = S::of(tol::LOG_SERIES_RADIUS);
        let mut y = g.m.clone();
        let mut k = 0u32;
        // Each square root at least halves ||y - I||, so this terminates
        // quickly; the cap is a pure safety net.
        while (&y - &id).norm() > radius && k < 60 {
            y = denman_beavers_sqrt(&y);
            k += 1;
        }
        let x = &y - &id;
        // Mercator: log(I + X) = X - X^2/2 + X^3/3 - ...
        let mut power = x.clone();
        let mut sum = x.clone();
        let mut sign = -S::one();
        for j in 2..60 {
            power = &power * &x;
            let term = &power * (sign / S::of(j as f64));
            sum += &term;
            sign = -sign;
            if power.norm() < S::default_epsilon() {
                break;
            }
        }
        sum *= S::of(2.0).powi(k as i32);
        self.algebra(sum)
    }

    /// Adjoint action `Ad_g(a) = g a g^-1`; the result is projected back
    /// onto the basis to strip roundoff.
    pub fn adjoint(&self, g: &GroupElement<S>, a: &AlgebraElement<S>) -> AlgebraElement<S> {
        let gi = g.m.clone().try_inverse().expect("group element is invertible");
        let m = &g.m * &a.m * gi;
        let (proj, coords, residual) = self.project_to_algebra(&m);
        debug_assert!(
            residual <= S::floored(tol::FD_ALGEBRA_SPAN),
            "adjoint stays in the algebra (residual {:.3e})",
            residual.as_f64()
        );
        AlgebraElement { group: self.clone(), m: proj, coords }
    }

    /// Left-logarithmic derivative of a curve of group matrices:
    /// `g(t0)^-1 g'(t0)`, differentiated with the given stencil and
    /// projected onto the algebra basis.
    ///
    /// Fails with `ProjectionResidual` when the finite-difference data does
    /// not lie in the algebra to within [`tol::FD_ALGEBRA_SPAN`].
    pub fn maurer_cartan_derivative<F: Fn(S) -> DMatrix<S>>(
        &self,
        curve: F,
        t0: S,
        fd: &FdConfig<S>,
    ) -> Result<AlgebraElement<S>> {
        let gdot = fd.derivative_matrix(|s| curve(t0 + s));
        let g0 = curve(t0);
        let gi = g0.try_inverse().ok_or_else(|| Error::Dimension {
            context: "curve value is not invertible".into(),
        })?;
        let v = gi * gdot;
        let (proj, coords, residual) = self.project_to_algebra(&v);
        let tol = S::floored(tol::FD_ALGEBRA_SPAN);
        if residual > tol {
            return Err(Error::ProjectionResidual {
                residual: residual.as_f64(),
                tol: tol.as_f64(),
            });
        }
        Ok(AlgebraElement { group: self.clone(), m: proj, coords })
    }
}

/// Largest singular value.
fn spectral_norm<S: Real>(m: &DMatrix<S>) -> S {
    let sv = m.clone().singular_values();
    let mut max = S::zero();
    for s in sv.iter() {
        if *s > max {
            max = *s;
        }
    }
    max
}

/// Denman-Beavers iteration for the principal matrix square root:
/// `y <- (y + z^-1)/2`, `z <- (z + y^-1)/2` from `y = a`, `z = I`.
fn denman_beavers_sqrt<S: Real>(a: &DMatrix<S>) -> DMatrix<S> {
    let n = a.nrows();
    let half = S::of(0.5);
    let target = S::floored(tol::SQRT_RESIDUAL) * (S::one() + a.norm());
    let mut y = a.clone();
    let mut z = DMatrix::identity(n, n);
    for _ in 0..tol::SQRT_MAX_ITERS {
        let yi = y.clone().try_inverse().expect("iterate is invertible");
        let zi = z.clone().try_inverse().expect("iterate is invertible");
        let yn = (&y + zi) * half;
        let zn = (&z + yi) * half;
        y = yn;
        z = zn;
        if (&y * &y - a).norm() <= target {
            break;
        }
    }
    y
}

/// Hat map of R^3: `hat(u) v = u x v`.
pub fn hat3<S: Real>(u: &DVector<S>) -> DMatrix<S> {
    assert_eq!(u.len(), 3);
    let z = S::zero();
    DMatrix::from_row_slice(3, 3, &[
        z, -u[2], u[1],
        u[2], z, -u[0],
        -u[1], u[0], z,
    ])
}

/// An element of a matrix Lie group.
#[derive(Clone, Debug)]
pub struct GroupElement<S: Real = f64> {
    group: LieGroup<S>,
    m: DMatrix<S>,
}

impl<S: Real> GroupElement<S> {
    pub fn group(&self) -> &LieGroup<S> {
        &self.group
    }

    pub fn matrix(&self) -> &DMatrix<S> {
        &self.m
    }

    pub fn mul(&self, other: &Self) -> Self {
        assert_eq!(self.group, other.group, "elements of the same group");
        Self { group: self.group.clone(), m: &self.m * &other.m }
    }

    pub fn inverse(&self) -> Self {
        let m = self.m.clone().try_inverse().expect("group element is invertible");
        Self { group: self.group.clone(), m }
    }

    /// Matrix action on a column vector of the ambient size.
    pub fn apply(&self, v: &DVector<S>) -> DVector<S> {
        &self.m * v
    }
}

/// An element of the Lie algebra, stored both as an ambient matrix and as
/// coordinates in the group's basis (the two agree by construction).
#[derive(Clone, Debug)]
pub struct AlgebraElement<S: Real = f64> {
    group: LieGroup<S>,
    m: DMatrix<S>,
    coords: DVector<S>,
}

impl<S: Real> AlgebraElement<S> {
    pub fn group(&self) -> &LieGroup<S> {
        &self.group
    }

    pub fn matrix(&self) -> &DMatrix<S> {
        &self.m
    }

    pub fn coords(&self) -> &DVector<S> {
        &self.coords
    }

    pub fn add(&self, other: &Self) -> Self {
        assert_eq!(self.group, other.group, "elements of the same algebra");
        Self {
            group: self.group.clone(),
            m: &self.m + &other.m,
            coords: &self.coords + &other.coords,
        }
    }

    pub fn sub(&self, other: &Self) -> Self {
        self.add(&other.scale(-S::one()))
    }

    pub fn scale(&self, c: S) -> Self {
        Self { group: self.group.clone(), m: &self.m * c, coords: &self.coords * c }
    }

    /// Commutator `[a, b] = ab - ba` (the algebras here are closed under
    /// it; the result is projected to strip roundoff).
    pub fn bracket(&self, other: &Self) -> Self {
        assert_eq!(self.group, other.group, "elements of the same algebra");
        let m = &self.m * &other.m - &other.m * &self.m;
        let (proj, coords, _residual) = self.group.project_to_algebra(&m);
        Self { group: self.group.clone(), m: proj, coords }
    }
}

/// How a representation was built; retained for diagnostics.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum RepKind {
    Standard,
    Adjoint,
    Trivial,
    DirectSum,
    Tensor,
    Custom,
}

type ApplyFn<S> = dyn Fn(&GroupElement<S>, &DVector<S>) -> DVector<S> + Send + Sync;
type InfinitesimalFn<S> = dyn Fn(&AlgebraElement<S>, &DVector<S>) -> DVector<S> + Send + Sync;

/// A linear G-module: a group action on R^d, optionally with its analytic
/// infinitesimal action.
#[derive(Clone)]
pub struct Representation<S: Real = f64> {
    group: LieGroup<S>,
    dim: usize,
    kind: RepKind,
    apply: Arc<ApplyFn<S>>,
    infinitesimal: Option<Arc<InfinitesimalFn<S>>>,
}

impl<S: Real> std::fmt::Debug for Representation<S> {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "Representation({:?}, dim {}, {:?})", self.group.name(), self.dim, self.kind)
    }
}

impl<S: Real> Representation<S> {
    /// The defining action on R^n by the ambient matrices.
    pub fn standard(group: &LieGroup<S>) -> Self {
        let dim = group.ambient_dim();
        Self {
            group: group.clone(),
            dim,
            kind: RepKind::Standard,
            apply: Arc::new(|g, v| g.apply(v)),
            infinitesimal: Some(Arc::new(|a, v| a.matrix() * v)),
        }
    }

    /// The adjoint action on the algebra, in basis coordinates.
    pub fn adjoint(group: &LieGroup<S>) -> Self {
        let dim = group.dim();
        let g1 = group.clone();
        let g2 = group.clone();
        Self {
            group: group.clone(),
            dim,
            kind: RepKind::Adjoint,
            apply: Arc::new(move |g, v| {
                let a = g1.algebra_from_coords(v);
                g1.adjoint(g, &a).coords().clone()
            }),
            infinitesimal: Some(Arc::new(move |a, v| {
                let b = g2.algebra_from_coords(v);
                a.bracket(&b).coords().clone()
            })),
        }
    }

    /// The trivial action on R^d.
    pub fn trivial(group: &LieGroup<S>, dim: usize) -> Self {
        Self {
            group: group.clone(),
            dim,
            kind: RepKind::Trivial,
            apply: Arc::new(|_, v| v.clone()),
            infinitesimal: Some(Arc::new(|_, v| DVector::zeros(v.len()))),
        }
    }

    /// Direct sum acting blockwise on concatenated coordinates.
    pub fn direct_sum(a: &Self, b: &Self) -> Self {
        assert_eq!(a.group, b.group, "summands over the same group");
        let (da, db) = (a.dim, b.dim);
        let (aa, ab) = (a.apply.clone(), b.apply.clone());
        let infinitesimal = match (a.infinitesimal.clone(), b.infinitesimal.clone()) {
            (Some(ia), Some(ib)) => Some(Arc::new(move |x: &AlgebraElement<S>, v: &DVector<S>| {
                let mut out = DVector::zeros(da + db);
                out.rows_mut(0, da).copy_from(&ia(x, &v.rows(0, da).into_owned()));
                out.rows_mut(da, db).copy_from(&ib(x, &v.rows(da, db).into_owned()));
                out
            }) as Arc<InfinitesimalFn<S>>),
            _ => None,
        };
        Self {
            group: a.group.clone(),
            dim: da + db,
            kind: RepKind::DirectSum,
            apply: Arc::new(move |g, v| {
                let mut out = DVector::zeros(da + db);
                out.rows_mut(0, da).copy_from(&aa(g, &v.rows(0, da).into_owned()));
                out.rows_mut(da, db).copy_from(&ab(g, &v.rows(da, db).into_owned()));
                out
            }),
            infinitesimal,
        }
    }

    /// Tensor product on R^(da*db) with row-major pairing: coordinate
    /// `i*db + j` is the coefficient of `e_i (x) e_j`.
    pub fn tensor(a: &Self, b: &Self) -> Self {
        assert_eq!(a.group, b.group, "factors over the same group");
        let (da, db) = (a.dim, b.dim);
        let (ra, rb) = (a.clone(), b.clone());
        let apply = Arc::new(move |g: &GroupElement<S>, v: &DVector<S>| {
            let ma = ra.matrix_of(g);
            let mb = rb.matrix_of(g);
            let w = DMatrix::from_row_slice(da, db, v.as_slice());
            let out = ma * w * mb.transpose();
            DVector::from_iterator(da * db, out.transpose().iter().copied())
        });
        let infinitesimal = match (a.infinitesimal.is_some(), b.infinitesimal.is_some()) {
            (true, true) => {
                let (ra, rb) = (a.clone(), b.clone());
                Some(Arc::new(move |x: &AlgebraElement<S>, v: &DVector<S>| {
                    let ma = ra.infinitesimal_matrix_of(x);
                    let mb = rb.infinitesimal_matrix_of(x);
                    let w = DMatrix::from_row_slice(da, db, v.as_slice());
                    let out = &ma * &w + w * mb.transpose();
                    DVector::from_iterator(da * db, out.transpose().iter().copied())
                }) as Arc<InfinitesimalFn<S>>)
            }
            _ => None,
        };
        Self {
            group: a.group.clone(),
            dim: da * db,
            kind: RepKind::Tensor,
            apply,
            infinitesimal,
        }
    }

    /// A caller-supplied action. The analytic infinitesimal action is
    /// optional; without it, [`Self::algebra_action`] falls back to a
    /// finite-difference derivative along the exponential.
    pub fn custom(
        group: &LieGroup<S>,
        dim: usize,
        apply: Arc<ApplyFn<S>>,
        infinitesimal: Option<Arc<InfinitesimalFn<S>>>,
    ) -> Self {
        Self { group: group.clone(), dim, kind: RepKind::Custom, apply, infinitesimal }
    }

    pub fn group(&self) -> &LieGroup<S> {
        &self.group
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn kind(&self) -> RepKind {
        self.kind
    }

    pub fn apply(&self, g: &GroupElement<S>, v: &DVector<S>) -> DVector<S> {
        (self.apply)(g, v)
    }

    /// The action matrix of `g`, materialized column by column.
    pub fn matrix_of(&self, g: &GroupElement<S>) -> DMatrix<S> {
        let mut cols = Vec::with_capacity(self.dim);
        for j in 0..self.dim {
            let mut e = DVector::zeros(self.dim);
            e[j] = S::one();
            cols.push(self.apply(g, &e));
        }
        DMatrix::from_columns(&cols)
    }

    fn infinitesimal_matrix_of(&self, a: &AlgebraElement<S>) -> DMatrix<S> {
        let inf = self.infinitesimal.as_ref().expect("analytic infinitesimal action");
        let mut cols = Vec::with_capacity(self.dim);
        for j in 0..self.dim {
            let mut e = DVector::zeros(self.dim);
            e[j] = S::one();
            cols.push(inf(a, &e));
        }
        DMatrix::from_columns(&cols)
    }

    /// Infinitesimal action of `a` on `v`: analytic when the representation
    /// carries one, otherwise the stencil derivative of
    /// `t -> exp(t a) . v` at `t = 0`.
    pub fn algebra_action(&self, a: &AlgebraElement<S>, v: &DVector<S>, fd: &FdConfig<S>) -> DVector<S> {
        match &self.infinitesimal {
            Some(inf) => inf(a, v),
            None => fd.derivative(|t| {
                let g = self.group.exp(&a.scale(t));
                self.apply(&g, v)
            }),
        }
    }
}
