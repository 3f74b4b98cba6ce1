//! Seeded random test objects: chart points, fiber points, invariant
//! fields, and bundle maps with mild polynomial coordinate expressions.
//!
//! Every generator draws from a caller-supplied [`SplitMix64`] stream, so
//! a case that seeds one stream per sample reproduces its objects exactly
//! across runs. Coefficient ranges are kept small enough that stencil
//! flows stay inside guarded charts and group values stay far from any
//! branch boundary.

use darboux::{
    vec_matrix, BundleMap, Chart, FiberData, FiberPoint, GSpace, InvariantVectorField, LieGroup,
    NaturalBundleKind, NaturalMap, Representation, Section, SplitMix64, VectorField,
};
use nalgebra::{DMatrix, DVector};

/// Margin (as a fraction of each interval) kept between samples and the
/// chart boundary: the flow guard plus headroom for stencil excursions.
const SAMPLE_MARGIN: f64 = 0.12;

pub fn chart_point(chart: &Chart, rng: &mut SplitMix64) -> DVector<f64> {
    DVector::from_iterator(
        chart.dim(),
        chart.bounds().iter().map(|&(lo, hi)| {
            let pad = (hi - lo) * SAMPLE_MARGIN;
            rng.uniform(lo + pad, hi - pad)
        }),
    )
}

pub fn span_vector(dim: usize, rng: &mut SplitMix64) -> DVector<f64> {
    DVector::from_iterator(dim, (0..dim).map(|_| rng.uniform(-1.0, 1.0)))
}

fn coeff_vector(dim: usize, scale: f64, rng: &mut SplitMix64) -> DVector<f64> {
    DVector::from_iterator(dim, (0..dim).map(|_| rng.uniform(-scale, scale)))
}

fn coeff_matrix(rows: usize, cols: usize, scale: f64, rng: &mut SplitMix64) -> DMatrix<f64> {
    DMatrix::from_iterator(rows, cols, (0..rows * cols).map(|_| rng.uniform(-scale, scale)))
}

/// Random fiber data of a natural kind, spanning vectors uniform in
/// [-1, 1]^n; formal-sum kinds get two decomposable terms.
pub fn fiber_data(kind: &NaturalBundleKind, n: usize, rng: &mut SplitMix64) -> FiberData<f64> {
    match kind {
        NaturalBundleKind::Base => FiberData::Base,
        NaturalBundleKind::Tangent => FiberData::Tangent(span_vector(n, rng)),
        NaturalBundleKind::ExtPower(k) => FiberData::ExtPower {
            k: *k,
            terms: vec![(
                rng.uniform(0.4, 1.2),
                (0..*k).map(|_| span_vector(n, rng)).collect(),
            )],
        },
        NaturalBundleKind::TensorSquare => FiberData::TensorSquare(vec![
            (rng.uniform(0.4, 1.2), span_vector(n, rng), span_vector(n, rng)),
            (rng.uniform(-1.2, -0.4), span_vector(n, rng), span_vector(n, rng)),
        ]),
        NaturalBundleKind::Pair(a, b) => {
            FiberData::Pair(Box::new(fiber_data(a, n, rng)), Box::new(fiber_data(b, n, rng)))
        }
    }
}

pub fn fiber_point(
    chart: &Chart,
    kind: &NaturalBundleKind,
    rng: &mut SplitMix64,
) -> FiberPoint<f64> {
    let x = chart_point(chart, rng);
    let data = fiber_data(kind, chart.dim(), rng);
    FiberPoint { x, data }
}

pub fn algebra_coords(group: &LieGroup, scale: f64, rng: &mut SplitMix64) -> DVector<f64> {
    coeff_vector(group.dim(), scale, rng)
}

pub fn group_element(
    group: &LieGroup,
    scale: f64,
    rng: &mut SplitMix64,
) -> darboux::GroupElement {
    group.exp(&group.algebra_from_coords(&algebra_coords(group, scale, rng)))
}

/// An affine base field `x -> b + C x` with its analytic Jacobian.
pub fn affine_field(chart: &Chart, rng: &mut SplitMix64) -> VectorField {
    let n = chart.dim();
    let b = coeff_vector(n, 0.35, rng);
    let c = coeff_matrix(n, n, 0.3, rng);
    let cj = c.clone();
    VectorField::new(chart.clone(), move |x| &b + &c * x).with_jacobian(move |_| cj.clone())
}

/// An affine algebra-valued section `x -> d + F x` in basis coordinates.
pub fn affine_algebra_section(
    chart: &Chart,
    group: &LieGroup,
    scale: f64,
    rng: &mut SplitMix64,
) -> Section {
    let k = group.dim();
    let d = coeff_vector(k, scale, rng);
    let f = coeff_matrix(k, chart.dim(), scale, rng);
    Section::new(chart.clone(), k, move |x| &d + &f * x)
}

/// A random right-invariant field: affine base part, affine vertical part.
pub fn invariant_field(
    chart: &Chart,
    group: &LieGroup,
    rng: &mut SplitMix64,
) -> InvariantVectorField {
    let base = affine_field(chart, rng);
    let sec = affine_algebra_section(chart, group, 0.5, rng);
    let g = group.clone();
    InvariantVectorField::new(base, move |x| g.algebra_from_coords(&sec.eval(x)))
}

fn tangent_of(y: &FiberPoint<f64>) -> &DVector<f64> {
    match &y.data {
        FiberData::Tangent(v) => v,
        other => panic!("expected tangent data, found {:?}", other.kind()),
    }
}

/// A module-valued map on the tangent bundle, affine in `x` and
/// quadratically nonlinear in the fiber vector.
pub fn module_map(chart: &Chart, space: &GSpace, rng: &mut SplitMix64) -> BundleMap {
    let n = chart.dim();
    let m = space.ambient_dim();
    let c = coeff_vector(m, 0.6, rng);
    let a = coeff_matrix(m, n, 0.5, rng);
    let b = coeff_matrix(m, n, 0.6, rng);
    let e = coeff_matrix(m, n, 0.35, rng);
    BundleMap::new(NaturalBundleKind::Tangent, space.clone(), false, move |y| {
        let v = tangent_of(y);
        let quad =
            DVector::from_iterator(n, (0..n).map(|j| v[j] * v[(j + 1) % n]));
        &c + &a * &y.x + &b * v + &e * quad
    })
}

/// A conjugation-valued map on the tangent bundle: exp of a quadratic
/// algebra expression, scaled to keep values well inside the log branch.
pub fn conj_map(chart: &Chart, group: &LieGroup, rng: &mut SplitMix64) -> BundleMap {
    let n = chart.dim();
    let k = group.dim();
    let c = coeff_vector(k, 0.3, rng);
    let a = coeff_matrix(k, n, 0.25, rng);
    let b = coeff_matrix(k, n, 0.25, rng);
    let g = group.clone();
    BundleMap::new(
        NaturalBundleKind::Tangent,
        GSpace::conjugation(group),
        false,
        move |y| {
            let v = tangent_of(y);
            let coords = &c + &a * &y.x + &b * v;
            vec_matrix(g.exp(&g.algebra_from_coords(&coords)).matrix())
        },
    )
}

/// A unit-sphere-valued map on the tangent bundle (rotation groups only):
/// a normalized affine expression kept away from the origin.
pub fn sphere_map(chart: &Chart, group: &LieGroup, rng: &mut SplitMix64) -> BundleMap {
    let n = chart.dim();
    let m = group.ambient_dim();
    let mut c = coeff_vector(m, 0.4, rng);
    c[0] += 1.5;
    let a = coeff_matrix(m, n, 0.3, rng);
    let b = coeff_matrix(m, n, 0.3, rng);
    BundleMap::new(NaturalBundleKind::Tangent, GSpace::sphere2(group), false, move |y| {
        let raw = &c + &a * &y.x + &b * tangent_of(y);
        let norm = raw.norm();
        raw / norm
    })
}

/// A random module-valued map whose source kind matches the target of a
/// natural map, linear over formal sums where the kind requires it.
pub fn natural_target_map(
    tag: NaturalMap,
    chart: &Chart,
    rep: &Representation,
    rng: &mut SplitMix64,
) -> BundleMap {
    let n = chart.dim();
    let m = rep.dim();
    let space = GSpace::module(rep.clone());
    match tag {
        NaturalMap::DiagonalBase => {
            let c = coeff_vector(m, 0.6, rng);
            let a = coeff_matrix(m, n, 0.5, rng);
            let q = coeff_matrix(m, n, 0.3, rng);
            let kind =
                NaturalBundleKind::pair(NaturalBundleKind::Base, NaturalBundleKind::Base);
            BundleMap::new(kind, space, false, move |y| {
                let sq = DVector::from_iterator(n, (0..n).map(|j| y.x[j] * y.x[j]));
                &c + &a * &y.x + &q * sq
            })
        }
        NaturalMap::InsertBase => {
            let c = coeff_vector(m, 0.6, rng);
            let a = coeff_matrix(m, n, 0.5, rng);
            let b = coeff_matrix(m, n, 0.6, rng);
            let e = coeff_matrix(m, n, 0.3, rng);
            let kind =
                NaturalBundleKind::pair(NaturalBundleKind::Base, NaturalBundleKind::Tangent);
            BundleMap::new(kind, space, false, move |y| {
                let v = match &y.data {
                    FiberData::Pair(_, t) => match t.as_ref() {
                        FiberData::Tangent(v) => v.clone(),
                        other => panic!("expected tangent half, found {:?}", other.kind()),
                    },
                    other => panic!("expected pair data, found {:?}", other.kind()),
                };
                let quad = DVector::from_iterator(n, (0..n).map(|j| v[j] * v[(j + 1) % n]));
                &c + &a * &y.x + &b * &v + &e * quad
            })
        }
        NaturalMap::WedgeToTensor => {
            let t = bilinear_coeffs(m, n, rng);
            BundleMap::linear_on_decomposables(
                NaturalBundleKind::TensorSquare,
                space,
                move |y| {
                    let terms = match &y.data {
                        FiberData::TensorSquare(terms) => terms,
                        other => panic!("expected tensor data, found {:?}", other.kind()),
                    };
                    bilinear_apply(&t, &y.x, terms)
                },
            )
        }
        NaturalMap::ShuffleSplit { k: 1, l: 1 } => {
            let t = bilinear_coeffs(m, n, rng);
            let kind = NaturalBundleKind::pair(
                NaturalBundleKind::ExtPower(1),
                NaturalBundleKind::ExtPower(1),
            );
            BundleMap::new(kind, space, true, move |y| {
                let (ta, tb) = match &y.data {
                    FiberData::Pair(a, b) => (ext1_terms(a), ext1_terms(b)),
                    other => panic!("expected pair data, found {:?}", other.kind()),
                };
                let mut cross = Vec::new();
                for (ca, u) in &ta {
                    for (cb, v) in &tb {
                        cross.push((ca * cb, u.clone(), v.clone()));
                    }
                }
                bilinear_apply(&t, &y.x, &cross)
            })
        }
        NaturalMap::ShuffleSplit { .. } => {
            panic!("random maps are provided for the (1, 1) shuffle only")
        }
    }
}

type Bilinear = Vec<(DMatrix<f64>, DMatrix<f64>)>;

/// Per output row: a constant matrix and a linear-in-x1 correction.
fn bilinear_coeffs(m: usize, n: usize, rng: &mut SplitMix64) -> Bilinear {
    (0..m)
        .map(|_| (coeff_matrix(n, n, 0.6, rng), coeff_matrix(n, n, 0.3, rng)))
        .collect()
}

fn bilinear_apply(
    t: &Bilinear,
    x: &DVector<f64>,
    terms: &[(f64, DVector<f64>, DVector<f64>)],
) -> DVector<f64> {
    DVector::from_iterator(
        t.len(),
        t.iter().map(|(m0, m1)| {
            terms
                .iter()
                .map(|(c, u, v)| c * (u.dot(&(m0 * v)) + x[0] * u.dot(&(m1 * v))))
                .sum::<f64>()
        }),
    )
}

fn ext1_terms(data: &FiberData<f64>) -> Vec<(f64, DVector<f64>)> {
    match data {
        FiberData::Tangent(v) => vec![(1.0, v.clone())],
        FiberData::ExtPower { k: 1, terms } => {
            terms.iter().map(|(c, vs)| (*c, vs[0].clone())).collect()
        }
        other => panic!("expected a degree-one factor, found {:?}", other.kind()),
    }
}

/// A module-valued 1-form `(x, v) -> B(x) v` with `B` affine in `x1`.
pub fn linear_form(
    chart: &Chart,
    rep: &darboux::Representation,
    rng: &mut SplitMix64,
) -> darboux::ModuleMap {
    let n = chart.dim();
    let b0 = coeff_matrix(rep.dim(), n, 0.6, rng);
    let b1 = coeff_matrix(rep.dim(), n, 0.3, rng);
    darboux::ModuleMap::new(NaturalBundleKind::Tangent, rep.clone(), move |y| {
        let v = tangent_of(y);
        Ok(&b0 * v + (&b1 * v) * y.x[0])
    })
}

/// A module-valued 2-form, linear on exterior coordinates with an
/// `x1`-affine coefficient matrix.
pub fn two_form(
    chart: &Chart,
    rep: &darboux::Representation,
    rng: &mut SplitMix64,
) -> darboux::ModuleMap {
    let n = chart.dim();
    let cols = n * (n - 1) / 2;
    let c0 = coeff_matrix(rep.dim(), cols, 0.6, rng);
    let c1 = coeff_matrix(rep.dim(), cols, 0.3, rng);
    darboux::ModuleMap::new(NaturalBundleKind::ExtPower(2), rep.clone(), move |y| {
        let w = darboux::natural::ext_coords(&y.data, n);
        Ok(&c0 * &w + (&c1 * &w) * y.x[0])
    })
}

/// Relative error with a degeneracy-safe denominator.
pub fn rel_err(got: &DVector<f64>, want: &DVector<f64>) -> f64 {
    (got - want).amax() / (1.0 + want.amax())
}

pub fn abs_err(got: &DVector<f64>, want: &DVector<f64>) -> f64 {
    (got - want).amax()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn generators_are_reproducible() {
        let chart = Chart::centered(3, 1.5);
        let group = LieGroup::special_orthogonal3();
        let mut r1 = SplitMix64::stream(9, 4);
        let mut r2 = SplitMix64::stream(9, 4);
        assert_eq!(chart_point(&chart, &mut r1), chart_point(&chart, &mut r2));
        let f1 = affine_field(&chart, &mut r1);
        let f2 = affine_field(&chart, &mut r2);
        let x = DVector::from_vec(vec![0.2, -0.3, 0.1]);
        assert_eq!(f1.eval(&x), f2.eval(&x));
        let g1 = group_element(&group, 0.8, &mut r1);
        let g2 = group_element(&group, 0.8, &mut r2);
        assert_eq!(g1.matrix(), g2.matrix());
    }

    #[test]
    fn samples_respect_the_guard_margin() {
        let chart = Chart::new(vec![(-1.0, 1.0), (0.0, 4.0)]);
        let mut rng = SplitMix64::new(3);
        for _ in 0..200 {
            let x = chart_point(&chart, &mut rng);
            assert!(chart.contains_guarded(&x, 0.1));
        }
    }

    #[test]
    fn sphere_map_lands_on_the_sphere() {
        let chart = Chart::centered(2, 1.0);
        let group = LieGroup::special_orthogonal3();
        let mut rng = SplitMix64::new(11);
        let h = sphere_map(&chart, &group, &mut rng);
        let y = fiber_point(&chart, &NaturalBundleKind::Tangent, &mut rng);
        let z = h.eval(&y).expect("eval");
        assert!((z.norm() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn relative_error_uses_shifted_denominator() {
        let got = DVector::from_vec(vec![1.0, 0.0]);
        let want = DVector::from_vec(vec![0.0, 0.0]);
        assert_eq!(rel_err(&got, &want), 1.0);
        let want2 = DVector::from_vec(vec![3.0, 0.0]);
        assert_eq!(rel_err(&got, &want2), 0.5);
    }
}
