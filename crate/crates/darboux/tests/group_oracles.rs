//! Oracle tests for the group layer: frozen values and independent
//! closed-form references for exp, log, adjoint, projection, and the
//! representation machinery.

use darboux::{Error, FdConfig, GroupName, LieGroup, Representation, SplitMix64};
use nalgebra::{DMatrix, DVector};
use proptest::prelude::*;

/// Rodrigues rotation formula, written out independently of the series
/// exponential: `R = I + sin(t)/t K + (1 - cos(t))/t^2 K^2`, `K = hat(u)`.
fn rodrigues(u: &DVector<f64>) -> DMatrix<f64> {
    let theta = u.norm();
    let id = DMatrix::identity(3, 3);
    if theta < 1e-14 {
        return id;
    }
    let k = DMatrix::from_row_slice(
        3,
        3,
        &[0.0, -u[2], u[1], u[2], 0.0, -u[0], -u[1], u[0], 0.0],
    );
    let k2 = &k * &k;
    id + &k * (theta.sin() / theta) + k2 * ((1.0 - theta.cos()) / (theta * theta))
}

fn vec3(a: f64, b: f64, c: f64) -> DVector<f64> {
    DVector::from_vec(vec![a, b, c])
}

fn max_abs(m: &DMatrix<f64>) -> f64 {
    m.amax()
}

#[test]
fn exp_so3_quarter_turn_frozen() {
    let g = LieGroup::special_orthogonal3();
    let a = g.algebra_from_coords(&vec3(0.0, 0.0, std::f64::consts::FRAC_PI_2));
    let expected = DMatrix::from_row_slice(3, 3, &[0.0, -1.0, 0.0, 1.0, 0.0, 0.0, 0.0, 0.0, 1.0]);
    assert!(max_abs(&(g.exp(&a).matrix() - expected)) < 1e-14);
}

#[test]
fn exp_so3_matches_rodrigues() {
    let g = LieGroup::special_orthogonal3();
    let mut rng = SplitMix64::new(11);
    for _ in 0..25 {
        // Norms up to ~5.2 exercise several scaling-and-squaring rounds.
        let u = vec3(rng.uniform(-3.0, 3.0), rng.uniform(-3.0, 3.0), rng.uniform(-3.0, 3.0));
        let a = g.algebra_from_coords(&u);
        let diff = g.exp(&a).matrix() - rodrigues(&u);
        assert!(max_abs(&diff) < 1e-13, "rodrigues mismatch {:.3e}", max_abs(&diff));
    }
}

#[test]
fn exp_gl2_nilpotent_and_diagonal_frozen() {
    let g = LieGroup::general_linear(2);
    // Nilpotent: exp([[0,1],[0,0]]) = [[1,1],[0,1]] exactly.
    let n = g.algebra(DMatrix::from_row_slice(2, 2, &[0.0, 1.0, 0.0, 0.0])).unwrap();
    let expected = DMatrix::from_row_slice(2, 2, &[1.0, 1.0, 0.0, 1.0]);
    assert!(max_abs(&(g.exp(&n).matrix() - expected)) < 1e-15);
    // Diagonal: exp(diag(a, b)) = diag(e^a, e^b).
    let d = g.algebra(DMatrix::from_row_slice(2, 2, &[0.3, 0.0, 0.0, -0.7])).unwrap();
    let expected = DMatrix::from_row_slice(2, 2, &[0.3f64.exp(), 0.0, 0.0, (-0.7f64).exp()]);
    assert!(max_abs(&(g.exp(&d).matrix() - expected)) < 1e-14);
}

#[test]
fn exp_translation_is_affine_shift() {
    let g = LieGroup::translation(2);
    assert_eq!(g.dim(), 2);
    let a = g.algebra_from_coords(&DVector::from_vec(vec![0.4, -0.2]));
    let expected =
        DMatrix::from_row_slice(3, 3, &[1.0, 0.0, 0.4, 0.0, 1.0, -0.2, 0.0, 0.0, 1.0]);
    assert!(max_abs(&(g.exp(&a).matrix() - expected)) < 1e-15);
}

#[test]
fn log_frozen_rotation() {
    let g = LieGroup::special_orthogonal3();
    let r = g.exp(&g.algebra_from_coords(&vec3(0.0, 0.0, 0.3)));
    let back = g.log(&r).unwrap();
    assert!((back.coords() - vec3(0.0, 0.0, 0.3)).amax() < 1e-12);
}

#[test]
fn log_branch_boundary_is_sharp() {
    // For a rotation by angle t, ||R - I||_2 = 2 sin(t/2), which hits the
    // branch cutoff 1 exactly at t = pi/3.
    let g = LieGroup::special_orthogonal3();
    let at = |t: f64| g.exp(&g.algebra_from_coords(&vec3(0.0, 0.0, t)));
    match g.log(&at(std::f64::consts::FRAC_PI_3)) {
        Err(Error::OutOfBranch { norm }) => assert!((norm - 1.0).abs() < 1e-12),
        other => panic!("expected OutOfBranch, got {other:?}"),
    }
    let ok = g.log(&at(1.04)).unwrap();
    assert!((ok.coords() - vec3(0.0, 0.0, 1.04)).amax() < 1e-12);
}

#[test]
fn log_after_inverse_scaling_far_from_series_radius() {
    // Angle 1.0 needs a couple of square roots before the series applies.
    let g = LieGroup::special_orthogonal3();
    let u = vec3(0.48, -0.64, 0.6);
    let r = g.exp(&g.algebra_from_coords(&u));
    let back = g.log(&r).unwrap();
    assert!((back.coords() - u).amax() < 1e-11);
}

#[test]
fn adjoint_so3_is_rotation_of_coordinates() {
    // Ad_R(hat(u)) = hat(R u), so in basis coordinates Ad_R is R itself.
    let g = LieGroup::special_orthogonal3();
    let mut rng = SplitMix64::new(12);
    for _ in 0..10 {
        let w = vec3(rng.uniform(-2.0, 2.0), rng.uniform(-2.0, 2.0), rng.uniform(-2.0, 2.0));
        let u = vec3(rng.uniform(-1.0, 1.0), rng.uniform(-1.0, 1.0), rng.uniform(-1.0, 1.0));
        let r = g.exp(&g.algebra_from_coords(&w));
        let ad = g.adjoint(&r, &g.algebra_from_coords(&u));
        assert!((ad.coords() - r.matrix() * &u).amax() < 1e-12);
    }
}

#[test]
fn adjoint_representation_matrix_equals_rotation() {
    let g = LieGroup::special_orthogonal3();
    let rep = Representation::adjoint(&g);
    let r = g.exp(&g.algebra_from_coords(&vec3(0.7, -0.2, 0.4)));
    assert!(max_abs(&(rep.matrix_of(&r) - r.matrix())) < 1e-12);
}

#[test]
fn standard_rep_infinitesimal_is_cross_product() {
    let g = LieGroup::special_orthogonal3();
    let rep = Representation::standard(&g);
    let fd = FdConfig::default();
    let u = vec3(0.3, -0.8, 0.5);
    let v = vec3(1.0, 0.2, -0.6);
    let a = g.algebra_from_coords(&u);
    let cross = vec3(
        u[1] * v[2] - u[2] * v[1],
        u[2] * v[0] - u[0] * v[2],
        u[0] * v[1] - u[1] * v[0],
    );
    // Analytic infinitesimal action.
    assert!((rep.algebra_action(&a, &v, &fd) - &cross).amax() < 1e-14);
    // Stencil along exp(t a) v agrees with it.
    let stencil = fd.derivative(|t| rep.apply(&g.exp(&a.scale(t)), &v));
    assert!((stencil - &cross).amax() < 1e-10);
}

#[test]
fn maurer_cartan_derivative_recovers_generator() {
    let g = LieGroup::special_orthogonal3();
    let g0 = g.exp(&g.algebra_from_coords(&vec3(0.2, 0.5, -0.3)));
    let a = g.algebra_from_coords(&vec3(-0.6, 0.1, 0.8));
    let fd = FdConfig::default();
    let curve = |t: f64| g0.mul(&g.exp(&a.scale(t))).matrix().clone();
    let got = g.maurer_cartan_derivative(curve, 0.0, &fd).unwrap();
    assert!((got.coords() - a.coords()).amax() < 1e-8);
}

#[test]
fn projection_so3_is_skew_part() {
    let g = LieGroup::special_orthogonal3();
    let mut rng = SplitMix64::new(13);
    let m = DMatrix::from_fn(3, 3, |_, _| rng.uniform(-1.0, 1.0));
    let (proj, coords, _residual) = g.project_to_algebra(&m);
    let skew = (&m - m.transpose()) * 0.5;
    assert!(max_abs(&(&proj - &skew)) < 1e-12);
    // vee of the skew part in the hat basis.
    let vee = vec3(skew[(2, 1)], skew[(0, 2)], skew[(1, 0)]);
    assert!((coords - vee).amax() < 1e-12);
}

#[test]
fn projection_gl_is_identity() {
    let g = LieGroup::general_linear(3);
    let mut rng = SplitMix64::new(14);
    let m = DMatrix::from_fn(3, 3, |_, _| rng.uniform(-1.0, 1.0));
    let (proj, _, residual) = g.project_to_algebra(&m);
    assert!(max_abs(&(&proj - &m)) < 1e-12);
    assert!(residual < 1e-12);
}

#[test]
fn tensor_representation_is_kronecker_on_decomposables() {
    let g = LieGroup::special_orthogonal3();
    let std = Representation::standard(&g);
    let rep = Representation::tensor(&std, &std);
    let r = g.exp(&g.algebra_from_coords(&vec3(0.4, 0.9, -0.3)));
    let u = vec3(0.5, -1.0, 0.25);
    let v = vec3(-0.75, 0.4, 1.1);
    let mut uv = DVector::zeros(9);
    let (ru, rv) = (r.matrix() * &u, r.matrix() * &v);
    let mut ruv = DVector::zeros(9);
    for i in 0..3 {
        for j in 0..3 {
            uv[3 * i + j] = u[i] * v[j];
            ruv[3 * i + j] = ru[i] * rv[j];
        }
    }
    assert!((rep.apply(&r, &uv) - ruv).amax() < 1e-13);
}

#[test]
fn direct_sum_acts_blockwise() {
    let g = LieGroup::special_orthogonal3();
    let std = Representation::standard(&g);
    let adj = Representation::adjoint(&g);
    let rep = Representation::direct_sum(&std, &adj);
    assert_eq!(rep.dim(), 6);
    let r = g.exp(&g.algebra_from_coords(&vec3(-0.2, 0.6, 0.1)));
    let v = DVector::from_vec(vec![1.0, -0.5, 0.25, 0.4, 0.9, -1.2]);
    let got = rep.apply(&r, &v);
    let top = std.apply(&r, &v.rows(0, 3).into_owned());
    let bottom = adj.apply(&r, &v.rows(3, 3).into_owned());
    assert!((got.rows(0, 3) - top).amax() < 1e-14);
    assert!((got.rows(3, 3) - bottom).amax() < 1e-14);
}

#[test]
fn membership_checks_reject_outsiders() {
    let so3 = LieGroup::special_orthogonal3();
    let stretched = DMatrix::from_row_slice(3, 3, &[1.0, 0.0, 0.0, 0.0, 1.0, 0.0, 0.0, 0.0, 2.0]);
    assert!(matches!(so3.element(stretched), Err(Error::NotInGroup { .. })));
    // Orthogonal with determinant -1 is not a rotation.
    let reflected =
        DMatrix::from_row_slice(3, 3, &[1.0, 0.0, 0.0, 0.0, 1.0, 0.0, 0.0, 0.0, -1.0]);
    assert!(matches!(so3.element(reflected), Err(Error::NotInGroup { .. })));

    let gl2 = LieGroup::general_linear(2);
    let singular = DMatrix::from_row_slice(2, 2, &[1.0, 2.0, 2.0, 4.0]);
    assert!(matches!(gl2.element(singular), Err(Error::NotInGroup { .. })));

    let t2 = LieGroup::translation(2);
    let crooked = DMatrix::from_row_slice(3, 3, &[1.0, 0.1, 0.4, 0.0, 1.0, -0.2, 0.0, 0.0, 1.0]);
    assert!(matches!(t2.element(crooked), Err(Error::NotInGroup { .. })));
}

#[test]
fn group_names_and_dimensions() {
    assert_eq!(*LieGroup::<f64>::general_linear(3).name(), GroupName::GeneralLinear(3));
    assert_eq!(LieGroup::<f64>::general_linear(3).dim(), 9);
    assert_eq!(LieGroup::<f64>::special_orthogonal3().dim(), 3);
    assert_eq!(LieGroup::<f64>::translation(0).dim(), 0);
    assert_eq!(LieGroup::<f64>::translation(3).ambient_dim(), 4);
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn prop_exp_times_exp_of_negative_is_identity(
        c in prop::array::uniform3(-2.0f64..2.0),
    ) {
        let g = LieGroup::special_orthogonal3();
        let a = g.algebra_from_coords(&vec3(c[0], c[1], c[2]));
        let prod = g.exp(&a).mul(&g.exp(&a.scale(-1.0)));
        prop_assert!(max_abs(&(prod.matrix() - DMatrix::identity(3, 3))) < 1e-12);
    }

    #[test]
    fn prop_log_exp_roundtrip_small(
        c in prop::array::uniform3(-0.4f64..0.4),
    ) {
        let g = LieGroup::special_orthogonal3();
        let a = g.algebra_from_coords(&vec3(c[0], c[1], c[2]));
        let back = g.log(&g.exp(&a)).unwrap();
        prop_assert!((back.coords() - a.coords()).amax() < 1e-11);
    }

    #[test]
    fn prop_log_exp_roundtrip_gl2(
        c in prop::array::uniform4(-0.3f64..0.3),
    ) {
        let g = LieGroup::general_linear(2);
        let a = g.algebra_from_coords(&DVector::from_vec(c.to_vec()));
        let back = g.log(&g.exp(&a)).unwrap();
        prop_assert!((back.coords() - a.coords()).amax() < 1e-11);
    }

    #[test]
    fn prop_bracket_is_antisymmetric_and_satisfies_jacobi(
        ca in prop::array::uniform3(-1.0f64..1.0),
        cb in prop::array::uniform3(-1.0f64..1.0),
        cc in prop::array::uniform3(-1.0f64..1.0),
    ) {
        let g = LieGroup::special_orthogonal3();
        let a = g.algebra_from_coords(&vec3(ca[0], ca[1], ca[2]));
        let b = g.algebra_from_coords(&vec3(cb[0], cb[1], cb[2]));
        let c = g.algebra_from_coords(&vec3(cc[0], cc[1], cc[2]));
        let anti = a.bracket(&b).add(&b.bracket(&a));
        prop_assert!(anti.coords().amax() < 1e-13);
        let jacobi = a.bracket(&b.bracket(&c))
            .add(&b.bracket(&c.bracket(&a)))
            .add(&c.bracket(&a.bracket(&b)));
        prop_assert!(jacobi.coords().amax() < 1e-12);
    }

    #[test]
    fn prop_projection_is_idempotent(
        m in prop::array::uniform9(-1.0f64..1.0),
    ) {
        let g = LieGroup::special_orthogonal3();
        let mat = DMatrix::from_row_slice(3, 3, &m);
        let (proj, _, _) = g.project_to_algebra(&mat);
        let (proj2, _, residual) = g.project_to_algebra(&proj);
        prop_assert!(max_abs(&(proj2 - proj)) < 1e-13);
        prop_assert!(residual < 1e-12);
    }
}
