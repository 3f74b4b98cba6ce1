//! Oracle tests for chart flows: linear flows against the series
//! exponential, variational transport against difference quotients, the
//! bracket against the commutator of flows, and the RK4 error order.

use darboux::{
    canonical_flow, flow, lie_bracket, tangent_flow, tangent_flow_multi, Chart, ChartMap, Error,
    FiberPoint, FlowConfig, VectorField,
};
use nalgebra::{DMatrix, DVector};

/// Series exponential `exp(A) x`, accurate to machine precision for the
/// small matrices used here; independent of the group-layer exponential.
fn series_exp(a: &DMatrix<f64>, t: f64) -> DMatrix<f64> {
    let n = a.nrows();
    let mut total = DMatrix::identity(n, n);
    let mut term = DMatrix::identity(n, n);
    for k in 1..40 {
        term = (&term * a) * (t / k as f64);
        total += &term;
    }
    total
}

fn vec2(a: f64, b: f64) -> DVector<f64> {
    DVector::from_vec(vec![a, b])
}

fn linear_field(a: DMatrix<f64>, chart: Chart) -> VectorField {
    let a2 = a.clone();
    VectorField::new(chart, move |x| &a * x).with_jacobian(move |_| a2.clone())
}

#[test]
fn linear_flow_matches_series_exponential() {
    let a = DMatrix::from_row_slice(2, 2, &[0.2, 1.0, -1.0, -0.1]);
    let field = linear_field(a.clone(), Chart::centered(2, 3.0));
    let cfg = FlowConfig::default();
    let x0 = vec2(0.6, -0.4);
    let got = flow(&field, &x0, 0.7, &cfg).unwrap();
    let expected = series_exp(&a, 0.7) * &x0;
    assert!((got - expected).amax() < 1e-8);
}

#[test]
fn flow_of_zero_field_is_identity() {
    let field = VectorField::zero(Chart::centered(3, 1.0));
    let x0 = DVector::from_vec(vec![0.2, -0.5, 0.1]);
    let got = flow(&field, &x0, 1.0, &FlowConfig::default()).unwrap();
    assert_eq!(got, x0);
}

#[test]
fn flow_reverses_exactly_enough() {
    let chart = Chart::centered(2, 2.0);
    let field = VectorField::new(chart, |x: &DVector<f64>| {
        vec2(x[1].sin(), x[0] * x[0] - 0.3 * x[1])
    });
    let cfg = FlowConfig::default();
    let x0 = vec2(0.4, 0.7);
    let fwd = flow(&field, &x0, 0.5, &cfg).unwrap();
    let back = flow(&field, &fwd, -0.5, &cfg).unwrap();
    assert!((back - x0).amax() < 1e-10);
}

#[test]
fn tangent_flow_matches_difference_quotient() {
    let chart = Chart::centered(2, 2.0);
    let field = VectorField::new(chart.clone(), |x: &DVector<f64>| {
        vec2(x[1].sin(), x[0] * x[0] - 0.3 * x[1])
    })
    .with_jacobian(|x: &DVector<f64>| {
        DMatrix::from_row_slice(2, 2, &[0.0, x[1].cos(), 2.0 * x[0], -0.3])
    });
    let cfg = FlowConfig::default();
    let x0 = vec2(0.3, -0.2);
    let v = vec2(1.0, 0.5);
    let (_, vt) = tangent_flow(&field, &x0, &v, 0.4, &cfg).unwrap();
    let eps = 1e-5;
    let plus = flow(&field, &(&x0 + &v * eps), 0.4, &cfg).unwrap();
    let minus = flow(&field, &(&x0 - &v * eps), 0.4, &cfg).unwrap();
    let quotient = (plus - minus) / (2.0 * eps);
    assert!((vt - quotient).amax() < 1e-6);
}

#[test]
fn tangent_flow_fd_jacobian_agrees_with_analytic() {
    let chart = Chart::centered(2, 2.0);
    let eval = |x: &DVector<f64>| vec2(x[1].sin(), x[0] * x[0] - 0.3 * x[1]);
    let plain = VectorField::new(chart.clone(), eval);
    let exact = VectorField::new(chart, eval).with_jacobian(|x: &DVector<f64>| {
        DMatrix::from_row_slice(2, 2, &[0.0, x[1].cos(), 2.0 * x[0], -0.3])
    });
    let cfg = FlowConfig::default();
    let x0 = vec2(0.3, -0.2);
    let v = vec2(-0.6, 1.0);
    let (_, v_fd) = tangent_flow(&plain, &x0, &v, 0.4, &cfg).unwrap();
    let (_, v_exact) = tangent_flow(&exact, &x0, &v, 0.4, &cfg).unwrap();
    assert!((v_fd - v_exact).amax() < 1e-8);
}

#[test]
fn tangent_flow_multi_matches_single_runs() {
    let chart = Chart::centered(2, 2.0);
    let field = VectorField::new(chart, |x: &DVector<f64>| {
        vec2(0.3 + x[1], -0.2 * x[0] * x[1])
    });
    let cfg = FlowConfig::default();
    let x0 = vec2(0.1, 0.5);
    let v1 = vec2(1.0, 0.0);
    let v2 = vec2(0.3, -0.8);
    let (x, vs) = tangent_flow_multi(&field, &x0, &[v1.clone(), v2.clone()], 0.6, &cfg).unwrap();
    let (x1, w1) = tangent_flow(&field, &x0, &v1, 0.6, &cfg).unwrap();
    let (_, w2) = tangent_flow(&field, &x0, &v2, 0.6, &cfg).unwrap();
    assert_eq!(x, x1);
    assert_eq!(vs[0], w1);
    assert_eq!(vs[1], w2);
}

#[test]
fn bracket_matches_commutator_of_flows() {
    let chart = Chart::centered(2, 2.0);
    let xf = VectorField::new(chart.clone(), |p: &DVector<f64>| vec2(p[1] * p[1], p[0]));
    let yf = VectorField::new(chart, |p: &DVector<f64>| vec2(p[0] * p[1], -p[1]));
    let x0 = vec2(0.4, 0.3);
    let bracket = lie_bracket(&xf, &yf).eval(&x0);
    // Phi^Y_{-t} Phi^X_{-t} Phi^Y_t Phi^X_t x = x + t^2 [X, Y](x) + O(t^3);
    // symmetrizing in t kills the cubic term.
    let cfg = FlowConfig::default();
    let chi = |t: f64| {
        let p = flow(&xf, &x0, t, &cfg).unwrap();
        let p = flow(&yf, &p, t, &cfg).unwrap();
        let p = flow(&xf, &p, -t, &cfg).unwrap();
        flow(&yf, &p, -t, &cfg).unwrap()
    };
    let t = 1e-2;
    let quotient = (chi(t) + chi(-t) - &x0 * 2.0) / (2.0 * t * t);
    assert!((quotient - bracket).amax() < 1e-3);
}

#[test]
fn nested_brackets_satisfy_jacobi() {
    let chart = Chart::centered(2, 2.0);
    let xf = VectorField::new(chart.clone(), |p: &DVector<f64>| vec2(p[1] * p[1], p[0]));
    let yf = VectorField::new(chart.clone(), |p: &DVector<f64>| vec2(p[0] * p[1], -p[1]));
    let zf = VectorField::new(chart, |p: &DVector<f64>| vec2(0.3 + p[0], p[1] * p[1]));
    let x0 = vec2(0.25, -0.4);
    let total = lie_bracket(&lie_bracket(&xf, &yf), &zf).eval(&x0)
        + lie_bracket(&lie_bracket(&yf, &zf), &xf).eval(&x0)
        + lie_bracket(&lie_bracket(&zf, &xf), &yf).eval(&x0);
    assert!(total.amax() < 1e-6);
}

#[test]
fn rk4_error_decays_at_fourth_order() {
    let a = DMatrix::from_row_slice(2, 2, &[0.3, 1.2, -1.2, -0.2]);
    let field = linear_field(a.clone(), Chart::centered(2, 4.0));
    let x0 = vec2(0.8, -0.5);
    let t = 0.9;
    let exact = series_exp(&a, t) * &x0;
    let err = |steps: u32| {
        let cfg = FlowConfig { rk4_steps: steps, ..FlowConfig::default() };
        (flow(&field, &x0, t, &cfg).unwrap() - &exact).norm()
    };
    let (e4, e8, e16) = (err(4), err(8), err(16));
    assert!(e16 > 1e-12, "error too close to noise: {e16:.3e}");
    for ratio in [e4 / e8, e8 / e16] {
        assert!((12.0..=20.0).contains(&ratio), "ratio {ratio:.2} outside h^4 window");
    }
}

#[test]
fn flow_reports_leaving_the_chart() {
    let chart = Chart::centered(2, 1.0);
    let field = VectorField::constant(chart.clone(), vec2(1.0, 0.0));
    let cfg = FlowConfig::default();
    match flow(&field, &vec2(0.8, 0.0), 1.0, &cfg) {
        Err(Error::LeftDomain { t }) => assert!((0.0..=1.0).contains(&t)),
        other => panic!("expected LeftDomain, got {other:?}"),
    }
    // Starting inside the chart but within the guard margin fails at t = 0.
    match flow(&field, &vec2(0.99, 0.0), 1.0, &cfg) {
        Err(Error::LeftDomain { t }) => assert_eq!(t, 0.0),
        other => panic!("expected LeftDomain at start, got {other:?}"),
    }
}

#[test]
fn canonical_flow_transports_wedge_factors() {
    let a = DMatrix::from_row_slice(2, 2, &[0.1, 0.9, -0.9, 0.0]);
    let field = linear_field(a.clone(), Chart::centered(2, 3.0));
    let cfg = FlowConfig::default();
    let x0 = vec2(0.5, -0.3);
    let v1 = vec2(1.0, 0.2);
    let v2 = vec2(-0.4, 0.9);
    let y = FiberPoint::wedge(x0.clone(), vec![v1.clone(), v2.clone()]);
    let moved = canonical_flow(&field, &y, 0.6, &cfg).unwrap();
    let m = series_exp(&a, 0.6);
    let expected = FiberPoint::wedge(&m * &x0, vec![&m * &v1, &m * &v2]);
    assert!((moved.flatten() - expected.flatten()).amax() < 1e-8);
}

#[test]
fn canonical_flow_transports_tensor_square_terms() {
    let a = DMatrix::from_row_slice(2, 2, &[0.0, 0.8, -0.8, 0.1]);
    let field = linear_field(a.clone(), Chart::centered(2, 3.0));
    let cfg = FlowConfig::default();
    let x0 = vec2(0.2, 0.4);
    let terms = vec![(1.0, vec2(1.0, 0.0), vec2(0.0, 1.0)), (-0.5, vec2(0.3, 0.7), vec2(1.0, -1.0))];
    let y = FiberPoint::tensor_square(x0.clone(), terms.clone());
    let moved = canonical_flow(&field, &y, 0.5, &cfg).unwrap();
    let m = series_exp(&a, 0.5);
    let expected = FiberPoint::tensor_square(
        &m * &x0,
        terms.iter().map(|(c, u, v)| (*c, &m * u, &m * v)).collect(),
    );
    assert!((moved.flatten() - expected.flatten()).amax() < 1e-8);
}

#[test]
fn chart_map_jacobian_matches_analytic_derivative() {
    let polar = ChartMap::new(
        Chart::new(vec![(0.2, 2.0), (-3.0, 3.0)]),
        Chart::centered(2, 3.0),
        |x: &DVector<f64>| vec2(x[0] * x[1].cos(), x[0] * x[1].sin()),
    );
    let p = vec2(1.1, 0.7);
    let jac = polar.jacobian_at(&p);
    let expected = DMatrix::from_row_slice(
        2,
        2,
        &[p[1].cos(), -p[0] * p[1].sin(), p[1].sin(), p[0] * p[1].cos()],
    );
    assert!((jac - expected).amax() < 1e-7);
}

#[test]
fn chart_map_composition_evaluates_in_order() {
    let double = ChartMap::new(Chart::centered(2, 1.0), Chart::centered(2, 2.0), |x: &DVector<f64>| {
        x * 2.0
    });
    let shift = ChartMap::new(Chart::centered(2, 2.0), Chart::centered(2, 3.0), |x: &DVector<f64>| {
        vec2(x[0] + 0.5, x[1] - 0.25)
    });
    let both = double.then(&shift);
    let got = both.eval(&vec2(0.3, -0.4));
    assert!((got - vec2(1.1, -1.05)).amax() < 1e-15);
}
