//! Verification suites: named batteries of identity checks.
//!
//! Each suite resolves the scenario objects it needs by name (fields,
//! sections, connections) and draws everything else — invariant fields,
//! bundle maps, fiber points — from a seeded stream per sample, derived
//! from the run seed and a stable per-case index. A report is therefore
//! a pure function of the scenario, the seed, and the CLI overrides, and
//! two identical runs serialize to identical bytes.
//!
//! Samples that drift outside the guarded chart during a flow are
//! skipped and counted; a case fails if skips exceed one in five. Any
//! other numerical error aborts the run as a configuration problem.
//!
//! Suites:
//! - `division`: group-valued division against right-translation,
//!   right-shift, and inversion closed forms.
//! - `flow-stencil`: the flow-stencil derivative against the split
//!   vertical-plus-horizontal evaluation, per target fiber kind.
//! - `vertical-module`, `vertical-conj`, `vertical-generic`: purely
//!   vertical fields against their closed forms on module-, group-, and
//!   sphere-valued maps.
//! - `leibniz`: product, tensor, linear postcomposition, both chain-rule
//!   data, section action and product, and graded wedge rules.
//! - `naturality`: commutation with natural bundle maps, plus the
//!   finite-difference relatedness of canonical lifts.
//! - `magic`: the Cartan-style identity for the exterior covariant
//!   derivative, non-flat and flat-versus-classical.
//! - `connection-diff`: the vertical closed form for the difference of
//!   two horizontal lifts.
//! - `convergence`: fourth-order error decay of the stencil against
//!   exact closed forms, and of the RK4 integrator against a matrix
//!   exponential; reported as deviation from the expected ratio window.

use darboux::group::hat3;
use darboux::{
    canonical_flow, compose_natural, compose_natural_module, connection_difference,
    covariant_lie, darboux_lie_at, darboux_lie_direct, divide, eval_natural_map,
    exterior_covariant, flow, interior_product, lie_map, lie_module_map, module_act_section,
    pair_into_product, postcompose, tensor_map, unvec_matrix, vec_matrix,
    vertical_lie_conjugation, vertical_lie_module, vertical_lie_generic, ad_inverse_transport,
    BundleMap, ConnectionForm, EquivariantForm, EquivariantMap, FdConfig, FdScheme, FiberPoint,
    FlowConfig, GSpace, GroupName, InvariantVectorField, LieGroup, ModuleMap, NaturalBundleKind,
    NaturalImage, NaturalMap, PrincipalPoint, Representation, Section, SplitMix64, VectorField,
};
use nalgebra::{DMatrix, DVector};
use std::sync::Arc;

use crate::error::{CliError, Result};
use crate::report::{CaseReport, SuiteReport};
use crate::sample;
use crate::scenario::Scenario;

pub const SUITE_NAMES: &[&str] = &[
    "division",
    "flow-stencil",
    "vertical-module",
    "vertical-conj",
    "vertical-generic",
    "leibniz",
    "naturality",
    "magic",
    "connection-diff",
    "convergence",
];

/// One run's resolved execution context.
pub struct RunCtx<'a> {
    pub scenario: &'a Scenario,
    pub flow: FlowConfig,
    pub samples: Option<usize>,
    pub seed: u64,
}

impl RunCtx<'_> {
    fn samples_for(&self, default: usize) -> usize {
        self.samples.unwrap_or(default)
    }

    fn group(&self) -> &LieGroup {
        &self.scenario.group
    }

    fn chart(&self) -> &darboux::Chart {
        &self.scenario.chart
    }

    fn is_rotation(&self) -> bool {
        *self.group().name() == GroupName::SpecialOrthogonal3
    }

    fn require_rotation(&self, suite: &str) -> Result<()> {
        if self.is_rotation() {
            Ok(())
        } else {
            Err(CliError::Dimension(format!(
                "suite {suite:?} requires group SO3, scenario uses {}",
                self.scenario.group_label
            )))
        }
    }

    fn require_chart_dim(&self, suite: &str, dim: usize) -> Result<()> {
        if self.chart().dim() >= dim {
            Ok(())
        } else {
            Err(CliError::Dimension(format!(
                "suite {suite:?} requires a chart of dimension at least {dim}"
            )))
        }
    }
}

pub fn run_suite(name: &str, ctx: &RunCtx) -> Result<SuiteReport> {
    let cases = match name {
        "division" => suite_division(ctx)?,
        "flow-stencil" => suite_flow_stencil(ctx)?,
        "vertical-module" => suite_vertical_module(ctx)?,
        "vertical-conj" => suite_vertical_conj(ctx)?,
        "vertical-generic" => suite_vertical_generic(ctx)?,
        "leibniz" => suite_leibniz(ctx)?,
        "naturality" => suite_naturality(ctx)?,
        "magic" => suite_magic(ctx)?,
        "connection-diff" => suite_connection_diff(ctx)?,
        "convergence" => suite_convergence(ctx)?,
        other => return Err(CliError::UnknownSuite(other.to_string())),
    };
    Ok(SuiteReport { name: name.to_string(), cases })
}

/// Per-sample RNG stream: one stream per (case index, sample index).
fn sample_rng(seed: u64, case_index: u64, i: usize) -> SplitMix64 {
    SplitMix64::stream(seed, case_index * 0x0010_0000 + i as u64)
}

/// Runs one case: `single` produces a (got, want) pair per sample.
fn run_case<F>(
    ctx: &RunCtx,
    name: &str,
    index: u64,
    default_samples: usize,
    tol: f64,
    mut single: F,
) -> Result<CaseReport>
where
    F: FnMut(&mut SplitMix64) -> darboux::Result<(DVector<f64>, DVector<f64>)>,
{
    let samples = ctx.samples_for(default_samples);
    let mut max_abs = 0.0f64;
    let mut max_rel = 0.0f64;
    let mut skipped = 0usize;
    for i in 0..samples {
        let mut rng = sample_rng(ctx.seed, index, i);
        match single(&mut rng) {
            Ok((got, want)) => {
                max_abs = max_abs.max(sample::abs_err(&got, &want));
                max_rel = max_rel.max(sample::rel_err(&got, &want));
            }
            Err(darboux::Error::LeftDomain { .. }) => skipped += 1,
            Err(e) => {
                return Err(CliError::Numeric(format!("case {name:?}, sample {i}: {e}")))
            }
        }
    }
    Ok(CaseReport::build(name, samples, skipped, max_abs, max_rel, tol))
}

/// Algebra-coordinate scale keeping random elements well-conditioned.
fn element_scale(group: &LieGroup) -> f64 {
    match group.name() {
        GroupName::GeneralLinear(_) => 0.5,
        _ => 0.9,
    }
}

// ---------------------------------------------------------------- division

fn suite_division(ctx: &RunCtx) -> Result<Vec<CaseReport>> {
    let group = ctx.group();
    let chart = ctx.chart();
    let scale = element_scale(group);
    let tol = 1e-12;

    let draw = |rng: &mut SplitMix64| {
        let x = sample::chart_point(chart, rng);
        let p = PrincipalPoint::new(x.clone(), sample::group_element(group, scale, rng));
        let q = PrincipalPoint::new(x, sample::group_element(group, scale, rng));
        let g = sample::group_element(group, scale, rng);
        (p, q, g)
    };

    Ok(vec![
        run_case(ctx, "right-translate", 0, 100, tol, |rng| {
            let (p, q, g) = draw(rng);
            let got = divide(&p.translate(&g), &q)?;
            let want = g.inverse().mul(&divide(&p, &q)?);
            Ok((vec_matrix(got.matrix()), vec_matrix(want.matrix())))
        })?,
        run_case(ctx, "right-shift", 1, 100, tol, |rng| {
            let (p, q, g) = draw(rng);
            let got = divide(&p, &q.translate(&g))?;
            let want = divide(&p, &q)?.mul(&g);
            Ok((vec_matrix(got.matrix()), vec_matrix(want.matrix())))
        })?,
        run_case(ctx, "inverse", 2, 100, tol, |rng| {
            let (p, q, _) = draw(rng);
            let got = divide(&q, &p)?;
            let want = divide(&p, &q)?.inverse();
            Ok((vec_matrix(got.matrix()), vec_matrix(want.matrix())))
        })?,
    ])
}

// ------------------------------------------------------------ flow-stencil

fn suite_flow_stencil(ctx: &RunCtx) -> Result<Vec<CaseReport>> {
    let group = ctx.group();
    let chart = ctx.chart();
    let std_rep = Representation::standard(group);
    let std_space = GSpace::module(std_rep.clone());
    let tol = 1e-5;

    let mut cases = vec![
        {
            let form = EquivariantForm::canonical(&std_rep);
            run_case(ctx, "module", 10, 50, tol, |rng| {
                let xi = sample::invariant_field(chart, group, rng);
                let h = sample::module_map(chart, &std_space, rng);
                let y = sample::fiber_point(chart, &NaturalBundleKind::Tangent, rng);
                let got = darboux_lie_at(&h, &xi, &form, &ctx.flow, &y)?;
                let want = darboux_lie_direct(&h, &xi, &form, &ctx.flow, &y)?;
                Ok((got, want))
            })?
        },
        {
            let form = EquivariantForm::maurer_cartan(group);
            run_case(ctx, "conjugation", 11, 50, tol, |rng| {
                let xi = sample::invariant_field(chart, group, rng);
                let h = sample::conj_map(chart, group, rng);
                let y = sample::fiber_point(chart, &NaturalBundleKind::Tangent, rng);
                let got = darboux_lie_at(&h, &xi, &form, &ctx.flow, &y)?;
                let want = darboux_lie_direct(&h, &xi, &form, &ctx.flow, &y)?;
                Ok((got, want))
            })?
        },
    ];
    if ctx.is_rotation() {
        let form = EquivariantForm::ambient_sphere(group);
        cases.push(run_case(ctx, "sphere", 12, 50, tol, |rng| {
            let xi = sample::invariant_field(chart, group, rng);
            let h = sample::sphere_map(chart, group, rng);
            let y = sample::fiber_point(chart, &NaturalBundleKind::Tangent, rng);
            let got = darboux_lie_at(&h, &xi, &form, &ctx.flow, &y)?;
            let want = darboux_lie_direct(&h, &xi, &form, &ctx.flow, &y)?;
            Ok((got, want))
        })?);
    }
    Ok(cases)
}

// ---------------------------------------------------------------- vertical

fn suite_vertical_module(ctx: &RunCtx) -> Result<Vec<CaseReport>> {
    let group = ctx.group();
    let chart = ctx.chart();
    let std_rep = Representation::standard(group);
    let std_space = GSpace::module(std_rep.clone());
    let form = EquivariantForm::canonical(&std_rep);
    Ok(vec![run_case(ctx, "module-closed-form", 20, 50, 1e-5, |rng| {
        let a = sample::affine_algebra_section(chart, group, 0.6, rng);
        let xi = darboux::vertical_from_section(&a, group);
        let h = sample::module_map(chart, &std_space, rng);
        let y = sample::fiber_point(chart, &NaturalBundleKind::Tangent, rng);
        let got = darboux_lie_at(&h, &xi, &form, &ctx.flow, &y)?;
        let want = vertical_lie_module(&h, &a, ctx.flow.fd)?.eval(&y)?;
        Ok((got, want))
    })?])
}

fn suite_vertical_conj(ctx: &RunCtx) -> Result<Vec<CaseReport>> {
    let group = ctx.group();
    let chart = ctx.chart();
    let form = EquivariantForm::maurer_cartan(group);
    Ok(vec![run_case(ctx, "conjugation-closed-form", 30, 50, 1e-5, |rng| {
        let a = sample::affine_algebra_section(chart, group, 0.6, rng);
        let xi = darboux::vertical_from_section(&a, group);
        let h = sample::conj_map(chart, group, rng);
        let y = sample::fiber_point(chart, &NaturalBundleKind::Tangent, rng);
        let got = darboux_lie_at(&h, &xi, &form, &ctx.flow, &y)?;
        let want = vertical_lie_conjugation(&h, &a)?.eval(&y)?;
        Ok((got, want))
    })?])
}

fn suite_vertical_generic(ctx: &RunCtx) -> Result<Vec<CaseReport>> {
    ctx.require_rotation("vertical-generic")?;
    let group = ctx.group();
    let chart = ctx.chart();
    let form = EquivariantForm::ambient_sphere(group);
    Ok(vec![run_case(ctx, "sphere-closed-form", 40, 50, 1e-5, |rng| {
        let a = sample::affine_algebra_section(chart, group, 0.6, rng);
        let xi = darboux::vertical_from_section(&a, group);
        let h = sample::sphere_map(chart, group, rng);
        let y = sample::fiber_point(chart, &NaturalBundleKind::Tangent, rng);
        let got = darboux_lie_at(&h, &xi, &form, &ctx.flow, &y)?;
        let want = vertical_lie_generic(&h, &a, &form, ctx.flow.fd).eval(&y)?;
        Ok((got, want))
    })?])
}

// ----------------------------------------------------------------- leibniz

/// The invariant field shared by the Leibniz cases, from the scenario's
/// declared base field "X" and algebra section "a".
fn scenario_invariant_field(ctx: &RunCtx) -> Result<InvariantVectorField> {
    let x_field = ctx.scenario.field("X")?.clone();
    let a_sec = ctx.scenario.algebra_section("a")?.clone();
    let group = ctx.group().clone();
    Ok(InvariantVectorField::new(x_field, move |x| {
        group.algebra_from_coords(&a_sec.eval(x))
    }))
}

/// `u (x) v -> u x v` as a matrix on row-major tensor coordinates.
fn cross_contraction() -> DMatrix<f64> {
    let mut e = DMatrix::zeros(3, 9);
    for (k, i, j, s) in
        [(0, 1, 2, 1.0), (0, 2, 1, -1.0), (1, 2, 0, 1.0), (1, 0, 2, -1.0), (2, 0, 1, 1.0), (2, 1, 0, -1.0)]
    {
        e[(k, 3 * i + j)] = s;
    }
    e
}

fn suite_leibniz(ctx: &RunCtx) -> Result<Vec<CaseReport>> {
    ctx.require_rotation("leibniz")?;
    ctx.require_chart_dim("leibniz", 3)?;
    let group = ctx.group();
    let chart = ctx.chart();
    let xi = scenario_invariant_field(ctx)?;
    let std_rep = Representation::standard(group);
    let adj_rep = Representation::adjoint(group);
    let std_space = GSpace::module(std_rep.clone());
    let conj_space = GSpace::conjugation(group);
    let form_m = EquivariantForm::canonical(&std_rep);
    let form_c = EquivariantForm::maurer_cartan(group);
    let fd = ctx.flow.fd;
    let tol = 1e-4;
    let tangent = NaturalBundleKind::Tangent;
    let mut cases = Vec::new();

    // L(h1 x h2) = (L h1, L h2) with the product fiber form.
    let prod_form = EquivariantForm::product(&form_m, &form_c);
    cases.push(run_case(ctx, "product", 50, 30, tol, |rng| {
        let h1 = sample::module_map(chart, &std_space, rng);
        let h2 = sample::conj_map(chart, group, rng);
        let paired = pair_into_product(&h1, &h2);
        let y = sample::fiber_point(chart, &tangent, rng);
        let got = darboux_lie_at(&paired, &xi, &prod_form, &ctx.flow, &y)?;
        let l1 = darboux_lie_at(&h1, &xi, &form_m, &ctx.flow, &y)?;
        let l2 = darboux_lie_at(&h2, &xi, &form_c, &ctx.flow, &y)?;
        let want = DVector::from_iterator(l1.len() + l2.len(), l1.iter().chain(l2.iter()).copied());
        Ok((got, want))
    })?);

    // L(h1 (x) h2) = L h1 (x) h2 + h1 (x) L h2 on pair points.
    let tensor_form = EquivariantForm::canonical(&Representation::tensor(&std_rep, &std_rep));
    cases.push(run_case(ctx, "tensor", 51, 30, tol, |rng| {
        let h1 = sample::module_map(chart, &std_space, rng);
        let h2 = sample::module_map(chart, &std_space, rng);
        let ht = tensor_map(&h1, &h2)?;
        let y = sample::fiber_point(
            chart,
            &NaturalBundleKind::pair(tangent.clone(), tangent.clone()),
            rng,
        );
        let got = darboux_lie_at(&ht, &xi, &tensor_form, &ctx.flow, &y)?;
        let l1 = lie_map(&h1, &xi, &form_m, &ctx.flow);
        let l2 = lie_map(&h2, &xi, &form_m, &ctx.flow);
        let m1 = ModuleMap::from_bundle(&h1)?;
        let m2 = ModuleMap::from_bundle(&h2)?;
        let want = ModuleMap::tensor_pair(&l1, &m2)
            .add(&ModuleMap::tensor_pair(&m1, &l2))
            .eval(&y)?;
        Ok((got, want))
    })?);

    // Postcomposition with a linear equivariant fiber map commutes with L.
    let e_mat = cross_contraction();
    let tensor_space = GSpace::module(Representation::tensor(&std_rep, &std_rep));
    let e_for_map = e_mat.clone();
    let contraction = EquivariantMap::new(
        tensor_space,
        std_space.clone(),
        move |z| &e_for_map * z,
        None,
    )
    .map_err(|e| CliError::Numeric(format!("contraction map: {e}")))?;
    cases.push(run_case(ctx, "postcompose-linear", 52, 30, tol, |rng| {
        let h1 = sample::module_map(chart, &std_space, rng);
        let h2 = sample::module_map(chart, &std_space, rng);
        let ht = tensor_map(&h1, &h2)?;
        let y = sample::fiber_point(
            chart,
            &NaturalBundleKind::pair(tangent.clone(), tangent.clone()),
            rng,
        );
        let got = darboux_lie_at(&postcompose(&contraction, &ht), &xi, &form_m, &ctx.flow, &y)?;
        let want = &e_mat * darboux_lie_at(&ht, &xi, &tensor_form, &ctx.flow, &y)?;
        Ok((got, want))
    })?);

    // Chain rule through the action map (g, v) -> g v, whose fiberwise
    // linear datum sends (a, u) to g(a v + u).
    let prod_gv = GSpace::product(conj_space.clone(), std_space.clone());
    let action = EquivariantMap::new(
        prod_gv,
        std_space.clone(),
        |z| {
            let g = unvec_matrix(&z.rows(0, 9).into_owned(), 3);
            g * z.rows(9, 3).into_owned()
        },
        Some(Arc::new(|z: &DVector<f64>| {
            let r = unvec_matrix(&z.rows(0, 9).into_owned(), 3);
            let v = z.rows(9, 3).into_owned();
            let mut phi = DMatrix::zeros(3, 6);
            phi.view_mut((0, 0), (3, 3)).copy_from(&(-(&r * hat3(&v))));
            phi.view_mut((0, 3), (3, 3)).copy_from(&r);
            phi
        })),
    )
    .map_err(|e| CliError::Numeric(format!("action map: {e}")))?;
    let form_gv = EquivariantForm::product(&form_c, &form_m);
    cases.push(run_case(ctx, "chain-action", 53, 30, tol, |rng| {
        let hg = sample::conj_map(chart, group, rng);
        let hv = sample::module_map(chart, &std_space, rng);
        let paired = pair_into_product(&hg, &hv);
        let y = sample::fiber_point(chart, &tangent, rng);
        let got = darboux_lie_at(&postcompose(&action, &paired), &xi, &form_m, &ctx.flow, &y)?;
        let lie_paired = lie_map(&paired, &xi, &form_gv, &ctx.flow);
        let want = darboux::chain_rhs(&action, &paired, &lie_paired, &std_rep).eval(&y)?;
        Ok((got, want))
    })?);

    // Chain rule through the multiplication map, whose datum sends
    // (a1, a2) to Ad_{h2^-1}(a1) + a2.
    let prod_gg = GSpace::product(conj_space.clone(), conj_space.clone());
    let group_for_phi = group.clone();
    let adj_for_phi = adj_rep.clone();
    let mult = EquivariantMap::new(
        prod_gg,
        conj_space.clone(),
        |z| {
            let g1 = unvec_matrix(&z.rows(0, 9).into_owned(), 3);
            let g2 = unvec_matrix(&z.rows(9, 9).into_owned(), 3);
            vec_matrix(&(g1 * g2))
        },
        Some(Arc::new(move |z: &DVector<f64>| {
            let g2 = group_for_phi
                .element(unvec_matrix(&z.rows(9, 9).into_owned(), 3))
                .expect("fiber value lies in the group");
            let mut phi = DMatrix::zeros(3, 6);
            phi.view_mut((0, 0), (3, 3)).copy_from(&adj_for_phi.matrix_of(&g2.inverse()));
            phi.view_mut((0, 3), (3, 3)).copy_from(&DMatrix::identity(3, 3));
            phi
        })),
    )
    .map_err(|e| CliError::Numeric(format!("multiplication map: {e}")))?;
    let form_gg = EquivariantForm::product(&form_c, &form_c);
    cases.push(run_case(ctx, "chain-product", 54, 30, tol, |rng| {
        let h1 = sample::conj_map(chart, group, rng);
        let h2 = sample::conj_map(chart, group, rng);
        let paired = pair_into_product(&h1, &h2);
        let y = sample::fiber_point(chart, &tangent, rng);
        let got = darboux_lie_at(&postcompose(&mult, &paired), &xi, &form_c, &ctx.flow, &y)?;
        let lie_paired = lie_map(&paired, &xi, &form_gg, &ctx.flow);
        let want = darboux::chain_rhs(&mult, &paired, &lie_paired, &adj_rep).eval(&y)?;
        Ok((got, want))
    })?);

    // L(s . beta) = s . (L s . beta + L beta) for a group-valued section.
    let s = ctx.scenario.group_map("s")?;
    cases.push(run_case(ctx, "section-action", 55, 30, tol, |rng| {
        let beta = ModuleMap::from_bundle(&sample::module_map(chart, &std_space, rng))?;
        let y = sample::fiber_point(chart, &tangent, rng);
        let acted = module_act_section(&s, &beta)?;
        let got = lie_module_map(&acted, &xi, &ctx.flow).eval(&y)?;
        let lie_s = lie_map(&s, &xi, &form_c, &ctx.flow);
        let lie_b = lie_module_map(&beta, &xi, &ctx.flow);
        let inner = darboux::algebra_act_map(&lie_s, &beta, fd).add(&lie_b);
        let want = module_act_section(&s, &inner)?.eval(&y)?;
        Ok((got, want))
    })?);

    // L(s1 s2) = Ad_{s2^-1}(L s1) + L s2 for group-valued sections.
    let s1 = ctx.scenario.group_map("s")?;
    let s2 = ctx.scenario.group_map("s2")?;
    let s_prod = s1.conj_product(&s2);
    cases.push(run_case(ctx, "section-product", 56, 30, tol, |rng| {
        let y = sample::fiber_point(chart, &NaturalBundleKind::Base, rng);
        let got = darboux_lie_at(&s_prod, &xi, &form_c, &ctx.flow, &y)?;
        let l1 = lie_map(&s1, &xi, &form_c, &ctx.flow);
        let l2 = lie_map(&s2, &xi, &form_c, &ctx.flow);
        let want = ad_inverse_transport(&s2, &l1)?.add(&l2).eval(&y)?;
        Ok((got, want))
    })?);

    // Graded Leibniz for the wedge of an algebra-valued 1-form with a
    // module-valued 1-form, on degree-2 points.
    cases.push(run_case(ctx, "wedge", 57, 30, tol, |rng| {
        let alpha = sample::linear_form(chart, &adj_rep, rng);
        let beta = sample::linear_form(chart, &std_rep, rng);
        let w = darboux::wedge(&alpha, &beta, fd);
        let y = sample::fiber_point(chart, &NaturalBundleKind::ExtPower(2), rng);
        let got = lie_module_map(&w, &xi, &ctx.flow).eval(&y)?;
        let la = lie_module_map(&alpha, &xi, &ctx.flow);
        let lb = lie_module_map(&beta, &xi, &ctx.flow);
        let want = darboux::wedge(&la, &beta, fd)
            .add(&darboux::wedge(&alpha, &lb, fd))
            .eval(&y)?;
        Ok((got, want))
    })?);

    // The same in mixed degrees (1, 2), on degree-3 points.
    cases.push(run_case(ctx, "wedge-12", 58, 30, tol, |rng| {
        let alpha = sample::linear_form(chart, &adj_rep, rng);
        let beta = sample::two_form(chart, &std_rep, rng);
        let w = darboux::wedge(&alpha, &beta, fd);
        let y = sample::fiber_point(chart, &NaturalBundleKind::ExtPower(3), rng);
        let got = lie_module_map(&w, &xi, &ctx.flow).eval(&y)?;
        let la = lie_module_map(&alpha, &xi, &ctx.flow);
        let lb = lie_module_map(&beta, &xi, &ctx.flow);
        let want = darboux::wedge(&la, &beta, fd)
            .add(&darboux::wedge(&alpha, &lb, fd))
            .eval(&y)?;
        Ok((got, want))
    })?);

    Ok(cases)
}

// -------------------------------------------------------------- naturality

fn natural_tags() -> [(NaturalMap, &'static str, u64); 4] {
    [
        (NaturalMap::DiagonalBase, "diagonal-base", 70),
        (NaturalMap::InsertBase, "insert-base", 71),
        (NaturalMap::WedgeToTensor, "wedge-to-tensor", 72),
        (NaturalMap::ShuffleSplit { k: 1, l: 1 }, "shuffle-split", 73),
    ]
}

/// Canonical flow extended to tensor-sum images, term by term.
fn flow_image(
    field: &VectorField,
    img: &NaturalImage<f64>,
    t: f64,
    cfg: &FlowConfig,
) -> darboux::Result<NaturalImage<f64>> {
    Ok(match img {
        NaturalImage::Point(p) => NaturalImage::Point(canonical_flow(field, p, t, cfg)?),
        NaturalImage::TensorSum(terms) => NaturalImage::TensorSum(
            terms
                .iter()
                .map(|(c, a, b)| {
                    Ok((
                        *c,
                        canonical_flow(field, a, t, cfg)?,
                        canonical_flow(field, b, t, cfg)?,
                    ))
                })
                .collect::<darboux::Result<Vec<_>>>()?,
        ),
    })
}

fn suite_naturality(ctx: &RunCtx) -> Result<Vec<CaseReport>> {
    let group = ctx.group();
    let chart = ctx.chart();
    let std_rep = Representation::standard(group);
    let form_m = EquivariantForm::canonical(&std_rep);
    let mut cases = Vec::new();

    for (tag, name, index) in natural_tags() {
        cases.push(run_case(ctx, name, index, 30, 1e-5, |rng| {
            let xi = sample::invariant_field(chart, group, rng);
            let h = sample::natural_target_map(tag, chart, &std_rep, rng);
            let composite = compose_natural(&h, tag)?;
            let y = sample::fiber_point(chart, &tag.source_kind(), rng);
            let got = darboux_lie_at(&composite, &xi, &form_m, &ctx.flow, &y)?;
            let lie_h = lie_map(&h, &xi, &form_m, &ctx.flow);
            let want = compose_natural_module(&lie_h, tag).eval(&y)?;
            Ok((got, want))
        })?);
    }

    // d/dt eta(Phi_t y) = d/dt Phi_t(eta y) at t = 0: the canonical lift
    // is related to itself through every natural map.
    cases.push(run_case(ctx, "lift-relatedness", 74, 30, 1e-6, |rng| {
        let xf = sample::affine_field(chart, rng);
        let mut got: Vec<f64> = Vec::new();
        let mut want: Vec<f64> = Vec::new();
        for (tag, _, _) in natural_tags() {
            let y = sample::fiber_point(chart, &tag.source_kind(), rng);
            let through = ctx.flow.fd.try_derivative(|t| {
                let yt = canonical_flow(&xf, &y, t, &ctx.flow)?;
                Ok(eval_natural_map(tag, &yt)?.flatten())
            })?;
            let img0 = eval_natural_map(tag, &y)?;
            let pushed = ctx
                .flow
                .fd
                .try_derivative(|t| Ok(flow_image(&xf, &img0, t, &ctx.flow)?.flatten()))?;
            got.extend(through.iter());
            want.extend(pushed.iter());
        }
        Ok((DVector::from_vec(got), DVector::from_vec(want)))
    })?);

    Ok(cases)
}

// ------------------------------------------------------------------- magic

fn suite_magic(ctx: &RunCtx) -> Result<Vec<CaseReport>> {
    ctx.require_chart_dim("magic", 3)?;
    let group = ctx.group();
    let chart = ctx.chart();
    let std_rep = Representation::standard(group);
    let omega = ctx.scenario.connection("omega")?;
    let z_field = ctx.scenario.field("Z")?;
    let mut cases = Vec::new();

    // i_Z(D beta) + D(i_Z beta) = L_{Z^H} beta, degree 1 and 2.
    for (name, index, degree) in [("degree-1", 80u64, 1usize), ("degree-2", 81, 2)] {
        cases.push(run_case(ctx, name, index, 20, 1e-3, |rng| {
            let beta = if degree == 1 {
                sample::linear_form(chart, &std_rep, rng)
            } else {
                sample::two_form(chart, &std_rep, rng)
            };
            let kind = if degree == 1 {
                NaturalBundleKind::Tangent
            } else {
                NaturalBundleKind::ExtPower(2)
            };
            let y = sample::fiber_point(chart, &kind, rng);
            let d_beta = exterior_covariant(&beta, omega, &ctx.flow);
            let lhs = interior_product(z_field, &d_beta)
                .add(&exterior_covariant(&interior_product(z_field, &beta), omega, &ctx.flow));
            let got = lhs.eval(&y)?;
            let want = covariant_lie(z_field, &beta, omega, &ctx.flow).eval(&y)?;
            Ok((got, want))
        })?);
    }

    // With the flat connection the same combination reduces to the
    // classical formula, checked against plain directional differences.
    let flat = ConnectionForm::flat(chart.clone(), group.clone());
    cases.push(run_case(ctx, "flat-classical", 82, 20, 1e-4, |rng| {
        let beta = sample::linear_form(chart, &std_rep, rng);
        let y = sample::fiber_point(chart, &NaturalBundleKind::Tangent, rng);
        let d_beta = exterior_covariant(&beta, &flat, &ctx.flow);
        let lhs = interior_product(z_field, &d_beta)
            .add(&exterior_covariant(&interior_product(z_field, &beta), &flat, &ctx.flow));
        let got = lhs.eval(&y)?;

        // Independent oracle: central differences of coordinate curves,
        // no flows, no lifts.
        let fd = ctx.flow.fd;
        let at = |x: &DVector<f64>, w: &DVector<f64>| {
            beta.eval(&FiberPoint::tangent(x.clone(), w.clone()))
        };
        let v = match &y.data {
            darboux::FiberData::Tangent(v) => v.clone(),
            _ => unreachable!("degree-one sample"),
        };
        let zx = z_field.eval(&y.x);
        let dir = |u: &DVector<f64>, w: &DVector<f64>| {
            let (x0, u, w) = (y.x.clone(), u.clone(), w.clone());
            fd.try_derivative(move |t| at(&(&x0 + &u * t), &w))
        };
        let d_beta_zv = (dir(&zx, &v)? - dir(&v, &zx)?).clone();
        let x0 = y.x.clone();
        let vv = v.clone();
        let zf = z_field.clone();
        let d_izbeta_v = fd.try_derivative(move |t| {
            let xt = &x0 + &vv * t;
            at(&xt, &zf.eval(&xt))
        })?;
        let want = d_beta_zv + d_izbeta_v;
        Ok((got, want))
    })?);

    Ok(cases)
}

// --------------------------------------------------------- connection-diff

fn suite_connection_diff(ctx: &RunCtx) -> Result<Vec<CaseReport>> {
    let group = ctx.group();
    let chart = ctx.chart();
    let omega = ctx.scenario.connection("omega")?;
    let omega_tilde = ctx.scenario.connection("omegaTilde")?;
    let x_field = ctx.scenario.field("X")?;
    let lift = darboux::horizontal_lift(omega, x_field);
    let lift_tilde = darboux::horizontal_lift(omega_tilde, x_field);
    let diff = connection_difference(omega, omega_tilde, x_field);
    let a_sec = Section::new(chart.clone(), group.dim(), move |x| diff(x).coords().clone());
    let std_rep = Representation::standard(group);
    let std_space = GSpace::module(std_rep.clone());
    let form_m = EquivariantForm::canonical(&std_rep);
    let form_c = EquivariantForm::maurer_cartan(group);
    let tol = 1e-5;

    Ok(vec![
        run_case(ctx, "module", 90, 30, tol, |rng| {
            let h = sample::module_map(chart, &std_space, rng);
            let y = sample::fiber_point(chart, &NaturalBundleKind::Tangent, rng);
            let d1 = darboux_lie_at(&h, &lift, &form_m, &ctx.flow, &y)?;
            let d2 = darboux_lie_at(&h, &lift_tilde, &form_m, &ctx.flow, &y)?;
            let want = vertical_lie_module(&h, &a_sec, ctx.flow.fd)?.eval(&y)?;
            Ok((d1 - d2, want))
        })?,
        run_case(ctx, "conjugation", 91, 30, tol, |rng| {
            let h = sample::conj_map(chart, group, rng);
            let y = sample::fiber_point(chart, &NaturalBundleKind::Tangent, rng);
            let d1 = darboux_lie_at(&h, &lift, &form_c, &ctx.flow, &y)?;
            let d2 = darboux_lie_at(&h, &lift_tilde, &form_c, &ctx.flow, &y)?;
            let want = vertical_lie_conjugation(&h, &a_sec)?.eval(&y)?;
            Ok((d1 - d2, want))
        })?,
    ])
}

// ------------------------------------------------------------- convergence

/// Expected fourth-order window for the error ratio under halving.
const RATIO_LO: f64 = 12.0;
const RATIO_HI: f64 = 20.0;

/// Deviation of a ratio ladder from the window, normalized by the ideal
/// ratio 16; zero iff every consecutive ratio lies in [12, 20].
fn window_deviation(errors: &[f64]) -> f64 {
    let mut dev = 0.0f64;
    for w in errors.windows(2) {
        let f = w[0] / w[1];
        dev = dev.max((RATIO_LO - f).max(f - RATIO_HI).max(0.0) / 16.0);
    }
    dev
}

/// Runs one convergence case: `ladder` returns coarse-to-fine errors.
fn run_convergence_case<F>(
    ctx: &RunCtx,
    name: &str,
    index: u64,
    mut ladder: F,
) -> Result<CaseReport>
where
    F: FnMut(&mut SplitMix64) -> darboux::Result<Vec<f64>>,
{
    let samples = ctx.samples_for(5);
    let mut max_dev = 0.0f64;
    let mut skipped = 0usize;
    for i in 0..samples {
        let mut rng = sample_rng(ctx.seed, index, i);
        match ladder(&mut rng) {
            Ok(errors) => max_dev = max_dev.max(window_deviation(&errors)),
            Err(darboux::Error::LeftDomain { .. }) => skipped += 1,
            Err(e) => {
                return Err(CliError::Numeric(format!("case {name:?}, sample {i}: {e}")))
            }
        }
    }
    Ok(CaseReport::build(name, samples, skipped, max_dev, max_dev, 0.0))
}

/// A fixed algebra element with coordinate norm ~6.5. The fourth-order
/// truncation term scales with the fifth power of this norm while the
/// rounding floor of the stencil does not, so a large generator keeps
/// every rung of the ladder truncation-dominated.
fn large_algebra(group: &LieGroup, rng: &mut SplitMix64) -> DVector<f64> {
    let raw = sample::span_vector(group.dim(), rng);
    let norm = raw.norm().max(1e-6);
    raw * (6.5 / norm)
}

fn stencil_ladder(
    ctx: &RunCtx,
    h: &BundleMap,
    form: &EquivariantForm,
    xi: &InvariantVectorField,
    y: &FiberPoint<f64>,
    want: &DVector<f64>,
) -> darboux::Result<Vec<f64>> {
    let mut errors = Vec::with_capacity(3);
    for eps in [4e-3, 2e-3, 1e-3] {
        let cfg = FlowConfig {
            rk4_steps: ctx.flow.rk4_steps,
            fd: FdConfig::new(FdScheme::Central4, eps),
            domain_guard: ctx.flow.domain_guard,
        };
        let got = darboux_lie_at(h, xi, form, &cfg, y)?;
        errors.push((got - want).amax());
    }
    Ok(errors)
}

fn suite_convergence(ctx: &RunCtx) -> Result<Vec<CaseReport>> {
    let group = ctx.group();
    let chart = ctx.chart();
    let std_rep = Representation::standard(group);
    let std_space = GSpace::module(std_rep.clone());
    let mut cases = Vec::new();

    // Purely vertical fields with exact closed forms; the base field is
    // zero so the only discretization is the stencil itself.
    let vertical_of = |coords: DVector<f64>| {
        let g = group.clone();
        InvariantVectorField::vertical(chart.clone(), move |_| g.algebra_from_coords(&coords))
    };

    cases.push(run_convergence_case(ctx, "stencil-module", 100, |rng| {
        let coords = large_algebra(group, rng);
        let a_mat = group.algebra_from_coords(&coords).matrix().clone();
        let xi = vertical_of(coords);
        let h = sample::module_map(chart, &std_space, rng);
        let y = sample::fiber_point(chart, &NaturalBundleKind::Tangent, rng);
        let want = -(&a_mat * h.eval(&y)?);
        stencil_ladder(ctx, &h, &EquivariantForm::canonical(&std_rep), &xi, &y, &want)
    })?);

    cases.push(run_convergence_case(ctx, "stencil-conjugation", 101, |rng| {
        let coords = large_algebra(group, rng);
        let a = group.algebra_from_coords(&coords);
        let xi = vertical_of(coords.clone());
        let h = sample::conj_map(chart, group, rng);
        let y = sample::fiber_point(chart, &NaturalBundleKind::Tangent, rng);
        let hv = group
            .element(unvec_matrix(&h.eval(&y)?, group.ambient_dim()))
            .expect("fiber value lies in the group");
        let want = a.sub(&group.adjoint(&hv.inverse(), &a)).coords().clone();
        stencil_ladder(ctx, &h, &EquivariantForm::maurer_cartan(group), &xi, &y, &want)
    })?);

    if ctx.is_rotation() {
        cases.push(run_convergence_case(ctx, "stencil-sphere", 102, |rng| {
            let coords = large_algebra(group, rng);
            let a_mat = group.algebra_from_coords(&coords).matrix().clone();
            let xi = vertical_of(coords);
            let h = sample::sphere_map(chart, group, rng);
            let y = sample::fiber_point(chart, &NaturalBundleKind::Tangent, rng);
            let want = -(&a_mat * h.eval(&y)?);
            stencil_ladder(ctx, &h, &EquivariantForm::ambient_sphere(group), &xi, &y, &want)
        })?);
    }

    // RK4 against the matrix exponential of a mostly rotational linear
    // field, halving the step count twice.
    cases.push(run_convergence_case(ctx, "rk4-linear", 103, |rng| {
        let n = chart.dim();
        let raw = DMatrix::from_fn(n, n, |_, _| rng.uniform(-1.0, 1.0));
        let mut a = (&raw - raw.transpose()) * (1.2 / (raw.amax().max(0.2) * 2.0));
        for i in 0..n {
            a[(i, i)] += 0.08;
        }
        let x0 = sample::chart_point(chart, rng) * 0.5;
        let t = 0.9;
        let exact = series_exp(&(&a * t)) * &x0;
        let af = a.clone();
        let aj = a.clone();
        let field = VectorField::new(chart.clone(), move |x| &af * x)
            .with_jacobian(move |_| aj.clone());
        let mut errors = Vec::with_capacity(3);
        for steps in [4u32, 8, 16] {
            let cfg = FlowConfig { rk4_steps: steps, ..ctx.flow };
            let got = flow(&field, &x0, t, &cfg)?;
            errors.push((got - &exact).amax());
        }
        Ok(errors)
    })?);

    Ok(cases)
}

/// Matrix exponential by plain series; converges fast for the small
/// norms used here and shares no code with the RK4 path.
fn series_exp(m: &DMatrix<f64>) -> DMatrix<f64> {
    let n = m.nrows();
    let mut sum = DMatrix::identity(n, n);
    let mut term = DMatrix::identity(n, n);
    for k in 1..40 {
        term = (&term * m) / k as f64;
        sum += &term;
    }
    sum
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn suite_names_are_unique_and_known() {
        let mut names: Vec<_> = SUITE_NAMES.to_vec();
        names.sort_unstable();
        names.dedup();
        assert_eq!(names.len(), SUITE_NAMES.len());
    }

    #[test]
    fn window_deviation_flags_out_of_window_ratios() {
        assert_eq!(window_deviation(&[16.0, 1.0]), 0.0);
        assert_eq!(window_deviation(&[256.0, 16.0, 1.0]), 0.0);
        assert!(window_deviation(&[8.0, 1.0]) > 0.0);
        assert!(window_deviation(&[40.0, 1.0]) > 0.0);
        assert!(window_deviation(&[400.0, 16.0, 1.0]) > 0.0);
    }

    #[test]
    fn series_exponential_matches_rotation() {
        let a = DMatrix::from_row_slice(2, 2, &[0.0, -1.0, 1.0, 0.0]);
        let e = series_exp(&(&a * 0.5));
        assert!((e[(0, 0)] - 0.5f64.cos()).abs() < 1e-14);
        assert!((e[(1, 0)] - 0.5f64.sin()).abs() < 1e-14);
    }
}

