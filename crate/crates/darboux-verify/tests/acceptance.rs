//! End-to-end acceptance battery. Each test drives one headline
//! property through the scenario harness at its stated tolerance and
//! sample count, so the harness output reads as a pass/fail ledger.

use darboux::{darboux_lie_at, EquivariantForm, NaturalBundleKind, Representation, SplitMix64};
use darboux_verify::{run_suite, CaseReport, RunCtx, Scenario, SuiteReport};
use std::path::{Path, PathBuf};
use std::process::Command;

fn scenario_path(name: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../../scenarios").join(name)
}

fn load(name: &str) -> Scenario {
    Scenario::load(&scenario_path(name)).expect("scenario loads")
}

fn run(scenario: &Scenario, suite: &str) -> SuiteReport {
    let ctx = RunCtx {
        scenario,
        flow: scenario.config.flow_config(),
        samples: scenario.config.samples,
        seed: scenario.seed,
    };
    run_suite(suite, &ctx).expect("suite runs to completion")
}

fn case<'a>(suite: &'a SuiteReport, name: &str) -> &'a CaseReport {
    suite
        .cases
        .iter()
        .find(|c| c.name == name)
        .unwrap_or_else(|| panic!("case {name:?} missing from suite {:?}", suite.name))
}

/// Asserts the case ran at the declared scale and passed.
fn check(c: &CaseReport, samples: usize, tol: f64) {
    assert_eq!(c.samples, samples, "case {:?} sample count", c.name);
    assert_eq!(c.tol, tol, "case {:?} tolerance", c.name);
    assert!(
        c.pass,
        "case {:?} failed: rel {:.3e} (tol {:.1e}), skipped {}/{}",
        c.name, c.max_rel_err, c.tol, c.skipped, c.samples
    );
}

#[test]
fn division_identities_hold_in_gl3_and_so3() {
    let mut worst = 0.0f64;
    for file in ["gl3.json", "so3.json"] {
        let sc = load(file);
        let suite = run(&sc, "division");
        for name in ["right-translate", "right-shift", "inverse"] {
            let c = case(&suite, name);
            check(c, 100, 1e-12);
            assert!(
                c.max_abs_err <= 1e-12,
                "{file} {name}: abs err {:.3e} above 1e-12",
                c.max_abs_err
            );
            worst = worst.max(c.max_abs_err);
        }
    }
    println!("pass: division identities in GL(3) and SO(3), abs err <= {worst:.3e} (tol 1e-12)");
}

#[test]
fn stencil_matches_direct_evaluation_per_fiber_kind() {
    let so3 = load("so3.json");
    let suite = run(&so3, "flow-stencil");
    for name in ["module", "conjugation", "sphere"] {
        check(case(&suite, name), 50, 1e-5);
    }
    let gl2 = load("gl2.json");
    let suite = run(&gl2, "flow-stencil");
    for name in ["module", "conjugation"] {
        check(case(&suite, name), 50, 1e-5);
    }
    println!("pass: flow-stencil derivative matches direct evaluation on every fiber kind (rel tol 1e-5)");
}

#[test]
fn vertical_closed_form_on_modules_so3_and_gl2() {
    for file in ["so3.json", "gl2.json"] {
        let sc = load(file);
        let suite = run(&sc, "vertical-module");
        check(case(&suite, "module-closed-form"), 50, 1e-5);
    }
    println!("pass: vertical fields act on module-valued maps by the closed form, SO(3) and GL(2) (rel tol 1e-5)");
}

#[test]
fn vertical_closed_form_on_conjugation_targets() {
    let sc = load("so3.json");
    let suite = run(&sc, "vertical-conj");
    check(case(&suite, "conjugation-closed-form"), 50, 1e-5);
    println!("pass: vertical fields act on group-valued maps by the adjoint-difference form (rel tol 1e-5)");
}

#[test]
fn vertical_closed_form_on_the_sphere() {
    let sc = load("so3.json");
    let suite = run(&sc, "vertical-generic");
    check(case(&suite, "sphere-closed-form"), 50, 1e-5);
    println!("pass: vertical fields act on sphere-valued maps through the ambient form (rel tol 1e-5)");
}

#[test]
fn leibniz_ledger_holds() {
    let sc = load("so3.json");
    let suite = run(&sc, "leibniz");
    let names = [
        "product",
        "tensor",
        "postcompose-linear",
        "chain-action",
        "chain-product",
        "section-action",
        "section-product",
        "wedge",
        "wedge-12",
    ];
    assert_eq!(suite.cases.len(), names.len());
    for name in names {
        check(case(&suite, name), 30, 1e-4);
    }
    println!("pass: product, tensor, chain-rule, section, and graded wedge Leibniz identities (rel tol 1e-4)");
}

#[test]
fn naturality_squares_commute_and_lifts_are_related() {
    let sc = load("so3.json");
    let suite = run(&sc, "naturality");
    for name in ["diagonal-base", "insert-base", "wedge-to-tensor", "shuffle-split"] {
        check(case(&suite, name), 30, 1e-5);
    }
    check(case(&suite, "lift-relatedness"), 30, 1e-6);
    println!("pass: derivative commutes with natural bundle maps; canonical lifts are flow-related (rel tol 1e-5, relatedness 1e-6)");
}

#[test]
fn cartan_identity_nonflat_and_flat_classical() {
    let sc = load("so3.json");
    let suite = run(&sc, "magic");
    check(case(&suite, "degree-1"), 20, 1e-3);
    check(case(&suite, "degree-2"), 20, 1e-3);
    check(case(&suite, "flat-classical"), 20, 1e-4);
    println!("pass: covariant Cartan identity in degrees 1 and 2 on a curved connection (rel tol 1e-3); flat case matches the classical formula (1e-4)");
}

#[test]
fn connection_difference_reduces_to_vertical_form() {
    let sc = load("so3.json");
    let suite = run(&sc, "connection-diff");
    check(case(&suite, "module"), 30, 1e-5);
    check(case(&suite, "conjugation"), 30, 1e-5);
    println!("pass: two horizontal lifts differ by the vertical closed form of the connection difference (rel tol 1e-5)");
}

#[test]
fn stencil_and_rk4_converge_at_fourth_order() {
    let sc = load("so3.json");
    let suite = run(&sc, "convergence");
    for name in ["stencil-module", "stencil-conjugation", "stencil-sphere", "rk4-linear"] {
        let c = case(&suite, name);
        check(c, 5, 0.0);
    }
    println!("pass: error ratios stay in [12, 20] per halving for the four-point stencil against every closed form and for RK4 against the exponential");
}

#[test]
fn reports_are_byte_identical_across_runs() {
    let exe = env!("CARGO_BIN_EXE_verify");
    let scenario = scenario_path("so3.json");
    let dir = std::env::temp_dir();
    let out1 = dir.join(format!("report-a-{}.json", std::process::id()));
    let out2 = dir.join(format!("report-b-{}.json", std::process::id()));
    for out in [&out1, &out2] {
        let status = Command::new(exe)
            .arg("--scenario")
            .arg(&scenario)
            .arg("--out")
            .arg(out)
            .status()
            .expect("binary runs");
        assert!(status.success(), "verify run failed with {status}");
    }
    let a = std::fs::read(&out1).expect("first report");
    let b = std::fs::read(&out2).expect("second report");
    let _ = std::fs::remove_file(&out1);
    let _ = std::fs::remove_file(&out2);
    assert!(!a.is_empty() && a == b, "reports differ between identical runs");
    println!("pass: two identical runs serialize byte-identical reports ({} bytes)", a.len());
}

// The derivative is R-linear in the generating field: combinations of
// invariant fields differentiate to the same combinations of results.
#[test]
fn derivative_is_linear_in_the_field() {
    let sc = load("so3.json");
    let cfg = sc.config.flow_config();
    let rep = Representation::standard(&sc.group);
    let space = darboux::GSpace::module(rep.clone());
    let form = EquivariantForm::canonical(&rep);
    let mut worst = 0.0f64;
    for i in 0..10u64 {
        let mut rng = SplitMix64::stream(sc.seed, 0xACC0 + i);
        let xi1 = darboux_verify::sample::invariant_field(&sc.chart, &sc.group, &mut rng);
        let xi2 = darboux_verify::sample::invariant_field(&sc.chart, &sc.group, &mut rng);
        let c = rng.uniform(-1.5, 1.5);
        let h = darboux_verify::sample::module_map(&sc.chart, &space, &mut rng);
        let y = darboux_verify::sample::fiber_point(&sc.chart, &NaturalBundleKind::Tangent, &mut rng);
        let got = darboux_lie_at(&h, &xi1.add_scaled(&xi2, c), &form, &cfg, &y).expect("combined");
        let l1 = darboux_lie_at(&h, &xi1, &form, &cfg, &y).expect("first");
        let l2 = darboux_lie_at(&h, &xi2, &form, &cfg, &y).expect("second");
        let want = l1 + l2 * c;
        worst = worst.max(darboux_verify::sample::rel_err(&got, &want));
    }
    assert!(worst <= 1e-5, "linearity defect {worst:.3e} above 1e-5");
    println!("pass: derivative is linear in the invariant field, rel err <= {worst:.3e} (tol 1e-5)");
}
