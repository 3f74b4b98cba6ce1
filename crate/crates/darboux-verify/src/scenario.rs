//! Scenario files: a JSON description of one verification setting.
//!
//! A scenario picks a structure group and a chart, declares named
//! coordinate objects (vector fields, sections, connection forms) as
//! expression lists, selects the suites to run, and optionally pins
//! the run configuration:
//!
//! ```json
//! {
//!   "group": "SO3",
//!   "chart": { "dim": 3, "bounds": [[-1.5, 1.5], [-1.5, 1.5], [-1.5, 1.5]] },
//!   "fields": { "X": ["0.3 + 0.2*sin(x2)", "-0.4*x1", "0.1*x3"] },
//!   "sections": { "a": { "target": "g", "components": ["0.5*x1", "0", "0.2"] } },
//!   "connections": { "omega": [["0.3*x2", "0.1", "0"], ["0", "0.4*x1", "0"], ["0", "0", "0.25*x1"]] },
//!   "suites": ["division", "flow-stencil"],
//!   "config": { "eps": 1e-3, "stencil": "central4", "rk4_steps": 32 },
//!   "seed": 42
//! }
//! ```
//!
//! Section targets: "V" (standard-module-valued), "g" (algebra-valued),
//! "G" (group-valued, written through exp of an algebra expression).
//! A connection is one algebra-coordinate list per chart direction.
//! Structural problems surface as schema errors with the offending
//! field path; name lookups that fail at suite time surface as resolve
//! errors; length mismatches as dimension errors.

use std::collections::BTreeMap;
use std::path::Path;
use std::sync::Arc;

use darboux::{
    vec_matrix, BundleMap, Chart, ConnectionForm, FdConfig, FdScheme, FlowConfig, GSpace,
    LieGroup, NaturalBundleKind, Section, VectorField,
};
use nalgebra::DVector;
use serde_json::{Map, Value};

use crate::error::{CliError, Result};
use crate::expr::{parse_expression, Expr};

/// Run configuration after merging scenario values over the defaults.
#[derive(Debug, Clone, Copy)]
pub struct RunConfig {
    pub eps: f64,
    pub scheme: FdScheme,
    pub rk4_steps: u32,
    /// Overrides every case's default sample count when set.
    pub samples: Option<usize>,
}

impl Default for RunConfig {
    fn default() -> Self {
        let fd = FdConfig::<f64>::default();
        Self {
            eps: fd.eps,
            scheme: fd.scheme,
            rk4_steps: FlowConfig::<f64>::default().rk4_steps,
            samples: None,
        }
    }
}

impl RunConfig {
    pub fn flow_config(&self) -> FlowConfig {
        FlowConfig {
            rk4_steps: self.rk4_steps,
            fd: FdConfig::new(self.scheme, self.eps),
            ..FlowConfig::default()
        }
    }

    pub fn stencil_name(&self) -> &'static str {
        match self.scheme {
            FdScheme::Central2 => "central2",
            FdScheme::Central4 => "central4",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SectionTarget {
    Module,
    Algebra,
    Group,
}

pub struct SectionEntry {
    pub target: SectionTarget,
    pub section: Section,
}

/// A loaded scenario with all coordinate objects compiled.
pub struct Scenario {
    pub group_label: String,
    pub group: LieGroup,
    pub chart: Chart,
    pub fields: BTreeMap<String, VectorField>,
    pub sections: BTreeMap<String, SectionEntry>,
    pub connections: BTreeMap<String, ConnectionForm>,
    pub suites: Vec<String>,
    pub config: RunConfig,
    pub seed: u64,
}

impl Scenario {
    pub fn load(path: &Path) -> Result<Scenario> {
        let text = std::fs::read_to_string(path)?;
        Scenario::from_json(&text)
    }

    pub fn from_json(text: &str) -> Result<Scenario> {
        let value: Value = serde_json::from_str(text)?;
        build(&value)
    }

    pub fn field(&self, name: &str) -> Result<&VectorField> {
        self.fields.get(name).ok_or_else(|| CliError::Resolve(format!("field {name:?}")))
    }

    pub fn connection(&self, name: &str) -> Result<&ConnectionForm> {
        self.connections
            .get(name)
            .ok_or_else(|| CliError::Resolve(format!("connection {name:?}")))
    }

    pub fn algebra_section(&self, name: &str) -> Result<&Section> {
        match self.sections.get(name) {
            Some(e) if e.target == SectionTarget::Algebra => Ok(&e.section),
            Some(_) => Err(CliError::Dimension(format!(
                "section {name:?} must have target \"g\""
            ))),
            None => Err(CliError::Resolve(format!("section {name:?}"))),
        }
    }

    /// A group-valued section as a base-sourced map into the conjugation
    /// fiber: `x -> exp(a(x))` with `a` the stored algebra expression.
    pub fn group_map(&self, name: &str) -> Result<BundleMap> {
        let entry = match self.sections.get(name) {
            Some(e) if e.target == SectionTarget::Group => e,
            Some(_) => {
                return Err(CliError::Dimension(format!(
                    "section {name:?} must have target \"G\""
                )))
            }
            None => return Err(CliError::Resolve(format!("section {name:?}"))),
        };
        let group = self.group.clone();
        let sec = entry.section.clone();
        Ok(BundleMap::new(
            NaturalBundleKind::Base,
            GSpace::conjugation(&self.group),
            false,
            move |y| {
                let g = group.exp(&group.algebra_from_coords(&sec.eval(&y.x)));
                vec_matrix(g.matrix())
            },
        ))
    }
}

fn build(value: &Value) -> Result<Scenario> {
    let root = as_object(value, "$")?;
    for key in root.keys() {
        if !matches!(
            key.as_str(),
            "group" | "chart" | "fields" | "sections" | "connections" | "suites" | "config"
                | "seed"
        ) {
            return Err(schema(key, "unknown scenario key"));
        }
    }

    let group_label = as_str(require(root, "group", "$")?, "group")?.to_string();
    let group = parse_group(&group_label)?;

    let chart_obj = as_object(require(root, "chart", "$")?, "chart")?;
    let dim = as_usize(require(chart_obj, "dim", "chart")?, "chart.dim")?;
    if dim == 0 {
        return Err(schema("chart.dim", "chart dimension must be positive"));
    }
    let bounds_val = as_array(require(chart_obj, "bounds", "chart")?, "chart.bounds")?;
    if bounds_val.len() != dim {
        return Err(CliError::Dimension(format!(
            "chart.bounds has {} intervals for dimension {dim}",
            bounds_val.len()
        )));
    }
    let mut bounds = Vec::with_capacity(dim);
    for (i, b) in bounds_val.iter().enumerate() {
        let path = format!("chart.bounds[{i}]");
        let pair = as_array(b, &path)?;
        if pair.len() != 2 {
            return Err(schema(&path, "interval needs exactly [lo, hi]"));
        }
        let lo = as_f64(&pair[0], &format!("{path}[0]"))?;
        let hi = as_f64(&pair[1], &format!("{path}[1]"))?;
        if !(lo < hi) {
            return Err(schema(&path, "interval needs lo < hi"));
        }
        bounds.push((lo, hi));
    }
    let chart = Chart::new(bounds);

    let mut fields = BTreeMap::new();
    if let Some(v) = root.get("fields") {
        for (name, comps) in as_object(v, "fields")? {
            let path = format!("fields.{name}");
            let exprs = parse_components(comps, &path, dim, dim)?;
            fields.insert(name.clone(), expr_field(&chart, exprs));
        }
    }

    let mut sections = BTreeMap::new();
    if let Some(v) = root.get("sections") {
        for (name, body) in as_object(v, "sections")? {
            let path = format!("sections.{name}");
            let obj = as_object(body, &path)?;
            let target = match as_str(require(obj, "target", &path)?, &format!("{path}.target"))? {
                "V" => SectionTarget::Module,
                "g" => SectionTarget::Algebra,
                "G" => SectionTarget::Group,
                other => {
                    return Err(schema(
                        &format!("{path}.target"),
                        &format!("unknown target {other:?} (expected \"V\", \"g\", or \"G\")"),
                    ))
                }
            };
            let want = match target {
                SectionTarget::Module => group.ambient_dim(),
                SectionTarget::Algebra | SectionTarget::Group => group.dim(),
            };
            let comps = require(obj, "components", &path)?;
            let exprs = parse_components(comps, &format!("{path}.components"), dim, want)?;
            sections.insert(
                name.clone(),
                SectionEntry { target, section: expr_section(&chart, exprs) },
            );
        }
    }

    let mut connections = BTreeMap::new();
    if let Some(v) = root.get("connections") {
        for (name, body) in as_object(v, "connections")? {
            let path = format!("connections.{name}");
            let rows = as_array(body, &path)?;
            if rows.len() != dim {
                return Err(CliError::Dimension(format!(
                    "{path} has {} coordinate lists for chart dimension {dim}",
                    rows.len()
                )));
            }
            let mut coords: Vec<Arc<dyn Fn(&DVector<f64>) -> DVector<f64> + Send + Sync>> =
                Vec::with_capacity(dim);
            for (i, row) in rows.iter().enumerate() {
                let exprs = parse_components(row, &format!("{path}[{i}]"), dim, group.dim())?;
                coords.push(Arc::new(move |x: &DVector<f64>| eval_components(&exprs, x)));
            }
            connections.insert(
                name.clone(),
                ConnectionForm::from_coordinate_functions(chart.clone(), group.clone(), coords),
            );
        }
    }

    let mut suites = Vec::new();
    if let Some(v) = root.get("suites") {
        for (i, s) in as_array(v, "suites")?.iter().enumerate() {
            suites.push(as_str(s, &format!("suites[{i}]"))?.to_string());
        }
    }

    let mut config = RunConfig::default();
    if let Some(v) = root.get("config") {
        let obj = as_object(v, "config")?;
        for key in obj.keys() {
            if !matches!(key.as_str(), "eps" | "stencil" | "rk4_steps" | "samples") {
                return Err(schema(&format!("config.{key}"), "unknown config key"));
            }
        }
        if let Some(e) = obj.get("eps") {
            config.eps = as_f64(e, "config.eps")?;
            if !(config.eps > 0.0) {
                return Err(schema("config.eps", "step must be positive"));
            }
        }
        if let Some(s) = obj.get("stencil") {
            config.scheme = parse_stencil(as_str(s, "config.stencil")?)?;
        }
        if let Some(r) = obj.get("rk4_steps") {
            let n = as_usize(r, "config.rk4_steps")?;
            if n == 0 {
                return Err(schema("config.rk4_steps", "step count must be positive"));
            }
            config.rk4_steps = n as u32;
        }
        if let Some(k) = obj.get("samples") {
            config.samples = Some(as_usize(k, "config.samples")?);
        }
    }

    let seed = match root.get("seed") {
        Some(v) => v
            .as_u64()
            .ok_or_else(|| schema("seed", "expected an unsigned integer"))?,
        None => 42,
    };

    Ok(Scenario {
        group_label,
        group,
        chart,
        fields,
        sections,
        connections,
        suites,
        config,
        seed,
    })
}

pub fn parse_stencil(name: &str) -> Result<FdScheme> {
    match name {
        "central2" => Ok(FdScheme::Central2),
        "central4" => Ok(FdScheme::Central4),
        other => Err(schema(
            "config.stencil",
            &format!("unknown stencil {other:?} (expected \"central2\" or \"central4\")"),
        )),
    }
}

fn parse_group(label: &str) -> Result<LieGroup> {
    if label == "SO3" {
        return Ok(LieGroup::special_orthogonal3());
    }
    if let Some(n) = label.strip_prefix("GL") {
        if let Ok(n) = n.parse::<usize>() {
            if (1..=4).contains(&n) {
                return Ok(LieGroup::general_linear(n));
            }
        }
    }
    if let Some(d) = label.strip_prefix('T') {
        if let Ok(d) = d.parse::<usize>() {
            if (1..=4).contains(&d) {
                return Ok(LieGroup::translation(d));
            }
        }
    }
    Err(schema(
        "group",
        &format!("unknown group {label:?} (expected \"SO3\", \"GL1\"..\"GL4\", or \"T1\"..\"T4\")"),
    ))
}

fn parse_components(v: &Value, path: &str, dim: usize, want: usize) -> Result<Vec<Expr>> {
    let items = as_array(v, path)?;
    if items.len() != want {
        return Err(CliError::Dimension(format!(
            "{path} has {} components, expected {want}",
            items.len()
        )));
    }
    let mut out = Vec::with_capacity(want);
    for (i, item) in items.iter().enumerate() {
        let src = as_str(item, &format!("{path}[{i}]"))?;
        out.push(parse_expression(src, dim)?);
    }
    Ok(out)
}

fn eval_components(exprs: &[Expr], x: &DVector<f64>) -> DVector<f64> {
    DVector::from_iterator(exprs.len(), exprs.iter().map(|e| e.eval(x.as_slice())))
}

fn expr_field(chart: &Chart, exprs: Vec<Expr>) -> VectorField {
    VectorField::new(chart.clone(), move |x| eval_components(&exprs, x))
}

fn expr_section(chart: &Chart, exprs: Vec<Expr>) -> Section {
    let dim = exprs.len();
    Section::new(chart.clone(), dim, move |x| eval_components(&exprs, x))
}

fn schema(path: &str, detail: &str) -> CliError {
    CliError::Schema { path: path.to_string(), detail: detail.to_string() }
}

fn as_object<'a>(v: &'a Value, path: &str) -> Result<&'a Map<String, Value>> {
    v.as_object().ok_or_else(|| schema(path, "expected an object"))
}

fn as_array<'a>(v: &'a Value, path: &str) -> Result<&'a Vec<Value>> {
    v.as_array().ok_or_else(|| schema(path, "expected an array"))
}

fn as_str<'a>(v: &'a Value, path: &str) -> Result<&'a str> {
    v.as_str().ok_or_else(|| schema(path, "expected a string"))
}

fn as_f64(v: &Value, path: &str) -> Result<f64> {
    v.as_f64().ok_or_else(|| schema(path, "expected a number"))
}

fn as_usize(v: &Value, path: &str) -> Result<usize> {
    v.as_u64()
        .map(|n| n as usize)
        .ok_or_else(|| schema(path, "expected an unsigned integer"))
}

fn require<'a>(map: &'a Map<String, Value>, key: &str, path: &str) -> Result<&'a Value> {
    map.get(key).ok_or_else(|| schema(path, &format!("missing key {key:?}")))
}

#[cfg(test)]
mod tests {
    use super::*;

    const MINIMAL: &str = r#"{
        "group": "SO3",
        "chart": { "dim": 2, "bounds": [[-1, 1], [-1, 1]] },
        "fields": { "X": ["0.1*x2", "-0.2*x1"] },
        "sections": {
            "a": { "target": "g", "components": ["0.5*x1", "0", "0.2"] },
            "s": { "target": "G", "components": ["0.1", "0.2*x2", "0"] }
        },
        "connections": { "omega": [["0.3*x2", "0.1", "0"], ["0", "0.4*x1", "0"]] },
        "suites": ["division"],
        "config": { "eps": 0.002, "stencil": "central2", "rk4_steps": 16 },
        "seed": 7
    }"#;

    #[test]
    fn minimal_scenario_loads() {
        let sc = Scenario::from_json(MINIMAL).expect("loads");
        assert_eq!(sc.group_label, "SO3");
        assert_eq!(sc.chart.dim(), 2);
        assert_eq!(sc.seed, 7);
        assert_eq!(sc.config.eps, 0.002);
        assert_eq!(sc.config.rk4_steps, 16);
        assert_eq!(sc.suites, vec!["division".to_string()]);

        let x = DVector::from_vec(vec![0.5, -0.5]);
        let xv = sc.field("X").expect("field").eval(&x);
        assert_eq!(xv, DVector::from_vec(vec![-0.05, -0.1]));
        let a = sc.algebra_section("a").expect("section").eval(&x);
        assert_eq!(a, DVector::from_vec(vec![0.25, 0.0, 0.2]));
        let omega = sc.connection("omega").expect("connection");
        let v = DVector::from_vec(vec![1.0, 0.0]);
        assert_eq!(omega.apply(&x, &v).coords()[0], -0.15);
    }

    #[test]
    fn group_section_exponentiates() {
        let sc = Scenario::from_json(MINIMAL).expect("loads");
        let s = sc.group_map("s").expect("group map");
        let y = darboux::FiberPoint::base(DVector::from_vec(vec![0.0, 0.0]));
        let m = darboux::unvec_matrix(&s.eval(&y).expect("eval"), 3);
        // exp(hat(0.1, 0, 0)) rotates about the first axis.
        assert!((m[(1, 1)] - 0.1f64.cos()).abs() < 1e-12);
        assert!((m[(2, 1)] - 0.1f64.sin()).abs() < 1e-12);
    }

    #[test]
    fn dangling_name_is_a_resolve_error() {
        let sc = Scenario::from_json(MINIMAL).expect("loads");
        match sc.field("Zed") {
            Err(CliError::Resolve(name)) => assert!(name.contains("Zed")),
            other => panic!("expected resolve error, got {:?}", other.map(|_| ())),
        }
    }

    #[test]
    fn wrong_component_count_is_a_dimension_error() {
        let bad = MINIMAL.replace(r#"["0.1*x2", "-0.2*x1"]"#, r#"["0.1*x2"]"#);
        match Scenario::from_json(&bad) {
            Err(CliError::Dimension(msg)) => assert!(msg.contains("fields.X")),
            other => panic!("expected dimension error, got {:?}", other.map(|_| ())),
        }
    }

    #[test]
    fn missing_chart_is_a_schema_error() {
        match Scenario::from_json(r#"{ "group": "SO3" }"#) {
            Err(CliError::Schema { path, .. }) => assert_eq!(path, "$"),
            other => panic!("expected schema error, got {:?}", other.map(|_| ())),
        }
    }

    #[test]
    fn unknown_group_is_rejected() {
        let bad = MINIMAL.replace("\"SO3\"", "\"SP4\"");
        assert!(matches!(Scenario::from_json(&bad), Err(CliError::Schema { .. })));
    }

    #[test]
    fn bad_expression_reports_parse_offset() {
        let bad = MINIMAL.replace("-0.2*x1", "-0.2*");
        match Scenario::from_json(&bad) {
            Err(CliError::Parse { offset, .. }) => assert_eq!(offset, 5),
            other => panic!("expected parse error, got {:?}", other.map(|_| ())),
        }
    }

    #[test]
    fn out_of_chart_coordinate_is_rejected() {
        let bad = MINIMAL.replace("0.1*x2", "0.1*x3");
        assert!(matches!(Scenario::from_json(&bad), Err(CliError::Parse { .. })));
    }
}
