//! Run configuration: a TOML tree assembled from an optional preset, an
//! optional config file, and `key=value` overrides, then checked against the
//! schema before any computation starts.

use std::path::{Path, PathBuf};

use hyperfin_core::{
    component_index, BifurcationSettings, FinanceParams, GridSpec, LyapunovSettings, Model,
    ModelKind, OrderVector, Scenario, SweepParameter, SweepPlan, DEFAULT_GUARD,
};
use serde::Deserialize;
use toml::{Table, Value};

use crate::error::CliError;

pub const BASELINE_PRESET: &str = "paper-sec4";

/// Base configuration for the hyperchaos-detection experiments.
const BASELINE_PRESET_TOML: &str = r#"
model = "5d"
orders = [0.3, 0.5, 0.6, 0.24, 0.24]
initial = [0.4, 0.6, 0.8, 0.3, 0.4]

[params]
a = 0.8
b = 0.6
c = 1.0
d = 2.0
k = 2.0
p = 1.0

[grid]
h = 0.002
"#;

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    #[serde(default = "default_model")]
    pub model: String,
    #[serde(default)]
    pub params: ParamsSection,
    pub orders: Option<Vec<f64>>,
    pub initial: Option<Vec<f64>>,
    pub workers: Option<usize>,
    #[serde(default)]
    pub grid: GridSection,
    #[serde(default)]
    pub lyapunov: LyapunovSection,
    pub scan: Option<ScanSection>,
    #[serde(default)]
    pub attractor: AttractorSection,
    #[serde(default)]
    pub output: OutputSection,
}

fn default_model() -> String {
    "5d".into()
}

/// Unset constants fall back to a=0.8, b=0.6, c=1, d=2, k=2, p=1, m=0.
#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ParamsSection {
    pub a: Option<f64>,
    pub b: Option<f64>,
    pub c: Option<f64>,
    pub d: Option<f64>,
    pub k: Option<f64>,
    pub p: Option<f64>,
    pub m1: Option<f64>,
    pub m2: Option<f64>,
    pub m3: Option<f64>,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct GridSection {
    pub h: Option<f64>,
    pub steps: usize,
    pub transient: usize,
    pub guard: f64,
}

impl Default for GridSection {
    fn default() -> Self {
        GridSection {
            h: None,
            steps: 1000,
            transient: 0,
            guard: DEFAULT_GUARD,
        }
    }
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct LyapunovSection {
    pub transient: usize,
    pub iterations: usize,
    pub reorth_every: usize,
    pub eps: f64,
}

impl Default for LyapunovSection {
    fn default() -> Self {
        let d = LyapunovSettings::default();
        LyapunovSection {
            transient: d.transient,
            iterations: d.iterations,
            reorth_every: d.reorth_every,
            eps: d.eps_positive,
        }
    }
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScanSection {
    #[serde(default = "default_scan_kind")]
    pub kind: String,
    pub parameter: String,
    pub lo: f64,
    pub hi: f64,
    #[serde(default = "default_points")]
    pub points: usize,
    #[serde(default = "default_component")]
    pub component: String,
    #[serde(default = "default_samples")]
    pub samples: usize,
    #[serde(default = "default_bif_transient")]
    pub transient: usize,
}

fn default_scan_kind() -> String {
    "spectrum".into()
}
fn default_points() -> usize {
    97
}
fn default_component() -> String {
    "u".into()
}
fn default_samples() -> usize {
    BifurcationSettings::default().samples
}
fn default_bif_transient() -> usize {
    BifurcationSettings::default().transient
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct AttractorSection {
    pub projection: Vec<String>,
}

impl Default for AttractorSection {
    fn default() -> Self {
        AttractorSection {
            projection: vec!["y".into(), "z".into(), "u".into()],
        }
    }
}

#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct OutputSection {
    pub dir: Option<PathBuf>,
    pub plot: bool,
}

fn config_err(msg: impl Into<String>) -> CliError {
    CliError::Config(msg.into())
}

pub fn preset(name: &str) -> Result<Table, CliError> {
    match name {
        BASELINE_PRESET => Ok(BASELINE_PRESET_TOML.parse::<Table>().expect("preset parses")),
        other => Err(config_err(format!(
            "unknown preset `{other}` (available: {BASELINE_PRESET})"
        ))),
    }
}

/// Recursively overlays `top` onto `base`; non-table values replace.
pub fn merge(base: &mut Table, top: Table) {
    for (key, value) in top {
        match (base.get_mut(&key), value) {
            (Some(Value::Table(b)), Value::Table(t)) => merge(b, t),
            (_, v) => {
                base.insert(key, v);
            }
        }
    }
}

fn parse_scalar(raw: &str) -> Value {
    format!("v = {raw}")
        .parse::<Table>()
        .ok()
        .and_then(|mut t| t.remove("v"))
        .unwrap_or_else(|| Value::String(raw.to_string()))
}

/// Applies `key.path=value`. Numeric path segments index arrays, so
/// `orders.4=0.3` replaces the fifth order.
pub fn apply_override(root: &mut Table, assignment: &str) -> Result<(), CliError> {
    let (path, raw) = assignment
        .split_once('=')
        .ok_or_else(|| config_err(format!("override `{assignment}` is not of the form key=value")))?;
    let path = path.trim();
    let segments: Vec<&str> = path.split('.').collect();
    if segments.iter().any(|s| s.is_empty()) {
        return Err(config_err(format!("override key `{path}` is malformed")));
    }
    let value = parse_scalar(raw.trim());
    if matches!(value, Value::Table(_) | Value::Array(_)) {
        return Err(config_err(format!("override `{path}` must be a scalar")));
    }

    let mut node = Value::Table(std::mem::take(root));
    let result = set_path(&mut node, &segments, value, path);
    if let Value::Table(t) = node {
        *root = t;
    }
    result
}

fn set_path(node: &mut Value, segments: &[&str], value: Value, path: &str) -> Result<(), CliError> {
    let Some((seg, rest)) = segments.split_first() else {
        *node = value;
        return Ok(());
    };
    let child = match node {
        Value::Table(t) => t
            .entry(seg.to_string())
            .or_insert_with(|| Value::Table(Table::new())),
        Value::Array(a) => {
            let i: usize = seg
                .parse()
                .map_err(|_| config_err(format!("`{path}`: `{seg}` is not an array index")))?;
            let len = a.len();
            a.get_mut(i)
                .ok_or_else(|| config_err(format!("`{path}`: index {i} out of range (length {len})")))?
        }
        _ => return Err(config_err(format!("`{path}`: cannot descend into a scalar at `{seg}`"))),
    };
    set_path(child, rest, value, path)
}

/// Preset, then file, then overrides, then schema check.
pub fn load(
    preset_name: Option<&str>,
    file: Option<&Path>,
    overrides: &[String],
) -> Result<RunConfig, CliError> {
    if preset_name.is_none() && file.is_none() {
        return Err(config_err("no configuration: pass a config file or --preset"));
    }
    let mut table = match preset_name {
        Some(name) => preset(name)?,
        None => Table::new(),
    };
    if let Some(path) = file {
        let text = std::fs::read_to_string(path).map_err(|e| CliError::Io {
            path: path.to_path_buf(),
            source: e,
        })?;
        let parsed = text
            .parse::<Table>()
            .map_err(|e| config_err(format!("{}: {e}", path.display())))?;
        merge(&mut table, parsed);
    }
    for o in overrides {
        apply_override(&mut table, o)?;
    }
    Value::Table(table)
        .try_into::<RunConfig>()
        .map_err(|e| config_err(e.to_string().trim().to_string()))
}

/// What a spectrum or bifurcation scan should produce.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ScanKind {
    Spectrum,
    Bifurcation,
}

#[derive(Debug, Clone)]
pub struct ScanSpec {
    pub kind: ScanKind,
    pub plan: SweepPlan,
    pub component: usize,
}

/// A validated configuration.
#[derive(Debug, Clone)]
pub struct Experiment {
    pub scenario: Scenario,
    pub grid: GridSpec,
    pub transient: usize,
    pub guard: f64,
    pub lyapunov: LyapunovSettings,
    pub workers: Option<usize>,
    pub out_dir: PathBuf,
    pub plot: bool,
    scan: Option<ScanSection>,
    projection: Vec<String>,
}

const COMPONENT_NAMES: [&str; 5] = ["x", "y", "z", "w", "u"];

fn component(name: &str, dim: usize, key: &str) -> Result<usize, CliError> {
    match component_index(name) {
        Some(i) if i < dim => Ok(i),
        _ => Err(config_err(format!(
            "{key}: `{name}` is not a component of this model (expected one of {})",
            COMPONENT_NAMES[..dim].join(", ")
        ))),
    }
}

impl RunConfig {
    pub fn resolve(&self) -> Result<Experiment, CliError> {
        let kind: ModelKind = self
            .model
            .parse()
            .map_err(|_| config_err(format!("model: `{}` is not one of 3d, 4d, 5d, zero", self.model)))?;

        let orders = self.orders.clone().ok_or_else(|| config_err("orders: missing"))?;
        let initial = self.initial.clone().ok_or_else(|| config_err("initial: missing"))?;
        let dim = kind.fixed_dim().unwrap_or(orders.len());
        if dim == 0 || dim > 5 {
            return Err(config_err(format!("orders: zero model needs 1 to 5 orders, got {dim}")));
        }
        if orders.len() != dim {
            return Err(config_err(format!(
                "orders: expected {dim} entries for model {kind}, got {}",
                orders.len()
            )));
        }
        if initial.len() != dim {
            return Err(config_err(format!(
                "initial: expected {dim} components for model {kind}, got {}",
                initial.len()
            )));
        }
        for (i, a) in orders.iter().enumerate() {
            if !(*a > 0.0 && *a <= 1.0) {
                return Err(config_err(format!("orders.{i} = {a}: order must lie in (0, 1]")));
            }
        }
        for (i, v) in initial.iter().enumerate() {
            if !v.is_finite() {
                return Err(config_err(format!("initial.{i} = {v}: must be finite")));
            }
        }

        let h = self.grid.h.ok_or_else(|| config_err("grid.h: missing"))?;
        if !(h > 0.0) || !h.is_finite() {
            return Err(config_err(format!("grid.h = {h}: step size must be positive")));
        }
        if self.grid.steps == 0 {
            return Err(config_err("grid.steps = 0: need at least one step"));
        }
        if !(self.grid.guard > 0.0) {
            return Err(config_err(format!("grid.guard = {}: must be positive", self.grid.guard)));
        }

        let d = FinanceParams::default();
        let p = &self.params;
        let params = FinanceParams {
            a: p.a.unwrap_or(d.a),
            b: p.b.unwrap_or(d.b),
            c: p.c.unwrap_or(d.c),
            d: p.d.unwrap_or(d.d),
            k: p.k.unwrap_or(d.k),
            p: p.p.unwrap_or(d.p),
            m1: p.m1.unwrap_or(d.m1),
            m2: p.m2.unwrap_or(d.m2),
            m3: p.m3.unwrap_or(d.m3),
        };
        let model = Model::new(kind, params, dim).map_err(|e| config_err(format!("params: {e}")))?;
        let orders = OrderVector::new(orders).map_err(|e| config_err(format!("orders: {e}")))?;
        let scenario = Scenario::new(model, orders, initial, h).map_err(|e| config_err(e.to_string()))?;

        let ly = &self.lyapunov;
        if ly.iterations == 0 {
            return Err(config_err("lyapunov.iterations = 0: need at least one iteration"));
        }
        if ly.reorth_every == 0 {
            return Err(config_err("lyapunov.reorth_every = 0: must be at least 1"));
        }
        if !(ly.eps > 0.0) {
            return Err(config_err(format!("lyapunov.eps = {}: must be positive", ly.eps)));
        }
        if self.workers == Some(0) {
            return Err(config_err("workers = 0: must be at least 1"));
        }

        Ok(Experiment {
            grid: GridSpec::new(h, self.grid.steps).map_err(|e| config_err(format!("grid: {e}")))?,
            scenario,
            transient: self.grid.transient,
            guard: self.grid.guard,
            lyapunov: LyapunovSettings {
                transient: ly.transient,
                iterations: ly.iterations,
                reorth_every: ly.reorth_every,
                eps_positive: ly.eps,
                guard: self.grid.guard,
            },
            workers: self.workers,
            out_dir: self.output.dir.clone().unwrap_or_else(|| PathBuf::from(".")),
            plot: self.output.plot,
            scan: self.scan.clone(),
            projection: self.attractor.projection.clone(),
        })
    }
}

impl Experiment {
    pub fn dim(&self) -> usize {
        self.scenario.dim()
    }

    pub fn component_names(&self) -> &'static [&'static str] {
        &COMPONENT_NAMES[..self.dim()]
    }

    pub fn scan_spec(&self) -> Result<ScanSpec, CliError> {
        let s = self.scan.as_ref().ok_or_else(|| config_err("scan: missing [scan] section"))?;
        let kind = match s.kind.as_str() {
            "spectrum" => ScanKind::Spectrum,
            "bifurcation" => ScanKind::Bifurcation,
            other => {
                return Err(config_err(format!(
                    "scan.kind: `{other}` is not one of spectrum, bifurcation"
                )))
            }
        };
        let parameter: SweepParameter = s
            .parameter
            .parse()
            .map_err(|_| config_err(format!("scan.parameter: unknown parameter `{}`", s.parameter)))?;
        let component = component(&s.component, self.dim(), "scan.component")?;
        let plan = SweepPlan {
            parameter,
            lo: s.lo,
            hi: s.hi,
            grid_points: s.points,
            base: self.scenario.clone(),
            lyapunov: self.lyapunov,
            bifurcation: BifurcationSettings {
                transient: s.transient,
                samples: s.samples,
                guard: self.guard,
            },
            workers: self.workers,
        };
        plan.validate().map_err(|e| config_err(format!("scan: {e}")))?;
        // every grid value must be admissible before the scan starts
        for v in [s.lo, s.hi] {
            self.scenario
                .with_parameter(parameter, v)
                .map_err(|e| config_err(format!("scan.{}: {e}", if v == s.lo { "lo" } else { "hi" })))?;
        }
        Ok(ScanSpec { kind, plan, component })
    }

    pub fn projection(&self) -> Result<[usize; 3], CliError> {
        if self.projection.len() != 3 {
            return Err(config_err(format!(
                "attractor.projection: expected 3 components, got {}",
                self.projection.len()
            )));
        }
        let mut out = [0; 3];
        for (slot, name) in out.iter_mut().zip(&self.projection) {
            *slot = component(name, self.dim(), "attractor.projection")?;
        }
        Ok(out)
    }

    pub fn projection_names(&self) -> Vec<String> {
        self.projection.clone()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn from_preset(overrides: &[&str]) -> Result<RunConfig, CliError> {
        let o: Vec<String> = overrides.iter().map(|s| s.to_string()).collect();
        load(Some(BASELINE_PRESET), None, &o)
    }

    #[test]
    fn preset_expands_to_baseline_values() {
        let exp = from_preset(&[]).unwrap().resolve().unwrap();
        assert_eq!(exp.scenario.h, 0.002);
        assert_eq!(exp.scenario.orders.as_slice(), &[0.3, 0.5, 0.6, 0.24, 0.24]);
        assert_eq!(exp.scenario.x0, vec![0.4, 0.6, 0.8, 0.3, 0.4]);
        let p = exp.scenario.model.params;
        assert_eq!((p.a, p.b, p.c, p.d, p.k, p.p), (0.8, 0.6, 1.0, 2.0, 2.0, 1.0));
    }

    #[test]
    fn overrides_reach_scalars_and_array_elements() {
        let exp = from_preset(&["orders.4=0.3", "params.k=1.5", "grid.steps=10", "workers=2"])
            .unwrap()
            .resolve()
            .unwrap();
        assert_eq!(exp.scenario.orders.as_slice()[4], 0.3);
        assert_eq!(exp.scenario.model.params.k, 1.5);
        assert_eq!(exp.grid.n_steps, 10);
        assert_eq!(exp.workers, Some(2));
        assert!(from_preset(&["orders.9=0.3"]).is_err());
        assert!(from_preset(&["nokey"]).is_err());
        assert!(from_preset(&["orders=[1,2]"]).is_err());
    }

    #[test]
    fn unknown_keys_rejected_with_name() {
        let err = from_preset(&["params.q=1"]).unwrap_err().to_string();
        assert!(err.contains("q"), "{err}");
        let err = from_preset(&["bogus=1"]).unwrap_err().to_string();
        assert!(err.contains("bogus"), "{err}");
    }

    #[test]
    fn schema_violations_name_the_key() {
        let cases = [
            (vec!["orders.2=1.5"], "orders.2"),
            (vec!["orders.0=0"], "orders.0"),
            (vec!["grid.h=0"], "grid.h"),
            (vec!["grid.h=-0.1"], "grid.h"),
            (vec!["model=\"4d\""], "orders"),
            (vec!["params.a=-1"], "params"),
            (vec!["lyapunov.eps=0"], "lyapunov.eps"),
        ];
        for (o, key) in cases {
            let err = from_preset(&o).unwrap().resolve().unwrap_err().to_string();
            assert!(err.contains(key), "{o:?}: {err}");
        }
    }

    #[test]
    fn scan_section_checks() {
        let base = [
            "scan.parameter=\"alpha5\"",
            "scan.lo=0.232",
            "scan.hi=0.328",
        ];
        let exp = from_preset(&base).unwrap().resolve().unwrap();
        let spec = exp.scan_spec().unwrap();
        assert_eq!(spec.kind, ScanKind::Spectrum);
        assert_eq!(spec.plan.grid_points, 97);
        assert_eq!(spec.component, 4);

        let mut bad = base.to_vec();
        bad.push("scan.hi=1.2");
        let err = from_preset(&bad).unwrap().resolve().unwrap().scan_spec().unwrap_err().to_string();
        assert!(err.contains("scan.hi"), "{err}");
        let mut bad = base.to_vec();
        bad.push("scan.kind=\"phase\"");
        assert!(from_preset(&bad).unwrap().resolve().unwrap().scan_spec().is_err());
        assert!(from_preset(&[]).unwrap().resolve().unwrap().scan_spec().is_err());
    }

    #[test]
    fn projection_checks() {
        let exp = from_preset(&[]).unwrap().resolve().unwrap();
        assert_eq!(exp.projection().unwrap(), [1, 2, 4]);
        let cfg = load(None, None, &[]);
        assert!(cfg.is_err());
        let exp = from_preset(&["model=\"3d\"", "orders=0"]);
        assert!(exp.is_err());
    }

    #[test]
    fn merge_is_deep() {
        let mut base = preset(BASELINE_PRESET).unwrap();
        let top: Table = "[params]\nk = 1.5\n".parse().unwrap();
        merge(&mut base, top);
        let cfg: RunConfig = Value::Table(base).try_into().unwrap();
        assert_eq!(cfg.params.k, Some(1.5));
        assert_eq!(cfg.params.a, Some(0.8));
    }
}
