//! Experiment configuration: one JSON document, validated before anything runs.

use crate::CliError;
use serde::{Deserialize, Serialize};
use std::collections::BTreeMap;
use symcalc::weights::{builtin_weight, WeightSpec};
use symcalc::{make_grid, GridMode, PhaseGrid, Weight};

pub const SUITES: [&str; 9] = ["tfa-core", "modspace", "quantize", "weylalg", "toeplitz", "symgroup", "confine", "combinat", "weights"];

#[derive(Clone, Debug, Deserialize, Serialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    #[serde(default = "default_id")]
    pub id: String,
    pub grid: GridConfig,
    #[serde(default)]
    pub weights: Vec<serde_json::Value>,
    #[serde(default)]
    pub windows: Vec<WindowConfig>,
    #[serde(default)]
    pub ensembles: EnsembleConfig,
    #[serde(default)]
    pub tolerances: Tolerances,
    pub experiments: Vec<ExperimentEntry>,
    /// Write binary symbol/matrix dumps next to the report.
    #[serde(default)]
    pub dumps: bool,
}

fn default_id() -> String {
    "experiment".into()
}

#[derive(Clone, Copy, Debug, Deserialize, Serialize, PartialEq)]
#[serde(rename_all = "snake_case")]
pub enum ModeName {
    SelfDual,
    Custom,
}

#[derive(Clone, Debug, Deserialize, Serialize)]
#[serde(deny_unknown_fields)]
pub struct GridConfig {
    #[serde(rename = "N")]
    pub n: usize,
    #[serde(default = "one_dim")]
    pub d: usize,
    #[serde(default = "self_dual")]
    pub mode: ModeName,
    /// Spacing for mode "custom".
    #[serde(default)]
    pub h: Option<f64>,
    /// Second grid size for refinement-stability checks; default ≈ 4N/3.
    #[serde(rename = "refine_N", default)]
    pub refine_n: Option<usize>,
}

fn one_dim() -> usize {
    1
}

fn self_dual() -> ModeName {
    ModeName::SelfDual
}

#[derive(Clone, Debug, Deserialize, Serialize)]
#[serde(deny_unknown_fields)]
pub struct WindowConfig {
    pub id: String,
    #[serde(flatten)]
    pub kind: WindowKind,
}

#[derive(Clone, Debug, Deserialize, Serialize, PartialEq)]
#[serde(tag = "kind", content = "params", rename_all = "snake_case")]
pub enum WindowKind {
    /// Normalised Gaussian of width w.
    Gaussian { w: f64 },
    /// Normalised coherent state at (x0, ξ0).
    Coherent { x0: Vec<f64>, xi0: Vec<f64> },
}

#[derive(Clone, Debug, Deserialize, Serialize)]
#[serde(deny_unknown_fields)]
pub struct EnsembleConfig {
    #[serde(default = "six")]
    pub hermite_count: usize,
    #[serde(default = "four")]
    pub random_coherent_count: usize,
    #[serde(default = "eight")]
    pub seed: u64,
    /// Coherent-state centres are uniform in [-shift, shift]^{2d}.
    #[serde(default = "shift")]
    pub shift: f64,
}

fn six() -> usize {
    6
}
fn four() -> usize {
    4
}
fn eight() -> u64 {
    8
}
fn shift() -> f64 {
    1.5
}

impl Default for EnsembleConfig {
    fn default() -> Self {
        Self { hermite_count: 6, random_coherent_count: 4, seed: 8, shift: 1.5 }
    }
}

#[derive(Clone, Debug, Deserialize, Serialize)]
#[serde(deny_unknown_fields)]
pub struct Tolerances {
    #[serde(default = "route_tol")]
    pub route_tol: f64,
    #[serde(default = "group_tol")]
    pub group_tol: f64,
    #[serde(rename = "ratio_K", default = "ratio_k")]
    pub ratio_k: f64,
    #[serde(default = "alias_budget")]
    pub alias_budget: f64,
}

fn route_tol() -> f64 {
    1e-7
}
fn group_tol() -> f64 {
    1e-6
}
fn ratio_k() -> f64 {
    10.0
}
fn alias_budget() -> f64 {
    1e-6
}

impl Default for Tolerances {
    fn default() -> Self {
        Self { route_tol: 1e-7, group_tol: 1e-6, ratio_k: 10.0, alias_budget: 1e-6 }
    }
}

#[derive(Clone, Debug, Deserialize, Serialize)]
#[serde(untagged)]
pub enum ExperimentEntry {
    Name(String),
    Full(Experiment),
}

#[derive(Clone, Debug, Deserialize, Serialize)]
#[serde(deny_unknown_fields)]
pub struct Experiment {
    pub suite: String,
    /// Weight ids; the meaning is per suite (see README).
    #[serde(default)]
    pub weights: Vec<String>,
    /// Window ids; the meaning is per suite.
    #[serde(default)]
    pub windows: Vec<String>,
}

impl ExperimentEntry {
    pub fn resolve(&self) -> Experiment {
        match self {
            ExperimentEntry::Name(s) => Experiment { suite: s.clone(), weights: vec![], windows: vec![] },
            ExperimentEntry::Full(e) => e.clone(),
        }
    }
}

/// A validated configuration with weights built and grids constructed.
pub struct Resolved {
    pub config: ExperimentConfig,
    pub grid: PhaseGrid,
    pub refine: PhaseGrid,
    pub weights: BTreeMap<String, (WeightSpec, Weight)>,
    pub windows: BTreeMap<String, WindowKind>,
    pub experiments: Vec<Experiment>,
}

fn field(path: impl Into<String>, msg: impl std::fmt::Display) -> CliError {
    CliError::Config(format!("{}: {msg}", path.into()))
}

const WEIGHT_KINDS: &str = "bracket_power, subexp, product, reciprocal, constant";

fn parse_weight(i: usize, v: &serde_json::Value) -> Result<(String, WeightSpec), CliError> {
    let obj = v.as_object().ok_or_else(|| field(format!("weights[{i}]"), "expected an object {id, kind, params}"))?;
    for key in obj.keys() {
        if !["id", "kind", "params"].contains(&key.as_str()) {
            return Err(field(format!("weights[{i}].{key}"), "unknown field"));
        }
    }
    let id = obj
        .get("id")
        .and_then(|x| x.as_str())
        .ok_or_else(|| field(format!("weights[{i}].id"), "missing or not a string"))?
        .to_string();
    let kind = obj.get("kind").and_then(|x| x.as_str()).ok_or_else(|| field(format!("weights[{i}].kind"), "missing or not a string"))?;
    let known = ["bracket_power", "subexp", "product", "reciprocal", "constant"];
    if !known.contains(&kind) {
        return Err(field(format!("weights[{i}].kind"), format!("unknown weight kind `{kind}` (expected one of {WEIGHT_KINDS})")));
    }
    let spec: WeightSpec = serde_json::from_value(v.as_object().map(|o| {
        let mut o = o.clone();
        o.remove("id");
        serde_json::Value::Object(o)
    }).unwrap())
    .map_err(|e| field(format!("weights[{i}].params"), e))?;
    Ok((id, spec))
}

fn build_grid(n: usize, g: &GridConfig, budget: f64, path: &str) -> Result<PhaseGrid, CliError> {
    let mode = match (g.mode, g.h) {
        (ModeName::SelfDual, None) => GridMode::SelfDual,
        (ModeName::SelfDual, Some(_)) => return Err(field("grid.h", "only allowed with mode \"custom\"")),
        (ModeName::Custom, Some(h)) => GridMode::Custom(h),
        (ModeName::Custom, None) => return Err(field("grid.h", "mode \"custom\" needs a spacing h")),
    };
    make_grid(n, g.d, mode).map(|p| p.with_alias_budget(budget)).map_err(|e| field(path, e))
}

fn default_refine(n: usize) -> usize {
    (4 * n / 3 + 1) / 2 * 2
}

impl Resolved {
    pub fn from_json(text: &str) -> Result<Self, CliError> {
        let config: ExperimentConfig = serde_json::from_str(text).map_err(|e| CliError::Config(format!("config: {e}")))?;
        Self::new(config)
    }

    pub fn new(config: ExperimentConfig) -> Result<Self, CliError> {
        let t = &config.tolerances;
        for (name, v) in [("route_tol", t.route_tol), ("group_tol", t.group_tol), ("alias_budget", t.alias_budget)] {
            if !(v > 0.0 && v < 1.0) {
                return Err(field(format!("tolerances.{name}"), format!("must lie in (0, 1), got {v}")));
            }
        }
        if !(t.ratio_k >= 1.0) {
            return Err(field("tolerances.ratio_K", format!("must be ≥ 1, got {}", t.ratio_k)));
        }
        if config.grid.d != 1 {
            return Err(field("grid.d", format!("the suites run in d = 1 (got {})", config.grid.d)));
        }
        let grid = build_grid(config.grid.n, &config.grid, t.alias_budget, "grid.N")?;
        let rn = config.grid.refine_n.unwrap_or_else(|| default_refine(config.grid.n));
        if rn <= config.grid.n {
            return Err(field("grid.refine_N", format!("must exceed N = {} (got {rn})", config.grid.n)));
        }
        let refine = build_grid(rn, &config.grid, t.alias_budget, "grid.refine_N")?;

        let mut weights = BTreeMap::new();
        for (i, v) in config.weights.iter().enumerate() {
            let (id, spec) = parse_weight(i, v)?;
            let w = builtin_weight(&spec).map_err(|e| field(format!("weights[{i}].params"), e))?;
            if weights.insert(id.clone(), (spec, w)).is_some() {
                return Err(field(format!("weights[{i}].id"), format!("duplicate id `{id}`")));
            }
        }
        let mut windows = BTreeMap::new();
        for (i, w) in config.windows.iter().enumerate() {
            match &w.kind {
                WindowKind::Gaussian { w: width } if !(*width > 0.0 && width.is_finite()) => {
                    return Err(field(format!("windows[{i}].params.w"), format!("must be positive, got {width}")));
                }
                WindowKind::Coherent { x0, xi0 } if x0.len() != config.grid.d || xi0.len() != config.grid.d => {
                    return Err(field(format!("windows[{i}].params"), format!("x0 and xi0 need {} components", config.grid.d)));
                }
                _ => {}
            }
            if windows.insert(w.id.clone(), w.kind.clone()).is_some() {
                return Err(field(format!("windows[{i}].id"), format!("duplicate id `{}`", w.id)));
            }
        }
        if config.experiments.is_empty() {
            return Err(field("experiments", "no suites requested"));
        }
        let mut experiments = vec![];
        for (i, e) in config.experiments.iter().enumerate() {
            let e = e.resolve();
            if !SUITES.contains(&e.suite.as_str()) {
                return Err(field(format!("experiments[{i}].suite"), format!("unknown suite `{}` (expected one of {})", e.suite, SUITES.join(", "))));
            }
            for (j, id) in e.weights.iter().enumerate() {
                if !weights.contains_key(id) {
                    return Err(field(format!("experiments[{i}].weights[{j}]"), format!("unknown weight id `{id}`")));
                }
            }
            for (j, id) in e.windows.iter().enumerate() {
                if !windows.contains_key(id) {
                    return Err(field(format!("experiments[{i}].windows[{j}]"), format!("unknown window id `{id}`")));
                }
            }
            experiments.push(e);
        }
        Ok(Self { config, grid, refine, weights, windows, experiments })
    }

    /// Keeps only the named suites (in config order); a suite missing from the
    /// config runs with its defaults.
    pub fn select(&mut self, names: &[String]) -> Result<(), CliError> {
        if names.is_empty() {
            return Ok(());
        }
        for n in names {
            if !SUITES.contains(&n.as_str()) {
                return Err(field("--suite", format!("unknown suite `{n}` (expected one of {})", SUITES.join(", "))));
            }
        }
        let mut kept: Vec<Experiment> = self.experiments.iter().filter(|e| names.contains(&e.suite)).cloned().collect();
        for n in names {
            if !kept.iter().any(|e| &e.suite == n) {
                kept.push(Experiment { suite: n.clone(), weights: vec![], windows: vec![] });
            }
        }
        self.experiments = kept;
        Ok(())
    }
}
