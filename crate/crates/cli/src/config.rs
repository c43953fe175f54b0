//! Experiment configuration: parsing, body resolution and validation.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::path::{Path, PathBuf};

use captree_core::adm::GraphFunction;
use captree_core::yau::SearchOptions;
use captree_core::{BodySpec, GridOptions, MassDensity, Objective};
use serde::{Deserialize, Serialize};
use serde_json::Value;

/// Top-level experiment file.
#[derive(Clone, Debug, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    /// Seed for every randomized body and search; `--seed` overrides it.
    #[serde(default)]
    pub seed: u64,
    /// Grid used by tasks that do not set their own.
    #[serde(default)]
    pub grid: GridOptions,
    #[serde(default)]
    pub tasks: Vec<TaskSpec>,
}

/// Seeded random smooth planar bodies.
#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RandomBodies {
    pub count: usize,
    #[serde(default = "one")]
    pub r0: f64,
    #[serde(default)]
    pub grid: Option<usize>,
}

fn one() -> f64 {
    1.0
}

/// One task. Bodies are inline body specs or `{"file": "path"}` references
/// resolved against the config's directory.
#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum TaskSpec {
    Capacity {
        #[serde(default)]
        id: Option<String>,
        bodies: Vec<Value>,
        p: Vec<f64>,
        #[serde(default)]
        grid: Option<GridOptions>,
    },
    VerifyTree {
        #[serde(default)]
        id: Option<String>,
        #[serde(default)]
        bodies: Vec<Value>,
        #[serde(default)]
        random: Option<RandomBodies>,
        p: f64,
        #[serde(default)]
        tolerance: Option<f64>,
        #[serde(default)]
        overrides: BTreeMap<String, f64>,
        #[serde(default)]
        grid: Option<GridOptions>,
    },
    Sandwich {
        #[serde(default)]
        id: Option<String>,
        body: Value,
        p: f64,
        /// Curvature bounds; default to the extreme principal curvatures.
        #[serde(default)]
        alpha: Option<f64>,
        #[serde(default)]
        beta: Option<f64>,
        #[serde(default)]
        tolerance: Option<f64>,
        /// Multiplies the computed capacity before the check; values other
        /// than 1 make a negative control.
        #[serde(default)]
        capacity_scale: Option<f64>,
        #[serde(default)]
        grid: Option<GridOptions>,
    },
    Maximize {
        #[serde(default)]
        id: Option<String>,
        h: Value,
        objective: Objective,
        #[serde(default)]
        search: SearchOptions,
    },
    Adm {
        #[serde(default)]
        id: Option<String>,
        graph: GraphFunction,
        #[serde(default = "default_radii")]
        radii: Vec<f64>,
        #[serde(default)]
        tolerance: Option<f64>,
        #[serde(default)]
        grid: Option<GridOptions>,
    },
}

fn default_radii() -> Vec<f64> {
    vec![10.0, 20.0, 40.0, 80.0, 160.0]
}

/// Task kinds, matching the subcommands.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TaskKind {
    Capacity,
    VerifyTree,
    Sandwich,
    Maximize,
    Adm,
}

impl TaskKind {
    pub fn name(self) -> &'static str {
        match self {
            TaskKind::Capacity => "capacity",
            TaskKind::VerifyTree => "verify_tree",
            TaskKind::Sandwich => "sandwich",
            TaskKind::Maximize => "maximize",
            TaskKind::Adm => "adm",
        }
    }
}

impl TaskSpec {
    pub fn kind(&self) -> TaskKind {
        match self {
            TaskSpec::Capacity { .. } => TaskKind::Capacity,
            TaskSpec::VerifyTree { .. } => TaskKind::VerifyTree,
            TaskSpec::Sandwich { .. } => TaskKind::Sandwich,
            TaskSpec::Maximize { .. } => TaskKind::Maximize,
            TaskSpec::Adm { .. } => TaskKind::Adm,
        }
    }

    fn explicit_id(&self) -> Option<&str> {
        match self {
            TaskSpec::Capacity { id, .. }
            | TaskSpec::VerifyTree { id, .. }
            | TaskSpec::Sandwich { id, .. }
            | TaskSpec::Maximize { id, .. }
            | TaskSpec::Adm { id, .. } => id.as_deref(),
        }
    }

    /// File stem of the task's outputs.
    pub fn id(&self, index: usize) -> String {
        self.explicit_id()
            .map(str::to_owned)
            .unwrap_or_else(|| format!("{}-{index}", self.kind().name()))
    }
}

/// A problem found while validating, located by its JSON path.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct Diagnostic {
    pub path: String,
    pub message: String,
}

impl Diagnostic {
    fn new(path: impl Into<String>, message: impl fmt::Display) -> Self {
        Self {
            path: path.into(),
            message: message.to_string(),
        }
    }
}

impl fmt::Display for Diagnostic {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.path.is_empty() {
            write!(f, "{}", self.message)
        } else {
            write!(f, "{}: {}", self.path, self.message)
        }
    }
}

/// Config with every body reference loaded.
#[derive(Clone, Debug)]
pub struct Resolved {
    pub config: ExperimentConfig,
    /// Bodies of each task, in config order.
    pub bodies: Vec<Vec<BodySpec>>,
    pub densities: Vec<Option<MassDensity>>,
}

/// Reads and parses a config file; parse errors carry the field path.
pub fn load(path: &Path) -> Result<ExperimentConfig, Diagnostic> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| Diagnostic::new("", format!("cannot read config {}: {e}", path.display())))?;
    parse(&text)
}

pub fn parse(text: &str) -> Result<ExperimentConfig, Diagnostic> {
    let de = &mut serde_json::Deserializer::from_str(text);
    serde_path_to_error::deserialize(de).map_err(|e| {
        let path = e.path().to_string();
        Diagnostic::new(if path == "." { String::new() } else { path }, e.into_inner())
    })
}

fn load_json<T: serde::de::DeserializeOwned>(value: &Value, base: &Path, path: &str) -> Result<T, Diagnostic> {
    let (value, path) = match value.as_object().and_then(|o| o.get("file")) {
        Some(Value::String(f)) if value.as_object().map(|o| o.len()) == Some(1) => {
            let file: PathBuf = base.join(f);
            let text = std::fs::read_to_string(&file)
                .map_err(|e| Diagnostic::new(path, format!("cannot read {}: {e}", file.display())))?;
            let v: Value = serde_json::from_str(&text)
                .map_err(|e| Diagnostic::new(path, format!("{}: {e}", file.display())))?;
            (v, format!("{path} ({})", file.display()))
        }
        _ => (value.clone(), path.to_owned()),
    };
    serde_path_to_error::deserialize(value).map_err(|e| {
        let inner = e.path().to_string();
        let at = if inner == "." { path } else { format!("{path}.{inner}") };
        Diagnostic::new(at, e.into_inner())
    })
}

fn check_exponent(path: &str, n: usize, p: f64, out: &mut Vec<Diagnostic>) {
    if !(p > 1.0 && p < n as f64) {
        out.push(Diagnostic::new(path, format!("p must lie in (1,n); got p = {p}, n = {n}")));
    }
}

fn check_grid(path: &str, grid: &Option<GridOptions>, out: &mut Vec<Diagnostic>) {
    if let Some(g) = grid {
        if let Err(e) = g.validate() {
            out.push(Diagnostic::new(path, e));
        }
    }
}

fn check_tolerance(path: &str, tol: Option<f64>, out: &mut Vec<Diagnostic>) {
    if matches!(tol, Some(t) if !(t >= 0.0 && t.is_finite())) {
        out.push(Diagnostic::new(path, "tolerance must be a nonnegative number"));
    }
}

fn resolve_body(value: &Value, base: &Path, path: &str, out: &mut Vec<Diagnostic>) -> Option<BodySpec> {
    match load_json::<BodySpec>(value, base, path) {
        Ok(spec) => match spec.build() {
            Ok(_) => Some(spec),
            Err(e) => {
                out.push(Diagnostic::new(path, e));
                None
            }
        },
        Err(d) => {
            out.push(d);
            None
        }
    }
}

/// Schema and range checks without running anything. Returns the resolved
/// config when there are no diagnostics.
pub fn validate(config: &ExperimentConfig, base: &Path) -> (Vec<Diagnostic>, Option<Resolved>) {
    let mut out = Vec::new();
    if let Err(e) = config.grid.validate() {
        out.push(Diagnostic::new("grid", e));
    }
    let mut ids = BTreeSet::new();
    let mut bodies = Vec::new();
    let mut densities = Vec::new();
    for (i, task) in config.tasks.iter().enumerate() {
        let at = |field: &str| format!("tasks[{i}].{field}");
        let id = task.id(i);
        if id.is_empty() || !id.chars().all(|c| c.is_ascii_alphanumeric() || "-_.".contains(c)) || id.starts_with('.') {
            out.push(Diagnostic::new(at("id"), format!("task id {id:?} must be a nonempty file-name stem of [A-Za-z0-9._-]")));
        }
        if id == "manifest" || id == "summary" {
            out.push(Diagnostic::new(at("id"), format!("task id {id:?} is reserved")));
        }
        if !ids.insert(id.clone()) {
            out.push(Diagnostic::new(at("id"), format!("duplicate task id {id:?}")));
        }
        let mut task_bodies = Vec::new();
        let mut density = None;
        match task {
            TaskSpec::Capacity { bodies: list, p, grid, .. } => {
                if list.is_empty() {
                    out.push(Diagnostic::new(at("bodies"), "needs at least one body"));
                }
                if p.is_empty() {
                    out.push(Diagnostic::new(at("p"), "needs at least one exponent"));
                }
                for (j, b) in list.iter().enumerate() {
                    if let Some(spec) = resolve_body(b, base, &at(&format!("bodies[{j}]")), &mut out) {
                        for (k, pk) in p.iter().enumerate() {
                            check_exponent(&at(&format!("p[{k}]")), spec.dim(), *pk, &mut out);
                        }
                        task_bodies.push(spec);
                    }
                }
                check_grid(&at("grid"), grid, &mut out);
            }
            TaskSpec::VerifyTree {
                bodies: list,
                random,
                p,
                tolerance,
                grid,
                ..
            } => {
                if list.is_empty() && random.as_ref().is_none_or(|r| r.count == 0) {
                    out.push(Diagnostic::new(at("bodies"), "needs at least one body or random bodies"));
                }
                for (j, b) in list.iter().enumerate() {
                    if let Some(spec) = resolve_body(b, base, &at(&format!("bodies[{j}]")), &mut out) {
                        check_exponent(&at("p"), spec.dim(), *p, &mut out);
                        task_bodies.push(spec);
                    }
                }
                if let Some(r) = random {
                    if !(r.r0 > 0.0) {
                        out.push(Diagnostic::new(at("random.r0"), "r0 must be positive"));
                    }
                    if matches!(r.grid, Some(g) if g < 8 || g % 2 != 0) {
                        out.push(Diagnostic::new(at("random.grid"), "grid must be even and at least 8"));
                    }
                    if r.count > 0 {
                        check_exponent(&at("p"), 2, *p, &mut out);
                    }
                }
                check_tolerance(&at("tolerance"), *tolerance, &mut out);
                check_grid(&at("grid"), grid, &mut out);
            }
            TaskSpec::Sandwich {
                body,
                p,
                alpha,
                beta,
                tolerance,
                capacity_scale,
                grid,
                ..
            } => {
                if let Some(spec) = resolve_body(body, base, &at("body"), &mut out) {
                    check_exponent(&at("p"), spec.dim(), *p, &mut out);
                    if spec.build().is_ok_and(|b| !b.is_smooth()) {
                        out.push(Diagnostic::new(at("body"), "the sandwich check needs a smooth body"));
                    }
                    task_bodies.push(spec);
                }
                for (name, v) in [("alpha", alpha), ("beta", beta), ("capacity_scale", capacity_scale)] {
                    if matches!(v, Some(x) if !(*x > 0.0 && x.is_finite())) {
                        out.push(Diagnostic::new(at(name), "must be positive"));
                    }
                }
                if let (Some(a), Some(b)) = (alpha, beta) {
                    if a > b {
                        out.push(Diagnostic::new(at("beta"), "beta must be at least alpha"));
                    }
                }
                check_tolerance(&at("tolerance"), *tolerance, &mut out);
                check_grid(&at("grid"), grid, &mut out);
            }
            TaskSpec::Maximize { h, objective, search, .. } => {
                match load_json::<MassDensity>(h, base, &at("h")) {
                    Ok(d) => {
                        if let Err(e) = d.validate_for(search.dim) {
                            out.push(Diagnostic::new(at("h"), e));
                        }
                        if matches!(d, MassDensity::Constant { .. }) {
                            out.push(Diagnostic::new(at("h"), "a constant density is not integrable"));
                        }
                        density = Some(d);
                    }
                    Err(d) => out.push(d),
                }
                if !(search.dim == 2 || search.dim == 3) {
                    out.push(Diagnostic::new(at("search.dim"), "dimension must be 2 or 3"));
                }
                if let Some(p) = objective.exponent() {
                    check_exponent(&at("objective.p"), search.dim, p, &mut out);
                }
                if search.starts == 0 {
                    out.push(Diagnostic::new(at("search.starts"), "needs at least one start"));
                }
                if search.radii.is_empty() || search.radii.iter().any(|r| !(*r > 0.0)) {
                    out.push(Diagnostic::new(at("search.radii"), "radii must be positive"));
                }
                check_grid(&at("search.maximize.functional.grid"), &Some(search.maximize.functional.grid.clone()), &mut out);
            }
            TaskSpec::Adm {
                graph,
                radii,
                tolerance,
                grid,
                ..
            } => {
                if let Err(e) = graph.validate() {
                    out.push(Diagnostic::new(at("graph"), e));
                } else if !graph.is_radial() {
                    out.push(Diagnostic::new(at("graph"), "the mass identity needs a radial profile"));
                }
                if radii.len() < 3 || radii.windows(2).any(|w| w[1] <= w[0]) {
                    out.push(Diagnostic::new(at("radii"), "needs at least three increasing radii"));
                } else if let Ok(r0) = graph.inner() {
                    if radii[0] <= r0 {
                        out.push(Diagnostic::new(at("radii"), format!("radii must exceed the inner radius {r0}")));
                    }
                }
                check_tolerance(&at("tolerance"), *tolerance, &mut out);
                check_grid(&at("grid"), grid, &mut out);
            }
        }
        bodies.push(task_bodies);
        densities.push(density);
    }
    if out.is_empty() {
        let resolved = Resolved {
            config: config.clone(),
            bodies,
            densities,
        };
        (out, Some(resolved))
    } else {
        (out, None)
    }
}
