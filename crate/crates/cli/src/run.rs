//! Task execution and result files.

use std::collections::BTreeMap;

use captree_core::adm::{adm_boundary, lam_mass, penrose_check, scalar_curvature, BoundaryMass, LamMass, PenroseRecord};
use captree_core::capacity::ball_capacity;
use captree_core::radius::{curvature_range, sandwich_check, verify_tree, TreeOptions, DEFAULT_TOLERANCE};
use captree_core::yau::{attainment_check, Attainment, SearchOptions, Trace};
use captree_core::{capacity, BodySpec, CapacityResult, GridOptions, MassDensity, Objective, OptimState, RadiusReport, SandwichRecord};
use rayon::prelude::*;
use serde::Serialize;

use crate::config::{Resolved, TaskKind, TaskSpec};
use crate::svg;

/// Outcome of one task.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Status {
    /// Completed and every check passed.
    Pass,
    /// Completed with at least one failed check.
    CheckFailed,
    /// A computation failed.
    Error,
}

impl Status {
    pub fn name(self) -> &'static str {
        match self {
            Status::Pass => "pass",
            Status::CheckFailed => "check_failed",
            Status::Error => "error",
        }
    }
}

/// Files of one task, keyed by name relative to the output directory.
pub struct TaskOutput {
    pub id: String,
    pub kind: TaskKind,
    pub status: Status,
    pub checks_passed: usize,
    pub checks_total: usize,
    pub message: Option<String>,
    pub files: BTreeMap<String, Vec<u8>>,
}

struct Checks {
    passed: usize,
    total: usize,
    errors: Vec<String>,
}

impl Checks {
    fn new() -> Self {
        Self {
            passed: 0,
            total: 0,
            errors: Vec::new(),
        }
    }

    fn check(&mut self, ok: bool) {
        self.total += 1;
        if ok {
            self.passed += 1;
        }
    }

    fn error(&mut self, msg: String) {
        self.errors.push(msg);
    }

    fn status(&self) -> Status {
        if !self.errors.is_empty() {
            Status::Error
        } else if self.passed < self.total {
            Status::CheckFailed
        } else {
            Status::Pass
        }
    }

    fn message(&self) -> Option<String> {
        (!self.errors.is_empty()).then(|| self.errors.join("; "))
    }
}

pub(crate) fn json<T: Serialize>(value: &T) -> Vec<u8> {
    let mut v = serde_json::to_vec_pretty(value).expect("results serialize");
    v.push(b'\n');
    v
}

fn csv_bytes(header: &[&str], rows: Vec<Vec<String>>) -> Vec<u8> {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(header).expect("in-memory csv");
    for r in rows {
        w.write_record(&r).expect("in-memory csv");
    }
    w.into_inner().expect("in-memory csv")
}

fn num(v: f64) -> String {
    format!("{v}")
}

fn opt(v: Option<f64>) -> String {
    v.map(num).unwrap_or_default()
}

/// Runs the tasks whose kind is in `kinds` (all when `None`), in config order.
pub fn run_tasks(resolved: &Resolved, kinds: Option<&[TaskKind]>) -> Vec<TaskOutput> {
    let cfg = &resolved.config;
    cfg.tasks
        .iter()
        .enumerate()
        .filter(|(_, t)| kinds.is_none_or(|k| k.contains(&t.kind())))
        .map(|(i, task)| {
            let id = task.id(i);
            let bodies = &resolved.bodies[i];
            let mut files = BTreeMap::new();
            let mut checks = Checks::new();
            match task {
                TaskSpec::Capacity { p, grid, .. } => {
                    let grid = grid.clone().unwrap_or_else(|| cfg.grid.clone());
                    run_capacity(&id, bodies, p, &grid, &mut files, &mut checks);
                }
                TaskSpec::VerifyTree {
                    random,
                    p,
                    tolerance,
                    overrides,
                    grid,
                    ..
                } => {
                    let mut labelled: Vec<(String, BodySpec)> = bodies
                        .iter()
                        .enumerate()
                        .map(|(j, b)| (format!("bodies[{j}]"), b.clone()))
                        .collect();
                    if let Some(r) = random {
                        for k in 0..r.count {
                            let seed = cfg.seed.wrapping_add(k as u64);
                            labelled.push((
                                format!("random[{k}] seed={seed}"),
                                BodySpec::Support2 {
                                    values: None,
                                    r0: Some(r.r0),
                                    modes: None,
                                    random_seed: Some(seed),
                                    grid: r.grid,
                                },
                            ));
                        }
                    }
                    let opts = TreeOptions {
                        grid: grid.clone().unwrap_or_else(|| cfg.grid.clone()),
                        tolerance: tolerance.unwrap_or(DEFAULT_TOLERANCE),
                        overrides: overrides.clone(),
                    };
                    run_tree(&id, &labelled, *p, &opts, &mut files, &mut checks);
                }
                TaskSpec::Sandwich {
                    p,
                    alpha,
                    beta,
                    tolerance,
                    capacity_scale,
                    grid,
                    ..
                } => {
                    let grid = grid.clone().unwrap_or_else(|| cfg.grid.clone());
                    let setup = SandwichSetup {
                        p: *p,
                        alpha: *alpha,
                        beta: *beta,
                        tolerance: tolerance.unwrap_or(DEFAULT_TOLERANCE),
                        scale: capacity_scale.unwrap_or(1.0),
                    };
                    run_sandwich(&id, &bodies[0], &setup, &grid, &mut files, &mut checks);
                }
                TaskSpec::Maximize { objective, search, .. } => {
                    let h = resolved.densities[i].as_ref().expect("validated density");
                    let search = SearchOptions {
                        seed: cfg.seed,
                        ..search.clone()
                    };
                    run_maximize(&id, h, objective, &search, &mut files, &mut checks);
                }
                TaskSpec::Adm {
                    graph,
                    radii,
                    tolerance,
                    grid,
                    ..
                } => {
                    let grid = grid.clone().unwrap_or_else(|| cfg.grid.clone());
                    run_adm(&id, graph, radii, tolerance.unwrap_or(0.01), &grid, &mut files, &mut checks);
                }
            }
            TaskOutput {
                id,
                kind: task.kind(),
                status: checks.status(),
                checks_passed: checks.passed,
                checks_total: checks.total,
                message: checks.message(),
                files,
            }
        })
        .collect()
}

#[derive(Serialize)]
struct CapacityRow {
    body: usize,
    dim: usize,
    p: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    result: Option<CapacityResult>,
    /// Closed form when the body is a ball.
    #[serde(skip_serializing_if = "Option::is_none")]
    ball_formula: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    relative_error: Option<f64>,
    routes_agree: bool,
    pass: bool,
    #[serde(skip_serializing_if = "Option::is_none")]
    error: Option<String>,
}

fn run_capacity(
    id: &str,
    bodies: &[BodySpec],
    ps: &[f64],
    grid: &GridOptions,
    files: &mut BTreeMap<String, Vec<u8>>,
    checks: &mut Checks,
) {
    let jobs: Vec<(usize, &BodySpec, f64)> = bodies
        .iter()
        .enumerate()
        .flat_map(|(j, b)| ps.iter().map(move |p| (j, b, *p)))
        .collect();
    let rows: Vec<CapacityRow> = jobs
        .par_iter()
        .map(|&(j, spec, p)| {
            let ball = match spec {
                BodySpec::Ball { dim, radius, .. } => ball_capacity(*dim, p, *radius).ok(),
                _ => None,
            };
            match spec.build().and_then(|b| capacity(&b, p, grid)) {
                Ok(res) => {
                    let routes_agree = res.energy_route > 0.0
                        && (res.energy_route - res.flux_route).abs() <= res.relative_estimate * res.energy_route;
                    let relative_error = ball.map(|e| (res.value() - e).abs() / e);
                    let pass = routes_agree && relative_error.is_none_or(|e| e <= 0.01);
                    CapacityRow {
                        body: j,
                        dim: spec.dim(),
                        p,
                        result: Some(res),
                        ball_formula: ball,
                        relative_error,
                        routes_agree,
                        pass,
                        error: None,
                    }
                }
                Err(e) => CapacityRow {
                    body: j,
                    dim: spec.dim(),
                    p,
                    result: None,
                    ball_formula: ball,
                    relative_error: None,
                    routes_agree: false,
                    pass: false,
                    error: Some(e.to_string()),
                },
            }
        })
        .collect();
    for r in &rows {
        match &r.error {
            Some(e) => checks.error(format!("body {} p {}: {e}", r.body, r.p)),
            None => checks.check(r.pass),
        }
    }
    let csv_rows = rows
        .iter()
        .map(|r| {
            let res = r.result.as_ref();
            vec![
                r.body.to_string(),
                r.dim.to_string(),
                num(r.p),
                opt(res.map(|c| c.energy_route)),
                opt(res.map(|c| c.flux_route)),
                opt(res.map(|c| c.extrapolated)),
                opt(res.map(|c| c.relative_estimate)),
                opt(r.ball_formula),
                opt(r.relative_error),
                r.pass.to_string(),
            ]
        })
        .collect();
    files.insert(
        format!("{id}.csv"),
        csv_bytes(
            &["body", "dim", "p", "energy_route", "flux_route", "extrapolated", "relative_estimate", "ball_formula", "relative_error", "pass"],
            csv_rows,
        ),
    );
    files.insert(format!("{id}.json"), json(&rows));
}

#[derive(Serialize)]
struct TreeEntry {
    body: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    report: Option<RadiusReport>,
    #[serde(skip_serializing_if = "Option::is_none")]
    error: Option<String>,
}

fn run_tree(
    id: &str,
    bodies: &[(String, BodySpec)],
    p: f64,
    opts: &TreeOptions,
    files: &mut BTreeMap<String, Vec<u8>>,
    checks: &mut Checks,
) {
    let entries: Vec<TreeEntry> = bodies
        .par_iter()
        .map(|(label, spec)| match spec.build().and_then(|b| verify_tree(&b, p, opts)) {
            Ok(report) => TreeEntry {
                body: label.clone(),
                report: Some(report),
                error: None,
            },
            Err(e) => TreeEntry {
                body: label.clone(),
                report: None,
                error: Some(e.to_string()),
            },
        })
        .collect();
    let mut rows = Vec::new();
    let mut worst: BTreeMap<String, f64> = BTreeMap::new();
    for e in &entries {
        match (&e.report, &e.error) {
            (Some(r), _) => {
                for rec in r.applicable() {
                    checks.check(rec.pass);
                    let slack = rec.slack.unwrap_or(f64::NAN);
                    let w = worst.entry(rec.name.clone()).or_insert(f64::INFINITY);
                    *w = w.min(slack);
                    rows.push(vec![
                        e.body.clone(),
                        num(p),
                        rec.name.clone(),
                        rec.lhs_name.clone(),
                        opt(rec.lhs),
                        rec.rhs_name.clone(),
                        opt(rec.rhs),
                        num(slack),
                        num(rec.tolerance),
                        rec.pass.to_string(),
                    ]);
                }
            }
            (None, Some(err)) => checks.error(format!("{}: {err}", e.body)),
            (None, None) => unreachable!(),
        }
    }
    files.insert(
        format!("{id}.csv"),
        csv_bytes(
            &["body", "p", "inequality", "lhs_name", "lhs", "rhs_name", "rhs", "slack", "tolerance", "pass"],
            rows,
        ),
    );
    files.insert(format!("{id}.json"), json(&entries));
    let bars: Vec<(String, f64)> = worst.into_iter().collect();
    files.insert(
        format!("{id}.svg"),
        svg::bar_chart(
            &format!("Smallest relative slack per inequality, p = {p}"),
            "(rhs - lhs)/rhs",
            &bars,
            Some(("-tolerance", -opts.tolerance)),
        )
        .into_bytes(),
    );
}

struct SandwichSetup {
    p: f64,
    alpha: Option<f64>,
    beta: Option<f64>,
    tolerance: f64,
    scale: f64,
}

#[derive(Serialize)]
struct SandwichOutput {
    p: f64,
    capacity_scale: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    capacity: Option<CapacityResult>,
    #[serde(skip_serializing_if = "Option::is_none")]
    record: Option<SandwichRecord>,
    #[serde(skip_serializing_if = "Option::is_none")]
    error: Option<String>,
}

fn run_sandwich(
    id: &str,
    spec: &BodySpec,
    s: &SandwichSetup,
    grid: &GridOptions,
    files: &mut BTreeMap<String, Vec<u8>>,
    checks: &mut Checks,
) {
    let mut out = SandwichOutput {
        p: s.p,
        capacity_scale: s.scale,
        capacity: None,
        record: None,
        error: None,
    };
    let result = (|| -> captree_core::Result<()> {
        let body = spec.build()?;
        let (lo, hi) = curvature_range(&body)?;
        let cap = capacity(&body, s.p, grid)?;
        let pcap = s.scale * cap.value();
        out.capacity = Some(cap);
        out.record = Some(sandwich_check(&body, s.p, s.alpha.unwrap_or(lo), s.beta.unwrap_or(hi), pcap, s.tolerance)?);
        Ok(())
    })();
    match (&out.record, result) {
        (Some(r), Ok(())) => {
            checks.check(r.lower_pass);
            checks.check(r.upper_pass);
        }
        (_, Err(e)) => {
            checks.error(e.to_string());
            out.error = Some(e.to_string());
        }
        _ => {}
    }
    files.insert(format!("{id}.json"), json(&out));
}

#[derive(Serialize)]
struct MaximizeOutput<'a> {
    h: &'a MassDensity,
    objective: &'a Objective,
    search: &'a SearchOptions,
    l1_norm: f64,
    attainment: &'a Attainment,
    /// Euler–Lagrange residual of the witness.
    #[serde(skip_serializing_if = "Option::is_none")]
    el_residual: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    el_pass: Option<bool>,
}

#[derive(Serialize)]
struct TraceLine<'a> {
    start: usize,
    #[serde(flatten)]
    state: &'a OptimState,
}

/// Witness file: the body or the degenerate marker.
#[derive(Serialize)]
#[serde(untagged)]
enum Witness<'a> {
    Body(&'a BodySpec),
    Degenerate { degenerate: bool, value: f64 },
}

/// Sup-norm Euler–Lagrange residual accepted at a returned optimum.
pub const EL_TOLERANCE: f64 = 0.05;

fn run_maximize(
    id: &str,
    h: &MassDensity,
    obj: &Objective,
    search: &SearchOptions,
    files: &mut BTreeMap<String, Vec<u8>>,
    checks: &mut Checks,
) {
    let (att, traces): (Attainment, Vec<Trace>) = match attainment_check(h, obj, search) {
        Ok(v) => v,
        Err(e) => {
            checks.error(e.to_string());
            files.insert(format!("{id}.json"), json(&serde_json::json!({ "error": e.to_string() })));
            return;
        }
    };
    let el = att.best_start.and_then(|b| traces[b].last().el_residual);
    let el_pass = el.map(|r| r <= EL_TOLERANCE);
    if let Some(ok) = el_pass {
        checks.check(ok);
    }
    files.insert(
        format!("{id}.json"),
        json(&MaximizeOutput {
            h,
            objective: obj,
            search,
            l1_norm: h.l1_norm(search.dim),
            attainment: &att,
            el_residual: el,
            el_pass,
        }),
    );
    let mut lines = Vec::new();
    for (start, t) in traces.iter().enumerate() {
        for state in &t.states {
            lines.extend(serde_json::to_vec(&TraceLine { start, state }).expect("trace serializes"));
            lines.push(b'\n');
        }
    }
    files.insert(format!("{id}.trace.jsonl"), lines);
    let witness = match &att.witness {
        Some(b) => Witness::Body(b),
        None => Witness::Degenerate {
            degenerate: true,
            value: att.value,
        },
    };
    files.insert(format!("{id}.witness.json"), json(&witness));
    let series: Vec<(String, Vec<(f64, f64)>)> = traces
        .iter()
        .enumerate()
        .map(|(i, t)| {
            (
                format!("start {i} ({:?})", t.termination).to_lowercase(),
                t.states.iter().map(|s| (s.iteration as f64, s.value)).collect(),
            )
        })
        .collect();
    files.insert(
        format!("{id}.svg"),
        svg::line_plot("Objective along the ascent", "accepted step", "F", &series, Some(("F = 0", 0.0))).into_bytes(),
    );
}

#[derive(Serialize)]
struct AdmOutput {
    boundary: Option<BoundaryMass>,
    lam: Option<LamMass>,
    /// `|lam - boundary| / lam`.
    identity_residual: Option<f64>,
    identity_pass: bool,
    decay_order: f64,
    asymptotically_flat: bool,
    horizon: bool,
    /// `(radius, R_f)` samples along the first axis.
    scalar_curvature: Vec<(f64, f64)>,
    penrose: Option<PenroseRecord>,
    #[serde(skip_serializing_if = "Vec::is_empty")]
    errors: Vec<String>,
}

fn run_adm(
    id: &str,
    graph: &captree_core::adm::GraphFunction,
    radii: &[f64],
    tolerance: f64,
    grid: &GridOptions,
    files: &mut BTreeMap<String, Vec<u8>>,
    checks: &mut Checks,
) {
    let mut errors = Vec::new();
    fn keep<T>(errors: &mut Vec<String>, r: captree_core::Result<T>) -> Option<T> {
        r.map_err(|e| errors.push(e.to_string())).ok()
    }
    let boundary = keep(&mut errors, adm_boundary(graph, radii));
    let lam = keep(&mut errors, lam_mass(graph));
    let penrose = keep(&mut errors, penrose_check(graph, grid, tolerance));
    let r0 = graph.inner().unwrap_or(1.0);
    let samples: Vec<(f64, f64)> = [1.01, 1.5, 2.0, 4.0, 10.0]
        .iter()
        .filter_map(|k| scalar_curvature(graph, [k * r0, 0.0, 0.0]).ok().map(|v| (k * r0, v)))
        .collect();
    let residual = match (&boundary, &lam) {
        (Some(b), Some(l)) => Some((l.mass - b.extrapolated).abs() / l.mass.abs().max(f64::MIN_POSITIVE)),
        _ => None,
    };
    let identity_pass = residual.is_some_and(|r| r <= tolerance);
    let flat = graph.is_asymptotically_flat();
    if errors.is_empty() {
        checks.check(identity_pass);
        checks.check(flat);
        if let Some(p) = &penrose {
            checks.check(p.capacity_pass);
            checks.check(p.surface_pass);
        }
    } else {
        for e in &errors {
            checks.error(e.clone());
        }
    }
    if let (Some(b), Some(l)) = (&boundary, &lam) {
        let pts: Vec<(f64, f64)> = b.radii.iter().zip(&b.values).map(|(r, v)| (*r, *v)).collect();
        files.insert(
            format!("{id}.svg"),
            svg::line_plot(
                "Sphere integral of the mass flux",
                "coordinate radius",
                "mass",
                &[("boundary integral".into(), pts)],
                Some(("mass identity", l.mass)),
            )
            .into_bytes(),
        );
    }
    files.insert(
        format!("{id}.json"),
        json(&AdmOutput {
            boundary,
            lam,
            identity_residual: residual,
            identity_pass,
            decay_order: graph.decay_order(),
            asymptotically_flat: flat,
            horizon: graph.has_horizon(),
            scalar_curvature: samples,
            penrose,
            errors,
        }),
    );
}
