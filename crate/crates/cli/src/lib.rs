//! Experiment runner: reads a JSON experiment, runs its tasks through
//! `captree-core` and writes JSON, CSV and SVG results with a manifest.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod config;
pub mod run;
pub mod svg;

use std::collections::BTreeMap;
use std::fmt;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

pub use config::{Diagnostic, ExperimentConfig, TaskKind, TaskSpec};
pub use run::Status;

pub const MANIFEST: &str = "manifest.json";

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct FileEntry {
    pub path: String,
    pub bytes: u64,
    pub sha256: String,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct TaskRecord {
    pub id: String,
    pub kind: TaskKind,
    pub status: String,
    pub checks_passed: usize,
    pub checks_total: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub message: Option<String>,
    pub files: Vec<String>,
}

/// Index of a run. Lists every file written besides itself.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct RunManifest {
    pub tool: String,
    pub version: String,
    pub core_version: String,
    pub command: String,
    /// SHA-256 of the canonical JSON of the effective config.
    pub config_sha256: String,
    pub seed: u64,
    pub tasks: Vec<TaskRecord>,
    pub files: Vec<FileEntry>,
}

impl RunManifest {
    pub fn all_pass(&self) -> bool {
        self.tasks.iter().all(|t| t.status == "pass")
    }
}

#[derive(Debug)]
pub enum CliError {
    /// The config is unusable; nothing was run.
    Invalid(Vec<Diagnostic>),
    Io(String),
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CliError::Invalid(d) => {
                for (i, x) in d.iter().enumerate() {
                    if i > 0 {
                        writeln!(f)?;
                    }
                    write!(f, "{x}")?;
                }
                Ok(())
            }
            CliError::Io(m) => write!(f, "{m}"),
        }
    }
}

impl std::error::Error for CliError {}

fn sha256_hex(bytes: &[u8]) -> String {
    hex::encode(Sha256::digest(bytes))
}

/// Which tasks a command runs.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Command {
    Only(TaskKind),
    /// Every task, plus a summary table.
    Report,
}

impl Command {
    pub fn name(self) -> &'static str {
        match self {
            Command::Only(k) => match k {
                TaskKind::Capacity => "capacity",
                TaskKind::VerifyTree => "verify-tree",
                TaskKind::Sandwich => "sandwich",
                TaskKind::Maximize => "maximize",
                TaskKind::Adm => "adm",
            },
            Command::Report => "report",
        }
    }
}

/// Validates the config with the seed applied; `base` resolves body files.
pub fn validate(config: &ExperimentConfig, base: &Path) -> Vec<Diagnostic> {
    config::validate(config, base).0
}

/// Removes the outputs of an earlier run; refuses directories holding
/// anything else so that the new manifest describes the whole directory.
fn prepare_out_dir(out: &Path) -> Result<(), CliError> {
    let io = |e: std::io::Error| CliError::Io(format!("{}: {e}", out.display()));
    if !out.exists() {
        return std::fs::create_dir_all(out).map_err(io);
    }
    let manifest_path = out.join(MANIFEST);
    let mut known: Vec<PathBuf> = Vec::new();
    if manifest_path.exists() {
        let text = std::fs::read_to_string(&manifest_path).map_err(io)?;
        let old: RunManifest = serde_json::from_str(&text)
            .map_err(|e| CliError::Io(format!("{}: not a run manifest: {e}", manifest_path.display())))?;
        known = old.files.iter().map(|f| out.join(&f.path)).collect();
        known.push(manifest_path);
    }
    for entry in std::fs::read_dir(out).map_err(io)? {
        let path = entry.map_err(io)?.path();
        if !known.contains(&path) {
            return Err(CliError::Io(format!(
                "output directory {} holds {} which no earlier run produced",
                out.display(),
                path.display()
            )));
        }
    }
    for p in known {
        if p.exists() {
            std::fs::remove_file(&p).map_err(io)?;
        }
    }
    Ok(())
}

#[derive(Serialize)]
struct SummaryRow<'a> {
    id: &'a str,
    kind: TaskKind,
    status: Status,
    checks_passed: usize,
    checks_total: usize,
    #[serde(skip_serializing_if = "Option::is_none")]
    message: Option<&'a str>,
}

/// Validates, runs and writes the outputs of `command`; returns the manifest.
pub fn execute(command: Command, config: &ExperimentConfig, base: &Path, out: &Path) -> Result<RunManifest, CliError> {
    let (diags, resolved) = config::validate(config, base);
    let resolved = resolved.ok_or(CliError::Invalid(diags))?;
    let kinds = match command {
        Command::Only(k) => Some(vec![k]),
        Command::Report => None,
    };
    let outputs = run::run_tasks(&resolved, kinds.as_deref());

    let mut files: BTreeMap<String, Vec<u8>> = BTreeMap::new();
    let mut tasks = Vec::new();
    for o in &outputs {
        tasks.push(TaskRecord {
            id: o.id.clone(),
            kind: o.kind,
            status: o.status.name().into(),
            checks_passed: o.checks_passed,
            checks_total: o.checks_total,
            message: o.message.clone(),
            files: o.files.keys().cloned().collect(),
        });
        for (name, bytes) in &o.files {
            files.insert(name.clone(), bytes.clone());
        }
    }
    if command == Command::Report {
        let rows: Vec<SummaryRow> = outputs
            .iter()
            .map(|o| SummaryRow {
                id: &o.id,
                kind: o.kind,
                status: o.status,
                checks_passed: o.checks_passed,
                checks_total: o.checks_total,
                message: o.message.as_deref(),
            })
            .collect();
        files.insert("summary.json".into(), run::json(&rows));
        let mut w = csv::Writer::from_writer(Vec::new());
        w.write_record(["id", "kind", "status", "checks_passed", "checks_total"])
            .map_err(|e| CliError::Io(e.to_string()))?;
        for r in &rows {
            w.write_record([
                r.id.to_string(),
                r.kind.name().to_string(),
                r.status.name().to_string(),
                r.checks_passed.to_string(),
                r.checks_total.to_string(),
            ])
            .map_err(|e| CliError::Io(e.to_string()))?;
        }
        files.insert("summary.csv".into(), w.into_inner().map_err(|e| CliError::Io(e.to_string()))?);
    }

    prepare_out_dir(out)?;
    for (name, bytes) in &files {
        std::fs::write(out.join(name), bytes).map_err(|e| CliError::Io(format!("{name}: {e}")))?;
    }
    let manifest = RunManifest {
        tool: "captree".into(),
        version: env!("CARGO_PKG_VERSION").into(),
        core_version: captree_core::VERSION.into(),
        command: command.name().into(),
        config_sha256: sha256_hex(&serde_json::to_vec(config).expect("config serializes")),
        seed: config.seed,
        tasks,
        files: files
            .iter()
            .map(|(name, bytes)| FileEntry {
                path: name.clone(),
                bytes: bytes.len() as u64,
                sha256: sha256_hex(bytes),
            })
            .collect(),
    };
    std::fs::write(out.join(MANIFEST), run::json(&manifest)).map_err(|e| CliError::Io(format!("{MANIFEST}: {e}")))?;
    Ok(manifest)
}
