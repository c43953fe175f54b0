use std::path::{Path, PathBuf};
use std::process::ExitCode;

use captree_cli::config::{self, ExperimentConfig, TaskSpec};
use captree_cli::{execute, validate, CliError, Command, TaskKind};
use captree_core::yau::SearchOptions;
use captree_core::Objective;
use clap::{Args, Parser, Subcommand, ValueEnum};
use serde_json::{json, Value};

/// Capacity, radius-inequality, shape-maximization and ADM-mass experiments.
///
/// Exit status: 0 when every task ran and every check passed, 1 when a task
/// failed or a check did not hold, 2 for invalid configuration or I/O errors.
#[derive(Parser)]
#[command(name = "captree", version)]
struct Cli {
    #[command(subcommand)]
    command: Cmd,
}

#[derive(Args, Clone)]
struct Common {
    /// Experiment file (JSON).
    #[arg(long)]
    config: Option<PathBuf>,
    /// Output directory.
    #[arg(long, default_value = "captree-out")]
    out: PathBuf,
    /// Seed for randomized bodies and searches; overrides the config.
    #[arg(long)]
    seed: Option<u64>,
}

#[derive(Args, Clone)]
struct BodyTask {
    #[command(flatten)]
    common: Common,
    /// Body file, used instead of --config.
    #[arg(long, conflicts_with = "config")]
    body: Option<PathBuf>,
    /// Exponent(s) for a --body run.
    #[arg(long, num_args = 1..)]
    p: Vec<f64>,
}

#[derive(Clone, Copy, ValueEnum)]
enum ObjectiveArg {
    Pcap,
    Surface,
    Volume,
}

#[derive(Subcommand)]
enum Cmd {
    /// Capacity of bodies by the energy and flux routes.
    Capacity(BodyTask),
    /// Radius inequality tree.
    VerifyTree(BodyTask),
    /// Curvature sandwich between surface area and capacity.
    Sandwich {
        #[command(flatten)]
        task: BodyTask,
        #[arg(long)]
        alpha: Option<f64>,
        #[arg(long)]
        beta: Option<f64>,
    },
    /// Multi-start maximization of the Yau functional.
    Maximize {
        #[command(flatten)]
        common: Common,
        /// Mass density file, used instead of --config.
        #[arg(long, conflicts_with = "config")]
        h: Option<PathBuf>,
        #[arg(long, value_enum, default_value = "pcap")]
        objective: ObjectiveArg,
        #[arg(long)]
        p: Option<f64>,
        #[arg(long)]
        starts: Option<usize>,
        #[arg(long)]
        dim: Option<usize>,
    },
    /// ADM mass by both routes and the Penrose-type bounds.
    Adm {
        #[command(flatten)]
        common: Common,
        /// Graph function file, used instead of --config.
        #[arg(long, conflicts_with = "config")]
        profile: Option<PathBuf>,
    },
    /// Every task of the config, with a summary table.
    Report(Common),
    /// Checks the config without running it.
    Validate(Common),
}

fn file_ref(p: &Path) -> Value {
    json!({ "file": p.to_string_lossy() })
}

fn read_json(p: &Path) -> Result<Value, CliError> {
    let text = std::fs::read_to_string(p).map_err(|e| CliError::Io(format!("{}: {e}", p.display())))?;
    serde_json::from_str(&text).map_err(|e| CliError::Io(format!("{}: {e}", p.display())))
}

/// Config from --config, or a one-task config built from the flags.
fn load(common: &Common, adhoc: Option<TaskSpec>) -> Result<(ExperimentConfig, PathBuf), CliError> {
    let (mut cfg, base) = match (&common.config, adhoc) {
        (Some(path), _) => {
            let cfg = config::load(path).map_err(|d| CliError::Invalid(vec![d]))?;
            let base = path.parent().map(Path::to_path_buf).unwrap_or_default();
            (cfg, base)
        }
        (None, Some(task)) => (
            ExperimentConfig {
                tasks: vec![task],
                ..ExperimentConfig::default()
            },
            PathBuf::from("."),
        ),
        (None, None) => return Err(CliError::Io("either --config or the task's input flags are required".into())),
    };
    if let Some(seed) = common.seed {
        cfg.seed = seed;
    }
    Ok((cfg, base))
}

fn body_task(kind: TaskKind, t: &BodyTask, alpha: Option<f64>, beta: Option<f64>) -> Result<Option<TaskSpec>, CliError> {
    let Some(body) = &t.body else {
        return Ok(None);
    };
    let body = file_ref(body);
    let p = t.p.first().copied().ok_or_else(|| CliError::Io("--p is required with --body".into()))?;
    Ok(Some(match kind {
        TaskKind::Capacity => TaskSpec::Capacity {
            id: None,
            bodies: vec![body],
            p: t.p.clone(),
            grid: None,
        },
        TaskKind::VerifyTree => TaskSpec::VerifyTree {
            id: None,
            bodies: vec![body],
            random: None,
            p,
            tolerance: None,
            overrides: Default::default(),
            grid: None,
        },
        _ => TaskSpec::Sandwich {
            id: None,
            body,
            p,
            alpha,
            beta,
            tolerance: None,
            capacity_scale: None,
            grid: None,
        },
    }))
}

fn run(cli: Cli) -> Result<bool, CliError> {
    let (command, common, adhoc) = match &cli.command {
        Cmd::Capacity(t) => (Command::Only(TaskKind::Capacity), &t.common, body_task(TaskKind::Capacity, t, None, None)?),
        Cmd::VerifyTree(t) => (Command::Only(TaskKind::VerifyTree), &t.common, body_task(TaskKind::VerifyTree, t, None, None)?),
        Cmd::Sandwich { task, alpha, beta } => (
            Command::Only(TaskKind::Sandwich),
            &task.common,
            body_task(TaskKind::Sandwich, task, *alpha, *beta)?,
        ),
        Cmd::Maximize {
            common,
            h,
            objective,
            p,
            starts,
            dim,
        } => {
            let task = match h {
                Some(h) => {
                    let objective = match objective {
                        ObjectiveArg::Pcap => Objective::Pcap {
                            p: p.ok_or_else(|| CliError::Io("--p is required for the pcap objective".into()))?,
                        },
                        ObjectiveArg::Surface => Objective::Surface,
                        ObjectiveArg::Volume => Objective::Volume,
                    };
                    let defaults = SearchOptions::default();
                    Some(TaskSpec::Maximize {
                        id: None,
                        h: file_ref(h),
                        objective,
                        search: SearchOptions {
                            starts: starts.unwrap_or(defaults.starts),
                            dim: dim.unwrap_or(defaults.dim),
                            ..defaults
                        },
                    })
                }
                None => None,
            };
            (Command::Only(TaskKind::Maximize), common, task)
        }
        Cmd::Adm { common, profile } => {
            let task = match profile {
                Some(p) => Some(TaskSpec::Adm {
                    id: None,
                    graph: serde_json::from_value(read_json(p)?)
                        .map_err(|e| CliError::Io(format!("{}: {e}", p.display())))?,
                    radii: vec![10.0, 20.0, 40.0, 80.0, 160.0],
                    tolerance: None,
                    grid: None,
                }),
                None => None,
            };
            (Command::Only(TaskKind::Adm), common, task)
        }
        Cmd::Report(common) => (Command::Report, common, None),
        Cmd::Validate(common) => {
            let (cfg, base) = load(common, None)?;
            let diags = validate(&cfg, &base);
            if diags.is_empty() {
                println!("valid: {} task(s)", cfg.tasks.len());
                return Ok(true);
            }
            return Err(CliError::Invalid(diags));
        }
    };
    let (cfg, base) = load(common, adhoc)?;
    let manifest = execute(command, &cfg, &base, &common.out)?;
    for t in &manifest.tasks {
        print!("{} {}: {} ({}/{} checks)", t.kind.name(), t.id, t.status, t.checks_passed, t.checks_total);
        match &t.message {
            Some(m) => println!(" {m}"),
            None => println!(),
        }
    }
    println!("wrote {} file(s) to {}", manifest.files.len() + 1, common.out.display());
    Ok(manifest.all_pass())
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(2)
        }
    }
}
