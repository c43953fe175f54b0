use std::path::Path;
use std::process::Command;

use captree_cli::config::{self, ExperimentConfig};
use captree_cli::{execute, CliError, Command as Run, RunManifest, TaskKind, MANIFEST};
use captree_core::capacity::ball_capacity;
use serde_json::Value;
use sha2::{Digest, Sha256};

fn parse(text: &str) -> ExperimentConfig {
    config::parse(text).unwrap()
}

fn read_json(path: &Path) -> Value {
    serde_json::from_slice(&std::fs::read(path).unwrap()).unwrap()
}

const DISK: &str = r#"{"kind": "ball", "dim": 2, "center": [0.5, -1.0], "radius": 1.5}"#;

#[test]
fn disk_capacity_from_a_body_file() {
    let dir = tempfile::tempdir().unwrap();
    std::fs::write(dir.path().join("disk.json"), DISK).unwrap();
    let cfg = parse(r#"{"tasks": [{"kind": "capacity", "id": "disk", "bodies": [{"file": "disk.json"}], "p": [1.5]}]}"#);
    let out = dir.path().join("out");
    let manifest = execute(Run::Only(TaskKind::Capacity), &cfg, dir.path(), &out).unwrap();
    assert!(manifest.all_pass());
    let rows = read_json(&out.join("disk.json"));
    let row = &rows[0];
    let exact = ball_capacity(2, 1.5, 1.5).unwrap();
    assert!((row["ball_formula"].as_f64().unwrap() - exact).abs() <= 1e-12 * exact);
    let value = row["result"]["extrapolated"].as_f64().unwrap();
    assert!((value - exact).abs() <= 1e-2 * exact, "{value} vs {exact}");
    let csv = std::fs::read_to_string(out.join("disk.csv")).unwrap();
    assert_eq!(csv.lines().count(), 2);
}

#[test]
fn validation_reports_paths() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = parse(
        r#"{"tasks": [
            {"kind": "capacity", "bodies": [{"kind": "ball", "dim": 3, "radius": 1.0}], "p": [3.0]},
            {"kind": "capacity", "bodies": [{"file": "missing.json"}], "p": [1.5]},
            {"kind": "verify_tree", "id": "x", "bodies": [], "p": 1.5},
            {"kind": "adm", "id": "x", "graph": {"profile": {"kind": "schwarzschild", "m": 1.0}}}
        ]}"#,
    );
    let (diags, resolved) = config::validate(&cfg, dir.path());
    assert!(resolved.is_none());
    let text: Vec<String> = diags.iter().map(|d| d.to_string()).collect();
    assert!(
        text.iter().any(|d| d.starts_with("tasks[0].p[0]") && d.contains("p = 3") && d.contains("n = 3")),
        "{text:?}"
    );
    assert!(
        text.iter().any(|d| d.starts_with("tasks[1].bodies[0]") && d.contains("missing.json")),
        "{text:?}"
    );
    assert!(text.iter().any(|d| d.contains("duplicate")), "{text:?}");

    let out = dir.path().join("out");
    match execute(Run::Report, &cfg, dir.path(), &out) {
        Err(CliError::Invalid(d)) => assert_eq!(d.len(), diags.len()),
        other => panic!("expected invalid config, got {other:?}"),
    }
    assert!(!out.exists(), "nothing is written for an invalid config");
}

#[test]
fn unknown_fields_are_rejected() {
    let err = config::parse(r#"{"tasks": [{"kind": "capacity", "bodies": [], "p": [1.5], "grdi": {}}]}"#).unwrap_err();
    assert!(err.to_string().starts_with("tasks[0]"), "{err}");
    assert!(err.message.contains("grdi"), "{err}");
}

#[test]
fn valid_config_has_no_diagnostics() {
    let dir = tempfile::tempdir().unwrap();
    std::fs::write(dir.path().join("disk.json"), DISK).unwrap();
    let cfg = parse(
        r#"{"seed": 4, "tasks": [
            {"kind": "capacity", "bodies": [{"file": "disk.json"}], "p": [1.5]},
            {"kind": "verify_tree", "random": {"count": 3}, "p": 1.5},
            {"kind": "sandwich", "body": {"kind": "ellipsoid", "semi_axes": [1.5, 1.0, 0.8]}, "p": 2.0},
            {"kind": "maximize", "h": {"kind": "gaussian_bump", "amplitude": 50.0, "width": 1.0},
             "objective": {"kind": "pcap", "p": 1.5}},
            {"kind": "adm", "graph": {"profile": {"kind": "schwarzschild", "m": 0.5}}}
        ]}"#,
    );
    let (diags, resolved) = config::validate(&cfg, dir.path());
    assert!(diags.is_empty(), "{diags:?}");
    let resolved = resolved.unwrap();
    assert_eq!(resolved.bodies[0].len(), 1);
    assert_eq!(resolved.config.seed, 4);
}

#[test]
fn empty_task_list_writes_only_the_manifest() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("out");
    let manifest = execute(Run::Report, &parse(r#"{"tasks": []}"#), dir.path(), &out).unwrap();
    assert!(manifest.tasks.is_empty());
    assert!(manifest.all_pass());
    let names: Vec<String> = manifest.files.iter().map(|f| f.path.clone()).collect();
    assert_eq!(names, ["summary.csv", "summary.json"]);
    assert_eq!(read_json(&out.join("summary.json")), Value::Array(vec![]));

    let only = execute(Run::Only(TaskKind::Adm), &parse(r#"{"tasks": []}"#), dir.path(), &out).unwrap();
    assert!(only.files.is_empty());
    let left: Vec<_> = std::fs::read_dir(&out).unwrap().collect();
    assert_eq!(left.len(), 1, "the earlier run's files are removed");
}

#[test]
fn manifest_lists_every_file_with_its_digest() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("out");
    let cfg = parse(
        r#"{"tasks": [
            {"kind": "adm", "id": "s", "graph": {"profile": {"kind": "schwarzschild", "m": 0.25}}},
            {"kind": "capacity", "id": "c", "bodies": [{"kind": "ball", "dim": 2, "radius": 1.0}], "p": [1.4, 1.7]}
        ]}"#,
    );
    let manifest = execute(Run::Report, &cfg, dir.path(), &out).unwrap();
    assert!(manifest.all_pass(), "{:?}", manifest.tasks);
    assert_eq!(manifest.command, "report");
    assert_eq!(manifest.core_version, captree_core::VERSION);

    let on_disk: RunManifest = serde_json::from_slice(&std::fs::read(out.join(MANIFEST)).unwrap()).unwrap();
    assert_eq!(on_disk, manifest);
    let mut listed: Vec<&str> = manifest.files.iter().map(|f| f.path.as_str()).collect();
    let mut present: Vec<String> = std::fs::read_dir(&out)
        .unwrap()
        .map(|e| e.unwrap().file_name().to_string_lossy().into_owned())
        .filter(|n| n != MANIFEST)
        .collect();
    present.sort();
    assert_eq!(listed, present);
    for f in &manifest.files {
        let bytes = std::fs::read(out.join(&f.path)).unwrap();
        assert_eq!(f.bytes, bytes.len() as u64);
        assert_eq!(f.sha256, hex::encode(Sha256::digest(&bytes)));
    }
    listed.sort();
    for t in &manifest.tasks {
        for name in &t.files {
            assert!(listed.contains(&name.as_str()));
        }
    }

    // Changing the seed changes the recorded config digest only.
    let mut reseeded = cfg.clone();
    reseeded.seed = 99;
    let again = execute(Run::Report, &reseeded, dir.path(), &out).unwrap();
    assert_ne!(again.config_sha256, manifest.config_sha256);
    assert_eq!(again.files, manifest.files);
}

#[test]
fn foreign_files_block_the_output_directory() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("out");
    std::fs::create_dir(&out).unwrap();
    std::fs::write(out.join("notes.txt"), "keep").unwrap();
    let err = execute(Run::Report, &parse(r#"{"tasks": []}"#), dir.path(), &out).unwrap_err();
    assert!(err.to_string().contains("notes.txt"), "{err}");
    assert_eq!(std::fs::read_to_string(out.join("notes.txt")).unwrap(), "keep");
}

#[test]
fn failed_checks_are_reported() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = parse(
        r#"{"tasks": [{"kind": "sandwich", "id": "bad", "p": 2.0, "capacity_scale": 0.5,
            "body": {"kind": "ball", "dim": 3, "radius": 1.0}}]}"#,
    );
    let manifest = execute(Run::Only(TaskKind::Sandwich), &cfg, dir.path(), &dir.path().join("out")).unwrap();
    assert!(!manifest.all_pass());
    assert_eq!(manifest.tasks[0].status, "check_failed");
}

fn captree(args: &[&str], cwd: &Path) -> (i32, String, String) {
    let out = Command::new(env!("CARGO_BIN_EXE_captree")).args(args).current_dir(cwd).output().unwrap();
    (
        out.status.code().unwrap(),
        String::from_utf8_lossy(&out.stdout).into_owned(),
        String::from_utf8_lossy(&out.stderr).into_owned(),
    )
}

#[test]
fn binary_exit_codes() {
    let dir = tempfile::tempdir().unwrap();
    std::fs::write(dir.path().join("bad.json"), r#"{"tasks": [{"kind": "capacity", "bodies": [{"file": "disk.json"}], "p": [0.5]}]}"#).unwrap();
    std::fs::write(dir.path().join("good.json"), r#"{"tasks": []}"#).unwrap();
    std::fs::write(dir.path().join("disk.json"), DISK).unwrap();

    let (code, _, err) = captree(&["validate", "--config", "bad.json"], dir.path());
    assert_eq!(code, 2);
    assert!(err.contains("tasks[0].p[0]"), "{err}");
    let (code, out, _) = captree(&["validate", "--config", "good.json"], dir.path());
    assert_eq!(code, 0, "{out}");

    let (code, out, err) = captree(&["capacity", "--body", "disk.json", "--p", "1.5", "--out", "o"], dir.path());
    assert_eq!(code, 0, "{out}{err}");
    assert!(dir.path().join("o").join(MANIFEST).exists());

    let (code, _, _) = captree(
        &["sandwich", "--body", "disk.json", "--p", "1.5", "--alpha", "1.0", "--out", "o"],
        dir.path(),
    );
    assert_eq!(code, 1, "a wrong curvature bound is a failed task");
    let (code, _, err) = captree(&["capacity", "--out", "o"], dir.path());
    assert_eq!(code, 2, "{err}");
}
