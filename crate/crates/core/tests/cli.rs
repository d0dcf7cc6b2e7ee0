use std::fs;
use std::io::BufReader;
use std::path::Path;
use std::process::{Command, Output};

use mfdirac::config::RunConfig;
use mfdirac::dynamics::read_snapshot;
use mfdirac::runner::{selftest, SelftestHooks};
use serde_json::{json, Value};

fn run(args: &[&str], config: Option<&Value>, dir: &Path) -> Output {
    let mut cmd = Command::new(env!("CARGO_BIN_EXE_mfdirac"));
    cmd.args(args).arg("--out").arg(dir.join("out")).arg("--quiet");
    if let Some(cfg) = config {
        let path = dir.join("config.json");
        fs::write(&path, serde_json::to_string_pretty(cfg).unwrap()).unwrap();
        cmd.arg("--config").arg(path);
    }
    cmd.output().unwrap()
}

fn read(dir: &Path, name: &str) -> String {
    fs::read_to_string(dir.join("out").join(name)).unwrap()
}

fn small_grid() -> Value {
    json!({ "n": 16, "l": 8.0 })
}

#[test]
fn sigma_single_point_writes_one_row() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = json!({ "experiment": { "name": "sigma", "omega": { "min": 0.0, "max": 0.0, "points": 1 } } });
    let out = run(&["sigma"], Some(&cfg), dir.path());
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let csv = read(dir.path(), "sigma.csv");
    let lines: Vec<&str> = csv.lines().collect();
    assert_eq!(lines[0], "omega,sigma,err");
    assert_eq!(lines.len(), 2);
    let s: f64 = lines[1].split(',').nth(1).unwrap().parse().unwrap();
    assert!((s + 0.484_255_687_7).abs() < 1e-8);
    let report: Value = serde_json::from_str(&read(dir.path(), "assumptions.json")).unwrap();
    assert_eq!(report["sigma_item"], "pass");
    let echoed = RunConfig::from_json(&read(dir.path(), "config.json")).unwrap();
    assert_eq!(echoed.model.m, 1.0);
}

#[test]
fn sigma_range_is_in_units_of_mass() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = json!({
        "model": { "m": 2.0 },
        "grid": { "n": 64, "l": 16.0 },
        "experiment": { "name": "sigma", "omega": { "min": -1.0, "max": 1.0, "points": 3 } }
    });
    let out = run(&["sigma"], Some(&cfg), dir.path());
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let omegas: Vec<f64> = read(dir.path(), "sigma.csv")
        .lines()
        .skip(1)
        .map(|l| l.split(',').next().unwrap().parse().unwrap())
        .collect();
    assert_eq!(omegas, vec![-2.0, 0.0, 2.0]);
}

#[test]
fn empty_atlas_has_only_a_header() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = json!({
        "grid": small_grid(),
        "experiment": { "name": "atlas", "omega": { "min": 0.0, "max": 0.5, "points": 0 } }
    });
    let out = run(&["atlas"], Some(&cfg), dir.path());
    assert!(out.status.success());
    assert_eq!(read(dir.path(), "atlas.csv"), "omega,sigma,branchIndex,rootR,charge,residual\n");
}

#[test]
fn atlas_rejects_frequencies_outside_the_gap() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = json!({
        "grid": small_grid(),
        "experiment": { "name": "atlas", "omega": { "min": 0.5, "max": 1.0, "points": 3 } }
    });
    let out = run(&["atlas"], Some(&cfg), dir.path());
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("outside the admissible interval"));
}

#[test]
fn configuration_errors_exit_with_one() {
    let dir = tempfile::tempdir().unwrap();
    let out = run(&["sigma"], Some(&json!({ "grid": { "n": 64, "l": 32.0, "spacing": 1 } })), dir.path());
    assert_eq!(out.status.code(), Some(1));
    let out = run(&["sigma"], Some(&json!({ "grid": { "n": 16, "l": 32.0 } })), dir.path());
    assert_eq!(out.status.code(), Some(1));
    let out = run(&["sigma"], Some(&json!({ "model": { "potential": [1.0, -1.0] } })), dir.path());
    assert_eq!(out.status.code(), Some(1));
}

#[test]
fn evolve_both_engines_with_snapshots() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = json!({
        "grid": small_grid(),
        "time": { "dt": 0.02, "t": 1.0, "record_stride": 5, "snapshot_stride": 25 },
        "experiment": { "name": "evolve", "engine": "spectral" }
    });
    let out = run(&["evolve", "--engine", "both"], Some(&cfg), dir.path());
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let spec = read(dir.path(), "trajectory_spectral.csv");
    assert!(spec.starts_with("t,re_y,im_y,Q,E\n"));
    assert_eq!(spec.lines().count(), 1 + 11);
    let volt = read(dir.path(), "trajectory_volterra.csv");
    assert!(volt.starts_with("t,re_y,im_y\n"));
    assert_eq!(volt.lines().count(), 1 + 11);
    let cross: Value = serde_json::from_str(&read(dir.path(), "cross_validation.json")).unwrap();
    assert!(cross["max_gap"].as_f64().unwrap() < 5e-3);

    let snaps = dir.path().join("out").join("snapshots");
    let mut names: Vec<String> = fs::read_dir(&snaps).unwrap().map(|e| e.unwrap().file_name().into_string().unwrap()).collect();
    names.sort();
    assert_eq!(names, vec!["snap_0000000.bin", "snap_0000025.bin", "snap_0000050.bin"]);
    let (header, field) = read_snapshot(BufReader::new(fs::File::open(snaps.join(&names[2])).unwrap())).unwrap();
    assert_eq!(header.n, 16);
    assert!((header.time - 1.0).abs() < 1e-12);
    // the dump is the field itself, so its charge is the last Q row
    let q: f64 = spec.lines().last().unwrap().split(',').nth(3).unwrap().parse().unwrap();
    assert!((field.norm_sqr() - q).abs() < 1e-10 * q);
}

#[test]
fn zero_packet_runs_with_a_warning() {
    let dir = tempfile::tempdir().unwrap();
    let zero = json!([0.0, 0.0]);
    let cfg = json!({
        "grid": small_grid(),
        "time": { "dt": 0.05, "t": 0.5 },
        "experiment": {
            "name": "evolve",
            "initial": {
                "kind": "gaussianPacket",
                "spinor": [zero, zero, zero, zero],
                "center": [0.0, 0.0, 0.0],
                "width": 1.0,
                "momentum": [0.0, 0.0, 0.0]
            }
        }
    });
    let mut cmd = Command::new(env!("CARGO_BIN_EXE_mfdirac"));
    let path = dir.path().join("config.json");
    fs::write(&path, cfg.to_string()).unwrap();
    let out = cmd.args(["evolve", "--config"]).arg(&path).arg("--out").arg(dir.path().join("out")).output().unwrap();
    assert!(out.status.success());
    assert!(String::from_utf8_lossy(&out.stderr).contains("warning"));
}

#[test]
fn seed_changes_the_perturbation() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = json!({ "grid": small_grid(), "time": { "dt": 0.05, "t": 0.5 }, "experiment": { "name": "evolve" } });
    let traj = |seed: &str, sub: &str| {
        let d = dir.path().join(sub);
        fs::create_dir_all(&d).unwrap();
        assert!(run(&["evolve", "--seed", seed], Some(&cfg), &d).status.success());
        read(&d, "trajectory_spectral.csv")
    };
    assert_ne!(traj("1", "a"), traj("2", "b"));
}

#[test]
fn selftest_passes_and_detects_a_corrupted_beta() {
    let dir = tempfile::tempdir().unwrap();
    let out = run(&["selftest"], None, dir.path());
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stdout));
    let report: Value = serde_json::from_str(&read(dir.path(), "selftest.json")).unwrap();
    assert_eq!(report["pass"], true);

    let cfg = RunConfig::default();
    let bad = selftest(&cfg, SelftestHooks { corrupt_beta: true }).unwrap();
    assert!(!bad.pass);
    let anti = bad.checks.iter().find(|c| c.name.contains("anticommutation")).unwrap();
    assert!(!anti.pass);
}
