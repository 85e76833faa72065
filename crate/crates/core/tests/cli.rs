use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use confluence::output::{read_csv, BOUNDARY_TRACK_FILE, DIP_REPORT_FILE, PROBES_FILE, RUN_META_FILE};

const SMALL: &[&str] = &[
    "--set", "h=0.01",
    "--set", "epsilon=0.05",
    "--set", "tau=1e-4",
    "--set", "t_end=0.02",
    "--set", "snapshot_times=[0.0, 0.01]",
];

fn confluence(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_confluence"))
        .args(args)
        .env_clear()
        .output()
        .expect("run binary")
}

fn out_arg(dir: &Path) -> String {
    dir.to_str().unwrap().to_string()
}

fn run_small(dir: &Path, extra: &[&str]) -> Output {
    let out = out_arg(dir);
    let mut args = vec!["run", "--out", &out];
    args.extend_from_slice(SMALL);
    args.extend_from_slice(extra);
    confluence(&args)
}

fn files(dir: &Path) -> Vec<(String, Vec<u8>)> {
    let mut v: Vec<_> = fs::read_dir(dir)
        .unwrap()
        .map(|e| {
            let e = e.unwrap();
            (e.file_name().to_string_lossy().into_owned(), fs::read(e.path()).unwrap())
        })
        .collect();
    v.sort();
    v
}

#[test]
fn zero_length_run_writes_initial_rows() {
    let dir = tempfile::tempdir().unwrap();
    let o = run_small(dir.path(), &["--set", "t_end=0"]);
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    let track = read_csv(&dir.path().join(BOUNDARY_TRACK_FILE)).unwrap();
    assert_eq!(track.header, ["t", "r1", "r2"]);
    assert_eq!(track.rows.len(), 1);
    let probes = read_csv(&dir.path().join(PROBES_FILE)).unwrap();
    assert_eq!(probes.header, ["t", "sigma@1.15", "u@1.15", "sigma@1.42", "u@1.42"]);
    assert_eq!(probes.rows.len(), 1);
    assert!(dir.path().join("snapshot_t0.csv").exists());
    assert!(dir.path().join(DIP_REPORT_FILE).exists());
    let meta: serde_json::Value =
        serde_json::from_slice(&fs::read(dir.path().join(RUN_META_FILE)).unwrap()).unwrap();
    assert_eq!(meta["status"], "completed");
    assert_eq!(meta["config"]["t_end"], 0.0);
}

#[test]
fn unknown_key_is_an_error_listing_valid_keys() {
    let dir = tempfile::tempdir().unwrap();
    let o = run_small(dir.path(), &["--set", "epsilonn=0.1"]);
    assert_eq!(o.status.code(), Some(1));
    let err = String::from_utf8_lossy(&o.stderr);
    assert!(err.contains("epsilonn") && err.contains("r_outer"), "{err}");
}

#[test]
fn indivisible_span_is_an_error() {
    let dir = tempfile::tempdir().unwrap();
    let o = confluence(&["run", "--out", &out_arg(dir.path()), "--set", "h=0.3"]);
    assert_eq!(o.status.code(), Some(1));
}

#[test]
fn usage_errors_exit_with_one() {
    assert_eq!(confluence(&["run", "--no-such-flag"]).status.code(), Some(1));
    assert_eq!(confluence(&["--help"]).status.code(), Some(0));
}

#[test]
fn config_file_then_overrides() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("run.toml");
    fs::write(&cfg, "[mesh]\nh = 0.01\n[model]\nepsilon = 0.05\ntau = 1e-4\nt_end = 0.01\n").unwrap();
    let out = dir.path().join("out");
    let o = confluence(&[
        "run", "--config", cfg.to_str().unwrap(), "--out", out.to_str().unwrap(), "--set", "t_end=0.002",
    ]);
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    let meta: serde_json::Value = serde_json::from_slice(&fs::read(out.join(RUN_META_FILE)).unwrap()).unwrap();
    assert_eq!(meta["config"]["h"], 0.01);
    assert_eq!(meta["config"]["t_end"], 0.002);
    assert_eq!(meta["steps_completed"], 20);
}

#[test]
fn rerun_from_metadata_is_bitwise_identical() {
    let a = tempfile::tempdir().unwrap();
    let b = tempfile::tempdir().unwrap();
    assert_eq!(run_small(a.path(), &[]).status.code(), Some(0));
    let meta = a.path().join(RUN_META_FILE);
    let o = confluence(&["run", "--config", meta.to_str().unwrap(), "--out", &out_arg(b.path())]);
    assert_eq!(o.status.code(), Some(0));
    assert_eq!(files(a.path()), files(b.path()));
}

#[test]
fn csv_cells_round_trip_bitwise() {
    use confluence::{run_simulation, RunConfig};
    let dir = tempfile::tempdir().unwrap();
    assert_eq!(run_small(dir.path(), &[]).status.code(), Some(0));
    let mut cfg = RunConfig::default();
    cfg.h = 0.01;
    cfg.epsilon = 0.05;
    cfg.tau = 1e-4;
    cfg.t_end = 0.02;
    cfg.snapshot_times = vec![0.0, 0.01];
    let record = run_simulation(&cfg).unwrap();
    let probes = read_csv(&dir.path().join(PROBES_FILE)).unwrap();
    let t: Vec<f64> = probes.column("t").unwrap().into_iter().map(Option::unwrap).collect();
    assert_eq!(t, record.times);
    let s: Vec<f64> = probes.column("sigma@1.42").unwrap().into_iter().map(Option::unwrap).collect();
    assert_eq!(s, record.probes[1].sigma);
    let snap = read_csv(&dir.path().join("snapshot_t0.01.csv")).unwrap();
    let u: Vec<f64> = snap.column("u").unwrap().into_iter().map(Option::unwrap).collect();
    assert_eq!(u, record.snapshots[1].fields.u);
    let track = read_csv(&dir.path().join(BOUNDARY_TRACK_FILE)).unwrap();
    assert_eq!(track.column("r1").unwrap(), record.track().r1);
}

#[test]
fn thin_interface_run_reports_divergence() {
    let dir = tempfile::tempdir().unwrap();
    let o = confluence(&["run", "--out", &out_arg(dir.path()), "--set", "epsilon=0.002"]);
    assert_eq!(o.status.code(), Some(2), "{}", String::from_utf8_lossy(&o.stderr));
    let meta: serde_json::Value =
        serde_json::from_slice(&fs::read(dir.path().join(RUN_META_FILE)).unwrap()).unwrap();
    assert_eq!(meta["status"], "diverged");
    assert_eq!(meta["termination"]["status"], "diverged");
    let track = read_csv(&dir.path().join(BOUNDARY_TRACK_FILE)).unwrap();
    assert!(track.rows.len() > 1 && track.rows.len() < 12_001);
}

#[test]
fn sweep_tables_do_not_depend_on_parallelism() {
    let a = tempfile::tempdir().unwrap();
    let b = tempfile::tempdir().unwrap();
    let sweep = |dir: &Path, parallel: &str| {
        let out = out_arg(dir);
        let mut args = vec!["sweep", "--out", &out, "--parallel", parallel, "--epsilons", "0.08,0.06,0.05"];
        args.extend_from_slice(SMALL);
        confluence(&args)
    };
    assert_eq!(sweep(a.path(), "1").status.code(), Some(0));
    assert_eq!(sweep(b.path(), "3").status.code(), Some(0));
    for name in ["table1.csv", "table2.csv"] {
        assert_eq!(fs::read(a.path().join(name)).unwrap(), fs::read(b.path().join(name)).unwrap());
    }
    for eps in ["0.08", "0.06", "0.05"] {
        let sub = format!("eps_{eps}");
        assert_eq!(files(&a.path().join(&sub)), files(&b.path().join(&sub)));
    }
    let t1 = read_csv(&a.path().join("table1.csv")).unwrap();
    assert_eq!(t1.header, ["epsilon", "t_min", "r_min", "sigma_min", "dt_min", "diverged"]);
    assert_eq!(t1.rows.len(), 3);
}

#[test]
fn empty_or_unsorted_epsilons_are_rejected() {
    let dir = tempfile::tempdir().unwrap();
    let out = out_arg(dir.path());
    assert_eq!(confluence(&["table1", "--out", &out, "--epsilons", "0.01,0.025"]).status.code(), Some(1));
    assert_eq!(confluence(&["table1", "--out", &out, "--epsilons", ""]).status.code(), Some(1));
}
