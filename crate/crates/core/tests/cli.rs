use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use serde_json::Value;

fn monopole(args: &[&str], threads: Option<&str>) -> Output {
    let mut c = Command::new(env!("CARGO_BIN_EXE_monopole"));
    c.args(args);
    match threads {
        Some(t) => c.env("MONOPOLE_THREADS", t),
        None => c.env_remove("MONOPOLE_THREADS"),
    };
    c.output().unwrap()
}

fn write_config(dir: &Path, name: &str, text: &str) -> PathBuf {
    let p = dir.join(name);
    fs::write(&p, text).unwrap();
    p
}

fn json(path: &Path) -> Value {
    serde_json::from_str(&fs::read_to_string(path).unwrap()).unwrap()
}

fn tree(dir: &Path) -> Vec<(PathBuf, Vec<u8>)> {
    let mut out = Vec::new();
    let mut stack = vec![dir.to_path_buf()];
    while let Some(d) = stack.pop() {
        for e in fs::read_dir(&d).unwrap() {
            let p = e.unwrap().path();
            if p.is_dir() {
                stack.push(p);
            } else {
                out.push((p.strip_prefix(dir).unwrap().to_path_buf(), fs::read(&p).unwrap()));
            }
        }
    }
    out.sort();
    out
}

const SIMULATE: &str = "mode = simulate\nN = 32\nT = 0.2\ndt = 0.025\ndata = random\namplitude = 0.05\nseed = 4\n";

#[test]
fn outputs_do_not_depend_on_thread_count() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = write_config(tmp.path(), "run.cfg", SIMULATE);
    let mut trees = Vec::new();
    // same output path both times: summary.json records it
    let out = tmp.path().join("o");
    for threads in ["1", "3"] {
        let _ = fs::remove_dir_all(&out);
        let o = monopole(
            &["simulate", "--config", cfg.to_str().unwrap(), "--out", out.to_str().unwrap()],
            Some(threads),
        );
        assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
        trees.push(tree(&out));
    }
    assert!(trees[0].len() > 3);
    assert_eq!(trees[0], trees[1]);
}

#[test]
fn summary_records_mode_seed_and_conventions() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = write_config(tmp.path(), "run.cfg", SIMULATE);
    let out = tmp.path().join("o");
    let o = monopole(
        &["simulate", "--config", cfg.to_str().unwrap(), "--out", out.to_str().unwrap(), "--seed", "17"],
        None,
    );
    assert_eq!(o.status.code(), Some(0));
    let s = json(&out.join("summary.json"));
    assert_eq!(s["mode"], "simulate");
    assert_eq!(s["seed"], 17);
    assert_eq!(s["schema_version"], 1);
    assert_eq!(s["conventions_version"], 1);
    assert_eq!(s["passed"], true);
    let csv = fs::read_to_string(out.join("diagnostics.csv")).unwrap();
    assert!(csv.starts_with("time,monopole_0,monopole_1,monopole_2,e2,coord1,coord2,difference,elliptic,coulomb,max_relative,energy,"));
    // header plus one row per snapshot
    let snaps = fs::read_dir(out.join("snapshots")).unwrap().count() / 2;
    assert_eq!(csv.lines().count(), snaps + 1);
}

#[test]
fn failed_gate_exits_with_one() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = write_config(tmp.path(), "run.cfg", &format!("{SIMULATE}residual_gate = 1e-14\n"));
    let out = tmp.path().join("o");
    let o = monopole(&["simulate", "--config", cfg.to_str().unwrap(), "--out", out.to_str().unwrap()], None);
    assert_eq!(o.status.code(), Some(1));
    assert_eq!(json(&out.join("summary.json"))["passed"], false);
}

#[test]
fn invalid_config_writes_error_json() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = write_config(tmp.path(), "bad.cfg", "mode = simulate\nN = 0\n");
    let out = tmp.path().join("o");
    let o = monopole(&["simulate", "--config", cfg.to_str().unwrap(), "--out", out.to_str().unwrap()], None);
    assert_eq!(o.status.code(), Some(2));
    let e = json(&out.join("error.json"));
    assert_eq!(e["kind"], "config_invalid");
    assert!(e["message"].as_str().unwrap().contains("`N`"));
    assert!(!out.join("summary.json").exists());
}

#[test]
fn unknown_key_reports_its_line() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = write_config(tmp.path(), "bad.cfg", "# comment\nN = 32\nstep = 0.1\n");
    let out = tmp.path().join("o");
    let o = monopole(&["simulate", "--config", cfg.to_str().unwrap(), "--out", out.to_str().unwrap()], None);
    assert_eq!(o.status.code(), Some(2));
    let e = json(&out.join("error.json"));
    assert_eq!(e["kind"], "config_parse");
    assert!(e["message"].as_str().unwrap().contains("line 3"));
}

#[test]
fn bad_thread_count_is_an_error() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = write_config(tmp.path(), "run.cfg", SIMULATE);
    let out = tmp.path().join("o");
    let o = monopole(
        &["simulate", "--config", cfg.to_str().unwrap(), "--out", out.to_str().unwrap()],
        Some("zero"),
    );
    assert_eq!(o.status.code(), Some(2));
    assert_eq!(json(&out.join("error.json"))["kind"], "config_invalid");
}

#[test]
fn snapshot_output_restarts_a_run() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = write_config(tmp.path(), "run.cfg", SIMULATE);
    let first = tmp.path().join("first");
    let o = monopole(&["simulate", "--config", cfg.to_str().unwrap(), "--out", first.to_str().unwrap()], None);
    assert_eq!(o.status.code(), Some(0));
    let snap = first.join("snapshots/aux_00002.bin");
    let text = format!(
        "mode = simulate\nN = 32\nT = 0.1\ndt = 0.025\ndata = snapshot\ninput = {}\n",
        snap.display()
    );
    let cfg2 = write_config(tmp.path(), "restart.cfg", &text);
    let second = tmp.path().join("second");
    let o = monopole(&["simulate", "--config", cfg2.to_str().unwrap(), "--out", second.to_str().unwrap()], None);
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    let s = json(&second.join("summary.json"));
    let t = s["results"]["final_time"].as_f64().unwrap();
    assert!((t - 0.15).abs() < 1e-12, "{t}");

    // a corrupted payload is refused and named
    let mut bytes = fs::read(&snap).unwrap();
    bytes.truncate(bytes.len() / 2);
    fs::write(&snap, bytes).unwrap();
    let third = tmp.path().join("third");
    let o = monopole(&["simulate", "--config", cfg2.to_str().unwrap(), "--out", third.to_str().unwrap()], None);
    assert_eq!(o.status.code(), Some(2));
    let e = json(&third.join("error.json"));
    assert_eq!(e["kind"], "snapshot");
    assert!(e["message"].as_str().unwrap().contains("aux_00002.bin"));
}

#[test]
fn every_mode_runs() {
    let tmp = tempfile::tempdir().unwrap();
    let cases = [
        ("simulate", SIMULATE, "diagnostics.csv"),
        ("picard", "N = 32\nT = 0.2\ndt = 0.05\ndata = bumps\namplitude = 0.2\nbump_width = 0.6\n", "picard.csv"),
        ("gaugefix", "N = 32\namplitude = 0.02\ncoulomb_tol = 1e-10\n", "gaugefix.csv"),
        ("estimates", "N = 16\nestimates = M1, C\nsamples = 2\nframes = 8\namplitude = 0.1\n", "estimates.csv"),
        ("admissible", "s = 0.3\na = 0.2\n", "window.json"),
        ("residuals", "N = 32\nT = 0.2\ndt = 0.025\ndata = bumps\namplitude = 0.2\nbump_width = 0.6\n", "residuals.csv"),
    ];
    for (mode, text, file) in cases {
        let cfg = write_config(tmp.path(), &format!("{mode}.cfg"), text);
        let out = tmp.path().join(mode);
        let o = monopole(&[mode, "--config", cfg.to_str().unwrap(), "--out", out.to_str().unwrap()], None);
        assert_eq!(o.status.code(), Some(0), "{mode}: {}", String::from_utf8_lossy(&o.stderr));
        assert!(out.join(file).exists(), "{mode}");
        assert_eq!(json(&out.join("summary.json"))["mode"], mode);
    }
}
