use std::path::Path;
use std::process::{Command, Output};

use serde_json::Value;

fn relindex(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_relindex"))
        .args(args)
        .env("XI_INDEX_THREADS", "2")
        .output()
        .expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

/// JSONL records with the timing field removed.
fn records(path: &Path) -> Vec<Value> {
    std::fs::read_to_string(path)
        .unwrap()
        .lines()
        .map(|l| {
            let mut v: Value = serde_json::from_str(l).unwrap();
            v.as_object_mut().unwrap().remove("elapsed_ms");
            v
        })
        .collect()
}

#[test]
fn passing_run_exits_zero() {
    let o = relindex(&["--command", "bs-verify", "--seed", "42", "--trials", "25", "--dim", "10"]);
    assert_eq!(o.status.code(), Some(0), "{}", stdout(&o));
    assert!(stdout(&o).contains("bs-verify: 25/25 passed"));
    assert!(stdout(&o).contains("overall: PASS"));
}

#[test]
fn impossible_tolerance_exits_one() {
    let o = relindex(&["--command", "det", "--seed", "3", "--trials", "3", "--tol", "1e-300"]);
    assert_eq!(o.status.code(), Some(1), "{}", stdout(&o));
    assert!(stdout(&o).contains("FAIL"));
}

#[test]
fn usage_and_config_errors_exit_two() {
    let dir = tempfile::tempdir().unwrap();
    let bad = dir.path().join("bad.toml");
    std::fs::write(&bad, "command = \"bs-verify\"\nseed = \"forty-two\"\n").unwrap();
    let unknown = dir.path().join("unknown.toml");
    std::fs::write(&unknown, "command = \"bs-verify\"\nseed = 1\ncolour = \"red\"\n").unwrap();
    let cases: Vec<Vec<String>> = vec![
        vec!["--config".into(), bad.display().to_string()],
        vec!["--config".into(), unknown.display().to_string()],
        vec!["--config".into(), dir.path().join("missing.toml").display().to_string()],
        vec!["--command".into(), "bs-verify".into()],
        vec!["--command".into(), "frobnicate".into(), "--seed".into(), "1".into()],
        vec!["--command".into(), "xi".into(), "--seed".into(), "1".into(), "--trials".into(), "0".into()],
        vec!["--command".into(), "xi".into(), "--seed".into(), "1".into(), "--blocks".into(), "2y3".into()],
    ];
    for args in cases {
        let args: Vec<&str> = args.iter().map(String::as_str).collect();
        let o = relindex(&args);
        assert_eq!(o.status.code(), Some(2), "{args:?}");
        assert!(!o.stderr.is_empty(), "{args:?} printed no diagnostic");
    }
}

#[test]
fn config_file_drives_a_run_and_flags_override_it() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("run.toml");
    let out = dir.path().join("out.jsonl");
    std::fs::write(
        &cfg,
        format!(
            "command = \"bs-limit\"\nseed = 5\ntrials = 3\ndim = 4\nmode = \"both\"\nout = \"{}\"\n[eps]\nstart = 1e-2\nfactor = 0.5\nsteps = 13\n",
            out.display()
        ),
    )
    .unwrap();
    let o = relindex(&["--config", cfg.to_str().unwrap(), "--trials", "4"]);
    assert_eq!(o.status.code(), Some(0), "{}", stdout(&o));
    let recs = records(&out);
    assert_eq!(recs.len(), 4);
    for (i, r) in recs.iter().enumerate() {
        assert_eq!(r["command"], "bs-limit");
        assert_eq!(r["inputs"]["trial"], i as u64);
        assert_eq!(r["inputs"]["seed"], 5);
        assert_eq!(r["quantities"]["mode"], "BothRegularized");
    }
}

#[test]
fn runs_are_reproducible_across_thread_counts() {
    let dir = tempfile::tempdir().unwrap();
    let run = |threads: &str, name: &str| {
        let out = dir.path().join(name);
        let o = Command::new(env!("CARGO_BIN_EXE_relindex"))
            .args(["--command", "sweep", "--seed", "11", "--trials", "3", "--dim", "4", "--out"])
            .arg(&out)
            .env("XI_INDEX_THREADS", threads)
            .output()
            .unwrap();
        assert_eq!(o.status.code(), Some(0), "{}", stdout(&o));
        records(&out)
    };
    let serial = run("1", "a.jsonl");
    let parallel = run("3", "b.jsonl");
    assert_eq!(serial.len(), 18);
    assert_eq!(serial, parallel);
    assert_eq!(serial, run("1", "c.jsonl"));
}

#[test]
fn bad_thread_count_is_a_usage_error() {
    let o = Command::new(env!("CARGO_BIN_EXE_relindex"))
        .args(["--command", "xi", "--seed", "1"])
        .env("XI_INDEX_THREADS", "zero")
        .output()
        .unwrap();
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn xi_on_a_matrix_file_compares_strategies() {
    let dir = tempfile::tempdir().unwrap();
    let input = dir.path().join("h.txt");
    let out = dir.path().join("xi.jsonl");
    // Self-adjoint and invertible, so all three strategies apply.
    std::fs::write(&input, "# test operator\ndims 2 1\n1,0 0,-1\n0,1 -1,0\n3.5,0\n").unwrap();
    let o = relindex(&["--command", "xi", "--seed", "1", "--input", input.to_str().unwrap(), "--out", out.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(0), "{}", stdout(&o));
    let text = stdout(&o);
    assert!(text.contains("tau_xi_SelfAdjointSpectral"));
    assert!(text.contains("tau_xi_InvertibleLog"));
    let rec = &records(&out)[0];
    // Eigenvalues ±√2 and 3.5 with uniform weights: one negative of three.
    let spectral = rec["quantities"]["tau_xi_SelfAdjointSpectral"].as_f64().unwrap();
    assert!((spectral - 1.0 / 3.0).abs() <= 1e-12);
    let diff = rec["details"]
        .as_array()
        .unwrap()
        .iter()
        .find(|c| c["name"] == "||Xi_SelfAdjointSpectral - Xi_InvertibleLog||")
        .unwrap();
    assert!(diff["residual"].as_f64().unwrap() <= 1e-9);

    std::fs::write(&input, "dims 1\n0,-1\n").unwrap();
    let o = relindex(&["--command", "xi", "--seed", "1", "--input", input.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(2), "non-dissipative input is a usage error");
}
