use std::fs;
use std::process::{Command, Output};

fn cptkit(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_cptkit"))
        .args(args)
        .env_remove("SOURCE_DATE_EPOCH")
        .env_remove("CPTKIT_CAP")
        .output()
        .expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

fn stderr(o: &Output) -> String {
    String::from_utf8_lossy(&o.stderr).into_owned()
}

#[test]
fn build_reports_dimensions() {
    let o = cptkit(&["build", "--spin", "1", "--massive"]);
    assert_eq!(o.status.code(), Some(0));
    assert!(stdout(&o).contains("dim 12"), "{}", stdout(&o));
    let o = cptkit(&["build", "--spin", "2", "--massless"]);
    assert_eq!(o.status.code(), Some(0));
    assert!(stdout(&o).contains("dim 8"));
}

#[test]
fn build_writes_operators() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("ops");
    let o = cptkit(&["--out", out.to_str().unwrap(), "build", "--spin", "1/2", "--phases", "random"]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    for name in ["space.json", "phases.json", "C.json", "PT.json", "CPT.json"] {
        assert!(out.join(name).exists(), "{name} missing");
    }
    let cpt: serde_json::Value =
        serde_json::from_str(&fs::read_to_string(out.join("CPT.json")).unwrap()).unwrap();
    assert_eq!(cpt["rows"], 8);
    assert_eq!(cpt["cols"], 8);

    // the exported phases reproduce the same operators
    let phases = out.join("phases.json");
    let again = dir.path().join("again");
    let o = cptkit(&[
        "--out",
        again.to_str().unwrap(),
        "build",
        "--spin",
        "1/2",
        "--phases",
        phases.to_str().unwrap(),
    ]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    assert_eq!(
        fs::read_to_string(out.join("CPT.json")).unwrap(),
        fs::read_to_string(again.join("CPT.json")).unwrap()
    );
}

#[test]
fn spin_zero_is_a_usage_error() {
    let o = cptkit(&["build", "--spin", "0"]);
    assert_eq!(o.status.code(), Some(2));
    let o = cptkit(&["build", "--spin", "one"]);
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn unknown_flags_are_rejected() {
    let o = cptkit(&["verify", "measures", "--spin", "1"]);
    assert_eq!(o.status.code(), Some(2));
    let o = cptkit(&["verify", "no-such-suite"]);
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn verify_suites_pass() {
    for args in [
        vec!["verify", "lemma1", "--spin", "3/2"],
        vec!["verify", "antiunitary-demo"],
        vec!["--seed", "7", "verify", "klein", "--spin", "1/2", "--phases", "random"],
        vec!["verify", "dimensions"],
        vec!["verify", "measures"],
        vec!["verify", "unitary-consistency", "--trials", "20"],
        vec!["verify", "momentum", "--wavepackets", "10"],
        vec!["verify", "dfs", "--messages", "10", "--trials", "20"],
        vec!["verify", "alignment", "--N-grid", "1..3", "--trials", "2000"],
    ] {
        let o = cptkit(&args);
        assert_eq!(o.status.code(), Some(0), "{args:?}: {}", stderr(&o));
        let report: serde_json::Value = serde_json::from_str(&stdout(&o)).unwrap();
        assert!(report["checks"].as_array().is_some_and(|c| !c.is_empty()));
    }
}

#[test]
fn dicke_reduction_lists_purity_per_k() {
    let o = cptkit(&["verify", "lemma1", "--spin", "3/2"]);
    let text = stdout(&o);
    for k in 0..=3 {
        assert!(text.contains(&format!("k={k} purity")), "k={k}");
    }
}

#[test]
fn antiunitary_demo_reports_violation() {
    let o = cptkit(&["verify", "antiunitary-demo"]);
    let report: serde_json::Value = serde_json::from_str(&stdout(&o)).unwrap();
    let check = report["checks"]
        .as_array()
        .unwrap()
        .iter()
        .find(|c| c["name"] == "pure invariance violated at t")
        .unwrap();
    assert!(check["residual"].as_f64().unwrap() > 0.1);
}

#[test]
fn failing_suite_exits_one_with_names() {
    // a tolerance below zero cannot be met by any residual
    let o = cptkit(&["--tol=-1", "verify", "klein"]);
    assert_eq!(o.status.code(), Some(1));
    assert!(stderr(&o).contains("FAIL"), "{}", stderr(&o));
    assert!(stderr(&o).contains("unitary CPT"));
}

#[test]
fn capacity_exit_code_and_override() {
    let o = cptkit(&["verify", "lemma1", "--spin", "9/2"]);
    assert_eq!(o.status.code(), Some(3));
    let o = Command::new(env!("CARGO_BIN_EXE_cptkit"))
        .args(["verify", "lemma1", "--spin", "9/2"])
        .env("CPTKIT_CAP", "512")
        .output()
        .unwrap();
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
}

#[test]
fn reports_are_byte_identical_across_runs() {
    let dir = tempfile::tempdir().unwrap();
    let a = dir.path().join("a.json");
    let b = dir.path().join("b.json");
    for path in [&a, &b] {
        let o = cptkit(&[
            "--seed",
            "11",
            "--out",
            path.to_str().unwrap(),
            "verify",
            "klein",
            "--phases",
            "random",
            "--count",
            "10",
        ]);
        assert_eq!(o.status.code(), Some(0));
    }
    assert_eq!(fs::read(&a).unwrap(), fs::read(&b).unwrap());

    let c = dir.path().join("c.json");
    cptkit(&["--seed", "12", "--out", c.to_str().unwrap(), "verify", "klein", "--phases", "random", "--count", "10"]);
    assert_ne!(fs::read(&a).unwrap(), fs::read(&c).unwrap());
}

#[test]
fn timestamp_comes_from_source_date_epoch() {
    let o = Command::new(env!("CARGO_BIN_EXE_cptkit"))
        .args(["verify", "measures"])
        .env("SOURCE_DATE_EPOCH", "1700000000")
        .output()
        .unwrap();
    let report: serde_json::Value = serde_json::from_slice(&o.stdout).unwrap();
    assert_eq!(report["timestamp"], 1700000000u64);
}

#[test]
fn sweep_rows() {
    let o = cptkit(&["sweep", "align", "--q0-grid", "0.5", "--N-grid", "1", "--trials", "500"]);
    assert_eq!(o.status.code(), Some(0));
    let text = stdout(&o);
    let mut lines = text.lines();
    assert_eq!(
        lines.next(),
        Some("q0,N,alignment_rate,closed_form_error,empirical_error,stderr")
    );
    assert_eq!(lines.next(), Some("0.5,1,inf,0,0,0"));

    let o = cptkit(&["sweep", "align", "--q0-grid", "0.75", "--N-grid", "1..8", "--trials", "500"]);
    let errors: Vec<f64> = stdout(&o)
        .lines()
        .skip(1)
        .map(|l| l.split(',').nth(3).unwrap().parse().unwrap())
        .collect();
    assert_eq!(errors.len(), 8);
    assert!(errors.windows(2).all(|w| w[1] < w[0]));

    let o = cptkit(&["sweep", "align", "--q0-grid", "", "--N-grid", "1"]);
    assert_eq!(o.status.code(), Some(2));
    let o = cptkit(&["sweep", "align", "--q0-grid", "0.5", "--N-grid", ""]);
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn encode_decode_round_trip() {
    let dir = tempfile::tempdir().unwrap();
    let state = dir.path().join("state.json");
    let o = cptkit(&[
        "--out",
        state.to_str().unwrap(),
        "encode",
        "--spin",
        "1/2",
        "--message",
        "0.6,0;0,0.8;0,0;0,0",
    ]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let o = cptkit(&["decode", "--spin", "1/2", "--state", state.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(0));
    let doc: serde_json::Value = serde_json::from_str(&stdout(&o)).unwrap();
    assert!(doc["residual"].as_f64().unwrap() < 1e-12);
    let entries = doc["message"]["entries"].as_array().unwrap();
    assert!((entries[0][0].as_f64().unwrap() - 0.6).abs() < 1e-12);
    assert!((entries[1][1].as_f64().unwrap() - 0.8).abs() < 1e-12);

    // the opposite sector sees none of it
    let o = cptkit(&["decode", "--spin", "1/2", "--sector", "-", "--state", state.to_str().unwrap()]);
    let doc: serde_json::Value = serde_json::from_str(&stdout(&o)).unwrap();
    assert!((doc["residual"].as_f64().unwrap() - 1.0).abs() < 1e-12);
}

#[test]
fn encode_rejects_bad_messages() {
    let o = cptkit(&["encode", "--spin", "1/2", "--message", "1,0"]);
    assert_eq!(o.status.code(), Some(2));
    let o = cptkit(&["encode", "--spin", "1/2", "--message", "random", "--noise", "bogus"]);
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn noise_trials_emit_reports() {
    for noise in ["twirl", "dephase", "depolarize(0.25)"] {
        let o = cptkit(&["encode", "--spin", "1", "--message", "random", "--noise", noise, "--trials", "200"]);
        assert_eq!(o.status.code(), Some(0), "{noise}: {}", stderr(&o));
        let report: serde_json::Value = serde_json::from_str(&stdout(&o)).unwrap();
        assert!(report["suite"].as_str().unwrap().contains("dfs"));
    }
}

#[test]
fn csv_report_format() {
    let o = cptkit(&["--format", "csv", "verify", "antiunitary-demo"]);
    assert_eq!(o.status.code(), Some(0));
    let text = stdout(&o);
    assert!(text.starts_with("suite,timestamp,seed,name,pass,residual,tolerance,notes"));
    assert_eq!(text.lines().count(), 7);
}

#[test]
fn exports() {
    let o = cptkit(&["export", "wavepacket", "--spin", "1/2"]);
    assert_eq!(o.status.code(), Some(0));
    let doc: serde_json::Value = serde_json::from_str(&stdout(&o)).unwrap();
    assert_eq!(doc["grid"]["n"], 32);
    assert_eq!(doc["values"].as_array().unwrap().len(), 4 * 32);

    let o = cptkit(&["export", "grid-cpt", "--spin", "1/2", "--points", "2", "--p-max", "1"]);
    let doc: serde_json::Value = serde_json::from_str(&stdout(&o)).unwrap();
    assert_eq!(doc["rows"], 16);

    let o = cptkit(&["export", "space", "--spin", "1", "--massless"]);
    let doc: serde_json::Value = serde_json::from_str(&stdout(&o)).unwrap();
    assert_eq!(doc["labels"].as_array().unwrap().len(), 8);
}
