use std::process::Command;

fn zklab(args: &[&str], dir: &std::path::Path) -> std::process::Output {
    Command::new(env!("CARGO_BIN_EXE_zklab"))
        .args(args)
        .current_dir(dir)
        .output()
        .unwrap()
}

#[test]
fn simulate_then_norms() {
    let dir = tempfile::tempdir().unwrap();
    std::fs::write(
        dir.path().join("run.cfg"),
        "# small run\nt_final = 0.1\nsnapshots = 3\namplitude = 0.3\ntrace = hs:1, abs:0.5\n",
    )
    .unwrap();
    let out = zklab(&["simulate", "--config", "run.cfg", "--grid", "64x64", "--box", "16", "--out", "o"], dir.path());
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let bytes = std::fs::metadata(dir.path().join("o/simulate.zkf")).unwrap().len();
    assert_eq!(bytes, 8 + 3 * (40 + 8 * 64 * 64));
    let csv = std::fs::read_to_string(dir.path().join("o/simulate.csv")).unwrap();
    assert!(csv.starts_with("t,l2,mass,hs(1),weighted(abs_sum(0.5))\r\n"));
    assert_eq!(csv.matches("\r\n").count(), 4);

    let out = zklab(&["norms", "o/simulate.zkf", "--json"], dir.path());
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let v: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(v["components"].as_array().unwrap().len(), 10);
}

#[test]
fn bad_config_reports_line() {
    let dir = tempfile::tempdir().unwrap();
    std::fs::write(dir.path().join("bad.cfg"), "t_final = 0.1\nmystery = 2\n").unwrap();
    let out = zklab(&["propagate", "--config", "bad.cfg"], dir.path());
    assert_eq!(out.status.code(), Some(2));
    let err = String::from_utf8_lossy(&out.stderr);
    assert!(err.contains("line 2") && err.contains("mystery"), "{err}");
}

#[test]
fn verify_and_report() {
    let dir = tempfile::tempdir().unwrap();
    let out = zklab(&["verify", "partition_unity", "--seed", "4", "--out", "r", "--json"], dir.path());
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let v: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(v["experiment"], "partition_unity");
    assert_eq!(v["environment"]["seed"], 4);

    let out = zklab(&["report", "r/partition_unity.json"], dir.path());
    assert!(out.status.success());
    assert!(String::from_utf8_lossy(&out.stdout).contains("1/1 experiments passed"));

    let out = zklab(&["verify", "no_such_thing"], dir.path());
    assert_eq!(out.status.code(), Some(2));
}
