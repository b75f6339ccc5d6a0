use zk_core::config::{Params, RunConfig};
use zk_core::harness::{run_experiment, summary_table, EstimateReport, ExperimentSpec, EXPERIMENTS, SCHEMA_VERSION};
use zk_core::ZkError;

fn quick() -> EstimateReport {
    let p = Params::parse("K = 5\npoints = 500").unwrap();
    run_experiment(&ExperimentSpec::with_params("partition_unity", p, 9)).unwrap()
}

#[test]
fn reports_are_deterministic_apart_from_timing() {
    let strip = |mut r: EstimateReport| {
        r.wall_time_s = 0.0;
        r.to_json().unwrap()
    };
    assert_eq!(strip(quick()), strip(quick()));
}

#[test]
fn verdict_is_a_function_of_stored_checks() {
    let r = quick();
    assert!(r.passed);
    assert_eq!(r.passed, r.checks.iter().all(|c| c.passed));
    assert_eq!(r.environment.seed, 9);
    assert_eq!(r.environment.parameters.get("K").map(String::as_str), Some("5"));
    let back = EstimateReport::from_json(&r.to_json().unwrap()).unwrap();
    assert_eq!(back.checks, r.checks);
    assert!(summary_table(&[r]).contains("1/1 experiments passed"));
}

#[test]
fn other_schema_versions_fail_loudly() {
    let json = quick().to_json().unwrap();
    for v in [0, SCHEMA_VERSION + 1] {
        let old = json.replace(
            &format!("\"schema_version\": {SCHEMA_VERSION}"),
            &format!("\"schema_version\": {v}"),
        );
        let err = EstimateReport::from_json(&old).unwrap_err().to_string();
        assert!(err.contains("schema version"), "{err}");
    }
    let mut value: serde_json::Value = serde_json::from_str(&json).unwrap();
    value.as_object_mut().unwrap().remove("schema_version");
    assert!(EstimateReport::from_json(&value.to_string()).is_err());
}

#[test]
fn unknown_names_and_keys_are_rejected() {
    assert!(matches!(
        run_experiment(&ExperimentSpec::new("nonsense")),
        Err(ZkError::UnknownExperiment(_))
    ));
    for name in EXPERIMENTS {
        let p = Params::parse("definitely_not_a_key = 1").unwrap();
        let err = run_experiment(&ExperimentSpec::with_params(name, p, 1)).unwrap_err();
        assert!(matches!(err, ZkError::Config { line: 1, .. }), "{name}: {err}");
    }
}

#[test]
fn run_config_rejects_unknown_keys_with_line() {
    let text = "# comment\ngrid = 64x64\nbox = 10\n\nspeling = 3\n";
    assert!(matches!(text.parse::<RunConfig>(), Err(ZkError::Config { line: 5, .. })));
}
