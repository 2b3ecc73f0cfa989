use std::fs;
use std::path::{Path, PathBuf};

use noncollapse_cli::core::{FieldLabel, OrientationCase, SpeedFunction};
use noncollapse_cli::{apply_override, from_value, parse_config, CliError, Command, GeometrySpec};
use serde_json::json;

fn examples_dir() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("examples")
}

fn key_of(err: CliError) -> String {
    match err {
        CliError::Validation { key, .. } => key,
        other => panic!("expected a validation error, got {other}"),
    }
}

#[test]
fn schema_instance_is_valid() {
    let doc = json!({
        "command": "run-flow",
        "geometry": { "gen": "sphere", "r": 1, "N": 256 },
        "speed": "sum",
        "flow": { "t_end": 0.1 }
    });
    let cfg = from_value(&doc, Path::new("")).unwrap();
    assert_eq!(cfg.command, Command::RunFlow);
    assert_eq!(cfg.speed(), SpeedFunction::sum());
    assert_eq!(cfg.flow.t_end, 0.1);
    assert_eq!(cfg.flow.dt_safety, 0.2);
    assert_eq!(cfg.flow.resample_every, 10);
    assert_eq!(cfg.seed, 0);
    match cfg.geometry() {
        GeometrySpec::Generator { name, params, n } => {
            assert_eq!((name.as_str(), *n), ("sphere", 256));
            assert_eq!(params["r"], 1.0);
            assert_eq!(params["cx"], 0.0);
        }
        other => panic!("unexpected geometry {other:?}"),
    }
    assert_eq!(cfg.geometry().round(), Some(([0.0, 0.0], 1.0)));
}

#[test]
fn missing_speed_names_speed() {
    let doc = json!({
        "command": "run-flow",
        "geometry": { "gen": "sphere", "N": 64 },
        "flow": { "t_end": 0.1 }
    });
    assert_eq!(
        key_of(from_value(&doc, Path::new("")).unwrap_err()),
        "speed"
    );
}

#[test]
fn bad_power_is_a_parse_error_on_the_token() {
    let doc = json!({
        "command": "run-flow",
        "geometry": { "gen": "sphere", "N": 64 },
        "speed": "pmean:abc",
        "flow": { "t_end": 0.1 }
    });
    let err = from_value(&doc, Path::new("")).unwrap_err();
    assert_eq!(err.exit_code(), 2);
    assert!(err.to_string().contains("`abc`"), "{err}");
}

#[test]
fn validation_errors_name_the_key() {
    let base = json!({
        "command": "run-flow",
        "geometry": { "gen": "sphere", "N": 64 },
        "speed": "sum",
        "flow": { "t_end": 0.1 }
    });
    let cases = [
        ("flow.t_end", "-1"),
        ("flow.dt_safety", "fast"),
        ("geometry.N", "2.5"),
        ("geometry.gen", "cube"),
        ("command", "fly"),
        ("analyzer.M", "-4"),
        ("seed", "x"),
    ];
    for (key, raw) in cases {
        let mut doc = base.clone();
        apply_override(&mut doc, key, raw).unwrap();
        assert_eq!(key_of(from_value(&doc, Path::new("")).unwrap_err()), key);
    }
    let mut doc = base.clone();
    doc["flow"]["t_ned"] = json!(1.0);
    assert_eq!(
        key_of(from_value(&doc, Path::new("")).unwrap_err()),
        "flow.t_ned"
    );
    let mut doc = base.clone();
    doc["geometry"]["radius"] = json!(1.0);
    assert_eq!(
        key_of(from_value(&doc, Path::new("")).unwrap_err()),
        "geometry.radius"
    );
    let mut doc = base;
    doc["flow"].as_object_mut().unwrap().remove("t_end");
    assert_eq!(
        key_of(from_value(&doc, Path::new("")).unwrap_err()),
        "flow.t_end"
    );
}

#[test]
fn speed_lists_only_where_allowed() {
    let doc = json!({
        "command": "run-flow",
        "geometry": { "gen": "sphere", "N": 64 },
        "speed": ["sum", "norm"],
        "flow": { "t_end": 0.1 }
    });
    assert_eq!(
        key_of(from_value(&doc, Path::new("")).unwrap_err()),
        "speed"
    );
    let doc = json!({ "command": "check-speeds", "speed": ["sum", "norm", "pmean:-1"] });
    let cfg = from_value(&doc, Path::new("")).unwrap();
    assert_eq!(cfg.speeds.len(), 3);
    assert_eq!(cfg.samples, 1000);
}

#[test]
fn containment_and_linearized_sections() {
    let doc = json!({
        "command": "run-containment",
        "geometry": { "gen": "sphere", "N": 64 },
        "speed": "sum",
        "flow": { "t_end": 0.1 }
    });
    assert_eq!(
        key_of(from_value(&doc, Path::new("")).unwrap_err()),
        "containment"
    );
    let mut doc = doc;
    doc["containment"] =
        json!({ "case": "nested", "partner": { "gen": "sphere", "r": 3, "N": 64 } });
    let cfg = from_value(&doc, Path::new("")).unwrap();
    assert_eq!(cfg.containment.unwrap().case, OrientationCase::Nested);

    let doc = json!({
        "command": "verify-linearized",
        "geometry": { "gen": "ellipse", "N": 64 },
        "speed": "sum",
        "flow": { "t_end": 0.001 },
        "linearized": { "labels": ["speed", "normal:y"], "resolutions": [32, 64, 128] }
    });
    let cfg = from_value(&doc, Path::new("")).unwrap();
    assert_eq!(
        cfg.labels,
        vec![FieldLabel::Speed, FieldLabel::NormalComponent([0.0, 1.0])]
    );
    let mut bad = doc.clone();
    bad["linearized"]["resolutions"] = json!([32, 64, 100]);
    assert_eq!(
        key_of(from_value(&bad, Path::new("")).unwrap_err()),
        "linearized.resolutions"
    );
    let mut bad = doc;
    bad["linearized"]["labels"] = json!(["curvature"]);
    assert_eq!(from_value(&bad, Path::new("")).unwrap_err().exit_code(), 2);
}

#[test]
fn flags_override_file_values() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("c.json");
    fs::write(
        &path,
        r#"{"command":"run-flow","geometry":{"gen":"sphere","r":1,"N":256},"speed":"sum","flow":{"t_end":0.1}}"#,
    )
    .unwrap();
    let overrides = [
        ("geometry.N".to_string(), "128".to_string()),
        ("speed".to_string(), "pmean:-1".to_string()),
        ("flow.kappa_cap".to_string(), "50".to_string()),
        ("output_dir".to_string(), "results".to_string()),
    ];
    let cfg = parse_config(Some(&path), Some("analyze-noncollapse"), &overrides).unwrap();
    assert_eq!(cfg.command, Command::AnalyzeNoncollapse);
    assert_eq!(cfg.speed(), SpeedFunction::power_mean(-1.0).unwrap());
    assert_eq!(cfg.flow.kappa_cap, Some(50.0));
    assert_eq!(cfg.output_dir, dir.path().join("results"));
    assert!(matches!(
        cfg.geometry(),
        GeometrySpec::Generator { n: 128, .. }
    ));
}

#[test]
fn geometry_files_must_exist() {
    let dir = tempfile::tempdir().unwrap();
    let doc = json!({
        "command": "run-flow",
        "geometry": { "file": "missing.csv" },
        "speed": "sum",
        "flow": { "t_end": 0.1 }
    });
    assert_eq!(
        key_of(from_value(&doc, dir.path()).unwrap_err()),
        "geometry.file"
    );
}

#[test]
fn every_example_config_parses() {
    let mut count = 0;
    for entry in fs::read_dir(examples_dir()).unwrap() {
        let path = entry.unwrap().path();
        if path.extension().is_some_and(|e| e == "json") {
            parse_config(Some(&path), None, &[])
                .unwrap_or_else(|e| panic!("{}: {e}", path.display()));
            count += 1;
        }
    }
    assert!(count >= 9);
}
