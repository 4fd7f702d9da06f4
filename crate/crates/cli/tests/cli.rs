//! End-to-end runs of the `modent` binary.

use std::path::Path;
use std::process::{Command, Output};

use modent::io::{parse_csv_rows, to_json};
use modent::{sweep_lambda_i, EntanglementReport, ModularSpec};
use serde_json::Value;

fn modent(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_modent"))
        .args(args)
        .env_remove("MODENT_OUT_DIR")
        .output()
        .unwrap()
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

fn stderr(o: &Output) -> String {
    String::from_utf8(o.stderr.clone()).unwrap()
}

/// Last stderr line, parsed as the machine-readable error.
fn error_line(o: &Output) -> Value {
    let err = stderr(o);
    serde_json::from_str(err.lines().last().unwrap()).unwrap()
}

const REPORT: [&str; 9] = [
    "report",
    "--moduli",
    "2",
    "--sites",
    "6",
    "--lambda",
    "0.1",
    "--lambda-i",
    "0.5",
];

#[test]
fn report_shows_end_to_end_entanglement() {
    let o = modent(&REPORT);
    assert!(o.status.success(), "{}", stderr(&o));
    let doc: Value = serde_json::from_str(&stdout(&o)).unwrap();
    let c = doc["result"]["end_to_end_concurrence"].as_f64().unwrap();
    assert!(c > 0.9, "C = {c}");
    assert_eq!(doc["config"]["lambda_i"], 0.5);
    assert_eq!(doc["config"]["tangle_site"], 0);
    assert_eq!(doc["result"]["metadata"]["method"], "free-fermion");
}

#[test]
fn json_output_round_trips_byte_for_byte() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("r.json");
    let mut args = REPORT.to_vec();
    args.extend(["--out", path.to_str().unwrap()]);
    let o = modent(&args);
    assert!(o.status.success(), "{}", stderr(&o));
    let text = std::fs::read_to_string(&path).unwrap();

    let value: Value = serde_json::from_str(&text).unwrap();
    assert_eq!(to_json(&value).unwrap(), text);

    let report: EntanglementReport = serde_json::from_value(value["result"].clone()).unwrap();
    let mut rebuilt = value.clone();
    rebuilt["result"] = serde_json::to_value(&report).unwrap();
    assert_eq!(to_json(&rebuilt).unwrap(), text);
}

#[test]
fn fig2b_is_deterministic_and_matches_the_library() {
    let dir = tempfile::tempdir().unwrap();
    let mut files = Vec::new();
    for run in ["a", "b"] {
        let out = dir.path().join(run);
        let o = modent(&["fig", "fig2b", "--out", out.to_str().unwrap()]);
        assert!(o.status.success(), "{}", stderr(&o));
        files.push(std::fs::read(out.join("fig2b.csv")).unwrap());
    }
    assert_eq!(files[0], files[1]);

    let csv = String::from_utf8(files.remove(0)).unwrap();
    let rows = parse_csv_rows(&csv);
    let grid: Vec<f64> = rows.iter().map(|r| r[4].parse().unwrap()).collect();
    assert_eq!(grid.len(), 200);
    assert!((grid[0] - 0.01).abs() < 1e-12 && (grid[199] - 2.0).abs() < 1e-12);

    let table = sweep_lambda_i(&ModularSpec::new(2, 7, 0.1, 0.0).unwrap(), &grid).unwrap();
    for (row, lib) in rows.iter().zip(&table.rows) {
        let c: f64 = row[5].parse().unwrap();
        assert_eq!(c, lib.c_end, "lambda_I = {}", row[4]);
    }
}

#[test]
fn oracle_check_passes() {
    let o = modent(&["oracle-check", "--max-sites", "10", "--format", "json"]);
    assert!(o.status.success(), "{}", stderr(&o));
    let doc: Value = serde_json::from_str(&stdout(&o)).unwrap();
    let rows = doc["result"].as_array().unwrap();
    assert!(rows.len() > 50);
    assert!(rows.iter().all(|r| r["pass"] == true));
}

#[test]
fn oracle_mismatch_exits_3() {
    let o = modent(&[
        "oracle-check",
        "--max-sites",
        "6",
        "--energy-tol",
        "0",
        "--state-tol",
        "0",
    ]);
    assert_eq!(o.status.code(), Some(3));
    assert_eq!(error_line(&o)["error"]["kind"], "oracle-mismatch");
}

#[test]
fn bad_arguments_exit_2_with_json_error() {
    for args in [
        vec![
            "report",
            "--moduli",
            "2",
            "--sites",
            "6",
            "--lambda",
            "-1",
            "--lambda-i",
            "0.5",
        ],
        vec!["report", "--sites", "6"],
        vec!["report", "--bogus"],
        vec![
            "sweep-lambda-i",
            "--sites",
            "4",
            "--lambda",
            "0.1",
            "--step",
            "0",
        ],
        vec!["report", "--couplings", "1,nan,1"],
        vec!["oracle-check", "--max-sites", "30"],
        vec!["report", "--threads", "0", "--couplings", "1"],
    ] {
        let o = modent(&args);
        assert_eq!(o.status.code(), Some(2), "{args:?}: {}", stderr(&o));
        let e = error_line(&o);
        assert_eq!(e["error"]["kind"], "usage", "{args:?}");
        assert_eq!(e["error"]["exit_code"], 2);
        assert!(!e["error"]["message"].as_str().unwrap().is_empty());
    }
}

#[test]
fn invalid_config_exits_2() {
    let dir = tempfile::tempdir().unwrap();
    let unknown = dir.path().join("c.toml");
    std::fs::write(
        &unknown,
        "moduli = 2\nsites = 6\nlambda = 0.1\nlamda_i = 0.5\n",
    )
    .unwrap();
    let missing = dir.path().join("none.json");
    for path in [&unknown, &missing] {
        let o = modent(&["report", "--config", path.to_str().unwrap()]);
        assert_eq!(o.status.code(), Some(2), "{}", stderr(&o));
        assert_eq!(error_line(&o)["error"]["kind"], "usage");
    }
}

fn config_value(o: &Output) -> Value {
    assert!(o.status.success(), "{}", stderr(o));
    serde_json::from_str::<Value>(&stdout(o)).unwrap()["config"].clone()
}

#[test]
fn flags_override_config_files() {
    let dir = tempfile::tempdir().unwrap();
    let toml = dir.path().join("c.toml");
    std::fs::write(
        &toml,
        "moduli = 2\nsites = 6\nlambda = 0.1\nlambda_i = 0.5\nformat = \"json\"\n",
    )
    .unwrap();
    let json = dir.path().join("c.json");
    std::fs::write(
        &json,
        r#"{"moduli": 2, "sites": 6, "lambda": 0.1, "lambda_i": 0.5}"#,
    )
    .unwrap();

    for path in [&toml, &json] {
        let p = path.to_str().unwrap();
        let from_file = config_value(&modent(&["report", "--config", p]));
        assert_eq!(from_file["lambda_i"], 0.5);

        let overridden = config_value(&modent(&["report", "--config", p, "--lambda-i", "1.5"]));
        assert_eq!(overridden["lambda_i"], 1.5);
        assert_eq!(overridden["sites"], 6);

        let explicit = config_value(&modent(&[
            "report",
            "--config",
            p,
            "--couplings",
            "1,0.5,1",
        ]));
        assert!(explicit.get("moduli").is_none());
        assert_eq!(explicit["couplings"], serde_json::json!([1.0, 0.5, 1.0]));
    }
}

#[test]
fn out_dir_from_environment() {
    let dir = tempfile::tempdir().unwrap();
    let o = Command::new(env!("CARGO_BIN_EXE_modent"))
        .args(REPORT)
        .env("MODENT_OUT_DIR", dir.path())
        .output()
        .unwrap();
    assert!(o.status.success(), "{}", stderr(&o));
    assert!(stdout(&o).is_empty());
    let written = dir.path().join("report.json");
    assert!(Path::new(&written).exists());
    let doc: Value = serde_json::from_str(&std::fs::read_to_string(written).unwrap()).unwrap();
    assert!(doc["result"]["end_to_end_concurrence"].as_f64().unwrap() > 0.9);
}

#[test]
fn asymmetric_chain_warns_on_stderr() {
    let o = modent(&["report", "--couplings", "0.2,1,0.7", "--format", "csv"]);
    assert!(o.status.success());
    let warning: Value = serde_json::from_str(stderr(&o).lines().next().unwrap()).unwrap();
    assert!(warning.get("warning").is_some(), "{warning}");
    assert!(stdout(&o).contains("i,j,concurrence"));

    let symmetric = modent(&["report", "--couplings", "0.2,1,0.2"]);
    assert!(stderr(&symmetric).is_empty());
}

#[test]
fn sweep_and_threshold_outputs() {
    let o = modent(&[
        "sweep-lambda-i",
        "--sites",
        "4",
        "--lambda",
        "0.1",
        "--from",
        "0.1",
        "--to",
        "0.5",
        "--step",
        "0.1",
    ]);
    assert!(o.status.success(), "{}", stderr(&o));
    let rows = parse_csv_rows(&stdout(&o));
    assert_eq!(rows.len(), 5);
    assert!(rows.iter().all(|r| r[5].parse::<f64>().unwrap() > 0.0));

    let o = modent(&["threshold", "--sites", "6", "--lambda", "0.1"]);
    let doc: Value = serde_json::from_str(&stdout(&o)).unwrap();
    assert!(o.status.success());
    let th = doc["result"]["threshold"].as_f64().unwrap();
    assert!(th > 0.0 && th < 0.1, "{th}");
}

#[test]
fn help_and_version() {
    let o = modent(&["--version"]);
    assert!(o.status.success());
    assert!(stdout(&o).contains(modent::VERSION));
    let o = modent(&["fig", "--help"]);
    assert!(o.status.success());
    assert!(stdout(&o).contains("fig2a"));
}
