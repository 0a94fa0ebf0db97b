use std::process::{Command, Output};

use serde_json::Value;

fn triadne(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_triadne"))
        .args(args)
        .env_remove("TRIADNE_CACHE_DIR")
        .output()
        .expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

#[test]
fn count_in_the_plane_is_zero() {
    let o = triadne(&["count", "--d", "2", "--lambda", "2..50"]);
    assert!(o.status.success());
    let text = stdout(&o);
    let mut lines = text.lines();
    assert_eq!(lines.next(), Some("lambda,count,normalized"));
    let rows: Vec<&str> = lines.collect();
    assert_eq!(rows.len(), 49);
    assert!(rows.iter().all(|r| r.split(',').nth(1) == Some("0")));
}

#[test]
fn count_table_in_dimension_seven() {
    let o = triadne(&["count", "--d", "7", "--lambda", "2,4", "--format", "json"]);
    assert!(o.status.success());
    let v: Value = serde_json::from_str(&stdout(&o)).unwrap();
    assert_eq!(v["schema"], "triadne/1");
    assert_eq!(v["rows"][0][1], 1680);
    assert_eq!(v["rows"][1][1], 47040);
    assert_eq!(v["rows"][0][2], 105.0);
}

#[test]
fn singular_report_shape() {
    let o = triadne(&["singular", "--d", "7", "--lambda", "6", "--qmax", "8", "--P", "13"]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let v: Value = serde_json::from_str(&stdout(&o)).unwrap();
    assert_eq!(v["schema"], "triadne/1");
    assert_eq!(v["pass"], true);
    let data = &v["data"];
    for key in ["lambda", "d", "q_max", "sigma", "tail_bound", "factors"] {
        assert!(!data[key].is_null(), "missing {key}");
    }
    let f = &data["factors"][0];
    assert_eq!(f["p"], 2);
    assert!(f["value"].as_f64().unwrap() > 0.0);
    assert!(f["stabilized"].is_boolean());
}

#[test]
fn seeded_runs_are_reproducible() {
    let args = ["arcs-scan", "--N", "32", "--samples", "200", "--points", "20", "--seed", "11"];
    let a = triadne(&args);
    let b = triadne(&args);
    assert!(a.status.success());
    assert_eq!(a.stdout, b.stdout);
    let c = triadne(&["arcs-scan", "--N", "32", "--samples", "200", "--points", "20", "--seed", "12"]);
    assert_ne!(a.stdout, c.stdout);
}

#[test]
fn failed_hard_check_exits_nonzero() {
    // The scale-free check asks for 1e-6 agreement between two truncations,
    // which the windowed quadrature does not reach.
    let o = triadne(&["lemma9", "--d", "7", "--lambda", "1"]);
    assert_eq!(o.status.code(), Some(1));
    let v: Value = serde_json::from_str(&stdout(&o)).unwrap();
    assert_eq!(v["pass"], false);
    let identity = v["checks"].as_array().unwrap().iter().find(|c| c["anchor"].as_str().unwrap().starts_with("integral-equals")).unwrap();
    assert_eq!(identity["pass"], true);
}

#[test]
fn bad_arguments_exit_with_two() {
    assert_eq!(triadne(&["count", "--lambda", "9..3"]).status.code(), Some(2));
    assert_eq!(triadne(&["multiplier", "--d", "3", "--xi", "0.1,0.2"]).status.code(), Some(2));
    assert!(!triadne(&["no-such-command"]).status.success());
}

#[test]
fn tables_and_reports_in_both_formats() {
    let o = triadne(&["triangles-box", "--d", "3", "--range", "1..2"]);
    assert_eq!(stdout(&o), "n,triangles\n1,8\n2,80\n");
    let o = triadne(&["gauss-verify", "--range", "1..6", "--format", "csv"]);
    assert!(o.status.success());
    assert!(stdout(&o).starts_with("report,label,anchor,lhs,rhs,tolerance,pass,hard\n"));
    let o = triadne(&["moments", "--range", "1..2"]);
    assert_eq!(stdout(&o).lines().nth(1), Some("1,9,126873,20561"));
}

#[test]
fn operator_reads_and_writes_grid_functions() {
    let dir = tempfile::tempdir().unwrap();
    let input = dir.path().join("f.json");
    let dump = dir.path().join("g.json");
    std::fs::write(&input, r#"{"d":4,"entries":[{"coords":[0,0,0,0],"re":1.0,"im":0.0}]}"#).unwrap();
    let o = triadne(&[
        "operator",
        "--lambda",
        "4",
        "--input",
        input.to_str().unwrap(),
        "--dump",
        dump.to_str().unwrap(),
        "--norms",
        "1,inf",
    ]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    assert_eq!(stdout(&o).lines().nth(1).unwrap().split(',').next(), Some("1"));
    let g: Value = serde_json::from_str(&std::fs::read_to_string(&dump).unwrap()).unwrap();
    assert_eq!(g["d"], 4);
    assert!(!g["entries"].as_array().unwrap().is_empty());
}

#[test]
fn sweeps_resume_from_checkpoint() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("counts.csv");
    let ckpt = dir.path().join("counts.csv.ckpt");
    // A saved row for λ = 2 with a marker value shows the rerun reuses it.
    let key = r#"count {"d":7} [2, 4]"#;
    let state = serde_json::json!({"key": key, "rows": [[2, 7, 7.0]]});
    std::fs::write(&ckpt, state.to_string()).unwrap();
    let o = triadne(&["count", "--d", "7", "--lambda", "2,4", "--out", out.to_str().unwrap()]);
    assert!(o.status.success());
    let text = std::fs::read_to_string(&out).unwrap();
    assert_eq!(text, "lambda,count,normalized\n2,7,7.0\n4,47040,183.75\n");
    assert!(!ckpt.exists());

    // State written under another configuration is ignored.
    let state = serde_json::json!({"key": "count {\"d\":5} [2, 4]", "rows": [[2, 7, 7.0]]});
    std::fs::write(&ckpt, state.to_string()).unwrap();
    triadne(&["count", "--d", "7", "--lambda", "2,4", "--out", out.to_str().unwrap()]);
    assert!(std::fs::read_to_string(&out).unwrap().contains("2,1680,"));
}

#[test]
fn checkpoints_are_written_during_long_sweeps() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("box.csv");
    // With a zero interval every row is saved; a failing item leaves the state behind.
    let o = triadne(&[
        "moments",
        "--range",
        "1,2,99999999999",
        "--checkpoint-secs",
        "0",
        "--out",
        out.to_str().unwrap(),
    ]);
    assert_eq!(o.status.code(), Some(2));
    let state: Value = serde_json::from_str(&std::fs::read_to_string(dir.path().join("box.csv.ckpt")).unwrap()).unwrap();
    assert_eq!(state["rows"].as_array().unwrap().len(), 2);
}

#[test]
fn cache_directory_is_populated() {
    let dir = tempfile::tempdir().unwrap();
    let o = Command::new(env!("CARGO_BIN_EXE_triadne"))
        .args(["count", "--d", "5", "--lambda", "6"])
        .env("TRIADNE_CACHE_DIR", dir.path())
        .output()
        .unwrap();
    assert!(o.status.success());
    let bytes = std::fs::read(dir.path().join("reps_d5_l6.bin")).unwrap();
    assert_eq!(&bytes[..4], b"TRIA");
    let again = Command::new(env!("CARGO_BIN_EXE_triadne"))
        .args(["count", "--d", "5", "--lambda", "6"])
        .env("TRIADNE_CACHE_DIR", dir.path())
        .output()
        .unwrap();
    assert_eq!(o.stdout, again.stdout);
}

#[test]
fn main_term_shadow_report() {
    let o = triadne(&["multiplier", "--d", "4", "--lambda", "4,8", "--box-side", "16", "--samples", "200", "--qmax", "8"]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let v: Value = serde_json::from_str(&stdout(&o)).unwrap();
    assert_eq!(v["name"], "main-term-shadow");
    let rows = v["data"].as_array().unwrap();
    assert_eq!(rows.len(), 2);
    assert!(rows.iter().all(|r| r["relative_discrepancy"].as_f64().unwrap().is_finite()));
}
