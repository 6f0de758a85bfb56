use std::path::Path;
use std::process::{Command, Output};

fn charlab(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_charlab"))
        .args(args)
        .env("LCA_CHARLAB_THREADS", "2")
        .output()
        .unwrap()
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

fn stderr(o: &Output) -> String {
    String::from_utf8(o.stderr.clone()).unwrap()
}

fn write(dir: &Path, name: &str, text: &str) -> String {
    let p = dir.join(name);
    std::fs::write(&p, text).unwrap();
    p.to_str().unwrap().to_string()
}

#[test]
fn check_conditions_on_z5() {
    let o = charlab(&["check-conditions", "--group", "Z5", "--alphas", "[[1,1],[1,2]]"]);
    assert_eq!(o.status.code(), Some(0));
    assert_eq!(stdout(&o).trim(), r#"{"condition11":true,"condition12":true}"#);
    let o = charlab(&["check-conditions", "--group", "Z5", "--alphas", "[[1,2],[1,2]]"]);
    let v: serde_json::Value = serde_json::from_str(&stdout(&o)).unwrap();
    assert_eq!(v["condition11"], false);
    assert_eq!(v["condition11_detail"]["pair"], serde_json::json!([0, 1]));
    // 2 is not injective on Z4
    let o = charlab(&["check-conditions", "--group", "Z4", "--alphas", "[[1,1],[1,2]]"]);
    assert_eq!(o.status.code(), Some(3));
    assert!(stderr(&o).contains("monomorphism"));
}

#[test]
fn verify_from_config_with_overrides() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write(
        dir.path(),
        "t1_z3.json",
        r#"{"group": "Z3", "alphas": [[1, 1], [1, 2]], "mode": "theorem1", "seeds": {"master": 1, "restarts": 5}}"#,
    );
    let out = dir.path().join("report.json");
    let o = charlab(&["verify", "--config", &cfg, "--seed", "42", "--restarts", "7", "--out", out.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let v: serde_json::Value = serde_json::from_str(&std::fs::read_to_string(&out).unwrap()).unwrap();
    assert_eq!(v["verdict"], "PASS");
    assert_eq!(v["config"]["seeds"]["master"], 42);
    assert_eq!(v["records"].as_array().unwrap().len(), 7);
    let o = charlab(&["verify", "--config", &cfg, "--format", "csv"]);
    let text = stdout(&o);
    assert!(text.starts_with("restart,residual,min_distance,max_distance\n"));
    assert_eq!(text.lines().count(), 6);
}

#[test]
fn dry_run_prints_the_normalized_config() {
    let o = charlab(&["verify", "--group", "z2xz4", "--alphas", "[[1,1],[1,3]]", "--dry-run"]);
    assert_eq!(o.status.code(), Some(0));
    let v: serde_json::Value = serde_json::from_str(&stdout(&o)).unwrap();
    assert_eq!(v["group"], serde_json::json!([2, 4]));
    assert_eq!(v["seeds"]["restarts"], 10000);
}

#[test]
fn usage_and_config_errors() {
    let o = charlab(&["verify", "--bogus"]);
    assert_eq!(o.status.code(), Some(64));
    assert!(stderr(&o).contains("Usage"));
    let o = charlab(&["frobnicate"]);
    assert_eq!(o.status.code(), Some(64));
    let o = charlab(&["verify", "--group", "Z3", "--alphas", "[[1,1],[1,2]]", "--restarts", "-1"]);
    assert_eq!(o.status.code(), Some(65));
    assert!(stderr(&o).contains("/seeds/restarts"));

    let dir = tempfile::tempdir().unwrap();
    let dup = write(dir.path(), "dup.json", r#"{"group":"Z3","alphas":[[1,1],[1,2]],"seeds":{"master":1,"master":2}}"#);
    let o = charlab(&["verify", "--config", &dup]);
    assert_eq!(o.status.code(), Some(65));
    assert!(stderr(&o).contains("/seeds/master"));
    let extra = write(dir.path(), "extra.json", r#"{"group":"Z3","alphas":[[1,1],[1,2]],"extra":1}"#);
    let o = charlab(&["verify", "--config", &extra]);
    assert_eq!(o.status.code(), Some(65));
    assert!(stderr(&o).contains("/extra"));
}

#[test]
fn precondition_errors_exit_3_with_an_error_report() {
    let o = charlab(&["verify", "--group", "Z2", "--alphas", "[[1,1],[1,1]]", "--restarts", "2"]);
    assert_eq!(o.status.code(), Some(3));
    let v: serde_json::Value = serde_json::from_str(&stdout(&o)).unwrap();
    assert_eq!(v["error"], "condition-11-violated");
    let o = charlab(&["explore", "--group", "Z5", "--alphas", "[[1,1],[1,2]]", "--restarts", "2"]);
    assert_eq!(o.status.code(), Some(3));
}

#[test]
fn explore_runs_on_identical_columns() {
    let o = charlab(&["explore", "--group", "Z2", "--alphas", "[[1,1],[1,1]]", "--restarts", "10"]);
    assert_eq!(o.status.code(), Some(0));
    let v: serde_json::Value = serde_json::from_str(&stdout(&o)).unwrap();
    assert_eq!(v["verdict"], "EXPLORE-COMPLETE");
    assert_eq!(v["mode"], "explore-remark2");
}

#[test]
fn catalog_lists_groups_by_order() {
    let o = charlab(&["catalog", "--max-order", "16"]);
    assert_eq!(o.status.code(), Some(0));
    let v: serde_json::Value = serde_json::from_str(&stdout(&o)).unwrap();
    let list = v.as_array().unwrap();
    assert_eq!(list.len(), 1 + 1 + 1 + 2 + 1 + 1 + 1 + 3 + 2 + 1 + 1 + 2 + 1 + 1 + 1 + 5);
    assert_eq!(list[4]["moduli"], serde_json::json!([2, 2]));
}

#[test]
fn test_dmk_from_samples_and_tables() {
    let o = charlab(&["test-dmk", "--group", "Z3", "--alphas", "[[1,1],[1,2]]", "--seed", "3"]);
    assert_eq!(o.status.code(), Some(0));
    let v: serde_json::Value = serde_json::from_str(&stdout(&o)).unwrap();
    assert_eq!(v["member"], false);

    // the constant table 1 is the characteristic function of a point mass
    let dir = tempfile::tempdir().unwrap();
    let mut csv = String::from("y1,y2,re,im\n");
    for a in 0..3 {
        for b in 0..3 {
            csv.push_str(&format!("{a},{b},1,0\n"));
        }
    }
    let table = write(dir.path(), "f.csv", &csv);
    let o = charlab(&["test-dmk", "--group", "Z3", "--m", "2", "--table", &table]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let v: serde_json::Value = serde_json::from_str(&stdout(&o)).unwrap();
    assert_eq!(v["member"], true);
}

#[test]
fn in_process_entry_point_matches_the_binary() {
    let mut out = Vec::new();
    let mut err = Vec::new();
    let code = charlab::cli::run(
        ["charlab", "check-conditions", "--group", "Z5", "--alphas", "[[1,1],[1,2]]"],
        &mut out,
        &mut err,
    );
    assert_eq!(code, 0);
    assert_eq!(String::from_utf8(out).unwrap().trim(), r#"{"condition11":true,"condition12":true}"#);
}
