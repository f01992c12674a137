use std::path::PathBuf;
use std::process::{Command, Output};

use serde_json::Value;

fn resfin(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_resfin")).args(args).env_remove("RESFIN_MAX_DEGREE").output().unwrap()
}

fn json(out: &Output) -> Value {
    serde_json::from_slice(&out.stdout).expect("stdout is JSON")
}

fn scratch(name: &str) -> PathBuf {
    let dir = std::env::temp_dir().join(format!("resfin-cli-{}-{name}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    dir
}

#[test]
fn growth_csv() {
    let out = resfin(&["growth", "--rank", "2", "--max", "3", "--format", "csv"]);
    assert!(out.status.success());
    assert_eq!(String::from_utf8(out.stdout).unwrap(), "n,size\n0,1\n1,5\n2,17\n3,53\n");
}

#[test]
fn pnt_row_ten() {
    let out = resfin(&["pnt", "--max", "10"]);
    let rows = json(&out)["rows"].as_array().unwrap().clone();
    let last = rows.last().unwrap();
    assert_eq!(last["n"], 10);
    assert_eq!(last["lcm"], "2520");
    assert!((last["log"].as_f64().unwrap() - 7.832).abs() < 5e-4);
}

#[test]
fn girth_value_and_caps() {
    let out = resfin(&["girth", "--rank", "2", "--radius", "1", "--cap", "6"]);
    assert!(out.status.success());
    let v = json(&out);
    assert_eq!(v["caps"]["order"], 6);
    assert_eq!(v["rows"][0]["value"], 5);
}

#[test]
fn unknown_exits_two() {
    let out = resfin(&["girth", "--rank", "2", "--radius", "1", "--cap", "4"]);
    assert_eq!(out.status.code(), Some(2));
    assert_eq!(json(&out)["rows"][0]["value"], "unknown");
}

#[test]
fn input_errors_exit_one() {
    assert_eq!(resfin(&["growth", "--rank", "0", "--max", "2"]).status.code(), Some(1));
    assert_eq!(resfin(&["lcm-witness", "--set", "a,1"]).status.code(), Some(1));
    assert_eq!(resfin(&["ineq", "--which", "3", "--rank", "2", "--n", "1"]).status.code(), Some(1));
    assert_eq!(resfin(&["no-such-command"]).status.code(), Some(1));
}

#[test]
fn env_cap_lowers_search() {
    let out = Command::new(env!("CARGO_BIN_EXE_resfin"))
        .args(["girth", "--rank", "2", "--radius", "1", "--cap", "6"])
        .env("RESFIN_MAX_DEGREE", "4")
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn witness_roundtrips_through_verify() {
    let dir = scratch("roundtrip");
    let cert = dir.join("cert.json");
    let made = resfin(&["lcm-witness", "--set", "a,b,abAB", "--out", cert.to_str().unwrap()]);
    assert!(made.status.success());

    let checked = resfin(&["verify", "--certificate", cert.to_str().unwrap(), "--samples", "30"]);
    assert!(checked.status.success());
    assert_eq!(json(&checked)["rows"][0]["ok"], true);

    // corrupt δ so it no longer matches its derivation
    let mut v: Value = serde_json::from_str(&std::fs::read_to_string(&cert).unwrap()).unwrap();
    v["rows"][0]["certificate"]["delta"] = Value::from("ab");
    let bad = dir.join("bad.json");
    std::fs::write(&bad, serde_json::to_string(&v).unwrap()).unwrap();
    let rejected = resfin(&["verify", "--certificate", bad.to_str().unwrap()]);
    assert_ne!(rejected.status.code(), Some(0));
    let _ = std::fs::remove_dir_all(&dir);
}

#[test]
fn csv_and_json_agree() {
    let j = json(&resfin(&["nilpotent-girth", "--n", "3"]));
    let c = String::from_utf8(resfin(&["nilpotent-girth", "--n", "3", "--format", "csv"]).stdout).unwrap();
    let lines: Vec<&str> = c.lines().collect();
    assert_eq!(lines.len(), 4);
    let header: Vec<&str> = lines[0].split(',').collect();
    let bound_col = header.iter().position(|h| *h == "bound").unwrap();
    for (row, line) in j["rows"].as_array().unwrap().iter().zip(&lines[1..]) {
        assert_eq!(line.split(',').nth(bound_col).unwrap(), row["bound"].to_string());
    }
}
