use std::path::PathBuf;
use std::process::{Command, Output};

use serde_json::Value;

fn fixture(name: &str) -> String {
    PathBuf::from(env!("CARGO_MANIFEST_DIR"))
        .join("../../fixtures")
        .join(name)
        .display()
        .to_string()
}

fn weakrp(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_weakrp"))
        .args(args)
        .env_remove("WEAKRP_THREADS")
        .output()
        .expect("binary runs")
}

fn json(out: &Output) -> Value {
    serde_json::from_slice(&out.stdout).unwrap_or_else(|e| {
        panic!(
            "stdout is not JSON ({e}): {}\nstderr: {}",
            String::from_utf8_lossy(&out.stdout),
            String::from_utf8_lossy(&out.stderr)
        )
    })
}

fn stderr(out: &Output) -> String {
    String::from_utf8_lossy(&out.stderr).into_owned()
}

fn temp_csv(content: &str) -> tempfile::NamedTempFile {
    let f = tempfile::Builder::new().suffix(".csv").tempfile().unwrap();
    std::fs::write(f.path(), content).unwrap();
    f
}

#[test]
fn example_one_axiom_report() {
    let out = weakrp(&["test", &fixture("example1.csv")]);
    assert_eq!(out.status.code(), Some(0));
    let v = json(&out);
    let reports = v["result"].as_array().unwrap();
    assert_eq!(reports.len(), 6);
    let by = |name: &str| reports.iter().find(|r| r["axiom"] == name).unwrap();
    assert_eq!(by("wgarp")["holds"], true);
    assert_eq!(by("garp")["holds"], false);
    assert_eq!(by("garp")["witness"]["cycle"], serde_json::json!([1, 2, 3]));
    assert_eq!(v["meta"]["indices"], "1-based");
    assert_eq!(v["meta"]["version"], env!("CARGO_PKG_VERSION"));
    assert!(v["meta"]["interpretation"]["big_m"].as_str().unwrap().contains("A^t"));
    assert!(v["meta"]["interpretation"]["afriat_initial_set"].is_string());
}

#[test]
fn strict_exit_flags_violations() {
    let out = weakrp(&["test", &fixture("example1.csv"), "--axiom", "garp", "--strict-exit"]);
    assert_eq!(out.status.code(), Some(2));
    let out = weakrp(&["test", &fixture("example1.csv"), "--axiom", "wgarp", "--strict-exit"]);
    assert_eq!(out.status.code(), Some(0));
    let out = weakrp(&["numbers", &fixture("example1.csv"), "--system", "afriat", "--strict-exit"]);
    assert_eq!(out.status.code(), Some(2));
    assert_eq!(json(&out)["result"]["violation"]["kind"], "garp_violation");
}

#[test]
fn w_numbers_of_example_one() {
    let out = weakrp(&["numbers", &fixture("example1.csv"), "--system", "w"]);
    assert_eq!(out.status.code(), Some(0));
    let v = json(&out);
    assert_eq!(v["result"]["w"][0][1], 12.0);
    assert_eq!(v["result"]["w"][0][2], -12.0);
    assert_eq!(v["result"]["verified"], true);

    let out = weakrp(&["numbers", &fixture("example1.csv"), "--system", "w", "--csv"]);
    let text = String::from_utf8(out.stdout).unwrap();
    assert_eq!(text.lines().next(), Some("t,w1,w2,w3"));
    assert_eq!(text.lines().nth(1), Some("1,0,12,-12"));
}

#[test]
fn every_number_system_certifies_the_law_of_demand_pair() {
    for system in ["afriat", "strict", "varian", "pairwise", "w"] {
        let out = weakrp(&["numbers", &fixture("law-of-demand-pair.csv"), "--system", system]);
        assert_eq!(out.status.code(), Some(0), "{system}: {}", stderr(&out));
        let v = json(&out);
        assert_eq!(v["result"]["certified"], true, "{system}");
        if let Some(ok) = v["result"].get("verified") {
            assert_eq!(ok, true, "{system}");
        }
    }
}

#[test]
fn empty_input_is_a_usage_error() {
    let f = temp_csv("");
    let out = weakrp(&["test", f.path().to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(64));
    assert!(stderr(&out).contains("line 1"), "{}", stderr(&out));
    assert!(out.stdout.is_empty());
}

#[test]
fn malformed_csv_reports_line_and_column() {
    let f = temp_csv("p1,p2,x1,x2\n1,2,3,4\n1,2,x,4\n");
    let out = weakrp(&["test", f.path().to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(64));
    let err = stderr(&out);
    assert!(err.contains("line 3") && err.contains("column 3"), "{err}");
}

#[test]
fn unknown_flag_is_a_usage_error() {
    let out = weakrp(&["test", &fixture("example1.csv"), "--no-such-flag"]);
    assert_eq!(out.status.code(), Some(64));
    let out = weakrp(&["numbers", &fixture("example1.csv"), "--system", "nope"]);
    assert_eq!(out.status.code(), Some(64));
    let out = weakrp(&["prefer", &fixture("example1.csv"), "--x", "1,1", "--y", "1,1,1"]);
    assert_eq!(out.status.code(), Some(64));
}

#[test]
fn preference_output_is_deterministic() {
    let dir = tempfile::tempdir().unwrap();
    let run = |name: &str| {
        let path = dir.path().join(name);
        let out = weakrp(&[
            "prefer",
            &fixture("example1.csv"),
            "--x",
            "2,2,2",
            "--y",
            "1,1,1",
            "--output",
            path.to_str().unwrap(),
        ]);
        assert_eq!(out.status.code(), Some(0));
        assert!(out.stdout.is_empty());
        std::fs::read(path).unwrap()
    };
    let a = run("a.json");
    assert_eq!(a, run("b.json"));
    let v: Value = serde_json::from_slice(&a).unwrap();
    let p = &v["result"]["preference"];
    assert!(p["value"].as_f64().unwrap() > 0.0);
    let (s, t) = (p["attaining"][0].as_u64().unwrap(), p["attaining"][1].as_u64().unwrap());
    assert!((1..=3).contains(&s) && (1..=3).contains(&t));
}

#[test]
fn robust_bounds_of_example_one() {
    let f = fixture("example1.csv");
    let out = weakrp(&["bounds", &f, "--x", "1,1,1", "--y", "2,2,2", "--set", "rpw"]);
    assert_eq!(out.status.code(), Some(0));
    assert_eq!(json(&out)["result"]["membership"]["member"], true);

    let out = weakrp(&["bounds", &f, "--x", "2,2,2", "--y", "1,1,1", "--set", "nrww"]);
    assert_eq!(json(&out)["result"]["membership"]["member"], false);

    let out = weakrp(&["bounds", &f, "--x", "1,1,1", "--y", "1,1,1", "--set", "rpw"]);
    assert_eq!(json(&out)["result"]["membership"]["member"], false);
}

#[test]
fn pattern_cap_leaves_the_query_undecided() {
    let f = fixture("example1.csv");
    let out = weakrp(&["bounds", &f, "--x", "1,1,1", "--y", "2,2,2", "--set", "rp", "--max-patterns", "8"]);
    assert_eq!(out.status.code(), Some(3));
    let v = json(&out);
    assert_eq!(v["result"]["decided"], false);
    assert_eq!(v["result"]["error"]["kind"], "pattern_explosion");
}

#[test]
fn grid_point_cloud() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("cloud.csv");
    let out = weakrp(&[
        "bounds",
        &fixture("law-of-demand-pair.csv"),
        "--x",
        "1,1",
        "--grid",
        "4",
        "--output",
        path.to_str().unwrap(),
    ]);
    assert_eq!(out.status.code(), Some(0), "{}", stderr(&out));
    let text = std::fs::read_to_string(path).unwrap();
    let mut lines = text.lines();
    assert_eq!(lines.next(), Some("y1,y2,rp,nrw,rpw,nrww"));
    let rows: Vec<Vec<&str>> = lines.map(|l| l.split(',').collect()).collect();
    assert_eq!(rows.len(), 16);
    for r in &rows {
        let flag = |i: usize| r[i] == "1";
        // RP ⊆ RP^W and NRW^W ⊆ NRW.
        assert!(!flag(2) || flag(4), "{r:?}");
        assert!(!flag(5) || flag(3), "{r:?}");
    }
    // The largest bundle dominates x and is revealed preferred to it.
    assert_eq!(rows.last().unwrap()[2..], ["1", "1", "1", "1"]);
}

#[test]
fn counterfactual_average_bundle() {
    let out = weakrp(&[
        "counterfactual",
        &fixture("example1.csv"),
        "--price",
        "1,2,3",
        "--bundle",
        "2,2,2",
    ]);
    assert_eq!(out.status.code(), Some(0), "{}", stderr(&out));
    let v = json(&out);
    assert_eq!(v["result"]["membership"]["member"], false);
    assert_eq!(v["result"]["membership"]["base_wgarp"], true);
    assert_eq!(v["result"]["binary_system"]["feasible"], false);

    let out = weakrp(&["counterfactual", &fixture("example1.csv"), "--price", "1,1,1", "--wealth", "6", "--box", "6"]);
    let v = json(&out);
    assert_eq!(v["result"]["box"]["empty"], true);
    assert_eq!(v["result"]["box"]["grid"]["outside"], 0);
}

#[test]
fn counterfactual_box_for_a_consistent_pair() {
    let out = weakrp(&["counterfactual", &fixture("law-of-demand-pair.csv"), "--price", "1,1", "--wealth", "3"]);
    assert_eq!(out.status.code(), Some(0));
    let b = &json(&out)["result"]["box"];
    assert_eq!(b["empty"], false);
    assert_eq!(b["grid"]["outside"], 0);
    assert!(b["grid"]["members"].as_u64().unwrap() > 0);
}

#[test]
fn quasilinear_operations() {
    let f = fixture("law-of-demand-pair.csv");
    let v = json(&weakrp(&["quasilinear", &f, "--op", "numbers"]));
    assert_eq!(v["result"]["verified"], true);
    let v = json(&weakrp(&["quasilinear", &f, "--op", "utility", "--z", "0,0"]));
    assert!(v["result"]["value"].is_number());
    let v = json(&weakrp(&["quasilinear", &f, "--op", "prefer", "--x", "2,1", "--y", "1,2"]));
    assert_eq!(v["result"]["r"][0][1], 0.0);
    assert!(v["result"]["preference"]["value"].is_number());
    let v = json(&weakrp(&["quasilinear", &f, "--op", "theoremd"]));
    assert_eq!(v["result"]["feasible"], true);

    let out = weakrp(&["quasilinear", &fixture("example1.csv"), "--op", "theoremd", "--strict-exit"]);
    assert_eq!(out.status.code(), Some(2));
    assert_eq!(json(&out)["result"]["feasible"], false);

    let out = weakrp(&["quasilinear", &f, "--op", "utility"]);
    assert_eq!(out.status.code(), Some(64));
}

#[test]
fn csv_only_where_tabular() {
    let out = weakrp(&["prefer", &fixture("example1.csv"), "--x", "2,2,2", "--y", "1,1,1", "--csv"]);
    assert_eq!(out.status.code(), Some(64));
    let out = weakrp(&["test", &fixture("example1.csv"), "--csv", "--axiom", "garp"]);
    let text = String::from_utf8(out.stdout).unwrap();
    assert_eq!(text, "axiom,holds,witness,slack\ngarp,false,1 2 3,8.999999999\n");
}

#[test]
fn selfcheck_single_criterion() {
    let out = Command::new(env!("CARGO_BIN_EXE_weakrp"))
        .args(["selfcheck", "--criterion", "1"])
        .env("WEAKRP_THREADS", "1")
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(0), "{}", stderr(&out));
    let v = json(&out);
    assert_eq!(v["result"]["criteria"][0]["passed"], true);
    assert!(stderr(&out).starts_with("PASS [1]"));

    let out = weakrp(&["selfcheck", "--criterion", "10"]);
    assert_eq!(out.status.code(), Some(64));
}

#[test]
fn bad_thread_count() {
    let out = Command::new(env!("CARGO_BIN_EXE_weakrp"))
        .args(["test", &fixture("example1.csv")])
        .env("WEAKRP_THREADS", "many")
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(64));
}
