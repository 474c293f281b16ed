use std::process::{Command, Output};

use serde_json::Value;

fn zerosum(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_zerosum")).args(args).output().expect("binary runs")
}

fn report(args: &[&str]) -> (Value, i32) {
    let mut full = vec!["--json", "--no-timestamp"];
    full.extend_from_slice(args);
    let out = zerosum(&full);
    let v: Value = serde_json::from_slice(&out.stdout).expect("json report on stdout");
    (v, out.status.code().unwrap())
}

#[test]
fn group_info() {
    let (v, code) = report(&["group", "info", "C2xC3"]);
    assert_eq!(code, 0);
    assert_eq!(v["group"], "C6");
    assert_eq!(v["result"]["order"], 6);
    assert_eq!(v["result"]["d_star"], 5);
    let (v, _) = report(&["group", "info", "C1"]);
    assert_eq!(v["result"]["trivial"], true);
    assert_eq!(v["result"]["order"], 1);
    let (v, code) = report(&["group", "info", "C0"]);
    assert_eq!(code, 2);
    assert_eq!(v["status"], "error");
}

#[test]
fn counts() {
    let (v, _) = report(&["count", "C3", "1^2 2"]);
    assert_eq!(v["result"]["counts"], serde_json::json!({"0": "3", "1": "3", "2": "2"}));
    let (v, _) = report(&["count", "C3", "empty"]);
    assert_eq!(v["result"]["counts"]["0"], "1");
    assert_eq!(v["result"]["total"], "1");
    let (v, _) = report(&["count", "C2", "1^4", "--g", "1"]);
    assert_eq!(v["result"]["count"], "8");
    let (_, code) = report(&["count", "C3", "1^2 5"]);
    assert_eq!(code, 0, "residues are reduced");
    let (v, code) = report(&["count", "C3", "(1,0)"]);
    assert_eq!((code, v["status"].as_str()), (2, Some("error")));
}

#[test]
fn davenport() {
    let (v, _) = report(&["davenport", "C3x C3", "--method", "both"]);
    assert_eq!(v["result"]["value"], 5);
    assert_eq!(v["result"]["methods_agree"], true);
    let (v, _) = report(&["davenport", "C6", "--method", "formula"]);
    assert_eq!(v["result"]["value"], 6);
    let (v, code) = report(&["davenport", "C2xC2xC2xC2xC2xC2", "--method", "exact"]);
    assert_eq!((code, v["status"].as_str()), (2, Some("error")));
    assert_eq!(v["provenance"]["caps"]["davenport_cap"], 36);
}

#[test]
fn verify() {
    let (v, code) = report(&["verify", "cn", "--n", "4", "--max-len", "8"]);
    assert_eq!((code, v["status"].as_str()), (0, Some("pass")));
    assert_eq!(v["result"]["metrics"]["extremals"], 4);
    let (v, _) = report(&["verify", "odd-structure", "C3xC3", "--max-len", "7"]);
    assert_eq!(v["status"], "pass");
    let (v, _) = report(&["verify", "equivalences", "C2xC4", "--max-len", "8"]);
    assert_eq!(v["result"]["cond_iii"], false);
    assert_eq!(v["result"]["unbounded_family"].as_array().unwrap().len(), 10);
    let (v, _) = report(&["verify", "transform", "C2xC2", "--trials", "50", "--seed", "9"]);
    assert_eq!(v["status"], "pass");
    assert_eq!(v["provenance"]["seed"], 9);
    for id in ["lower-bound", "one-and-all", "es-chain", "subgroup-es", "corollary"] {
        let (v, _) = report(&["verify", id, "C3"]);
        assert_eq!(v["status"], "pass", "{id}");
    }
}

#[test]
fn budget_gives_partial() {
    let (v, code) = report(&["verify", "lower-bound", "C3xC3", "--max-len", "8", "--budget", "40"]);
    assert_eq!((code, v["status"].as_str()), (0, Some("partial")));
    let (v, _) = report(&["extremal", "C3xC3", "--max-len", "7", "--budget", "10"]);
    assert_eq!(v["status"], "partial");
}

#[test]
fn conjectures() {
    let (v, _) = report(&["conjecture", "1", "C3xC3", "--max-len", "7"]);
    assert_eq!(v["result"]["verdict"]["kind"], "no_counterexample");
    assert_eq!(v["result"]["verdict"]["cap"], 7);
    let (v, _) = report(&["conjecture", "2", "C5", "--max-len", "7"]);
    assert_eq!(v["result"]["max_length"], 5);
    assert_eq!(v["result"]["bound_attained"], true);
    assert_eq!(v["result"]["product_witness"], "1^5");
    let (v, code) = report(&["conjecture", "1", "C2xC2"]);
    assert_eq!(code, 0);
    assert_eq!(v["result"]["qualifying"], false);
}

#[test]
fn construct_and_extremal() {
    let (v, _) = report(&["construct", "extremal", "C5", "--g", "2", "--m", "6"]);
    assert_eq!(v["result"]["sequence"], "0^2 1^2 4^2");
    let (v, _) = report(&["construct", "family", "C2xC2", "--h", "(1,1)", "--k", "3"]);
    assert_eq!(v["result"]["sequence"], "(0,1) (1,0) (1,1)^3");
    let (v, code) = report(&["construct", "family", "C4", "--h", "2", "--k", "3"]);
    assert_eq!((code, v["status"].as_str()), (2, Some("error")));
    let (v, _) = report(&["extremal", "C3", "--max-len", "5"]);
    assert_eq!(v["result"]["count"], 4);
    let (a, _) = report(&["extremal", "C2xC2", "--max-len", "8", "--trials", "500", "--seed", "4"]);
    let (b, _) = report(&["extremal", "C2xC2", "--max-len", "8", "--trials", "500", "--seed", "4"]);
    assert_eq!(a, b);
}

#[test]
fn reports_are_reproducible_and_tables_are_default() {
    let a = zerosum(&["--json", "--no-timestamp", "conjecture", "2", "C3xC3", "--max-len", "7"]);
    let b = zerosum(&["--json", "--no-timestamp", "conjecture", "2", "C3xC3", "--max-len", "7"]);
    assert_eq!(a.stdout, b.stdout);
    let t = zerosum(&["count", "C3", "1^2 2"]);
    let text = String::from_utf8(t.stdout).unwrap();
    assert!(text.lines().any(|l| l.starts_with("status") && l.ends_with("pass")));
    let stamped = zerosum(&["--json", "group", "info", "C2"]);
    let v: Value = serde_json::from_slice(&stamped.stdout).unwrap();
    assert!(v["provenance"]["timestamp"].is_u64());
}
