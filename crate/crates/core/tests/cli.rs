use std::fs;
use std::process::Command;

use ccs_dpbb::equivalence::{check_dpbb, check_open_rooted, check_rooted};
use ccs_dpbb::{parse, VarName};

fn bin(args: &[&str]) -> (i32, String, String) {
    let out = Command::new(env!("CARGO_BIN_EXE_ccs-dpbb")).args(args).output().expect("binary runs");
    (
        out.status.code().expect("exit code"),
        String::from_utf8(out.stdout).unwrap(),
        String::from_utf8(out.stderr).unwrap(),
    )
}

#[test]
fn check_agrees_with_the_library() {
    let closed = [
        ("--dpbb", "0", "tau.0"),
        ("--rooted", "0", "tau.0"),
        ("--dpbb", "0 + a.0", "tau.0 + a.0"),
        ("--rooted", "0 + a.0", "tau.0 + a.0"),
        ("--dpbb", "rec X. X", "rec X. tau.X"),
        ("--rooted", "a.tau.b.0", "a.b.0"),
    ];
    for (flag, l, r) in closed {
        let (p, q) = (parse(l).unwrap(), parse(r).unwrap());
        let lib = if flag == "--dpbb" { check_dpbb(&p, &q) } else { check_rooted(&p, &q) }.unwrap();
        let (code, out, _) = bin(&["check", flag, l, r]);
        assert_eq!(code, if lib.result { 0 } else { 1 }, "{flag} {l} {r}");
        assert_eq!(out.lines().next().unwrap(), if lib.result { "equivalent" } else { "inequivalent" });
    }
    let lib = check_open_rooted(&parse("X").unwrap(), &parse("tau.X").unwrap(), &VarName::new("X")).unwrap();
    assert!(!lib.result);
    assert_eq!(bin(&["check", "--rooted", "--open", "X", "X", "tau.X"]).0, 1);
    assert_eq!(bin(&["check", "--dpbb", "--open", "X", "X", "tau.X"]).0, 0);
    assert_eq!(bin(&["check", "--branching", "rec X. X", "rec X. tau.X"]).0, 0);
}

#[test]
fn json_verdicts_are_stable() {
    let args = ["check", "--rooted", "--json", "0 + a.0", "tau.0 + a.0"];
    let (code, first, _) = bin(&args);
    assert_eq!(code, 1);
    assert_eq!(first, bin(&args).1);
    let json: serde_json::Value = serde_json::from_str(first.split_once('\n').unwrap().1).unwrap();
    assert_eq!(json["result"], false);
    assert_eq!(json["counterexample"]["condition"], "R1R2");
    // the side with the unmatched initial step comes first
    assert_eq!(json["counterexample"]["pair"][0], "tau.0 + a.0");
    assert_eq!(json["counterexample"]["pair"][1], "0 + a.0");
    assert_eq!(json["counterexample"]["path"][1], "tau");
    assert!(json["conditions"].is_array());
}

#[test]
fn usage_input_and_cap_errors() {
    assert_eq!(bin(&["check", "0", "0"]).0, 2);
    assert_eq!(bin(&["check", "--dpbb", "a.(", "0"]).0, 2);
    assert_eq!(bin(&["check", "--dpbb", "X", "0"]).0, 2);
    assert_eq!(bin(&["fmt", "@/nonexistent/file"]).0, 2);
    let out = Command::new(env!("CARGO_BIN_EXE_ccs-dpbb"))
        .args(["lts", "a.a.a.a.0"])
        .env(ccs_dpbb::STATE_CAP_ENV, "2")
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(3));
    assert!(String::from_utf8(out.stderr).unwrap().contains("cap"));
}

#[test]
fn fmt_lts_and_minimize() {
    assert_eq!(bin(&["fmt", "rec Q. a.Q + (b.0 + c.0)"]).1, "rec X. a.X + (b.0 + c.0)\n");
    let dir = tempfile::tempdir().unwrap();
    let src = dir.path().join("e.ccs");
    fs::write(&src, "tau.a.0 + a.0\n").unwrap();
    let arg = format!("@{}", src.display());
    let (code, out, _) = bin(&["lts", &arg]);
    assert_eq!(code, 0);
    assert!(out.starts_with("des (0, 3, 3)"), "{out}");

    let aut = dir.path().join("e.aut");
    let (code, out, _) = bin(&["lts", "rec X. tau.X + a.0", "--out", aut.to_str().unwrap()]);
    assert_eq!(code, 0);
    assert_eq!(out, "2 states, 2 transitions\n");
    let (l, root) = ccs_dpbb::Lts::from_aut(&fs::read_to_string(&aut).unwrap()).unwrap();
    assert_eq!((l.num_states(), root), (2, 0));

    let (code, out, _) = bin(&["minimize", "tau.tau.a.0 + tau.a.0"]);
    assert_eq!(code, 0);
    assert!(out.starts_with("des (0, 1, 2)"), "{out}");
    let (_, out, _) = bin(&["minimize", "--json", "rec X. tau.X"]);
    let json: serde_json::Value = serde_json::from_str(&out).unwrap();
    assert_eq!(json["blocks"][0]["divergent"], true);
}

#[test]
fn verify_relations_from_files() {
    let dir = tempfile::tempdir().unwrap();
    let rel = dir.path().join("r.json");
    fs::write(&rel, r#"[["0", "tau.0"], ["0", "0"], ["tau.0", "tau.0"]]"#).unwrap();
    let rel_arg = rel.to_str().unwrap();
    let (code, out, _) =
        bin(&["verify", "--relation", rel_arg, "--conditions", "T,D,Dprime,Dsecond", "--symmetric", "tau.0"]);
    assert_eq!(code, 0, "{out}");
    assert!(out.starts_with("holds"));
    let (code, out, _) = bin(&["verify", "--relation", rel_arg, "--conditions", "R1R2", "--symmetric", "tau.0"]);
    assert_eq!(code, 1);
    assert!(out.starts_with("violated"));

    fs::write(&rel, r#"[["rec X. X", "rec X. tau.X"]]"#).unwrap();
    let (code, out, _) = bin(&[
        "verify", "--relation", rel_arg, "--conditions", "Dsecond", "--symmetric", "rec X. X", "rec X. tau.X",
    ]);
    assert_eq!(code, 1);
    assert!(out.contains("Dsecond"));
    fs::write(&rel, r#"[["a.0", "a.0"]]"#).unwrap();
    assert_eq!(bin(&["verify", "--relation", rel_arg, "--conditions", "T", "0"]).0, 2);
}

#[test]
fn upto_pipeline() {
    let (code, out, _) = bin(&["upto", "a.X + b.0", "b.0 + a.X"]);
    assert_eq!(code, 0);
    assert!(out.starts_with("equivalent"));
    let json: serde_json::Value = serde_json::from_str(out.split_once('\n').unwrap().1).unwrap();
    assert_eq!(json["upto"]["result"], true);
    assert_eq!(json["direct"]["result"], true);
    assert!(!json["pairs"].as_array().unwrap().is_empty());
    let (code, out, _) = bin(&["upto", "tau.X", "X"]);
    assert_eq!(code, 1);
    assert!(out.starts_with("inequivalent"));
}

#[test]
fn fuzz_reports_are_deterministic() {
    for campaign in ["--congruence", "--coarsest"] {
        let args = ["fuzz", campaign, "--cases", "15", "--seed", "9"];
        let (code, first, _) = bin(&args);
        assert_eq!(code, 0, "{first}");
        assert_eq!(first, bin(&args).1);
        let report: serde_json::Value = serde_json::from_str(&first).unwrap();
        assert_eq!(report["violations"], 0);
        assert_eq!(report["cases"].as_array().unwrap().len(), 15);
    }
    let (_, out, _) = bin(&["fuzz", "--coarsest", "--cases", "3", "--timings"]);
    assert!(out.contains("micros"));
}
