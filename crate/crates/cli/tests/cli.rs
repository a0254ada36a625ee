//! Exit codes, report shape and determinism of the command line.

use std::path::PathBuf;
use std::process::Command;

use serde_json::Value;
use viewcheck::{run, EXAMPLES};

fn fixture(name: &str) -> String {
    PathBuf::from(env!("CARGO_MANIFEST_DIR"))
        .join("../../fixtures")
        .join(format!("{name}.bk"))
        .to_string_lossy()
        .into_owned()
}

fn json(args: &[&str]) -> (i32, Value) {
    let mut argv: Vec<&str> = args.to_vec();
    argv.push("--json");
    let (code, out) = run(argv);
    (code, serde_json::from_str(&out).unwrap_or_else(|e| panic!("{e}: {out}")))
}

fn strip_ms(mut v: Value) -> Value {
    if let Some(rs) = v["results"].as_array_mut() {
        for r in rs {
            r.as_object_mut().unwrap().remove("ms");
        }
    }
    v
}

fn tmp(name: &str, body: &str) -> String {
    let dir = std::env::temp_dir().join(format!("viewcheck-cli-{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    let p = dir.join(name);
    std::fs::write(&p, body).unwrap();
    p.to_string_lossy().into_owned()
}

#[test]
fn example_ex_v1_localise_is_equal() {
    let (code, r) = json(&["example", "ex-v1-localise"]);
    assert_eq!(code, 0);
    assert_eq!(r["version"], "1");
    assert_eq!(r["command"], "example");
    assert_eq!(r["exit"], 0);
    let loc = r["results"].as_array().unwrap().iter().find(|q| q["query"].as_str().unwrap().starts_with("localise")).unwrap();
    assert_eq!(loc["verdict"], "holds");
    assert_eq!(loc["detail"], "equal");
    assert!(loc["witness"].is_null());
    assert!(loc["ms"].is_number());
}

#[test]
fn lemma_first_counterexample_exits_one() {
    let (code, r) = json(&["lemma335", "--max-sys", "1", "--max-vu", "2", "--first"]);
    assert_eq!(code, 1);
    let q = &r["results"][0];
    assert_eq!(q["verdict"], "fails");
    assert_eq!(q["counterexamples"][0]["view"], "{(0, 0)}");
    let keys: Vec<&String> = q["witness"].as_object().unwrap().keys().collect();
    assert_eq!(keys, ["ok", "ok'", "vu:a", "vu:a'"]);
}

#[test]
fn lemma_on_surjective_views_holds() {
    let (code, r) = json(&["lemma335", "--max-sys", "2", "--max-vu", "2", "--views", "surjective"]);
    assert_eq!(code, 0, "{r}");
    assert_eq!(r["results"][0]["detail"], "no counterexample");
}

#[test]
fn lemma_guard_exits_three() {
    let (code, r) = json(&["lemma335", "--max-sys", "5", "--max-vu", "5", "--views", "all"]);
    assert_eq!(code, 3);
    assert_eq!(r["error"]["kind"], "guard");
}

#[test]
fn missing_file_exits_two() {
    let (code, out) = run(["check", "missing.bk"]);
    assert_eq!(code, 2);
    assert!(out.contains("missing.bk"));
}

#[test]
fn unknown_example_lists_names() {
    let (code, out) = run(["example", "nope"]);
    assert_eq!(code, 2);
    for (n, _) in EXAMPLES {
        assert!(out.contains(n), "{out}");
    }
    let (code, out) = run(["example"]);
    assert_eq!(code, 0);
    assert_eq!(out.lines().count(), 8);
}

#[test]
fn syntax_error_is_positioned() {
    let f = tmp("bad.bk", "domain D = 0..3\nview V = vu:a ==");
    let (code, r) = json(&["check", &f]);
    assert_eq!(code, 2);
    assert_eq!(r["error"]["kind"], "syntax");
    assert_eq!(r["error"]["line"], 2);
    let (_, text) = run(["check", &f]);
    assert!(text.starts_with("syntax error: 2:"), "{text}");
}

#[test]
fn max_states_guard_exits_three() {
    let (code, r) = json(&["check", &fixture("ex-v1-localise"), "--max-states", "100"]);
    assert_eq!(code, 3);
    assert_eq!(r["error"]["kind"], "guard");
}

#[test]
fn operator_subcommands() {
    let ex = fixture("ex-v2-localise");
    let (code, r) = json(&["localise", &ex, "V2", "ExSys", "--expect", "delta(vu:c2 >= 5 && vu:c2 <= 10)"]);
    assert_eq!((code, r["results"][0]["detail"].as_str()), (0, Some("equal")));
    let (code, r) = json(&["localise", &ex, "V2", "ExSys", "--expect", "delta(vu:c2 >= 5)"]);
    assert_eq!(code, 1);
    assert_eq!(r["results"][0]["detail"], "not equal");
    assert!(r["results"][0]["witness"].is_object());
    let (code, r) = json(&["globalise", &ex, "V2", "ExSys"]);
    assert_eq!(code, 0);
    assert_eq!(r["results"].as_array().unwrap().len(), 1);
    let (code, _) = json(&["healthy", &ex, "V2"]);
    assert_eq!(code, 0);

    let g = fixture("guess-infer");
    let (code, r) = json(&[
        "infer", &g, "Guess0", "Alice", "--obs", "vu:g_A == 7 && vu:r_A' < 0",
        "--expect", "sys:n >= 8 && sys:g == 7 && sys:r' < 0",
    ]);
    assert_eq!(code, 0, "{r}");

    let a = fixture("auth-paradox");
    let (code, r) = json(&["leak", &a, "Impl1", "Attacker", "Member", "Failures"]);
    assert_eq!(code, 1);
    assert_eq!(r["results"][0]["verdict"], "leaks");
    assert!(!r["results"][0]["entries"].as_array().unwrap().is_empty());
    let (code, r) = json(&["leak", &a, "Impl2", "Attacker", "Member", "Failures"]);
    assert_eq!((code, &r["results"][0]["verdict"]), (0, &Value::from("clean")));
    assert_eq!(r["results"][0]["entries"], Value::Array(vec![]));
    let (code, _) = json(&["refines", &a, "Impl1", "AuthSpec"]);
    assert_eq!(code, 0);
    let (code, r) = json(&["refines", &a, "AuthSpec", "Impl1"]);
    assert_eq!(code, 1);
    assert!(r["results"][0]["witness"].is_object());
    let (code, r) = json(&["refines", &a, "Impl1", "Nope"]);
    assert_eq!(code, 2);
    assert!(r["error"]["message"].as_str().unwrap().contains("Nope"));
}

#[test]
fn exit_zero_iff_all_positive() {
    for (name, _) in EXAMPLES {
        let (code, r) = json(&["example", name]);
        let all = r["results"].as_array().unwrap().iter().all(|q| q["verdict"] == "holds" || q["verdict"] == "clean");
        assert_eq!(code == 0, all, "{name}");
        assert_eq!(r["exit"], code);
    }
}

#[test]
fn json_is_deterministic() {
    for args in [
        vec!["example", "auth-paradox"],
        vec!["example", "guess-infer"],
        vec!["lemma335", "--max-sys", "2", "--max-vu", "2"],
    ] {
        let (_, a) = json(&args);
        let (_, b) = json(&args);
        let (a, b) = (strip_ms(a), strip_ms(b));
        assert_eq!(serde_json::to_string(&a).unwrap(), serde_json::to_string(&b).unwrap());
    }
}

#[test]
fn laws_subcommand() {
    let (code, r) = json(&["laws", "--instances", "50", "--seed", "3"]);
    assert_eq!(code, 0);
    assert_eq!(r["results"].as_array().unwrap().len(), 12);
}

#[test]
fn usage_errors_exit_two_and_help_zero() {
    assert_eq!(run(["frobnicate"]).0, 2);
    assert_eq!(run(["lemma335", "--max-sys", "x", "--max-vu", "1"]).0, 2);
    let (code, out) = run(["--help"]);
    assert_eq!(code, 0);
    assert!(out.contains("lemma335"));
}

#[test]
fn binary_plain_output_without_color() {
    let out = Command::new(env!("CARGO_BIN_EXE_viewcheck"))
        .args(["example", "ex-v2-localise"])
        .env("NO_COLOR", "1")
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(0));
    let s = String::from_utf8(out.stdout).unwrap();
    assert!(s.contains("[holds] localise V2 ExSys"));
    assert!(!s.contains('\x1b'));
}
