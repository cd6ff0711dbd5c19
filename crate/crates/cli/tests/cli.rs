use std::path::PathBuf;
use std::process::{Command, Output};

use serde_json::Value;

fn erec(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_erec"))
        .args(args)
        .output()
        .expect("run erec")
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

fn json(args: &[&str]) -> (Value, i32) {
    let mut all = vec!["--json"];
    all.extend_from_slice(args);
    let o = erec(&all);
    let v: Value = serde_json::from_slice(&o.stdout)
        .unwrap_or_else(|e| panic!("{e}: {}{}", stdout(&o), String::from_utf8_lossy(&o.stderr)));
    (v, o.status.code().unwrap())
}

fn tmp(name: &str, content: &str) -> PathBuf {
    let dir = std::env::temp_dir().join(format!("erec-cli-{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    let p = dir.join(name);
    std::fs::write(&p, content).unwrap();
    p
}

#[test]
fn eval_examples() {
    let o = erec(&["eval", "<0,1,0,7>", "9", "--fuel", "10"]);
    assert_eq!(stdout(&o).trim(), "Converged 7");
    assert_eq!(o.status.code(), Some(0));

    let o = erec(&["eval", "<3,1,B2>", "0", "--fuel", "100"]);
    assert_eq!(stdout(&o).trim(), "Converged 3");

    let o = erec(&["eval", "<0,1,0,7>", "1", "2"]);
    assert!(stdout(&o).starts_with("Stuck ArgCount"), "{}", stdout(&o));
    assert_eq!(o.status.code(), Some(0));

    let o = erec(&["eval", "<3,1,B+>", "0", "--fuel", "30"]);
    assert!(stdout(&o).starts_with("Unknown"));
    assert_eq!(o.status.code(), Some(3));
}

#[test]
fn trace_lists_clauses() {
    let o = erec(&["eval", "<2,2>", "<0,1,0,7>", "9", "--trace"]);
    let out = stdout(&o);
    let lines: Vec<&str> = out.lines().collect();
    assert_eq!(lines[0], "Converged 7");
    assert!(lines[1].trim_start().starts_with("univ"), "{out}");
    assert!(lines[2].trim_start().starts_with("const"), "{out}");
}

#[test]
fn certificates_unlock_zero_answers() {
    let cert = tmp(
        "plus.toml",
        "code = \"B+\"\ncontext = [\"0\"]\ntail_from = 0\ntail_value = \"1\"\n",
    );
    let c = cert.to_str().unwrap();
    let o = erec(&["--cert", c, "eval", "<3,1,B+>", "0"]);
    assert_eq!(stdout(&o).trim(), "Converged 0");
    let o = erec(&["certify", c]);
    assert!(stdout(&o).starts_with("Yes"));

    let bad = tmp(
        "bad.toml",
        "code = \"B2\"\ncontext = [\"0\"]\ntail_from = 0\ntail_value = \"1\"\n",
    );
    let o = erec(&["certify", bad.to_str().unwrap()]);
    assert!(stdout(&o).starts_with("No rejected"), "{}", stdout(&o));
}

#[test]
fn universe_commands() {
    let o = erec(&["member", "2", "fin 3"]);
    assert!(stdout(&o).starts_with("Yes"));
    let o = erec(&["member", "6", "pl(fin 1, fin 3)"]);
    assert!(stdout(&o).starts_with("Yes"));
    let o = erec(&["member", "5", "pl(fin 1, fin 3)"]);
    assert!(stdout(&o).starts_with("No"));
    let o = erec(&["in-universe", "sigma(nat, <0,1,0,3>)"]);
    assert!(stdout(&o).starts_with("Yes"));
    let o = erec(&["in-universe", "7"]);
    assert!(stdout(&o).starts_with("No"));
    let o = erec(&["mkset", "{}", "{{}}"]);
    assert!(stdout(&o).starts_with("Yes"));
    let o = erec(&["eq", "{{},{{}}}", "{{{}},{},{}}"]);
    assert!(stdout(&o).starts_with("Yes equal"), "{}", stdout(&o));
    let o = erec(&["eq", "{}", "{{}}"]);
    assert!(stdout(&o).starts_with("No"));
}

#[test]
fn builders_satisfy_their_laws() {
    let (v, code) = json(&["smn", "<0,2,1,0>", "5", "9"]);
    assert_eq!(code, 0);
    assert_eq!(v["status"], "Agree");
    assert_eq!(v["result"]["built"]["Converged"], "5");
    // f(e, x) = x + 1
    let (v, _) = json(&["fix", "<0,2,2,1>", "3"]);
    assert_eq!(v["status"], "Agree");
    assert_eq!(v["result"]["built"]["Converged"], "4");
}

#[test]
fn realize_and_search() {
    let o = erec(&["realize", "(= (hf {}) (hf {}))", "(0,0)"]);
    assert!(stdout(&o).starts_with("Yes"));
    let o = erec(&[
        "realize",
        "(not (in x (hf {})))",
        "0",
        "--let",
        "x=(vnat 1)",
    ]);
    assert!(stdout(&o).starts_with("Yes"));
    let o = erec(&["realize", "(not (in x {}))", "0"]);
    assert_eq!(o.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&o.stderr).contains("unbound variable x"));

    let f = tmp("member.sexp", "; {} is in {{}}\n(in (hf {}) (hf {{}}))\n");
    let (v, _) = json(&["search", f.to_str().unwrap()]);
    assert_eq!(v["status"], "Yes");
    assert_eq!(v["result"]["realizer"], "2");
    let o = erec(&["search", "(in {} {})", "--bound", "32"]);
    assert!(
        stdout(&o).starts_with("No no realizer exists"),
        "{}",
        stdout(&o)
    );
}

#[test]
fn lpo_demo() {
    let o = erec(&[
        "lpo-demo",
        "--pred",
        "n==3",
        "--P",
        "(in x B)",
        "--R",
        "(not (in x B))",
    ]);
    let out = stdout(&o);
    assert!(out.starts_with("Yes exists-branch, witness 3"), "{out}");
    assert!(out.contains("; correct"));

    let o = erec(&["lpo-demo", "--pred", "never"]);
    assert!(stdout(&o).starts_with("Unknown forall-branch"));
    assert_eq!(o.status.code(), Some(3));

    let o = erec(&["lpo-demo", "--pred", "n==3", "--literal-sg"]);
    let out = stdout(&o);
    assert!(out.starts_with("No forall-branch"), "{out}");
    assert!(out.contains("incorrect"));

    let o = erec(&["lpo-demo", "--pred", "n==3", "--P", "(in x B)"]);
    assert_eq!(o.status.code(), Some(1));
}

#[test]
fn oracle_compare_agrees() {
    let o = erec(&["oracle-compare", "--bound", "200", "--depth", "6"]);
    let out = stdout(&o);
    assert!(out.starts_with("Agree agree, 0 mismatches"), "{out}");
    assert_eq!(o.status.code(), Some(0));
    let (v, _) = json(&["oracle-compare", "--bound", "40", "--depth", "2", "--trace"]);
    let trace = v["trace"].as_array().unwrap();
    assert!(trace[0].as_str().unwrap().starts_with("comp stage 1: +"));
}

#[test]
fn replay_reproduces_reports() {
    for args in [
        vec!["--json", "eval", "<3,1,B2>", "0", "--trace"],
        vec!["--json", "member", "3", "nat"],
        vec!["--json", "lpo-demo", "--pred", "n in {2,5}"],
    ] {
        let o = erec(&args);
        let path = tmp("report.json", &stdout(&o));
        let r = erec(&["replay", path.to_str().unwrap()]);
        assert!(stdout(&r).starts_with("Agree reproduced"), "{}", stdout(&r));
        assert_eq!(r.status.code(), Some(0));
    }
    // a tampered report no longer matches
    let o = erec(&["--json", "eval", "<0,1,0,7>", "9"]);
    let tampered = stdout(&o).replace("\"7\"", "\"8\"");
    let path = tmp("tampered.json", &tampered);
    let r = erec(&["replay", path.to_str().unwrap()]);
    assert_eq!(r.status.code(), Some(4));
}

#[test]
fn bad_input_is_an_error() {
    for args in [
        vec!["eval", "<1,2", "0"],
        vec!["member", "1", "pl(fin 1)"],
        vec!["lpo-demo", "--pred", "sometimes"],
        vec!["realize", "(all x)", "0"],
    ] {
        let o = erec(&args);
        assert_eq!(o.status.code(), Some(1), "{args:?}");
    }
}
