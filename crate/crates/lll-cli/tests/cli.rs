use lll_sampler::Error;
use serde_json::Value;
use std::path::PathBuf;
use std::process::{Command, Output};

fn bin() -> Command {
    let mut c = Command::new(env!("CARGO_BIN_EXE_lll-sample"));
    c.env_remove("LLL_SAMPLER_SEED");
    c
}

fn fixture(name: &str) -> String {
    let p: PathBuf = [env!("CARGO_MANIFEST_DIR"), "..", "..", "instances", name].iter().collect();
    p.to_string_lossy().into_owned()
}

fn run(args: &[&str]) -> Output {
    bin().args(args).output().unwrap()
}

fn code(o: &Output) -> i32 {
    o.status.code().unwrap()
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

/// Eight clauses of width 150 over 600 variables, each variable in two.
fn wide_cnf() -> String {
    let mut s = String::from("p cnf 600 8\n");
    for i in 0..8 {
        let j = (i + 1) % 8;
        for v in (i * 75..(i + 1) * 75).chain(j * 75..(j + 1) * 75) {
            s.push_str(&format!("{} ", v + 1));
        }
        s.push_str("0\n");
    }
    s
}

#[test]
fn exit_codes_follow_error_kinds() {
    let cases = [
        (Error::InvalidInstance(String::new()), 2),
        (Error::Parse { line: 1, msg: String::new() }, 2),
        (Error::Unsatisfiable(String::new()), 3),
        (Error::Regime(String::new()), 3),
        (Error::ConditionsInfeasible { log_alpha: 0.0 }, 3),
        (Error::Budget(String::new()), 4),
        (Error::Contract(String::new()), 5),
        (Error::Invariant(String::new()), 5),
    ];
    for (e, c) in cases {
        assert_eq!(e.exit_code(), c, "{e}");
    }
}

#[test]
fn usage_errors_exit_1() {
    assert_eq!(code(&run(&[])), 1);
    assert_eq!(code(&run(&["sample", "--input", &fixture("cnf6.cnf"), "--num", "0"])), 1);
    assert_eq!(code(&run(&["sample", "--input", "instance.txt"])), 1);
    assert_eq!(code(&run(&["sample", "--input", &fixture("k4plus.hg")])), 1);
    assert_eq!(code(&run(&["sample", "--input", &fixture("mixed.json"), "--pipeline", "coloring"])), 1);
    assert_eq!(code(&run(&["tensorize", "--input", &fixture("cnf6.cnf"), "--force"])), 1);
    assert_eq!(code(&run(&["--help"])), 0);
}

#[test]
fn parse_errors_exit_2() {
    let dir = tempfile::tempdir().unwrap();
    let p = dir.path().join("bad.cnf");
    std::fs::write(&p, "p cnf 2 1\n1 5 0\n").unwrap();
    let o = run(&["sample", "--input", p.to_str().unwrap()]);
    assert_eq!(code(&o), 2);
    assert!(String::from_utf8_lossy(&o.stderr).contains("line 2"));
    let j = dir.path().join("bad.json");
    std::fs::write(&j, "{\"vars\": [{\"domain\": 2, \"colour\": 1}]}").unwrap();
    assert_eq!(code(&run(&["check", "--input", j.to_str().unwrap()])), 2);
}

#[test]
fn regime_and_budget_exit_codes() {
    let hg = fixture("k4plus.hg");
    let o = run(&["sample", "--input", &hg, "--colors", "4"]);
    assert_eq!(code(&o), 3);
    assert!(String::from_utf8_lossy(&o.stderr).contains("regime"));
    assert_eq!(code(&run(&["sample", "--input", &fixture("cnf6.cnf")])), 3);
    let o = run(&["sample", "--input", &fixture("weighted8.json"), "--pipeline", "binary", "--force", "--max-horizon", "1"]);
    assert_eq!(code(&o), 4);
}

#[test]
fn check_reports_an_in_regime_instance() {
    let dir = tempfile::tempdir().unwrap();
    let p = dir.path().join("wide.cnf");
    std::fs::write(&p, wide_cnf()).unwrap();
    let o = run(&["check", "--input", p.to_str().unwrap()]);
    assert_eq!(code(&o), 0);
    let v: Value = serde_json::from_str(&stdout(&o)).unwrap();
    assert_eq!(v["pipeline"], "binary");
    assert_eq!(v["in_regime"], true);
    assert_eq!(v["conditions_hold"], true);
    assert_eq!(v["measures"]["k"], 150);
    assert_eq!(v["measures"]["delta"], 3);
    let o = run(&["check", "--input", p.to_str().unwrap(), "--pipeline", "uniform"]);
    let v: Value = serde_json::from_str(&stdout(&o)).unwrap();
    assert_eq!(v["parameters"]["gamma"], 0.175);
    // An out-of-regime input still yields a verdict.
    let o = run(&["check", "--input", &fixture("cnf6.cnf")]);
    assert_eq!(code(&o), 0);
    let v: Value = serde_json::from_str(&stdout(&o)).unwrap();
    assert_eq!(v["in_regime"], false);
}

#[test]
fn sampling_is_deterministic() {
    let args = ["sample", "--input", &fixture("mixed.json"), "--force", "--num", "3", "--seed", "7"];
    let a = run(&args);
    assert_eq!(code(&a), 0);
    assert_eq!(a.stdout, run(&args).stdout);
    assert_eq!(stdout(&a).lines().count(), 3);
    let from_env = bin().args(&args[..6]).env("LLL_SAMPLER_SEED", "7").output().unwrap();
    assert_eq!(a.stdout, from_env.stdout);
    let other = run(&["sample", "--input", &fixture("mixed.json"), "--force", "--num", "3", "--seed", "8"]);
    assert_ne!(a.stdout, other.stdout);
}

#[test]
fn jobs_do_not_change_samples() {
    let base = ["sample", "--input", &fixture("uniform6.json"), "--pipeline", "uniform", "--force", "--num", "300"];
    let a = run(&[&base[..], &["--jobs", "1"]].concat());
    let b = run(&[&base[..], &["--jobs", "4"]].concat());
    assert_eq!(code(&a), 0);
    assert_eq!(a.stdout, b.stdout);
}

#[test]
fn named_output() {
    let o = run(&["sample", "--input", &fixture("mixed.json"), "--force", "--num", "50", "--named"]);
    assert_eq!(code(&o), 0);
    for line in stdout(&o).lines() {
        let v: Value = serde_json::from_str(line).unwrap();
        let u = v["u"].as_str().unwrap();
        let w = v["v"].as_str().unwrap();
        assert!(u == "b" || u == "c", "{line}");
        assert!(!(u == "c" && w == "B"), "{line}");
    }
    let o = run(&["sample", "--input", &fixture("cnf6.cnf"), "--force", "--num", "2", "--named"]);
    let v: Value = serde_json::from_str(stdout(&o).lines().next().unwrap()).unwrap();
    assert!(v["1"].is_boolean() && v["6"].is_boolean());
    let o = run(&["sample", "--input", &fixture("cnf6.cnf"), "--force", "--num", "2"]);
    let v: Value = serde_json::from_str(stdout(&o).lines().next().unwrap()).unwrap();
    assert_eq!(v.as_array().unwrap().len(), 6);
}

#[test]
fn output_file() {
    let dir = tempfile::tempdir().unwrap();
    let p = dir.path().join("out.jsonl");
    let o = run(&["sample", "--input", &fixture("cnf6.cnf"), "--force", "--num", "4", "--out", p.to_str().unwrap()]);
    assert_eq!(code(&o), 0);
    assert!(o.stdout.is_empty());
    assert_eq!(std::fs::read_to_string(&p).unwrap().lines().count(), 4);
}

#[test]
fn dimacs_warnings_go_to_stderr() {
    let dir = tempfile::tempdir().unwrap();
    let p = dir.path().join("t.cnf");
    std::fs::write(&p, "p cnf 3 2\n1 -1 2 0\n1 2 3 0\n").unwrap();
    let o = run(&["sample", "--input", p.to_str().unwrap(), "--force"]);
    assert_eq!(code(&o), 0);
    assert!(String::from_utf8_lossy(&o.stderr).contains("line 2: tautological clause dropped"));
}

#[test]
fn verify_the_reference_formula() {
    let o = run(&["verify", "--input", &fixture("cnf6.cnf"), "--force", "--num", "40000", "--trials", "200", "--seed", "1"]);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    let v: Value = serde_json::from_str(&stdout(&o)).unwrap();
    assert_eq!(v["pass"], true);
    assert_eq!(v["certification"]["support"], 40);
    assert_eq!(v["bounding_invariant"]["violations"], 0);
    assert!(v["certification"]["tv"].as_f64().unwrap() <= v["certification"]["tv_threshold"].as_f64().unwrap());
}

#[test]
fn tensorize_bench_and_selftest() {
    let o = run(&["tensorize", "--input", &fixture("mixed.json"), "--force"]);
    assert_eq!(code(&o), 0);
    let text = stdout(&o);
    assert!(text.starts_with("variable 0\nz0"));
    assert!(text.contains("variable 1\n"));
    let o = run(&["bench", "--input", &fixture("weighted8.json"), "--pipeline", "binary", "--force", "--multiples", "2,10", "--trials", "200"]);
    assert_eq!(code(&o), 0);
    let v: Value = serde_json::from_str(&stdout(&o)).unwrap();
    assert_eq!(v["n"], 8);
    assert_eq!(v["rows"][1]["horizon"], 80);
    assert_eq!(v["pass"], true);
    let o = run(&["selftest", "--rounds", "5"]);
    assert_eq!(code(&o), 0);
    let v: Value = serde_json::from_str(&stdout(&o)).unwrap();
    assert_eq!(v["pass"], true);
}
