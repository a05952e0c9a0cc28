use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use tempfile::TempDir;

fn sparrow(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_sparrow")).args(args).output().expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

fn write(dir: &TempDir, name: &str, text: &str) -> String {
    let p = dir.path().join(name);
    fs::write(&p, text).unwrap();
    p.to_str().unwrap().to_string()
}

fn path(dir: &TempDir, name: &str) -> String {
    dir.path().join(name).to_str().unwrap().to_string()
}

const SAT: &str = "p cnf 3 3\n1 2 3 0\n-1 2 0\n-2 3 0\n";
const UNSAT: &str = "p cnf 1 2\n1 0\n-1 0\n";

#[test]
fn transform_writes_clustered_formula_and_map() {
    let dir = TempDir::new().unwrap();
    let input = write(&dir, "in.cnf", SAT);
    let out = path(&dir, "out.cnf");
    let o = sparrow(&["transform", &input, "-o", &out]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let text = fs::read_to_string(&out).unwrap();
    // 7 literal occurrences, cycles over x1 (2), x2 (3), x3 (2)
    assert!(text.lines().any(|l| l.trim() == "p cnf 7 10"), "{text}");
    assert!(Path::new(&format!("{out}.map")).exists());
}

#[test]
fn fliptable_prints_builtin_pattern() {
    let o = sparrow(&["fliptable", "prop3"]);
    assert!(o.status.success());
    let s = stdout(&o);
    assert!(s.contains("make") && s.contains("break"));
    // one header line plus a row per assignment of three variables
    assert!(s.lines().filter(|l| l.trim_start().starts_with(char::is_numeric)).count() >= 8);
}

#[test]
fn solve_exit_codes_and_trace() {
    let dir = TempDir::new().unwrap();
    let sat = write(&dir, "sat.cnf", SAT);
    let trace = path(&dir, "trace.csv");
    let o = sparrow(&["solve", &sat, "--seed", "3", "--trace", &trace]);
    assert_eq!(o.status.code(), Some(10));
    let s = stdout(&o);
    assert!(s.contains("s SATISFIABLE"));
    assert!(s.lines().any(|l| l.starts_with("v ") && l.trim_end().ends_with(" 0")));
    let t = fs::read_to_string(&trace).unwrap();
    assert_eq!(t.lines().next().unwrap(), "step,satisfied_count,flipped_var,class");

    let unsat = write(&dir, "unsat.cnf", UNSAT);
    let o = sparrow(&["solve", &unsat, "--budget-mult", "2"]);
    assert_eq!(o.status.code(), Some(20));
    assert!(stdout(&o).contains("s UNKNOWN"));

    let o = sparrow(&["solve", &unsat, "--algo", "schoening", "--restarts", "3"]);
    assert_eq!(o.status.code(), Some(20));
}

#[test]
fn analyze_emits_report_fields() {
    let dir = TempDir::new().unwrap();
    let input = write(&dir, "in.cnf", "p cnf 3 4\n1 2 3 0\n-1 2 0\n-2 -3 0\n1 -3 0\n");
    let o = sparrow(&["analyze", &input, "--epsilon", "0.01"]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let v: serde_json::Value = serde_json::from_str(&stdout(&o)).unwrap();
    for key in ["num_states", "model_mass", "W_plus", "W_minus", "a", "b", "w2state", "Z", "sigma_sq", "f1", "f2",
        "E_per_step", "eq6_holds", "bound_checks"]
    {
        assert!(v.get(key).is_some(), "missing {key}");
    }
    assert_eq!(v["num_states"], 8);
}

#[test]
fn gen_is_deterministic() {
    let a = sparrow(&["gen", "-n", "10", "-c", "30", "--planted", "--seed", "5"]);
    let b = sparrow(&["gen", "-n", "10", "-c", "30", "--planted", "--seed", "5"]);
    assert!(a.status.success());
    assert_eq!(a.stdout, b.stdout);
    assert!(stdout(&a).lines().any(|l| l.trim() == "p cnf 10 30"));
    let t = sparrow(&["gen", "-c", "4", "--two-occurrence"]);
    assert!(stdout(&t).lines().any(|l| l.trim() == "p cnf 6 4"));
}

#[test]
fn bench_csv_has_schema_and_header_and_reruns_identically() {
    let dir = TempDir::new().unwrap();
    let run = |name: &str| {
        let out = path(&dir, name);
        let o = sparrow(&["bench", "success-rate", "--sizes", "5:10,6:15", "--trials", "8", "--seed", "2", "--out",
            &out]);
        assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
        fs::read(&out).unwrap()
    };
    let first = run("a.csv");
    assert_eq!(first, run("b.csv"));
    let text = String::from_utf8(first).unwrap();
    let mut lines = text.lines();
    assert!(lines.next().unwrap().starts_with("# schema:"));
    assert_eq!(
        lines.next().unwrap(),
        "m,n_star,trials,successes,success_rate,wilson_low,wilson_high,median_steps,budget"
    );
    assert_eq!(lines.count(), 2);

    let o = sparrow(&["bench", "prop3", "--m", "8,16", "--trials", "4", "--json"]);
    assert!(o.status.success());
    let v: serde_json::Value = serde_json::from_str(&stdout(&o)).unwrap();
    assert_eq!(v["total_negative_flips"], 0);
}

#[test]
fn bad_input_reports_error() {
    let o = sparrow(&["solve", "/nonexistent/file.cnf"]);
    assert!(!o.status.success());
    assert!(String::from_utf8_lossy(&o.stderr).starts_with("error:"));
}
