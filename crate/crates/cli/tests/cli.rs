use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use tempfile::TempDir;

use iic_core::certify::{check_certificate, replay_trace};
use iic_core::mist::{parse_certificate, parse_spec, parse_trace};

const NET_A: &str = "\
vars
  x y
rules
  x >= 1 -> x' = x - 1, y' = y + 1;
init
  x = 1, y = 0
target
  y >= 2
";

fn iic(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_iic"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn write_spec(dir: &TempDir, name: &str, text: &str) -> String {
    let p = dir.path().join(name);
    fs::write(&p, text).unwrap();
    p.to_str().unwrap().to_string()
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

fn stderr(o: &Output) -> String {
    String::from_utf8_lossy(&o.stderr).into_owned()
}

fn path_str(p: &Path) -> &str {
    p.to_str().unwrap()
}

#[test]
fn safe_net_writes_a_valid_certificate() {
    let dir = TempDir::new().unwrap();
    let spec = write_spec(&dir, "a.spec", NET_A);
    let cert = dir.path().join("a.cert");
    let o = iic(&["check", &spec, "--method", "iic", "--cert", path_str(&cert)]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    assert_eq!(stdout(&o), "safe\n");

    let parsed = parse_spec(NET_A).unwrap();
    let text = fs::read_to_string(&cert).unwrap();
    assert_eq!(text, "safe\n! (y >= 2)\n! (x >= 1 & y >= 1)\n! (x >= 2)\n");
    let basis = parse_certificate(&text, parsed.net.places()).unwrap();
    check_certificate(&parsed.net, &parsed.target, &basis).unwrap();
}

#[test]
fn unsafe_net_with_both_engines() {
    let dir = TempDir::new().unwrap();
    let spec = write_spec(&dir, "b.spec", &NET_A.replace("y >= 2", "y >= 1"));
    let trace = dir.path().join("b.trace");
    let o = iic(&[
        "check",
        &spec,
        "--method",
        "both",
        "--trace",
        path_str(&trace),
    ]);
    assert_eq!(o.status.code(), Some(1), "{}", stderr(&o));
    assert_eq!(stdout(&o), "unsafe\n");

    let text = fs::read_to_string(&trace).unwrap();
    assert_eq!(
        text,
        "unsafe\n(x=1,y=0)\nfire 0 -> (x=0,y=1)\ncovers y >= 1\n"
    );
    let parsed = parse_spec(&NET_A.replace("y >= 2", "y >= 1")).unwrap();
    let tr = parse_trace(&text, parsed.net.places()).unwrap();
    assert_eq!(tr.len(), 1);
    replay_trace(&parsed.net, &parsed.target, &tr).unwrap();
}

#[test]
fn backward_method_and_stats() {
    let dir = TempDir::new().unwrap();
    let spec = write_spec(&dir, "a.spec", NET_A);
    let o = iic(&["check", &spec, "--method", "backward", "--stats"]);
    assert_eq!(o.status.code(), Some(0));
    let out = stdout(&o);
    assert!(out.starts_with("safe\n"));
    assert!(out.contains("backward basis 3\n"), "{out}");

    let o = iic(&["check", &spec, "--stats", "--no-verify"]);
    assert!(stdout(&o).contains("iic blockers "));
}

#[test]
fn verbose_logs_rule_applications() {
    let dir = TempDir::new().unwrap();
    let spec = write_spec(&dir, "a.spec", NET_A);
    let o = iic(&["check", &spec, "-v"]);
    assert_eq!(o.status.code(), Some(0));
    let log = stderr(&o);
    let rules: Vec<&str> = log.lines().map(|l| l.split(' ').next().unwrap()).collect();
    assert_eq!(rules.first(), Some(&"initialize"));
    assert_eq!(rules.last(), Some(&"valid"));
    assert!(log.contains("conflict (0,2) @1 frames=[1|0]"), "{log}");
}

#[test]
fn missing_file_is_a_usage_error() {
    let o = iic(&["check", "/nonexistent/net.spec"]);
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("cannot read"));
}

#[test]
fn parse_errors_carry_positions() {
    let dir = TempDir::new().unwrap();
    let spec = write_spec(
        &dir,
        "bad.spec",
        "vars x\nrules\n  z >= 1 -> x' = x + 1;\ninit x = 0\ntarget x >= 1\n",
    );
    let o = iic(&["check", &spec]);
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("bad.spec:3:3:"), "{}", stderr(&o));
}

#[test]
fn unknown_flag_is_a_usage_error() {
    assert_eq!(iic(&["check", "--frobnicate"]).status.code(), Some(2));
}

#[test]
fn exhausted_budget_is_a_resource_limit() {
    let dir = TempDir::new().unwrap();
    let spec = write_spec(&dir, "a.spec", NET_A);
    let o = iic(&["check", &spec, "--budget", "3"]);
    assert_eq!(o.status.code(), Some(3));
    assert!(stderr(&o).contains("budget"));
}

#[test]
fn fuzz_default_corpus_agrees() {
    let o = iic(&["fuzz", "--seed", "42", "--count", "500", "--enum-oracle"]);
    assert_eq!(o.status.code(), Some(0), "{}", stdout(&o));
    assert!(stdout(&o).contains("500 instances from seed 42"));
    assert!(stdout(&o).ends_with("0 failures\n"));
}

#[test]
fn fuzz_count_zero_is_a_no_op() {
    let o = iic(&["fuzz", "--count", "0"]);
    assert_eq!(o.status.code(), Some(0));
    assert!(stdout(&o).contains("0 instances"));
}

#[test]
fn fuzz_is_reproducible() {
    let args = ["fuzz", "--count", "60", "--seed", "7", "--jobs", "3"];
    assert_eq!(stdout(&iic(&args)), stdout(&iic(&args)));
}

#[test]
fn injected_fault_yields_reproducer() {
    let o = iic(&["fuzz", "--count", "50", "--inject-fault", "over-block"]);
    assert_eq!(o.status.code(), Some(4));
    let out = stdout(&o);
    assert!(out.contains("FAIL seed="));
    let spec = out
        .split_once("minimized):\n")
        .map(|(_, rest)| rest.split("\nfuzz:").next().unwrap())
        .expect("reproducer printed");
    parse_spec(spec).expect("reproducer is a valid spec");
}
