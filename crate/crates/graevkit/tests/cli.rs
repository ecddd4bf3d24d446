//! End-to-end checks of the command-line interface: exit codes, output
//! shapes, determinism, and the certificate round trip.

use std::path::{Path, PathBuf};
use std::process::{Command, Output};

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_graevkit"))
}

fn write(dir: &Path, name: &str, contents: &str) -> PathBuf {
    let path = dir.join(name);
    std::fs::write(&path, contents).expect("write fixture");
    path
}

fn stdout_of(output: &Output) -> String {
    String::from_utf8(output.stdout.clone()).expect("stdout is utf-8")
}

const SPACE_3_2: &str = r#"{"points":["*","a","b"],"basepoint":"*","dist":[["0","1","1"],["1","0","3/2"],["1","3/2","0"]]}"#;
const SPACE_BROKEN: &str = r#"{"points":["*","a","b"],"basepoint":"*","dist":[["0","1","1"],["1","0","5/2"],["1","5/2","0"]]}"#;

#[test]
fn norm_of_the_example_chain() {
    let dir = tempfile::tempdir().unwrap();
    let space = write(dir.path(), "s.json", SPACE_3_2);
    let chain = write(dir.path(), "c.json", r#"{"a":"2","b":"-1"}"#);
    let output = bin()
        .args(["norm", "--space"])
        .arg(&space)
        .arg("--chain")
        .arg(&chain)
        .output()
        .unwrap();
    assert!(output.status.success(), "{output:?}");
    assert_eq!(stdout_of(&output), "{\"norm\":\"5/2\"}\n");
}

#[test]
fn validate_reports_violations_with_exit_1() {
    let dir = tempfile::tempdir().unwrap();
    let good = write(dir.path(), "good.json", SPACE_3_2);
    let bad = write(dir.path(), "bad.json", SPACE_BROKEN);

    let output = bin().args(["validate", "--space"]).arg(&good).output().unwrap();
    assert_eq!(output.status.code(), Some(0));
    assert_eq!(stdout_of(&output), "{\"ok\":true,\"violations\":[]}\n");

    let output = bin().args(["validate", "--space"]).arg(&bad).output().unwrap();
    assert_eq!(output.status.code(), Some(1));
    let body = stdout_of(&output);
    assert!(body.contains("\"ok\":false"));
    assert!(body.contains("triangle"), "{body}");
}

#[test]
fn computing_on_an_invalid_metric_is_a_domain_error() {
    let dir = tempfile::tempdir().unwrap();
    let bad = write(dir.path(), "bad.json", SPACE_BROKEN);
    let chain = write(dir.path(), "c.json", r#"{"a":"1"}"#);
    let output = bin()
        .args(["norm", "--space"])
        .arg(&bad)
        .arg("--chain")
        .arg(&chain)
        .output()
        .unwrap();
    assert_eq!(output.status.code(), Some(1));
}

#[test]
fn parse_problems_exit_2() {
    let dir = tempfile::tempdir().unwrap();
    let space = write(dir.path(), "s.json", SPACE_3_2);
    let garbage = write(dir.path(), "garbage.json", "{ not json");
    let badrat = write(dir.path(), "badrat.json", r#"{"a":"1/0"}"#);

    // unreadable file
    let output = bin()
        .args(["norm", "--space"])
        .arg(dir.path().join("missing.json"))
        .arg("--chain")
        .arg(&garbage)
        .output()
        .unwrap();
    assert_eq!(output.status.code(), Some(2));

    // malformed JSON
    let output = bin()
        .args(["norm", "--space"])
        .arg(&space)
        .arg("--chain")
        .arg(&garbage)
        .output()
        .unwrap();
    assert_eq!(output.status.code(), Some(2));

    // malformed rational
    let output = bin()
        .args(["norm", "--space"])
        .arg(&space)
        .arg("--chain")
        .arg(&badrat)
        .output()
        .unwrap();
    assert_eq!(output.status.code(), Some(2));
}

#[test]
fn unknown_points_are_domain_errors() {
    let dir = tempfile::tempdir().unwrap();
    let space = write(dir.path(), "s.json", SPACE_3_2);
    let chain = write(dir.path(), "c.json", r#"{"zz":"1"}"#);
    let output = bin()
        .args(["norm", "--space"])
        .arg(&space)
        .arg("--chain")
        .arg(&chain)
        .output()
        .unwrap();
    assert_eq!(output.status.code(), Some(1));
}

#[test]
fn distance_and_kantorovich_examples() {
    let dir = tempfile::tempdir().unwrap();
    let space = write(dir.path(), "s.json", SPACE_3_2);
    let a = write(dir.path(), "a.json", r#"{"a":"1"}"#);
    let b = write(dir.path(), "b.json", r#"{"b":"1"}"#);
    let output = bin()
        .args(["dist", "--space"])
        .arg(&space)
        .arg("--chain-a")
        .arg(&a)
        .arg("--chain-b")
        .arg(&b)
        .output()
        .unwrap();
    assert!(output.status.success());
    assert_eq!(stdout_of(&output), "{\"distance\":\"3/2\"}\n");

    let mu1 = write(dir.path(), "mu1.json", r#"{"a":"1/2","*":"1/2"}"#);
    let mu2 = write(dir.path(), "mu2.json", r#"{"b":"1"}"#);
    let output = bin()
        .args(["kantorovich", "--space"])
        .arg(&space)
        .arg("--mu1")
        .arg(&mu1)
        .arg("--mu2")
        .arg(&mu2)
        .output()
        .unwrap();
    assert!(output.status.success());
    assert_eq!(stdout_of(&output), "{\"distance\":\"5/4\"}\n");
}

#[test]
fn graev_emits_distance_and_integer_witness() {
    let dir = tempfile::tempdir().unwrap();
    let space = write(dir.path(), "s.json", SPACE_3_2);
    let u = write(dir.path(), "u.json", r#"{"a":2,"b":-1}"#);
    let output = bin()
        .args(["graev", "--space"])
        .arg(&space)
        .arg("--u")
        .arg(&u)
        .output()
        .unwrap();
    assert!(output.status.success());
    let body = stdout_of(&output);
    assert_eq!(
        body,
        "{\"distance\":\"5/2\",\"witness\":[[\"a\",\"*\",\"1\"],[\"a\",\"b\",\"1\"]],\"witness_cost\":\"5/2\"}\n"
    );
}

#[test]
fn certificates_round_trip_and_are_deterministic() {
    let dir = tempfile::tempdir().unwrap();
    let space = write(dir.path(), "s.json", SPACE_3_2);
    let chain = write(dir.path(), "c.json", r#"{"a":"2","b":"-1"}"#);
    let cert_path = dir.path().join("cert.json");

    let output = bin()
        .args(["dual-cert", "--space"])
        .arg(&space)
        .arg("--chain")
        .arg(&chain)
        .arg("--out")
        .arg(&cert_path)
        .output()
        .unwrap();
    assert!(output.status.success(), "{output:?}");
    let first = std::fs::read(&cert_path).unwrap();

    // byte-identical rerun
    let output = bin()
        .args(["dual-cert", "--space"])
        .arg(&space)
        .arg("--chain")
        .arg(&chain)
        .output()
        .unwrap();
    assert_eq!(output.stdout, first);

    let output = bin()
        .args(["verify", "--space"])
        .arg(&space)
        .arg("--cert")
        .arg(&cert_path)
        .output()
        .unwrap();
    assert_eq!(output.status.code(), Some(0), "{output:?}");
    assert!(stdout_of(&output).contains("\"verified\":true"));

    // tamper with the cost
    let tampered = String::from_utf8(first).unwrap().replace("5/2", "2");
    let bad_path = write(dir.path(), "bad_cert.json", &tampered);
    let output = bin()
        .args(["verify", "--space"])
        .arg(&space)
        .arg("--cert")
        .arg(&bad_path)
        .output()
        .unwrap();
    assert_eq!(output.status.code(), Some(1));
    assert!(stdout_of(&output).contains("\"verified\":false"));
}

#[test]
fn round_plan_takes_the_cheaper_direction() {
    let dir = tempfile::tempdir().unwrap();
    let space = write(dir.path(), "s.json", SPACE_3_2);
    let plan = write(
        dir.path(),
        "p.json",
        r#"[["a","b","1/2"],["a","*","1/2"],["*","b","1/2"]]"#,
    );
    let output = bin()
        .args(["round-plan", "--space"])
        .arg(&space)
        .arg("--plan")
        .arg(&plan)
        .output()
        .unwrap();
    assert!(output.status.success(), "{output:?}");
    assert_eq!(
        stdout_of(&output),
        "{\"cost\":\"3/2\",\"plan\":[[\"a\",\"b\",\"1\"]]}\n"
    );

    // fractional divergence is rejected
    let bad = write(dir.path(), "bad.json", r#"[["a","b","1/2"]]"#);
    let output = bin()
        .args(["round-plan", "--space"])
        .arg(&space)
        .arg("--plan")
        .arg(&bad)
        .output()
        .unwrap();
    assert_eq!(output.status.code(), Some(1));
}

#[test]
fn psd_flags_an_indefinite_matrix() {
    let dir = tempfile::tempdir().unwrap();
    let matrix = write(dir.path(), "m.json", "[[1, 2], [2, 1]]");
    let output = bin().args(["psd", "--matrix"]).arg(&matrix).output().unwrap();
    assert!(output.status.success());
    let body = stdout_of(&output);
    assert!(body.contains("\"is_psd\":false"), "{body}");
    assert!(body.contains("-0.99999") || body.contains("-1"), "{body}");

    // complex entries as [re, im]
    let hermitian = write(
        dir.path(),
        "h.json",
        "[[[1.0,0.0],[0.0,-1.0]],[[0.0,1.0],[1.0,0.0]]]",
    );
    let output = bin().args(["psd", "--matrix"]).arg(&hermitian).output().unwrap();
    assert!(output.status.success(), "{output:?}");
}

#[test]
fn schoenberg_random_sample_is_psd() {
    let output = bin()
        .args([
            "schoenberg", "--random", "15", "--dim", "3", "--p", "1.5", "--seed", "0",
        ])
        .output()
        .unwrap();
    assert!(output.status.success(), "{output:?}");
    assert!(stdout_of(&output).contains("\"is_psd\":true"));

    // identical rerun
    let second = bin()
        .args([
            "schoenberg", "--random", "15", "--dim", "3", "--p", "1.5", "--seed", "0",
        ])
        .output()
        .unwrap();
    assert_eq!(output.stdout, second.stdout);
}

#[test]
fn gns_reports_residuals_for_a_character() {
    let dir = tempfile::tempdir().unwrap();
    let group = write(dir.path(), "g.json", r#"{"cyclic_factors":[4]}"#);
    let pdf = write(
        dir.path(),
        "f.json",
        r#"{"0":[1.0,0.0],"1":[0.0,1.0],"2":[-1.0,0.0],"3":[0.0,-1.0]}"#,
    );
    let output = bin()
        .args(["gns", "--group"])
        .arg(&group)
        .arg("--pdf")
        .arg(&pdf)
        .output()
        .unwrap();
    assert!(output.status.success(), "{output:?}");
    let body = stdout_of(&output);
    assert!(body.contains("\"quotient_dim\":1"), "{body}");
    assert!(body.contains("\"cyclicity_defect\":0.0"), "{body}");
}

#[test]
fn quotient_demo_trace_is_deterministic() {
    let run = || {
        bin()
            .args([
                "quotient-demo",
                "--dim",
                "2",
                "--norm",
                "2",
                "--mesh",
                "0.125",
                "--steps",
                "12",
                "--seed",
                "0",
            ])
            .output()
            .unwrap()
    };
    let first = run();
    assert!(first.status.success(), "{first:?}");
    let body = stdout_of(&first);
    assert!(body.contains("\"residuals\":["), "{body}");
    assert!(body.contains("\"l1_mass\":"), "{body}");
    assert!(body.contains("\"reconstruction_error\":"), "{body}");
    let second = run();
    assert_eq!(first.stdout, second.stdout);
}
