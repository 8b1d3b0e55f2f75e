//! End-to-end runs of the `dslab` binary.

use std::path::PathBuf;
use std::process::{Command, Output};

fn dslab(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_dslab"))
        .args(args)
        .env_remove("DSLAB_THREADS")
        .output()
        .expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

fn scratch(name: &str) -> PathBuf {
    let dir = std::env::temp_dir().join(format!("dslab-cli-{}-{name}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    dir
}

#[test]
fn kernel_row() {
    let o = dslab(&["kernel", "--kind", "dirichlet", "--n", "4", "--system", "w", "--resolution", "3"]);
    assert_eq!(o.status.code(), Some(0));
    assert_eq!(stdout(&o), "x0,x1,x2,x3,x4,x5,x6,x7\n4,4,0,0,0,0,0,0\n");
}

#[test]
fn float_kernel_is_tagged() {
    let o = dslab(&["kernel", "--kind", "fejer", "--n", "3", "--resolution", "2", "--mode", "float"]);
    assert_eq!(o.status.code(), Some(0));
    assert!(stdout(&o).starts_with("x0[float],"));
}

#[test]
fn lemma2_constant_passes() {
    let o = dslab(&["lemma2", "--weights", "constant", "--m", "3", "--resolution", "5", "--mode", "exact"]);
    assert_eq!(o.status.code(), Some(0));
    let out = stdout(&o);
    assert_eq!(out.lines().count(), 9);
    assert!(out.lines().skip(1).all(|l| l.split(',').nth(2) == Some("true")));
}

#[test]
fn blowup2_ratio_column_increases() {
    let o = dslab(&["blowup2", "--weights", "constant", "--p", "2/5", "--n", "2..8"]);
    assert_eq!(o.status.code(), Some(0));
    let out = stdout(&o);
    let ratios: Vec<&str> = out.lines().skip(1).map(|l| l.split(',').nth(4).unwrap()).collect();
    assert_eq!(ratios[0], "8/5");
    assert_eq!(ratios[2], "64/17");
    assert_eq!(ratios.len(), 7);
}

#[test]
fn exact_csv_has_no_floats() {
    let o = dslab(&["blowup2", "--weights", "cesaro:1/2", "--p", "1/3", "--n", "2..6"]);
    assert_eq!(o.status.code(), Some(0));
    let out = stdout(&o);
    assert!(!out.lines().next().unwrap().contains("[float]"));
    for cell in out.lines().skip(1).flat_map(|l| l.split(',')) {
        let numeric = cell.chars().all(|c| c.is_ascii_digit() || "/()^-".contains(c));
        assert!(numeric || cell == "true" || cell == "false", "{cell}");
    }
}

#[test]
fn usage_and_resolution_exit_codes() {
    assert_eq!(dslab(&["blowup2", "--p", "1/2"]).status.code(), Some(64));
    assert_eq!(dslab(&["blowup2", "--p", "two fifths"]).status.code(), Some(64));
    assert_eq!(dslab(&["lemma2", "--weights", "log:1:1", "--m", "2"]).status.code(), Some(64));
    assert_eq!(dslab(&["frobnicate"]).status.code(), Some(64));
    assert_eq!(dslab(&["kernel", "--n", "64", "--resolution", "4"]).status.code(), Some(65));
    assert_eq!(dslab(&["lemma2", "--m", "3", "--resolution", "3"]).status.code(), Some(65));
    assert_eq!(dslab(&["--help"]).status.code(), Some(0));
}

#[test]
fn failing_verdict_exits_one() {
    let o = dslab(&["converge", "--kind", "riesz", "--n", "8,1024"]);
    assert_eq!(o.status.code(), Some(1));
    let o = dslab(&["converge", "--kind", "fejer", "--n", "8,1024"]);
    assert_eq!(o.status.code(), Some(0));
}

#[test]
fn inconclusive_exits_two() {
    // increasing weights violate the majorant's preconditions
    let o = dslab(&["lemma3", "--weights", "cesaro:3/2", "--alpha", "1/2", "--n", "32", "--resolution", "7"]);
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn custom_weights_file() {
    let dir = scratch("custom");
    let file = dir.join("q.txt");
    std::fs::write(&file, "# halving\n1\n1/2\n1/4\n1/8\n1/16\n1/32\n1/64\n1/128\n1/256\n1/512\n").unwrap();
    let spec = format!("custom:{}", file.display());
    let o = dslab(&["kernel", "--kind", "norlund", "--weights", &spec, "--n", "5", "--resolution", "3"]);
    assert_eq!(o.status.code(), Some(0));
    // Q_{2^n+1} needs 2^n+1 weights: ten cover n ≤ 3
    let o = dslab(&["blowup2", "--weights", &spec, "--p", "1/3", "--n", "2..3"]);
    assert_eq!(o.status.code(), Some(0));
    let o = dslab(&["blowup2", "--weights", &spec, "--p", "1/3", "--n", "2..4"]);
    assert_eq!(o.status.code(), Some(64));
}

#[test]
fn writes_csv_and_json() {
    let dir = scratch("out");
    let csv = dir.join("blowup.csv");
    let o = dslab(&["blowup2", "--p", "2/5", "--n", "2..5", "--out", csv.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(0));
    assert!(stdout(&o).is_empty());
    let json: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(dir.join("blowup.json")).unwrap()).unwrap();
    assert_eq!(json["experiment"], "blowup2");
    assert_eq!(json["verdict"], "pass");
    assert_eq!(json["params"]["p"], "2/5");
    assert!(json["summary_stats"].is_object());
    assert!(std::fs::read_to_string(&csv).unwrap().starts_with("n,index,"));
}

#[test]
fn thread_env_does_not_change_output() {
    let args = ["lemma2", "--weights", "cesaro:1/3", "--m", "4"];
    let base = stdout(&dslab(&args));
    for threads in ["1", "4", "8"] {
        let o = Command::new(env!("CARGO_BIN_EXE_dslab"))
            .args(args)
            .env("DSLAB_THREADS", threads)
            .output()
            .unwrap();
        assert_eq!(stdout(&o), base);
    }
    let o = Command::new(env!("CARGO_BIN_EXE_dslab"))
        .args(args)
        .env("DSLAB_THREADS", "many")
        .output()
        .unwrap();
    assert_eq!(o.status.code(), Some(64));
}

#[test]
fn conditions_table() {
    let o = dslab(&["conditions", "--weights", "constant", "--condition", "regular", "--n", "2^1..2^6"]);
    assert_eq!(o.status.code(), Some(0));
    let out = stdout(&o);
    assert!(out.starts_with("part,n,witness[float]"));
    assert_eq!(out.lines().count(), 7);
}

#[test]
fn corollaries_bundle() {
    let o = dslab(&["corollaries"]);
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    let out = stdout(&o);
    assert!(out.lines().skip(1).any(|l| l.starts_with("blowup_norlund_log,")));
    assert!(out.lines().skip(1).any(|l| l.starts_with("blowup3,")));
}
