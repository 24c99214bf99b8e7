use std::fs;
use std::path::Path;
use std::process::Command;

use maurer_cli::{run, Outcome, EXIT_OK, EXIT_USAGE, EXIT_VIOLATION};

fn maurer(args: &[&str]) -> Outcome {
    run(std::iter::once("maurer").chain(args.iter().copied()))
}

const SWAP: &str = "k=1 l=1\n0,0 -> 0,0\n1,0 -> 0,1\n0,1 -> 1,0\n1,1 -> 1,1\n";

fn synthesize(dir: &Path) -> (String, String) {
    let table = dir.join("swap.txt");
    fs::write(&table, SWAP).unwrap();
    let out = dir.join("w");
    let r = maurer(&[
        "synthesize",
        "--mode",
        "lean",
        "--transform",
        table.to_str().unwrap(),
        "--f",
        "F",
        "--out",
        out.to_str().unwrap(),
    ]);
    assert_eq!(r.code, EXIT_OK, "{}{}", r.stdout, r.stderr);
    assert!(
        r.stdout.contains("check: accepted (Exhaustive, 2048 runs)"),
        "{}",
        r.stdout
    );
    (
        out.join("machine.txt").to_str().unwrap().to_string(),
        out.join("thread.txt").to_str().unwrap().to_string(),
    )
}

#[test]
fn verify_lean_exhaustive() {
    let r = maurer(&[
        "verify",
        "--k",
        "1",
        "--l",
        "1",
        "--f",
        "F",
        "--synth",
        "lean",
        "--mode",
        "exhaustive",
    ]);
    assert_eq!(r.code, EXIT_OK);
    assert!(r.stdout.starts_with("256/256 realized\n"), "{}", r.stdout);
}

#[test]
fn verify_is_deterministic_under_sampling() {
    let args = [
        "verify",
        "--k",
        "1",
        "--l",
        "1",
        "--f",
        "T",
        "--synth",
        "wide",
        "--mode",
        "sample",
        "--samples",
        "20",
        "--seed",
        "7",
    ];
    let (a, b) = (maurer(&args), maurer(&args));
    assert_eq!(a, b);
    assert!(a.stdout.starts_with("20/20 realized\n"));
}

#[test]
fn small_unit_count() {
    let r = maurer(&["count", "lemma1", "--ems", "2"]);
    assert_eq!(r.code, EXIT_OK);
    assert!(r.stdout.starts_with("lhs=64 rhs=256 holds=true\n"), "{}", r.stdout);
    let r = maurer(&["count", "lemma1", "--ems", "1"]);
    assert!(r.stdout.starts_with("holds=false"), "{}", r.stdout);
    let r = maurer(&["count", "lemma1", "--ems", "0"]);
    assert_eq!(r.code, EXIT_USAGE);
}

#[test]
fn thread_count() {
    let r = maurer(&["count", "threads", "--d", "1", "--w", "2", "--e", "2", "--exact"]);
    assert_eq!(r.code, EXIT_OK);
    assert!(r.stdout.starts_with("bound=196\n"));
    assert!(r.stdout.contains("exact <= bound: true"));
}

#[test]
fn classify_exit_codes() {
    let r = maurer(&[
        "classify", "--k", "1", "--l", "1", "--m", "4", "--d", "5", "--e", "8", "--f", "F",
    ]);
    assert_eq!(r.code, EXIT_OK);
    assert!(r.stdout.starts_with("verdict: complete"), "{}", r.stdout);
    let r = maurer(&[
        "classify", "--k", "3", "--l", "2", "--m", "2", "--d", "1", "--e", "2", "--f", "T",
    ]);
    assert_eq!(r.code, EXIT_VIOLATION);
    assert!(r.stdout.starts_with("verdict: not complete (too few threads)"));
    let r = maurer(&[
        "classify", "--k", "2", "--l", "1", "--m", "3", "--d", "7", "--e", "100", "--f", "T",
    ]);
    assert_eq!(r.code, EXIT_OK);
    assert!(r.stdout.starts_with("verdict: unknown"));
}

#[test]
fn usage_errors() {
    let r = maurer(&["verify", "--k", "1", "--l", "1", "--f", "X", "--synth", "lean"]);
    assert_eq!(r.code, EXIT_USAGE);
    assert!(r.stderr.contains("--f"), "{}", r.stderr);
    let r = maurer(&["classify", "--bogus", "1"]);
    assert_eq!(r.code, EXIT_USAGE);
    assert!(r.stderr.contains("--bogus"));
    let r = maurer(&["parse", "/nonexistent/threads.txt"]);
    assert_eq!(r.code, EXIT_USAGE);
    let r = maurer(&["--help"]);
    assert_eq!(r.code, EXIT_OK);
    assert!(r.stdout.contains("synthesize"));
}

#[test]
fn synthesize_then_apply_and_regions() {
    let dir = tempfile::tempdir().unwrap();
    let (machine, thread) = synthesize(dir.path());

    let r = maurer(&[
        "apply",
        "--machine",
        &machine,
        "--thread",
        &thread,
        "--state",
        "data0=1,data1=0",
    ]);
    assert_eq!(r.code, EXIT_OK, "{}", r.stderr);
    assert!(r.stdout.starts_with("data0=0, data1=1,"), "{}", r.stdout);

    let r = maurer(&["apply", "--machine", &machine, "--thread", &thread, "--max-steps", "3"]);
    assert!(r.stdout.contains("trace cut off after 3 steps"));

    let dead = dir.path().join("dead.txt");
    fs::write(&dead, "X = D\n").unwrap();
    let r = maurer(&["apply", "--machine", &machine, "--thread", dead.to_str().unwrap()]);
    assert_eq!((r.code, r.stdout.as_str()), (EXIT_OK, "undefined (↑)\n"));

    let spin = dir.path().join("spin.txt");
    fs::write(&spin, "X = load:0 ; X\n").unwrap();
    let r = maurer(&["apply", "--machine", &machine, "--thread", spin.to_str().unwrap()]);
    assert_eq!(r.stdout, "undefined (↑)\n");

    for op in ["init", "preload", "postload", "xform", "prestore"] {
        let r = maurer(&["regions", "--machine", &machine, "--op", op]);
        assert_eq!(r.code, EXIT_OK, "{op}: {}", r.stdout);
        assert!(r.stdout.ends_with("strict: yes\n"));
    }
    let r = maurer(&["regions", "--machine", &machine, "--op", "nope"]);
    assert_eq!(r.code, EXIT_USAGE);

    let r = maurer(&["parse", &thread]);
    assert_eq!(r.code, EXIT_OK);
    assert!(r.stdout.contains("# distinct states: 8"));
}

#[test]
fn non_strict_machine_is_reported() {
    let dir = tempfile::tempdir().unwrap();
    let machine = dir.path().join("m.txt");
    // peek reads a data cell directly
    fs::write(
        &machine,
        "[params]\nk=1 l=1 m=1 u=1 v=1\n\n[op peek]\ndata0=0 -> ou0=0, rr=T\ndata0=1 -> ou0=1, rr=T\n",
    )
    .unwrap();
    let r = maurer(&["regions", "--machine", machine.to_str().unwrap(), "--op", "peek"]);
    assert_eq!(r.code, EXIT_VIOLATION, "{}{}", r.stdout, r.stderr);
    assert!(r.stdout.contains("strict: no"));
}

#[test]
fn unguarded_thread_file() {
    let dir = tempfile::tempdir().unwrap();
    let f = dir.path().join("t.txt");
    fs::write(&f, "X = Y\nY = X\n").unwrap();
    let r = maurer(&["parse", f.to_str().unwrap()]);
    assert_eq!(r.code, EXIT_VIOLATION);
    fs::write(&f, "X = a ?\n").unwrap();
    assert_eq!(maurer(&["parse", f.to_str().unwrap()]).code, EXIT_USAGE);
}

#[test]
fn binary_matches_library() {
    let out = Command::new(env!("CARGO_BIN_EXE_maurer"))
        .args(["count", "lemma1", "--ems", "2"])
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(0));
    assert_eq!(
        String::from_utf8(out.stdout).unwrap(),
        maurer(&["count", "lemma1", "--ems", "2"]).stdout
    );
    let out = Command::new(env!("CARGO_BIN_EXE_maurer"))
        .args(["verify"])
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(2));
}
