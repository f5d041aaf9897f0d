use std::path::PathBuf;
use std::process::Command;

fn fixture(name: &str) -> String {
    format!("{}/tests/fixtures/{name}", env!("CARGO_MANIFEST_DIR"))
}

fn scratch(name: &str) -> String {
    let p: PathBuf = [env!("CARGO_TARGET_TMPDIR"), name].iter().collect();
    p.to_string_lossy().into_owned()
}

fn run(args: &[&str]) -> (i32, String, String) {
    let out = Command::new(env!("CARGO_BIN_EXE_graphmoves")).args(args).output().unwrap();
    (out.status.code().unwrap_or(-1), String::from_utf8(out.stdout).unwrap(), String::from_utf8(out.stderr).unwrap())
}

#[test]
fn decide_emits_a_trace_that_verifies() {
    let trace = scratch("g20_g21_101.moves");
    let (code, out, _) =
        run(&["decide", &fixture("g20.graph"), &fixture("g21.graph"), "--rel", "101", "--trace", &trace]);
    assert_eq!(code, 0, "{out}");
    assert!(out.contains("verdict: equivalent") && out.contains("trace:"), "{out}");
    let (code, out, _) = run(&["verify", &fixture("g20.graph"), &trace, &fixture("g21.graph"), "--rel", "101"]);
    assert_eq!(code, 0, "{out}");
    assert!(out.contains("verified: true"));
}

#[test]
fn decide_distinguishes_at_full_strength() {
    let (code, out, _) = run(&["decide", &fixture("g20.graph"), &fixture("g21.graph"), "--rel", "111"]);
    assert_eq!(code, 1, "{out}");
    assert!(out.contains("verdict: distinguished") && out.contains("witness:"), "{out}");
}

#[test]
fn verify_names_the_offending_step() {
    let args = ["verify", &fixture("g20.graph"), &fixture("o2_101.moves"), &fixture("g21.graph")];
    let (code, _, _) = run(&[&args[..], &["--rel", "101"]].concat());
    assert_eq!(code, 0);
    let (code, out, err) = run(&[&args[..], &["--rel", "111"]].concat());
    assert_eq!(code, 1);
    assert!(out.contains("verified: false"));
    assert!(err.contains("step 5") && err.contains("move class 101 < required 111"), "{err}");
}

#[test]
fn invariants_report() {
    let (code, out, _) = run(&["invariants", &fixture("z99_left.graph")]);
    assert_eq!(code, 0);
    for line in ["k0: Z/99", "k1-rank: 0", "bf: Z/99", "bf-sign: -1", "gauge-simple: true"] {
        assert!(out.lines().any(|l| l == line), "missing `{line}` in\n{out}");
    }
    let (_, out, _) = run(&["invariants", &fixture("g21.graph")]);
    assert!(out.contains("gauge-invariant: GPair(2,"), "{out}");
}

#[test]
fn apply_and_reduce_write_graphs() {
    let end = scratch("o2_end.graph");
    let (code, out, _) = run(&["apply", &fixture("g20.graph"), &fixture("o2_011.moves"), "-o", &end]);
    assert_eq!(code, 0, "{out}");
    assert!(out.contains("steps: 3"));
    let (code, out, _) = run(&["decide", &end, &fixture("g21.graph"), "--rel", "111"]);
    assert_eq!(code, 0, "{out}");

    let (code, out, _) = run(&["reduce", &fixture("g21.graph"), "--form", "011std"]);
    assert_eq!(code, 0, "{out}");
    assert!(out.contains("form: 011std") && out.contains("graph "), "{out}");
}

#[test]
fn search_outcomes() {
    let (code, out, _) = run(&["search", &fixture("g21.graph"), &fixture("g21.graph"), "--rel", "111"]);
    assert_eq!(code, 0, "{out}");
    assert!(out.contains("outcome: found") && out.contains("steps: 0"), "{out}");
    let (code, out, _) = run(&["search", &fixture("g20.graph"), &fixture("g21.graph"), "--rel", "011", "--depth", "3"]);
    assert_eq!(code, 0, "{out}");
    let (code, out, _) =
        run(&["search", &fixture("g20.graph"), &fixture("g21.graph"), "--rel", "111", "--depth", "1", "--states", "5"]);
    assert!(code == 2 || code == 70, "{code}: {out}");
}

#[test]
fn error_codes() {
    assert_eq!(run(&[]).0, 64);
    assert_eq!(run(&["decide", &fixture("g20.graph")]).0, 64);
    assert_eq!(run(&["decide", &fixture("g20.graph"), &fixture("g21.graph"), "--rel", "102"]).0, 64);
    assert_eq!(run(&["invariants", "/nonexistent/graph"]).0, 65);
    assert_eq!(
        run(&["verify", &fixture("g20.graph"), &fixture("g21.graph"), &fixture("g21.graph"), "--rel", "111"]).0,
        65
    );
    assert_eq!(run(&["invariants", &fixture("z99_left.graph"), "--max-vertices", "3"]).0, 70);
    assert_eq!(run(&["--help"]).0, 0);
}
