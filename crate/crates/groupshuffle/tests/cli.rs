//! End-to-end checks of the command-line surface and its exit-code
//! contract: 0 success, 2 validation error, 3 audit violation.

use std::fs;
use std::path::PathBuf;
use std::process::{Command, Output};

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_groupshuffle"))
}

fn run(args: &[&str]) -> Output {
    bin().args(args).output().expect("binary runs")
}

fn workdir(name: &str) -> PathBuf {
    let dir = std::env::temp_dir().join(format!("groupshuffle-cli-{name}"));
    let _ = fs::remove_dir_all(&dir);
    fs::create_dir_all(&dir).unwrap();
    dir
}

#[test]
fn smoke_path_generates_randomizes_and_shuffles() {
    let dir = workdir("smoke");
    let syn = dir.join("syn.csv");
    let y = dir.join("y.csv");
    let z = dir.join("z.csv");

    let out = run(&[
        "gen-syn", "--n", "2000", "--seed", "7", "--out", syn.to_str().unwrap(),
    ]);
    assert!(out.status.success(), "{out:?}");

    let out = run(&[
        "ldp", "--input", syn.to_str().unwrap(), "--output", y.to_str().unwrap(),
        "--epsilon", "2.5", "--seed", "7",
    ]);
    assert!(out.status.success(), "{out:?}");

    let out = run(&[
        "shuffle", "--input", y.to_str().unwrap(), "--aux", syn.to_str().unwrap(),
        "--alpha", "1", "--r", "0.4", "--seed", "7", "--out", z.to_str().unwrap(),
    ]);
    assert!(out.status.success(), "{out:?}");
    assert!(z.exists());
    let sidecar = z.with_extension("plan.json");
    assert!(sidecar.exists());
    let sidecar_text = fs::read_to_string(&sidecar).unwrap();
    assert!(sidecar_text.contains("\"digest\""));
    assert!(sidecar_text.contains("\"sensitivity\""));

    // Determinism: the same seed produces byte-identical output.
    let z2 = dir.join("z2.csv");
    let out = run(&[
        "shuffle", "--input", y.to_str().unwrap(), "--aux", syn.to_str().unwrap(),
        "--alpha", "1", "--r", "0.4", "--seed", "7", "--out", z2.to_str().unwrap(),
    ]);
    assert!(out.status.success());
    assert_eq!(fs::read(&z).unwrap(), fs::read(&z2).unwrap());
}

#[test]
fn audit_passes_and_violations_exit_three() {
    let dir = workdir("audit");
    let grouping = dir.join("g.json");
    fs::write(
        &grouping,
        "{\"i\":0,\"members\":[0,1,2]}\n{\"i\":1,\"members\":[0,1,2]}\n\
         {\"i\":2,\"members\":[0,1,2]}\n{\"i\":3,\"members\":[3,4]}\n\
         {\"i\":4,\"members\":[3,4]}\n",
    )
    .unwrap();
    let report = dir.join("report.json");

    let out = run(&[
        "audit", "--n", "5", "--alpha", "1", "--r", "2",
        "--grouping-file", grouping.to_str().unwrap(),
        "--out", report.to_str().unwrap(),
    ]);
    assert_eq!(out.status.code(), Some(0), "{out:?}");
    let text = fs::read_to_string(&report).unwrap();
    assert!(text.contains("\"pass\": true"));

    // Claiming a tighter budget than the dispersion provides is a finding,
    // reported with exit code 3.
    let out = run(&[
        "audit", "--n", "5", "--alpha", "0.1", "--r", "2",
        "--grouping-file", grouping.to_str().unwrap(),
        "--theta-override", "0.5",
        "--out", report.to_str().unwrap(),
    ]);
    assert_eq!(out.status.code(), Some(3), "{out:?}");
    let text = fs::read_to_string(&report).unwrap();
    assert!(text.contains("\"pass\": false"));
}

#[test]
fn preserve_exact_matches_brute_force() {
    let exact = run(&[
        "preserve", "--method", "exact", "--n", "8", "--theta", "0.5",
        "--eta", "0.75", "--subset-size", "4",
    ]);
    assert!(exact.status.success());
    let brute = run(&[
        "preserve", "--method", "brute", "--n", "8", "--theta", "0.5",
        "--eta", "0.75", "--subset-size", "4",
    ]);
    assert!(brute.status.success());
    let delta_of = |out: &Output| -> f64 {
        let text = String::from_utf8_lossy(&out.stdout);
        let v: serde_json::Value = serde_json::from_str(&text).unwrap();
        v["delta"].as_f64().unwrap()
    };
    let (de, db) = (delta_of(&exact), delta_of(&brute));
    assert!((de - db).abs() < 1e-12, "exact {de} vs brute {db}");
}

#[test]
fn validation_errors_exit_two() {
    // Unknown flag.
    let out = run(&["gen-syn", "--n", "100", "--bogus-flag"]);
    assert_eq!(out.status.code(), Some(2));

    // Bad parameter value.
    let dir = workdir("validation");
    let out = run(&[
        "gen-syn", "--n", "3", "--out", dir.join("x.csv").to_str().unwrap(),
    ]);
    assert_eq!(out.status.code(), Some(2));

    // Missing input file.
    let out = run(&[
        "ldp", "--input", dir.join("missing.csv").to_str().unwrap(),
        "--output", dir.join("y.csv").to_str().unwrap(), "--epsilon", "1",
    ]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn help_is_available_everywhere() {
    for sub in [
        "gen-syn", "ldp", "shuffle", "audit", "preserve", "attack", "learn", "sweep",
    ] {
        let out = run(&[sub, "--help"]);
        assert_eq!(out.status.code(), Some(0), "--help for {sub}");
        let text = String::from_utf8_lossy(&out.stdout);
        assert!(text.contains("--seed"), "global seed flag listed for {sub}");
    }
}
