//! Black-box tests of the `wbp` binary: exit codes, determinism, file
//! round-trips.

use std::path::Path;
use std::process::{Command, Output};

fn wbp(dir: &Path, args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_wbp"))
        .current_dir(dir)
        .args(args)
        .output()
        .expect("binary runs")
}

fn code(out: &Output) -> i32 {
    out.status.code().expect("no signal")
}

fn stdout(out: &Output) -> String {
    String::from_utf8_lossy(&out.stdout).into_owned()
}

fn stderr(out: &Output) -> String {
    String::from_utf8_lossy(&out.stderr).into_owned()
}

fn generate_village(dir: &Path) {
    let out = wbp(
        dir,
        &["generate", "--seed", "7", "--lots", "6", "--farmers", "2", "--output", "village.json"],
    );
    assert_eq!(code(&out), 0, "{}", stderr(&out));
}

#[test]
fn generate_is_byte_identical_per_seed() {
    let dir = tempfile::tempdir().unwrap();
    for name in ["a.json", "b.json"] {
        let out = wbp(
            dir.path(),
            &["generate", "--seed", "42", "--lots", "8", "--farmers", "2", "--output", name],
        );
        assert_eq!(code(&out), 0, "{}", stderr(&out));
    }
    let a = std::fs::read(dir.path().join("a.json")).unwrap();
    let b = std::fs::read(dir.path().join("b.json")).unwrap();
    assert_eq!(a, b);

    let out = wbp(
        dir.path(),
        &["generate", "--seed", "43", "--lots", "8", "--farmers", "2", "--output", "c.json"],
    );
    assert_eq!(code(&out), 0);
    let c = std::fs::read(dir.path().join("c.json")).unwrap();
    assert_ne!(a, c, "different seeds produce different instances");
}

#[test]
fn solve_writes_a_verifiable_report() {
    let dir = tempfile::tempdir().unwrap();
    generate_village(dir.path());
    let out = wbp(dir.path(), &["solve", "village.json", "--objective", "f3", "--trace"]);
    assert_eq!(code(&out), 0, "{}", stderr(&out));
    let text = stdout(&out);
    assert!(text.contains("objective  f3"), "{text}");
    assert!(text.contains("report written to"), "{text}");
    // Timings stay out of the report and out of stdout.
    assert!(!text.contains("timing:"));
    assert!(stderr(&out).contains("timing:"));

    assert!(dir.path().join("village.report.json").exists());
    let verify = wbp(dir.path(), &["verify", "village.json", "village.report.json"]);
    assert_eq!(code(&verify), 0, "{}", stderr(&verify));
    assert_eq!(stdout(&verify).trim(), "ok");
}

#[test]
fn solve_reports_are_deterministic() {
    let dir = tempfile::tempdir().unwrap();
    generate_village(dir.path());
    for name in ["r1.json", "r2.json"] {
        let out = wbp(dir.path(), &["solve", "village.json", "--output", name, "--trace"]);
        assert_eq!(code(&out), 0, "{}", stderr(&out));
    }
    let r1 = std::fs::read(dir.path().join("r1.json")).unwrap();
    let r2 = std::fs::read(dir.path().join("r2.json")).unwrap();
    assert_eq!(r1, r2);
}

#[test]
fn oracle_agrees_with_the_solver_on_f3() {
    let dir = tempfile::tempdir().unwrap();
    generate_village(dir.path());
    let solve = wbp(dir.path(), &["solve", "village.json", "--objective", "f3"]);
    assert_eq!(code(&solve), 0);
    let value_line = stdout(&solve)
        .lines()
        .find(|l| l.starts_with("value"))
        .unwrap()
        .to_string();
    let oracle = wbp(dir.path(), &["oracle", "village.json", "--objective", "f3"]);
    assert_eq!(code(&oracle), 0, "{}", stderr(&oracle));
    let oracle_value = stdout(&oracle)
        .lines()
        .find(|l| l.starts_with("value"))
        .unwrap()
        .to_string();
    assert_eq!(
        value_line.split_whitespace().nth(1),
        oracle_value.split_whitespace().nth(1)
    );
}

#[test]
fn infeasible_original_exits_two() {
    let dir = tempfile::tempdir().unwrap();
    generate_village(dir.path());
    let text = std::fs::read_to_string(dir.path().join("village.json")).unwrap();
    // Hand every lot to farmer 0: farmer 1 ends up landless.
    let mut v: serde_json::Value = serde_json::from_str(&text).unwrap();
    v["original"] = serde_json::json!([0, 0, 0, 0, 0, 0]);
    std::fs::write(dir.path().join("bad.json"), v.to_string()).unwrap();

    let out = wbp(dir.path(), &["solve", "bad.json"]);
    assert_eq!(code(&out), 2, "{}", stderr(&out));
}

#[test]
fn tampered_reports_fail_verification() {
    let dir = tempfile::tempdir().unwrap();
    generate_village(dir.path());
    let solve = wbp(dir.path(), &["solve", "village.json"]);
    assert_eq!(code(&solve), 0);
    let report = std::fs::read_to_string(dir.path().join("village.report.json")).unwrap();

    // Tampered value.
    let mut v: serde_json::Value = serde_json::from_str(&report).unwrap();
    v["value"] = serde_json::json!("1/3");
    std::fs::write(dir.path().join("t1.json"), v.to_string()).unwrap();
    let out = wbp(dir.path(), &["verify", "village.json", "t1.json"]);
    assert_ne!(code(&out), 0);

    // Tampered assignment: flip the first lot's farmer.
    let mut v: serde_json::Value = serde_json::from_str(&report).unwrap();
    let first = v["assignment"][0].as_u64().unwrap();
    v["assignment"][0] = serde_json::json!(1 - first);
    std::fs::write(dir.path().join("t2.json"), v.to_string()).unwrap();
    let out = wbp(dir.path(), &["verify", "village.json", "t2.json"]);
    assert_ne!(code(&out), 0);
}

#[test]
fn parse_errors_exit_four() {
    let dir = tempfile::tempdir().unwrap();
    std::fs::write(dir.path().join("junk.json"), "not json").unwrap();
    let out = wbp(dir.path(), &["solve", "junk.json"]);
    assert_eq!(code(&out), 4);

    let out = wbp(dir.path(), &["solve", "missing.json"]);
    assert_eq!(code(&out), 4);

    let out = wbp(dir.path(), &["solve", "--model", "p9", "junk.json"]);
    assert_eq!(code(&out), 4);

    let out = wbp(
        dir.path(),
        &["generate", "--seed", "1", "--lots", "2", "--farmers", "2", "--deviation", "7/5",
          "--output", "x.json"],
    );
    assert_eq!(code(&out), 4, "deviation must stay below 1");
}

#[test]
fn oracle_refuses_oversized_spaces() {
    let dir = tempfile::tempdir().unwrap();
    generate_village(dir.path());
    let out = wbp(dir.path(), &["oracle", "village.json", "--max-space", "10"]);
    assert_eq!(code(&out), 3, "{}", stderr(&out));
}

#[test]
fn help_exits_zero() {
    let dir = tempfile::tempdir().unwrap();
    let out = wbp(dir.path(), &["--help"]);
    assert_eq!(code(&out), 0);
    assert!(stdout(&out).contains("solve"));
}
