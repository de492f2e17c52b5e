use std::path::PathBuf;
use std::process::{Command, Output};

use unsyn_core::engine::Verdict;
use unsyn_core::report;

fn fixture(name: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR"))
        .join("../core/fixtures")
        .join(name)
}

fn unsyn(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_unsyn")).args(args).output().unwrap()
}

#[test]
fn exit_codes_follow_the_verdict() {
    let kitchen = fixture("kitchen_deadlock.spec");
    let hallway = fixture("hallway_livelock.spec");
    assert_eq!(unsyn(&["check", kitchen.to_str().unwrap()]).status.code(), Some(2));
    let out = unsyn(&["check", hallway.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(3));
    assert!(String::from_utf8_lossy(&out.stdout).starts_with("UNREALIZABLE (livelock), goal: Visit the goal"));
    assert_eq!(unsyn(&["check", "/nonexistent.spec"]).status.code(), Some(1));
}

#[test]
fn synthesizable_spec_exits_zero() {
    let dir = std::env::temp_dir().join(format!("unsyn-cli-{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    let path = dir.join("ok.spec");
    std::fs::write(
        &path,
        "[INPUT]\na\n\n[OUTPUT]\nb\n\n[SYS_TRANS]\n\"Copy a\": next(b) <-> next(a)\n",
    )
    .unwrap();
    let out = unsyn(&["explain", path.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    assert!(String::from_utf8_lossy(&out.stdout).starts_with("SYNTHESIZABLE"));
}

#[test]
fn report_parses_back() {
    let spec = fixture("hospital_patrol.spec");
    let out = unsyn(&["explain", spec.to_str().unwrap(), "--format", "report"]);
    assert_eq!(out.status.code(), Some(2));
    let d = report::from_json(&String::from_utf8(out.stdout).unwrap()).unwrap();
    assert_eq!(d.verdict, Verdict::Unsatisfiable);
    assert!(d.core.iter().any(|e| e.text == "Patrol r3"));
}

#[test]
fn dumps_cnf_and_counterstrategy() {
    let dir = std::env::temp_dir().join(format!("unsyn-dump-{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    let cnf = dir.join("core.cnf");
    let cs = dir.join("cs.txt");
    let spec = fixture("hallway_deadlock.spec");
    let out = unsyn(&[
        "explain",
        spec.to_str().unwrap(),
        "--dump-cnf",
        cnf.to_str().unwrap(),
        "--dump-counterstrategy",
        cs.to_str().unwrap(),
    ]);
    assert_eq!(out.status.code(), Some(3));
    let text = std::fs::read_to_string(&cnf).unwrap();
    assert!(text.lines().any(|l| l.starts_with("p cnf ")), "{text}");
    assert!(!std::fs::read_to_string(&cs).unwrap().is_empty());
    let listing = String::from_utf8_lossy(&out.stdout);
    assert!(
        listing.contains("The statements that cause the problem are:"),
        "{listing}"
    );
}
