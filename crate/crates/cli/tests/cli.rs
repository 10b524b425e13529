use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

fn corpus(rel: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR"))
        .join("../../corpus")
        .join(rel)
}

fn apsys(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_apsys"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

fn scratch(name: &str) -> PathBuf {
    let dir = std::env::temp_dir().join(format!("apsys-cli-{}", std::process::id()));
    fs::create_dir_all(&dir).unwrap();
    dir.join(name)
}

#[test]
fn enumerate_pi5() {
    let pi5 = corpus("pi5.aps");
    let o = apsys(&["enumerate", pi5.to_str().unwrap(), "--max-label-len", "10"]);
    assert!(o.status.success());
    let text = stdout(&o);
    let lines: Vec<&str> = text.lines().collect();
    assert_eq!(
        &lines[..5],
        ["ab", "aabb", "aaabbb", "aaaabbbb", "aaaaabbbbb"]
    );
    assert!(lines[5].starts_with("# exhaustive=true"));
}

#[test]
fn run_is_deterministic_per_seed() {
    let pi1 = corpus("pi1.aps");
    let a = apsys(&["run", pi1.to_str().unwrap(), "--seed", "7"]);
    let b = apsys(&["run", pi1.to_str().unwrap(), "--seed", "7"]);
    assert!(a.status.success());
    assert_eq!(a.stdout, b.stdout);
    assert!(stdout(&a).starts_with("# outcome=halted"));
}

#[test]
fn run_output_replays() {
    let pi2 = corpus("pi2.aps");
    let first = apsys(&["run", pi2.to_str().unwrap(), "--seed", "3"]);
    let trace = scratch("pi2.trace");
    fs::write(&trace, stdout(&first)).unwrap();
    let again = apsys(&[
        "run",
        pi2.to_str().unwrap(),
        "--replay",
        trace.to_str().unwrap(),
    ]);
    assert!(
        again.status.success(),
        "{}",
        String::from_utf8_lossy(&again.stderr)
    );
    assert_eq!(first.stdout, again.stdout);
}

#[test]
fn accepts_exit_codes() {
    let pi5 = corpus("pi5.aps");
    let p = pi5.to_str().unwrap();
    assert_eq!(apsys(&["accepts", p, "aabb"]).status.code(), Some(0));
    assert_eq!(apsys(&["accepts", p, "abab"]).status.code(), Some(1));
    assert_eq!(
        apsys(&["accepts", p, "aabb", "--max-states", "3"])
            .status
            .code(),
        Some(2)
    );
}

#[test]
fn render_grid_and_system() {
    let grid = scratch("grid.txt");
    fs::write(&grid, "\n  . . b\n  a . .\n\n").unwrap();
    let o = apsys(&["render", grid.to_str().unwrap()]);
    assert_eq!(stdout(&o), ". . b\na . .\n");
    let o = apsys(&["render", corpus("pi2.aps").to_str().unwrap()]);
    assert!(stdout(&o).contains("D 0 B"));
}

#[test]
fn translate_writes_loadable_system() {
    let out = scratch("astar_b.aps");
    let o = apsys(&[
        "translate",
        "--reg",
        corpus("grammars/astar_b.reg").to_str().unwrap(),
        "-o",
        out.to_str().unwrap(),
    ]);
    assert!(o.status.success());
    let e = apsys(&["enumerate", out.to_str().unwrap(), "--max-label-len", "3"]);
    let text = stdout(&e);
    let lines: Vec<&str> = text.lines().collect();
    assert_eq!(&lines[..3], ["b", "ab", "aab"]);
    assert!(lines[3].starts_with("# exhaustive=true"));
}

#[test]
fn verify_example_reports_mismatch_for_pi1() {
    let o = apsys(&[
        "verify",
        "--example",
        "pi1",
        "--system",
        corpus("pi1.aps").to_str().unwrap(),
        "--k",
        "32",
    ]);
    assert_eq!(o.status.code(), Some(1));
    let text = stdout(&o);
    assert!(text.contains("missing aaaaaaaaaaaaaaaa\n"));
    assert!(text.contains("MISMATCH"));
    let o = apsys(&[
        "verify",
        "--example",
        "pi5",
        "--system",
        corpus("pi5.aps").to_str().unwrap(),
        "--k",
        "8",
    ]);
    assert!(stdout(&o).starts_with("MATCH"));
}

#[test]
fn parse_errors_are_reported_with_position() {
    let bad = scratch("bad.aps");
    fs::write(&bad, "membranes (1)\noutput 1\nmode sideways\n").unwrap();
    let o = apsys(&["enumerate", bad.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(3));
    let err = String::from_utf8_lossy(&o.stderr);
    assert!(err.contains("line 3, column 6"), "{err}");
}

#[test]
fn tm_translation_needs_alphabet() {
    let o = apsys(&[
        "translate",
        "--tm",
        corpus("grammars/scan.tm").to_str().unwrap(),
    ]);
    assert!(!o.status.success());
}
