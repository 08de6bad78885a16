//! End-to-end tests of the `stagec` binary: exit codes, diagnostics, and
//! byte-exact output against the checked-in corpus goldens.

use std::path::{Path, PathBuf};
use std::process::{Command, Output};

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_stagec"))
}

/// Repository root, two levels up from this crate.
fn root() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR"))
        .ancestors()
        .nth(2)
        .unwrap()
        .to_path_buf()
}

fn corpus(name: &str) -> PathBuf {
    root().join("corpus").join(name)
}

fn golden(name: &str) -> String {
    let p = root().join("corpus/golden").join(name);
    std::fs::read_to_string(&p).unwrap_or_else(|e| panic!("missing golden {}: {e}", p.display()))
}

fn run(args: &[&str]) -> Output {
    bin().args(args).output().expect("binary runs")
}

fn stdout(out: &Output) -> String {
    String::from_utf8(out.stdout.clone()).expect("stdout is utf-8")
}

fn stderr(out: &Output) -> String {
    String::from_utf8(out.stderr.clone()).expect("stderr is utf-8")
}

/// Writes a source file under the test temp dir and returns its path.
fn fixture(name: &str, src: &str) -> PathBuf {
    let dir = PathBuf::from(env!("CARGO_TARGET_TMPDIR"));
    std::fs::create_dir_all(&dir).unwrap();
    let p = dir.join(name);
    std::fs::write(&p, src).unwrap();
    p
}

#[test]
fn check_accepts_every_corpus_file() {
    for f in ["exp.2ltt", "vec.2ltt", "map.2ltt", "id.2ltt", "letins.2ltt", "types.2ltt", "perf.2ltt"] {
        let out = run(&["check", corpus(f).to_str().unwrap()]);
        assert_eq!(out.status.code(), Some(0), "{f}: {}", stderr(&out));
        assert!(stdout(&out).starts_with("checked "), "{f}: {}", stdout(&out));
    }
}

#[test]
fn stage_matches_goldens() {
    for (f, g) in [
        ("exp.2ltt", "exp.stage.txt"),
        ("vec.2ltt", "vec.stage.txt"),
        ("map.2ltt", "map.stage.txt"),
        ("id.2ltt", "id.stage.txt"),
        ("letins.2ltt", "letins.stage.txt"),
        ("types.2ltt", "types.stage.txt"),
        ("perf.2ltt", "perf.stage.txt"),
    ] {
        let out = run(&["stage", corpus(f).to_str().unwrap(), "--verify"]);
        assert_eq!(out.status.code(), Some(0), "{f}: {}", stderr(&out));
        assert_eq!(stdout(&out), golden(g), "staged output drifted for {f}");
    }
}

#[test]
fn stage_main_prints_one_body() {
    for (f, main, g) in [
        ("exp.2ltt", "cube", "exp.cube.txt"),
        ("vec.2ltt", "triple", "vec.triple.txt"),
        ("map.2ltt", "map2", "map.map2.txt"),
    ] {
        let out = run(&["stage", corpus(f).to_str().unwrap(), "--main", main]);
        assert_eq!(out.status.code(), Some(0), "{f}: {}", stderr(&out));
        assert_eq!(stdout(&out), golden(g), "staged body drifted for {f}");
    }
}

#[test]
fn staged_output_contains_no_stage_one_residue() {
    // No splice, quote, or lift may survive staging.
    for f in ["exp.2ltt", "vec.2ltt", "map.2ltt", "id.2ltt", "letins.2ltt", "types.2ltt"] {
        let out = run(&["stage", corpus(f).to_str().unwrap()]);
        let text = stdout(&out);
        for bad in ["~", "<", "^", "1]", "Nat1", "U1"] {
            assert!(!text.contains(bad), "{f}: `{bad}` leaked into {text}");
        }
    }
}

#[test]
fn erased_declarations_are_reported_on_stderr() {
    let out = run(&["stage", corpus("exp.2ltt").to_str().unwrap()]);
    assert!(stderr(&out).contains("note: computed at stage 1 and erased: exp"));
}

#[test]
fn staged_output_reparses_and_restages_to_itself() {
    // The printed object program is valid surface syntax whose stage is a
    // no-op, so staging is idempotent through the printer.
    for f in ["exp.2ltt", "map.2ltt", "letins.2ltt", "types.2ltt"] {
        let first = run(&["stage", corpus(f).to_str().unwrap()]);
        assert_eq!(first.status.code(), Some(0));
        let text = stdout(&first);
        let reparse = fixture(&format!("restaged_{f}"), &text);
        let second = run(&["stage", reparse.to_str().unwrap(), "--verify"]);
        assert_eq!(second.status.code(), Some(0), "{f}: {}", stderr(&second));
        assert_eq!(stdout(&second), text, "restaging changed {f}");
    }
}

#[test]
fn type_errors_exit_one_with_position() {
    let p = fixture("bad_type.2ltt", "def x : Nat0 = true0;\n");
    let out = run(&["check", p.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(1));
    let msg = stderr(&out);
    assert!(msg.contains("bad_type.2ltt:1:16:"), "bad span in {msg}");
    assert!(msg.contains("expected `Nat0`, found `Bool0`"), "bad message in {msg}");
}

#[test]
fn parse_errors_exit_one() {
    let p = fixture("bad_parse.2ltt", "def x : Nat0 = ;\n");
    let out = run(&["check", p.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(1));
    assert!(stderr(&out).contains("bad_parse.2ltt:1:16:"));
}

#[test]
fn missing_file_exits_two() {
    let out = run(&["check", "no/such/file.2ltt"]);
    assert_eq!(out.status.code(), Some(2));
    assert!(stderr(&out).contains("cannot read"));
}

#[test]
fn unknown_main_exits_one() {
    let out = run(&["stage", corpus("exp.2ltt").to_str().unwrap(), "--main", "nope"]);
    assert_eq!(out.status.code(), Some(1));
    assert!(stderr(&out).contains("no staged declaration `nope`"));
}

#[test]
fn assumption_main_exits_one() {
    let out = run(&["stage", corpus("exp.2ltt").to_str().unwrap(), "--main", "mul"]);
    assert_eq!(out.status.code(), Some(1));
    assert!(stderr(&out).contains("`mul` is an assumption"));
}

#[test]
fn erased_main_is_not_a_staged_declaration() {
    // `exp` exists in the source but is stage-1 only, so it is absent
    // from the staged program.
    let out = run(&["stage", corpus("exp.2ltt").to_str().unwrap(), "--main", "exp"]);
    assert_eq!(out.status.code(), Some(1));
    assert!(stderr(&out).contains("no staged declaration `exp`"));
}

#[test]
fn out_flag_writes_the_file() {
    let target = PathBuf::from(env!("CARGO_TARGET_TMPDIR")).join("staged_exp.out");
    let _ = std::fs::remove_file(&target);
    let out = run(&[
        "stage",
        corpus("exp.2ltt").to_str().unwrap(),
        "--out",
        target.to_str().unwrap(),
    ]);
    assert_eq!(out.status.code(), Some(0));
    assert_eq!(stdout(&out), "", "stdout should be empty with --out");
    assert_eq!(std::fs::read_to_string(&target).unwrap(), golden("exp.stage.txt"));
}

#[test]
fn unwritable_out_exits_two() {
    let out = run(&[
        "stage",
        corpus("exp.2ltt").to_str().unwrap(),
        "--out",
        "no/such/dir/file.out",
    ]);
    assert_eq!(out.status.code(), Some(2));
    assert!(stderr(&out).contains("cannot write"));
}

#[test]
fn nf_normalizes_a_declaration() {
    let p = fixture(
        "nf_demo.2ltt",
        "def add : Nat1 -> Nat1 -> Nat1 = \\a b. NatElim1 (\\_. Nat1) b (\\_ r. suc1 r) a;\n\
         def four : Nat1 = add 2 2;\n",
    );
    let out = run(&["nf", p.to_str().unwrap(), "--main", "four"]);
    assert_eq!(out.status.code(), Some(0), "{}", stderr(&out));
    assert_eq!(stdout(&out), "4\n");
}

#[test]
fn fuel_limit_stops_staging() {
    let out = bin()
        .args(["stage", corpus("perf.2ltt").to_str().unwrap()])
        .env("STAGEC_FUEL", "100")
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(1));
    assert!(stderr(&out).contains("step budget exhausted"), "{}", stderr(&out));
}

#[test]
fn ample_fuel_suffices() {
    let out = bin()
        .args(["stage", corpus("exp.2ltt").to_str().unwrap()])
        .env("STAGEC_FUEL", "1000000")
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(0), "{}", stderr(&out));
    assert_eq!(stdout(&out), golden("exp.stage.txt"));
}

#[test]
fn malformed_fuel_exits_two() {
    let out = bin()
        .args(["check", corpus("exp.2ltt").to_str().unwrap()])
        .env("STAGEC_FUEL", "plenty")
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(2));
    assert!(stderr(&out).contains("STAGEC_FUEL must be a number, got `plenty`"));
}

#[test]
fn dump_core_shows_annotations() {
    let p = fixture("dump_demo.2ltt", "def two : Nat0 = 2;\n");
    let out = run(&["dump-core", p.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(0));
    assert_eq!(stdout(&out), "(def0 two 0 (nat0 0) (suc0 (suc0 (zero0 0))))\n");
}

#[test]
fn dump_obj_shows_the_staged_program() {
    let p = fixture(
        "dump_obj_demo.2ltt",
        "def c : ^Nat0 = <zero0>;\ndef z : Nat0 = ~c;\n",
    );
    let out = run(&["dump-obj", p.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(0));
    assert_eq!(stdout(&out), "(def z 0 (nat 0) (zero 0))\n");
}

#[test]
fn verify_rejects_nothing_from_the_pipeline() {
    // --verify must stay silent on every staged corpus program.
    for f in ["exp.2ltt", "vec.2ltt", "map.2ltt", "perf.2ltt"] {
        let out = run(&["stage", corpus(f).to_str().unwrap(), "--verify"]);
        assert_eq!(out.status.code(), Some(0), "{f}: {}", stderr(&out));
        assert!(!stderr(&out).contains("verification"), "{f}");
    }
}
