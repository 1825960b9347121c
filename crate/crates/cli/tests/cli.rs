use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use covcheck_core::{Outcome, ProgramReport};

fn corpus(name: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../corpus").join(name)
}

fn covcheck(args: &[&str], input: &Path) -> Output {
    Command::new(env!("CARGO_BIN_EXE_covcheck")).args(args).arg(input).output().expect("binary runs")
}

fn json_report(out: &Output) -> ProgramReport {
    serde_json::from_slice(&out.stdout).unwrap_or_else(|e| panic!("{e}: {}", String::from_utf8_lossy(&out.stdout)))
}

#[test]
fn exit_codes() {
    assert_eq!(covcheck(&[], &corpus("sizedlist_complete.tg")).status.code(), Some(0));
    assert_eq!(covcheck(&["--check"], &corpus("sizedlist_incomplete_b.tg")).status.code(), Some(1));
    assert_eq!(covcheck(&[], &corpus("does_not_exist.tg")).status.code(), Some(2));
    let bad_solver = covcheck(&["--solver", "/nonexistent/solver"], &corpus("even_gen.tg"));
    assert_eq!(bad_solver.status.code(), Some(2));
    assert!(!bad_solver.stderr.is_empty());
    assert_ne!(covcheck(&["--bounds", "nat=x"], &corpus("even_gen.tg")).status.code(), Some(0));
}

#[test]
fn json_report_round_trips() {
    let out = covcheck(&["--format", "json"], &corpus("sizedlist_incomplete_c.tg"));
    assert_eq!(out.status.code(), Some(1));
    let report = json_report(&out);
    let d = &report.definitions[0];
    assert_eq!(d.verdict, Outcome::Rejected);
    assert!(d.failing_query.is_some());
    let again: ProgramReport = serde_json::from_str(&serde_json::to_string(&report).unwrap()).unwrap();
    assert_eq!(again, report);
}

#[test]
fn text_report_shows_the_failing_goal() {
    let out = covcheck(&[], &corpus("even_gen_any.tg"));
    let text = String::from_utf8_lossy(&out.stdout);
    assert!(text.contains("even_gen: rejected"), "{text}");
    assert!(text.contains("[invalid]: forall"), "{text}");
}

#[test]
fn verdicts_do_not_depend_on_jobs() {
    let dir = tempfile::tempdir().unwrap();
    let file = dir.path().join("several.tg");
    let src: String = ["even_gen.tg", "sizedlist_incomplete_b.tg", "sized_list.tg", "loop.tg"]
        .iter()
        .map(|f| std::fs::read_to_string(corpus(f)).unwrap())
        .collect::<Vec<_>>()
        .join("\n");
    // Two definitions share a name; rename the second generator.
    let src = src.replacen("sized_list_gen", "sized_list_gen_b", 2);
    std::fs::write(&file, src).unwrap();
    let verdicts = |jobs: &str| {
        let out = covcheck(&["--format", "json", "--jobs", jobs], &file);
        assert_eq!(out.status.code(), Some(1), "{}", String::from_utf8_lossy(&out.stderr));
        json_report(&out).definitions.into_iter().map(|d| (d.name, d.verdict, d.queries)).collect::<Vec<_>>()
    };
    let one = verdicts("1");
    assert_eq!(one.len(), 4);
    assert_eq!(one, verdicts("4"));
}

#[test]
fn dumped_files_match_query_count() {
    let dir = tempfile::tempdir().unwrap();
    let dump = dir.path().join("queries");
    let out = covcheck(&["--format", "json", "--dump-queries", dump.to_str().unwrap()], &corpus("bst_complete.tg"));
    assert_eq!(out.status.code(), Some(0));
    let queries: usize = json_report(&out).definitions.iter().map(|d| d.queries).sum();
    let files: Vec<_> = std::fs::read_dir(&dump).unwrap().map(|e| e.unwrap().path()).collect();
    assert_eq!(files.len(), queries);
    for f in files {
        let text = std::fs::read_to_string(&f).unwrap();
        assert!(text.contains("(check-sat)"), "{}", f.display());
    }
}

#[test]
fn oracle_on_a_crashing_definition() {
    let out = covcheck(&["--oracle", "--format", "json"], &corpus("err_only.tg"));
    assert_eq!(out.status.code(), Some(0));
    let line: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(line["member"], true);
    assert_eq!(line["type"], "[ν:int | false]");
}

#[test]
fn oracle_refutes_an_incomplete_generator() {
    let out = covcheck(&["--oracle", "--bounds", "int=3"], &corpus("even_gen_any.tg"));
    assert_eq!(out.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&out.stdout).contains("∉"));
}

#[test]
fn measure_override_is_accepted() {
    let out = covcheck(&["--measure", "int"], &corpus("sized_list.tg"));
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stdout));
}

#[test]
fn nat_measure_on_an_int_argument_stays_well_founded() {
    let dir = tempfile::tempdir().unwrap();
    let file = dir.path().join("down.tg");
    std::fs::write(&file, "val down : n:{v:int | true} -> [v:int | v == 0]\nlet rec down (n: int) = down (n - 1)\n").unwrap();
    assert_eq!(covcheck(&["--measure", "nat"], &file).status.code(), Some(1));
}
