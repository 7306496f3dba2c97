use std::path::{Path, PathBuf};
use std::process::Command;

use clap::Parser;
use hazmap::{enumerate_all, HazardRecord, HazardType, InstructionSet, Resolution};
use hazmap_cli::{run, run_with_rules, Cli, ExitStatus, Io, Rules};

fn data(name: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR"))
        .join("../core/data")
        .join(name)
}

struct Output {
    status: ExitStatus,
    stdout: String,
    stderr: String,
}

fn run_args(args: &[&str], rules: Option<&Rules>) -> Output {
    let parsed =
        Cli::try_parse_from(std::iter::once("hazmap").chain(args.iter().copied())).unwrap();
    let (mut out, mut err) = (Vec::new(), Vec::new());
    let mut io = Io {
        out: &mut out,
        err: &mut err,
    };
    let status = match rules {
        Some(r) => run_with_rules(parsed, &mut io, r),
        None => run(parsed, &mut io),
    };
    Output {
        status,
        stdout: String::from_utf8(out).unwrap(),
        stderr: String::from_utf8(err).unwrap(),
    }
}

fn hazmap(args: &[&str]) -> Output {
    run_args(args, None)
}

fn write_temp(dir: &tempfile::TempDir, name: &str, text: &str) -> String {
    let p = dir.path().join(name);
    std::fs::write(&p, text).unwrap();
    p.to_str().unwrap().to_string()
}

#[test]
fn validate_clean_file() {
    let out = hazmap(&["validate", data("raw_sample.isa").to_str().unwrap()]);
    assert_eq!(out.status, ExitStatus::Success);
    assert!(out.stdout.is_empty());
    assert!(out.stderr.is_empty());
}

#[test]
fn validate_reports_inverted_interval() {
    let dir = tempfile::tempdir().unwrap();
    let p = write_temp(
        &dir,
        "bad.isa",
        "instruction x depth=4\n  dst d write=2 first_avail=3 last_avail=2\nend\n",
    );
    let out = hazmap(&["validate", &p]);
    assert_eq!(out.status, ExitStatus::Diagnostics);
    let lines: Vec<&str> = out.stderr.lines().collect();
    assert_eq!(lines, vec!["error:2:first_avail exceeds last_avail"]);
}

#[test]
fn validate_warning_only_exits_zero() {
    let dir = tempfile::tempdir().unwrap();
    let p = write_temp(
        &dir,
        "warn.isa",
        "instruction x depth=5\n  src s read=5 first_needed=1 last_needed=2\nend\n",
    );
    let out = hazmap(&["validate", &p]);
    assert_eq!(out.status, ExitStatus::Success);
    assert_eq!(out.stderr, "warning:2:read stage outside needed interval\n");
}

#[test]
fn missing_file_is_usage_error() {
    let out = hazmap(&["validate", "/nonexistent/file.isa"]);
    assert_eq!(out.status, ExitStatus::Usage);
}

#[test]
fn reduce_lists_classes() {
    let out = hazmap(&[
        "reduce",
        data("raw_sample.isa").to_str().unwrap(),
        "--level",
        "raw",
    ]);
    assert_eq!(out.status, ExitStatus::Success);
    assert_eq!(
        out.stdout,
        "\
level RAW: 2 classes
class inst1 depth=5 members: inst1
  dst (3,4): inst1.d1
  dst (5,5): inst1.d2
class inst2 depth=3 members: inst2
  src (1): inst2.s1
  src (2): inst2.s2
"
    );
}

#[test]
fn reduce_merges_duplicates() {
    let dir = tempfile::tempdir().unwrap();
    let text = std::fs::read_to_string(data("raw_sample.isa")).unwrap();
    let dup = format!("{text}\ninstruction inst1b depth=5\n dst x write=4 first_avail=3 last_avail=4\n dst y write=5 first_avail=5 last_avail=5\nend\n");
    let p = write_temp(&dir, "dup.isa", &dup);
    let out = hazmap(&["reduce", &p, "--level", "full"]);
    assert!(
        out.stdout
            .contains("class inst1 depth=5 members: inst1 inst1b\n"),
        "{}",
        out.stdout
    );
    assert!(out.stdout.starts_with("level FULL: 2 classes\n"));
}

#[test]
fn empty_set_is_rejected_for_analysis() {
    let dir = tempfile::tempdir().unwrap();
    let p = write_temp(&dir, "empty.isa", "# nothing here\n");
    assert_eq!(hazmap(&["validate", &p]).status, ExitStatus::Success);
    assert_eq!(hazmap(&["reduce", &p]).status, ExitStatus::Diagnostics);
    assert_eq!(hazmap(&["hazards", &p]).status, ExitStatus::Diagnostics);
    assert_eq!(hazmap(&["verify", &p]).status, ExitStatus::Diagnostics);
}

#[test]
fn hazards_for_one_pair_as_csv() {
    let out = hazmap(&[
        "hazards",
        data("raw_sample.isa").to_str().unwrap(),
        "--type",
        "raw",
        "--pair",
        "inst1,inst2",
        "--format",
        "csv",
    ]);
    assert_eq!(out.status, ExitStatus::Success);
    assert_eq!(out.stdout.lines().count(), 13);
    let none = hazmap(&[
        "hazards",
        data("raw_sample.isa").to_str().unwrap(),
        "--pair",
        "inst2,inst1",
        "--format",
        "csv",
    ]);
    assert_eq!(none.stdout.lines().count(), 1);
    let unknown = hazmap(&[
        "hazards",
        data("raw_sample.isa").to_str().unwrap(),
        "--pair",
        "inst1,nope",
    ]);
    assert_eq!(unknown.status, ExitStatus::Usage);
}

#[test]
fn no_reduce_is_byte_identical() {
    for file in ["raw_sample.isa", "write_sample.isa"] {
        let p = data(file);
        let p = p.to_str().unwrap();
        assert_eq!(
            hazmap(&["hazards", p]).stdout,
            hazmap(&["hazards", p, "--no-reduce"]).stdout
        );
    }
}

#[test]
fn diagram_waw_single_stall() {
    let out = hazmap(&[
        "diagram",
        data("write_sample.isa").to_str().unwrap(),
        "--older",
        "inst1",
        "--newer",
        "inst1",
        "--type",
        "waw",
        "--dst",
        "d2",
        "--dst2",
        "d1",
    ]);
    assert_eq!(out.status, ExitStatus::Success);
    assert_eq!(out.stdout.matches('S').count(), 2, "{}", out.stdout); // cell + legend
    assert!(out.stdout.contains("> 1 | . S o o o\n"));
}

#[test]
fn diagram_unknown_operand_is_usage_error() {
    let out = hazmap(&[
        "diagram",
        data("raw_sample.isa").to_str().unwrap(),
        "--older",
        "inst1",
        "--newer",
        "inst2",
        "--type",
        "raw",
        "--dst",
        "d7",
        "--src",
        "s1",
    ]);
    assert_eq!(out.status, ExitStatus::Usage);
    assert!(out.stderr.contains("d7"));
}

#[test]
fn verify_sample_files() {
    let a = data("raw_sample.isa");
    let b = data("write_sample.isa");
    let out = hazmap(&["verify", a.to_str().unwrap(), b.to_str().unwrap()]);
    assert_eq!(out.status, ExitStatus::Success);
    assert_eq!(out.stdout.lines().count(), 2);
}

#[test]
fn verify_fuzz_prints_seed() {
    let out = hazmap(&["verify", "--fuzz", "--samples", "50", "--seed", "9"]);
    assert_eq!(out.status, ExitStatus::Success);
    assert!(out.stdout.contains("seed 9 samples 50"), "{}", out.stdout);
}

/// WAW rule with its range capped by the second writer's own write stage,
/// which never reports anything.
fn misprinted_waw(set: &InstructionSet, types: &[HazardType]) -> Vec<HazardRecord> {
    enumerate_all(set, types, true)
        .into_iter()
        .filter(|r| r.kind != HazardType::Waw)
        .collect()
}

/// RAW stalls off by one.
fn off_by_one(set: &InstructionSet, types: &[HazardType]) -> Vec<HazardRecord> {
    enumerate_all(set, types, true)
        .into_iter()
        .map(|mut r| {
            if let Resolution::Stall { cycles } = r.resolution {
                r.resolution = Resolution::Stall { cycles: cycles + 1 };
            }
            r
        })
        .collect()
}

#[test]
fn corrupted_rules_fail_verification() {
    let p = data("write_sample.isa");
    let out = run_args(&["verify", p.to_str().unwrap()], Some(&misprinted_waw));
    assert_eq!(out.status, ExitStatus::Mismatch);
    assert!(
        out.stdout
            .contains("oracle only: WAW case inst1(1).d2 = inst1(2).d1 at (1,2) gap 1: stall 1"),
        "{}",
        out.stdout
    );

    let out = run_args(&["verify", "--fuzz", "--samples", "20"], Some(&off_by_one));
    assert_eq!(out.status, ExitStatus::Mismatch);
    assert!(out.stdout.contains("rules only "));
}

#[test]
fn binary_exit_codes() {
    let bin = env!("CARGO_BIN_EXE_hazmap");
    let status = Command::new(bin).args(["hazards"]).output().unwrap().status;
    assert_eq!(status.code(), Some(2));
    let status = Command::new(bin)
        .args([
            "hazards",
            data("raw_sample.isa").to_str().unwrap(),
            "--format",
            "xml",
        ])
        .output()
        .unwrap()
        .status;
    assert_eq!(status.code(), Some(2));
    let out = Command::new(bin)
        .args(["validate", data("write_sample.isa").to_str().unwrap()])
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(0));
}
