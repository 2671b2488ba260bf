use std::path::PathBuf;
use std::process::Command;

use iscg_cli::files::{InstanceFile, ReportFile, TerminalOut, TraceFile, VerifyFile};
use iscg_core::solver::maximal_allocations;
use iscg_core::{validate_allocation, Limits};

fn fixture(name: &str) -> String {
    let p: PathBuf = [env!("CARGO_MANIFEST_DIR"), "..", "..", "fixtures", name].iter().collect();
    p.to_string_lossy().into_owned()
}

struct Run {
    code: i32,
    stdout: String,
    stderr: String,
}

fn iscg_env(args: &[&str], env: &[(&str, &str)]) -> Run {
    let mut cmd = Command::new(env!("CARGO_BIN_EXE_iscg"));
    cmd.args(args).env_remove("ISCG_ENUM_BOUND").env_remove("ISCG_SEARCH_BOUND");
    for (k, v) in env {
        cmd.env(k, v);
    }
    let out = cmd.output().expect("binary runs");
    Run {
        code: out.status.code().expect("exited"),
        stdout: String::from_utf8(out.stdout).unwrap(),
        stderr: String::from_utf8(out.stderr).unwrap(),
    }
}

fn iscg(args: &[&str]) -> Run {
    iscg_env(args, &[])
}

fn instance(name: &str) -> (iscg_core::Instance, Option<iscg_core::CoalitionStructure>) {
    let text = std::fs::read_to_string(fixture(name)).unwrap();
    serde_json::from_str::<InstanceFile>(&text).unwrap().parse().unwrap()
}

fn without_timing(json: &str) -> String {
    json.lines().filter(|l| !l.trim_start().starts_with("\"timing_ms\"")).collect::<Vec<_>>().join("\n")
}

#[test]
fn example2_check_passes_all_three() {
    let r = iscg(&["check", &fixture("example2.instance.json"), &fixture("example2.allocation.json")]);
    assert_eq!(r.code, 0, "{}", r.stderr);
    let report: ReportFile = serde_json::from_str(&r.stdout).unwrap();
    let s = &report.stability;
    assert!(s.nash.as_ref().unwrap().holds);
    assert!(s.pareto.as_ref().unwrap().holds);
    assert!(s.partition.as_ref().unwrap().holds);
    assert!(s.super_strong.is_none());
    assert_eq!(report.kernels.coalitions.len(), 5);
    let (inst, _) = instance("example2.instance.json");
    report.revalidate(&inst).unwrap();
}

#[test]
fn example4_partition_check_fails_with_witness() {
    let (inst, _) = instance("example4.instance.json");
    for alloc in ["example4.allocation.json", "example4.allocation2.json"] {
        let r = iscg(&["check", "--partition", &fixture("example4.instance.json"), &fixture(alloc)]);
        assert_eq!(r.code, 1, "{}", r.stderr);
        let report: ReportFile = serde_json::from_str(&r.stdout).unwrap();
        assert!(report.stability.nash.is_none());
        let p = report.stability.partition.as_ref().unwrap();
        assert!(!p.holds);
        assert!(p.coalition_index.is_some());
        assert!(p.witness.is_some());
        report.revalidate(&inst).unwrap();
    }
    let r = iscg(&["check", "--partition", &fixture("example4.instance.json"), &fixture("example4.allocation.json")]);
    let report: ReportFile = serde_json::from_str(&r.stdout).unwrap();
    let p = report.stability.partition.unwrap();
    assert_eq!(p.coalition_index, Some(1));
    let w = p.witness.unwrap();
    assert_eq!(w.coalition, vec![1, 3]);
    assert_eq!(w.induced, vec![1, 2, 2]);
}

#[test]
fn input_errors_exit_2() {
    let dir = tempfile::tempdir().unwrap();
    let write = |name: &str, body: &str| {
        let p = dir.path().join(name);
        std::fs::write(&p, body).unwrap();
        p.to_string_lossy().into_owned()
    };
    let good_inst = fixture("example4.instance.json");
    let good_alloc = fixture("example4.allocation.json");
    let cases: Vec<(Vec<String>, &str)> = vec![
        (vec!["check".into(), write("bad.json", "{\"agents\": 3,"), good_alloc.clone()], "malformed"),
        (
            vec![
                "check".into(),
                write("extra.json", r#"{"agents":1,"resources":1,"access":[[1]],"colour":"red"}"#),
                write("a.json", "[1]"),
            ],
            "unknown key",
        ),
        (
            vec![
                "check".into(),
                write("range.json", r#"{"agents":1,"resources":1,"access":[[2]]}"#),
                write("b.json", "[1]"),
            ],
            "resource out of range",
        ),
        (vec!["check".into(), good_inst.clone(), write("infeasible.json", "[2, 2, 1]")], "infeasible"),
        (vec!["check".into(), good_inst.clone(), write("partial.json", "[1, null, 1]")], "not total"),
        (vec!["check".into(), good_inst.clone(), write("long.json", "[1, 2, 1, 1]")], "too many agents"),
        (
            vec![
                "check".into(),
                "--partition".into(),
                write("plain.json", r#"{"agents":1,"resources":1,"access":[[1]]}"#),
                write("c.json", "[1]"),
            ],
            "no coalitions",
        ),
        (vec!["solve".into(), good_inst.clone()], "family given to solve"),
        (
            vec!["check".into(), good_inst.clone(), dir.path().join("missing.json").to_string_lossy().into()],
            "missing file",
        ),
        (vec!["check".into(), "--frobnicate".into()], "unknown flag"),
        (vec!["verify".into(), "--suite".into(), "everything".into()], "unknown suite"),
    ];
    for (args, what) in cases {
        let args: Vec<&str> = args.iter().map(String::as_str).collect();
        let r = iscg(&args);
        assert_eq!(r.code, 2, "{what}: {}", r.stderr);
        assert!(!r.stderr.is_empty(), "{what}");
        assert!(r.stdout.is_empty(), "{what}");
    }
}

#[test]
fn bound_errors_exit_3_with_guidance() {
    let r = iscg_env(&["solve", "--mode", "exact", &fixture("example2.instance.json")], &[("ISCG_ENUM_BOUND", "1000")]);
    assert_eq!(r.code, 3);
    assert!(r.stderr.contains("ISCG_ENUM_BOUND=32768"), "{}", r.stderr);

    // 4^18 allocations: certifying Pareto efficiency needs a larger budget
    let r = iscg(&["solve", &fixture("example3.instance.json")]);
    assert_eq!(r.code, 3);
    assert!(r.stderr.contains("hint: set ISCG_ENUM_BOUND="), "{}", r.stderr);

    for var in ["ISCG_ENUM_BOUND", "ISCG_SEARCH_BOUND"] {
        let r = iscg_env(&["solve", &fixture("example2.instance.json")], &[(var, "lots")]);
        assert_eq!(r.code, 2);
    }
}

#[test]
fn solve_example2_exact_lands_in_the_maximal_set() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("report.json");
    let r = iscg(&["solve", "--mode", "exact", &fixture("example2.instance.json"), "--out", out.to_str().unwrap()]);
    assert_eq!(r.code, 0, "{}", r.stderr);
    assert!(r.stdout.is_empty());
    let text = std::fs::read_to_string(&out).unwrap();
    let report: ReportFile = serde_json::from_str(&text).unwrap();
    assert!(report.stability.all_hold());
    assert_eq!(report.solver.as_ref().unwrap().mode, "exact");

    let (inst, structure) = instance("example2.instance.json");
    report.revalidate(&inst).unwrap();
    let raw: Vec<Option<usize>> = report.allocation.iter().map(|&r| Some(r)).collect();
    let a = validate_allocation(&inst, &raw).unwrap().allocation;
    assert!(maximal_allocations(&inst, &structure.unwrap(), &Limits::default()).unwrap().contains(&a));
}

#[test]
fn solve_heuristic_and_single_agent() {
    let r = iscg(&["solve", "--chain-limit", "2", &fixture("example2.instance.json")]);
    assert_eq!(r.code, 0, "{}", r.stderr);
    let report: ReportFile = serde_json::from_str(&r.stdout).unwrap();
    assert!(report.stability.all_hold());
    assert_eq!(report.solver.as_ref().unwrap().mode, "heuristic");
    let (inst, _) = instance("example2.instance.json");
    report.revalidate(&inst).unwrap();

    let r = iscg(&["solve", &fixture("n1.instance.json")]);
    assert_eq!(r.code, 0);
    let report: ReportFile = serde_json::from_str(&r.stdout).unwrap();
    assert_eq!(report.allocation, vec![2]);
}

#[test]
fn files_round_trip() {
    for name in ["example1.instance.json", "example2.instance.json", "example3.instance.json", "example4.instance.json"]
    {
        let text = std::fs::read_to_string(fixture(name)).unwrap();
        let file: InstanceFile = serde_json::from_str(&text).unwrap();
        let (inst, structure) = file.parse().unwrap();
        assert_eq!(InstanceFile::from_game(&inst, structure.as_ref()), file, "{name}");
    }
    let r =
        iscg(&["check", "--super-strong", &fixture("example4.instance.json"), &fixture("example4.allocation.json")]);
    assert_eq!(r.code, 1);
    let report: ReportFile = serde_json::from_str(&r.stdout).unwrap();
    assert_eq!(iscg_cli::files::to_json(&report), r.stdout);
    let (inst, _) = instance("example4.instance.json");
    report.revalidate(&inst).unwrap();

    // a tampered witness no longer validates
    let mut bad = report.clone();
    let w = bad.stability.super_strong.as_mut().unwrap().witness.as_mut().unwrap();
    w.member_costs[0].new += 1;
    assert!(bad.revalidate(&inst).is_err());
}

#[test]
fn dynamics_traces() {
    // Example 3 from a: the first step is the big coalition's deviation
    let r = iscg(&[
        "dynamics",
        &fixture("example3.instance.json"),
        "--start",
        &fixture("example3.allocation.json"),
        "--max-steps",
        "1",
    ]);
    assert_eq!(r.code, 1);
    let trace: TraceFile = serde_json::from_str(&r.stdout).unwrap();
    assert_eq!(trace.terminal, TerminalOut::StepLimit);
    assert_eq!(trace.steps.len(), 1);
    assert_eq!(trace.steps[0].coalition_index, 1);
    assert_eq!(trace.steps[0].witness.coalition, (1..=13).collect::<Vec<_>>());
    let (inst, _) = instance("example3.instance.json");
    trace.revalidate(&inst).unwrap();

    // from a certified allocation nothing moves
    let dir = tempfile::tempdir().unwrap();
    let solved = dir.path().join("solved.json");
    let r = iscg(&["solve", &fixture("example2.instance.json")]);
    let report: ReportFile = serde_json::from_str(&r.stdout).unwrap();
    std::fs::write(&solved, serde_json::to_string(&report.allocation).unwrap()).unwrap();
    let r = iscg(&["dynamics", &fixture("example2.instance.json"), "--start", solved.to_str().unwrap()]);
    assert_eq!(r.code, 0, "{}", r.stderr);
    let trace: TraceFile = serde_json::from_str(&r.stdout).unwrap();
    assert_eq!(trace.terminal, TerminalOut::Stable);
    assert!(trace.steps.is_empty());

    // seeded random starts: every step is a valid deviation
    for (name, seed) in
        [("example2.instance.json", "3"), ("example3.instance.json", "5"), ("example4.instance.json", "1")]
    {
        let r = iscg(&["dynamics", &fixture(name), "--start", "random", "--seed", seed, "--max-steps", "30"]);
        assert!(r.code == 0 || r.code == 1, "{}", r.stderr);
        let trace: TraceFile = serde_json::from_str(&r.stdout).unwrap();
        assert_eq!(trace.seed, Some(seed.parse().unwrap()));
        let (inst, _) = instance(name);
        trace.revalidate(&inst).unwrap();
    }
}

#[test]
fn verify_examples_and_alias() {
    let r = iscg(&["verify", "--suite", "examples"]);
    assert_eq!(r.code, 0, "{}", r.stderr);
    let v: VerifyFile = serde_json::from_str(&r.stdout).unwrap();
    assert!(v.passed);
    assert!(v.examples.as_ref().unwrap().passed);
    let alias = iscg(&["examples"]);
    assert_eq!(alias.code, 0);
    assert_eq!(without_timing(&alias.stdout), without_timing(&r.stdout));
}

#[test]
fn verify_small_runs_report_counts() {
    let r = iscg(&["verify", "--suite", "lemmas", "--seed", "11", "--cases", "20"]);
    assert_eq!(r.code, 0, "{}", r.stderr);
    let v: VerifyFile = serde_json::from_str(&r.stdout).unwrap();
    assert_eq!(v.suites.len(), 4);
    assert!(v.suites.iter().all(|s| s.cases == 20 && s.violations.is_empty()));
    assert!(r.stderr.lines().count() >= 4);

    let r = iscg(&["verify", "--suite", "proof", "--cases", "10"]);
    assert_eq!(r.code, 0, "{}", r.stderr);
    let v: VerifyFile = serde_json::from_str(&r.stdout).unwrap();
    assert_eq!(v.seed, 7);
    assert_eq!(v.suites.len(), 2);
}

#[test]
fn repeated_runs_are_identical() {
    let runs: Vec<Vec<String>> = vec![
        vec![
            "check".into(),
            "--super-strong".into(),
            fixture("example4.instance.json"),
            fixture("example4.allocation.json"),
        ],
        vec!["solve".into(), fixture("example2.instance.json")],
        vec![
            "dynamics".into(),
            fixture("example3.instance.json"),
            "--start".into(),
            "random".into(),
            "--seed".into(),
            "9".into(),
        ],
        vec![
            "verify".into(),
            "--suite".into(),
            "theorem".into(),
            "--cases".into(),
            "25".into(),
            "--seed".into(),
            "3".into(),
        ],
    ];
    for args in runs {
        let mut first: Vec<&str> = vec!["--threads", "1"];
        first.extend(args.iter().map(String::as_str));
        let mut second: Vec<&str> = vec!["--threads", "3"];
        second.extend(args.iter().map(String::as_str));
        let (a, b) = (iscg(&first), iscg(&second));
        assert_eq!(a.code, b.code);
        assert!(!a.stdout.is_empty());
        assert_eq!(without_timing(&a.stdout), without_timing(&b.stdout), "{args:?}");
    }
}
