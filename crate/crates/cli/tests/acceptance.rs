//! Acceptance gate: one PASS/FAIL line per criterion, nonzero exit on any failure.

use std::path::PathBuf;
use std::process::Command;
use std::time::{Duration, Instant};

use iscg_core::deviations::blocks;
use iscg_core::kernels::{balance_dominates, coalition_kernel, kernel, welfare_dominates, welfare_kernel};
use iscg_core::solver::{is_c_stable, is_nash, is_pareto, maximal_allocations};
use iscg_core::verify::fixtures::{
    kernel_example, non_potential_coalition, non_potential_example, overlapping_example, stable_outside_maximal_example,
};
use iscg_core::verify::suites::{
    LEMMA1_CASES, LEMMA2_INSTANCES, LEMMA3A_CASES, LEMMA3B_CASES, PROOF_PAIRS, THEOREM_CASES,
};
use iscg_core::verify::{
    lemma1_suite, lemma2_suite, lemma3a_suite, lemma3b_suite, proof_suites, theorem_suites, SuiteReport,
};
use iscg_core::{enumerate_feasible, Allocation, Limits};

const SEED: u64 = 7;

type Verdict = Result<String, String>;

fn ensure(ok: bool, what: impl Into<String>) -> Result<(), String> {
    if ok {
        Ok(())
    } else {
        Err(what.into())
    }
}

fn core<T>(r: iscg_core::Result<T>) -> Result<T, String> {
    r.map_err(|e| e.to_string())
}

fn suite_ok(r: &SuiteReport, expected: u64) -> Result<String, String> {
    ensure(r.cases == expected, format!("{}: ran {} cases, expected {expected}", r.name, r.cases))?;
    ensure(r.passed(), r.summary())?;
    Ok(r.summary())
}

fn example1() -> Verdict {
    let ex = kernel_example();
    let a = &ex.allocation;
    ensure(kernel(a).entries() == [3, 3, 2, 0], format!("k(a) = {:?}", kernel(a).entries()))?;
    let ck = coalition_kernel(a, &ex.coalition);
    ensure(ck.entries() == [2, 1, 0, 0], format!("k(c,a) = {:?}", ck.entries()))?;
    let w = welfare_kernel(a, &ex.coalition);
    ensure(w.entries() == [0, 0, 0, 0, 0, 1, 2, 0], format!("w(c,a) = {:?}", w.entries()))?;
    Ok("kernel values match".into())
}

fn example2(limits: &Limits) -> Verdict {
    let ex = stable_outside_maximal_example();
    let (inst, a) = (&ex.instance, &ex.allocation);
    ensure(core(is_nash(inst, a))?.holds, "a is not Nash")?;
    ensure(core(is_pareto(inst, a, limits))?.holds, "a is not Pareto efficient")?;
    ensure(core(is_c_stable(inst, a, &ex.structure, limits))?.holds, "a is not C-stable")?;
    ensure(core(balance_dominates(&ex.better, a, &ex.structure))?, "abar does not balance dominate a")?;
    let count = core(enumerate_feasible(inst, limits))?.count();
    ensure(count == 32768, format!("{count} feasible allocations"))?;
    let maximal = core(maximal_allocations(inst, &ex.structure, limits))?;
    ensure(!maximal.contains(a), "a is maximal")?;
    Ok(format!("a stable on all three counts, outside a maximal set of {}", maximal.len()))
}

fn example3(limits: &Limits) -> Verdict {
    let ex = non_potential_example();
    let c = non_potential_coalition();
    let (a, abar) = (&ex.allocation, &ex.better);
    let w = core(blocks(&ex.instance, a, &c, limits))?.ok_or("c does not block a")?;
    core(w.validate(&ex.instance))?;
    ensure(coalition_kernel(a, &c).entries() == [4, 4, 4, 1], "k(c,a)")?;
    ensure(coalition_kernel(abar, &c).entries() == [5, 3, 3, 2], "k(c,abar)")?;
    ensure(!core(balance_dominates(abar, a, &ex.structure))?, "abar balance dominates a")?;
    ensure(core(welfare_dominates(abar, a, &c))?, "abar does not welfare dominate a")?;
    Ok("blocked, and welfare but not balance dominated".into())
}

fn example4(limits: &Limits) -> Verdict {
    let (inst, family) = overlapping_example();
    let all: Vec<Allocation> = core(enumerate_feasible(&inst, limits))?.collect();
    ensure(all.len() == 2, format!("{} feasible allocations", all.len()))?;
    for a in &all {
        let check = core(is_c_stable(&inst, a, &family, limits))?;
        let w = check.witness.ok_or(format!("{a} is not blocked"))?;
        core(w.validate(&inst))?;
    }
    Ok("both feasible allocations are blocked".into())
}

fn lemma_suites(limits: &Limits) -> Verdict {
    let reports = [
        (lemma1_suite(SEED, LEMMA1_CASES), LEMMA1_CASES),
        (lemma2_suite(SEED, LEMMA2_INSTANCES, limits), LEMMA2_INSTANCES),
        (lemma3a_suite(SEED, LEMMA3A_CASES, limits), LEMMA3A_CASES),
        (lemma3b_suite(SEED, LEMMA3B_CASES, limits), LEMMA3B_CASES),
    ];
    let mut lines = Vec::new();
    for (r, expected) in &reports {
        lines.push(suite_ok(r, *expected)?);
    }
    let l3b = &reports[3].0;
    ensure(l3b.accepted >= 200, format!("lemma3b accepted only {}", l3b.accepted))?;
    Ok(lines.join(" | "))
}

fn binary() -> PathBuf {
    PathBuf::from(env!("CARGO_BIN_EXE_iscg"))
}

fn fixture(name: &str) -> String {
    let p: PathBuf = [env!("CARGO_MANIFEST_DIR"), "..", "..", "fixtures", name].iter().collect();
    p.to_string_lossy().into_owned()
}

fn determinism() -> Verdict {
    let runs: Vec<Vec<String>> = vec![
        vec!["check".into(), fixture("example2.instance.json"), fixture("example2.allocation.json")],
        vec![
            "check".into(),
            "--super-strong".into(),
            fixture("example4.instance.json"),
            fixture("example4.allocation.json"),
        ],
        vec!["solve".into(), fixture("example2.instance.json")],
        vec!["solve".into(), "--mode".into(), "exact".into(), fixture("example2.instance.json")],
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
            "--seed".into(),
            "5".into(),
            "--cases".into(),
            "100".into(),
        ],
        vec![
            "verify".into(),
            "--suite".into(),
            "proof".into(),
            "--seed".into(),
            "5".into(),
            "--cases".into(),
            "50".into(),
        ],
        vec!["examples".into()],
    ];
    for args in &runs {
        let mut outputs = Vec::new();
        for threads in ["1", "2"] {
            let out = Command::new(binary())
                .arg("--threads")
                .arg(threads)
                .args(args)
                .env_remove("ISCG_ENUM_BOUND")
                .env_remove("ISCG_SEARCH_BOUND")
                .output()
                .map_err(|e| e.to_string())?;
            let text = String::from_utf8(out.stdout).map_err(|e| e.to_string())?;
            ensure(!text.is_empty(), format!("{args:?} printed nothing"))?;
            let kept: Vec<&str> = text.lines().filter(|l| !l.trim_start().starts_with("\"timing_ms\"")).collect();
            ensure(kept.len() + 1 == text.lines().count(), format!("{args:?}: no single timing line"))?;
            outputs.push((out.status.code(), kept.join("\n")));
        }
        ensure(outputs[0] == outputs[1], format!("{args:?} differs between runs"))?;
    }
    Ok(format!("{} commands identical across two runs", runs.len()))
}

fn main() {
    let limits = Limits::default();
    let mut failed = 0;
    let mut report = |n: u32, limit: Duration, f: &mut dyn FnMut() -> Verdict| {
        let started = Instant::now();
        let verdict = f();
        let took = started.elapsed();
        let verdict = match verdict {
            Ok(msg) if took > limit => Err(format!("took {took:.2?}, limit {limit:?}; {msg}")),
            v => v,
        };
        match verdict {
            Ok(msg) => println!("criterion {n}: PASS ({took:.2?}) {msg}"),
            Err(msg) => {
                failed += 1;
                println!("criterion {n}: FAIL ({took:.2?}) {msg}");
            }
        }
    };
    let minutes = |m: u64| Duration::from_secs(60 * m);

    report(1, Duration::from_secs(1), &mut example1);
    report(2, Duration::from_secs(10), &mut || example2(&limits));
    report(3, Duration::from_secs(5), &mut || example3(&limits));
    report(4, Duration::from_secs(1), &mut || example4(&limits));

    // criteria 7 and 8 are checked on the instances drawn for criterion 5
    let mut theorem = None;
    report(5, minutes(10), &mut || {
        let t = theorem.insert(theorem_suites(SEED, THEOREM_CASES, &limits));
        suite_ok(&t.theorem, THEOREM_CASES)
    });
    let theorem = theorem.expect("criterion 5 ran");
    report(6, minutes(10), &mut || lemma_suites(&limits));
    report(7, minutes(10), &mut || suite_ok(&theorem.appendix, THEOREM_CASES));
    report(8, minutes(10), &mut || suite_ok(&theorem.solver, THEOREM_CASES));
    report(9, minutes(10), &mut || {
        let p = proof_suites(SEED, PROOF_PAIRS, &limits);
        Ok(format!("{} | {}", suite_ok(&p.replay, PROOF_PAIRS)?, suite_ok(&p.vacuity, PROOF_PAIRS)?))
    });
    report(10, minutes(10), &mut determinism);

    if failed > 0 {
        println!("{failed} criteria failed");
        std::process::exit(1);
    }
}
