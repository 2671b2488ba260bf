//! Seeded property suites. Case `i` of a suite run with base seed `s` draws
//! everything from `ChaCha8Rng::seed_from_u64(case_seed(s, i))`, so any
//! reported case can be replayed alone. Cases run in parallel and are merged
//! in case order.

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::deviations::{blocks, improving_moves, induced_allocations};
use crate::error::{IscgError, Result};
use crate::game::{enumerate_feasible, Allocation, Coalition, CoalitionStructure, Instance, Limits};
use crate::solver::{find_stable, is_c_stable, is_nash, is_pareto, maximal_allocations, SolveMode, SolveOptions};
use crate::verify::generator::{
    case_seed, random_coalition, random_feasible, sample_instance, CoalitionShape, GeneratorConfig,
};
use crate::verify::lemmas::{check_lemma1, check_lemma2, check_lemma3a, stratum_bound};
use crate::verify::oracles::{blocking_pairs_by_enumeration, maximal_by_pairs, nash_by_moves, pareto_by_enumeration};
use crate::verify::proof::check_proof_steps;

pub const THEOREM_CASES: u64 = 1000;
pub const LEMMA1_CASES: u64 = 10_000;
pub const LEMMA2_INSTANCES: u64 = 200;
pub const LEMMA3A_CASES: u64 = 1000;
pub const LEMMA3B_CASES: u64 = 1000;
/// Accepted cases required at the default size; shorter runs need a fifth of their cases.
pub const LEMMA3B_MIN_ACCEPTED: u64 = 200;
pub const PROOF_PAIRS: u64 = 200;

/// Redraws allowed while looking for a case that meets a suite's hypotheses.
const ATTEMPTS: usize = 64;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Violation {
    pub case: u64,
    pub seed: u64,
    pub message: String,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SuiteReport {
    pub name: String,
    pub base_seed: u64,
    pub cases: u64,
    /// Cases whose hypotheses held and were checked.
    pub accepted: u64,
    /// Cases discarded because no sample met the hypotheses.
    pub rejected: u64,
    /// Individual assertions evaluated.
    pub checks: u64,
    pub min_accepted: u64,
    pub violations: Vec<Violation>,
}

impl SuiteReport {
    pub fn passed(&self) -> bool {
        self.violations.is_empty() && self.accepted >= self.min_accepted
    }

    pub fn rejection_rate(&self) -> f64 {
        if self.cases == 0 {
            0.0
        } else {
            self.rejected as f64 / self.cases as f64
        }
    }

    pub fn summary(&self) -> String {
        let mut line = format!(
            "{}: {} cases, {} accepted, {} rejected ({:.1}%), {} checks, {} violations",
            self.name,
            self.cases,
            self.accepted,
            self.rejected,
            100.0 * self.rejection_rate(),
            self.checks,
            self.violations.len()
        );
        if let Some(v) = self.violations.first() {
            line.push_str(&format!("; first: case {} seed {:#018x}: {}", v.case, v.seed, v.message));
        }
        line
    }
}

/// Result of one case.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Outcome {
    Accepted { checks: u64 },
    Rejected,
    Violated(String),
}

impl Outcome {
    fn from_result(r: Result<u64>) -> Self {
        match r {
            Ok(checks) => Outcome::Accepted { checks },
            Err(IscgError::HypothesisViolated(_)) => Outcome::Rejected,
            Err(e) => Outcome::Violated(e.to_string()),
        }
    }
}

fn fail(msg: impl Into<String>) -> IscgError {
    IscgError::PropertyViolated(msg.into())
}

fn reject() -> IscgError {
    IscgError::HypothesisViolated("no sample met the hypotheses".into())
}

/// Evaluates `case` on every index in parallel, returning `(index, seed, value)`
/// in index order.
pub fn collect_cases<T, F>(base_seed: u64, cases: u64, case: F) -> Vec<(u64, u64, T)>
where
    T: Send,
    F: Fn(&mut ChaCha8Rng) -> T + Sync,
{
    (0..cases)
        .into_par_iter()
        .map(|i| {
            let seed = case_seed(base_seed, i);
            (i, seed, case(&mut ChaCha8Rng::seed_from_u64(seed)))
        })
        .collect()
}

fn merge<'o>(
    name: &str,
    base_seed: u64,
    cases: u64,
    min_accepted: u64,
    outcomes: impl IntoIterator<Item = (u64, u64, &'o Outcome)>,
) -> SuiteReport {
    let mut report = SuiteReport {
        name: name.to_string(),
        base_seed,
        cases,
        accepted: 0,
        rejected: 0,
        checks: 0,
        min_accepted,
        violations: Vec::new(),
    };
    for (case, seed, outcome) in outcomes {
        match outcome {
            Outcome::Accepted { checks } => {
                report.accepted += 1;
                report.checks += checks;
            }
            Outcome::Rejected => report.rejected += 1,
            Outcome::Violated(message) => report.violations.push(Violation { case, seed, message: message.clone() }),
        }
    }
    report
}

/// Runs `case` on every index in parallel and tallies the outcomes.
pub fn run_suite<F>(name: &str, base_seed: u64, cases: u64, min_accepted: u64, case: F) -> SuiteReport
where
    F: Fn(&mut ChaCha8Rng) -> Result<u64> + Sync,
{
    let outcomes = collect_cases(base_seed, cases, |rng| Outcome::from_result(case(rng)));
    merge(name, base_seed, cases, min_accepted, outcomes.iter().map(|(i, s, o)| (*i, *s, o)))
}

fn config(
    agents: std::ops::RangeInclusive<usize>,
    resources: std::ops::RangeInclusive<usize>,
    density: f64,
    max_size: usize,
) -> GeneratorConfig {
    GeneratorConfig {
        seed: 0,
        agents,
        resources,
        access_density: density,
        coalition_shape: CoalitionShape::RandomPartition { max_size },
    }
}

/// Instances of the theorem suite: `n ≤ 5`, `m ≤ 3`, random partitions.
pub fn theorem_config() -> GeneratorConfig {
    config(1..=5, 1..=3, 0.6, 3)
}

/// The three reports drawn from the theorem instances.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TheoremSuites {
    /// The maximal set is nonempty, agrees with pairwise enumeration, and each
    /// member is Nash, Pareto and C-stable.
    pub theorem: SuiteReport,
    /// Each maximal allocation passes independent Nash and Pareto oracles.
    pub appendix: SuiteReport,
    /// The heuristic solver is fully certified and the exact one lands in the maximal set.
    pub solver: SuiteReport,
}

type Triple = (Outcome, Outcome, Outcome);

fn theorem_case(rng: &mut ChaCha8Rng, limits: &Limits) -> Triple {
    let (inst, structure) = sample_instance(&theorem_config(), rng);
    let maximal = match maximal_allocations(&inst, &structure, limits) {
        Ok(k) => k,
        Err(e) => {
            let o = Outcome::Violated(e.to_string());
            return (o.clone(), o.clone(), o);
        }
    };
    let theorem = Outcome::from_result((|| {
        if maximal.is_empty() {
            return Err(fail("maximal set is empty"));
        }
        if maximal_by_pairs(&inst, &structure, limits)? != maximal {
            return Err(fail("maximal set differs from pairwise enumeration"));
        }
        for a in &maximal {
            if !is_nash(&inst, a)?.holds {
                return Err(fail(format!("maximal {a} is not Nash")));
            }
            if !is_pareto(&inst, a, limits)?.holds {
                return Err(fail(format!("maximal {a} is not Pareto efficient")));
            }
            if !is_c_stable(&inst, a, &structure, limits)?.holds {
                return Err(fail(format!("maximal {a} is not C-stable")));
            }
        }
        Ok(3 * maximal.len() as u64 + 1)
    })());
    let appendix = Outcome::from_result((|| {
        for a in &maximal {
            if !nash_by_moves(&inst, a) {
                return Err(fail(format!("maximal {a} fails the Nash oracle")));
            }
            if !pareto_by_enumeration(&inst, a, limits)? {
                return Err(fail(format!("maximal {a} fails the Pareto oracle")));
            }
        }
        Ok(2 * maximal.len() as u64)
    })());
    let solver = Outcome::from_result((|| {
        let h = find_stable(
            &inst,
            &structure,
            &SolveOptions { limits: *limits, ..SolveOptions::new(SolveMode::Heuristic) },
        )?;
        if !h.report.all_hold() || !h.report.is_certified() {
            return Err(fail(format!("heuristic output {} is not certified", h.allocation)));
        }
        h.report.validate_witnesses(&inst)?;
        let e =
            find_stable(&inst, &structure, &SolveOptions { limits: *limits, ..SolveOptions::new(SolveMode::Exact) })?;
        if !maximal.contains(&e.allocation) {
            return Err(fail(format!("exact output {} is not maximal", e.allocation)));
        }
        Ok(2)
    })());
    (theorem, appendix, solver)
}

pub fn theorem_suites(base_seed: u64, cases: u64, limits: &Limits) -> TheoremSuites {
    let triples = collect_cases(base_seed, cases, |rng| theorem_case(rng, limits));
    let part = |name: &str, f: fn(&Triple) -> &Outcome| {
        merge(name, base_seed, cases, 0, triples.iter().map(|(i, s, t)| (*i, *s, f(t))))
    };
    TheoremSuites {
        theorem: part("theorem", |t| &t.0),
        appendix: part("appendix", |t| &t.1),
        solver: part("solver", |t| &t.2),
    }
}

/// Same-coalition swaps on random allocations leave every kernel unchanged.
pub fn lemma1_suite(base_seed: u64, cases: u64) -> SuiteReport {
    let cfg = config(2..=8, 2..=4, 0.7, 4);
    run_suite("lemma1", base_seed, cases, 0, |rng| {
        for _ in 0..ATTEMPTS {
            let (inst, structure) = sample_instance(&cfg, rng);
            let a = random_feasible(&inst, rng);
            let pairs: Vec<(usize, usize)> = structure
                .coalitions()
                .iter()
                .flat_map(|c| {
                    let members = c.members();
                    members
                        .iter()
                        .flat_map(move |&x| members.iter().map(move |&y| (x, y)))
                        .filter(|&(x, y)| x < y)
                        .collect::<Vec<_>>()
                })
                .filter(|&(x, y)| a.resource_of(x) != a.resource_of(y))
                .collect();
            if let Some(&(j1, j2)) = pairs.choose(rng) {
                if !check_lemma1(&a, &structure, j1, j2)? {
                    return Err(fail(format!("swap of {} and {} in {a} changes a kernel", j1 + 1, j2 + 1)));
                }
                return Ok(1);
            }
        }
        Err(reject())
    })
}

/// Every improving move of every feasible allocation C-balance dominates.
pub fn lemma2_suite(base_seed: u64, instances: u64, limits: &Limits) -> SuiteReport {
    let cfg = config(1..=6, 2..=4, 0.6, 4);
    run_suite("lemma2", base_seed, instances, 0, |rng| {
        let (inst, structure) = sample_instance(&cfg, rng);
        let mut checks = 0;
        for a in enumerate_feasible(&inst, limits)? {
            for mv in improving_moves(&inst, &a, &structure)? {
                if !check_lemma2(&inst, &a, &structure, &mv)? {
                    return Err(fail(format!("move of agent {} from {a} does not dominate", mv.agent + 1)));
                }
                checks += 1;
            }
        }
        Ok(checks)
    })
}

/// `(inst, structure, a, coalition index, b)` with the coalition blocking `a` via `b`.
type BlockingPair = (Instance, CoalitionStructure, Allocation, usize, Allocation);

fn draw_blocking(cfg: &GeneratorConfig, rng: &mut ChaCha8Rng, limits: &Limits) -> Result<Option<BlockingPair>> {
    for _ in 0..ATTEMPTS {
        let (inst, structure) = sample_instance(cfg, rng);
        let a = random_feasible(&inst, rng);
        let mut order: Vec<usize> = (0..structure.len()).collect();
        order.shuffle(rng);
        for ci in order {
            let c = &structure.coalitions()[ci];
            let all: Vec<Allocation> = induced_allocations(&inst, &a, c, limits)?.collect::<Result<_>>()?;
            if let Some(b) = all.choose(rng) {
                let b = b.clone();
                return Ok(Some((inst, structure, a, ci, b)));
            }
        }
    }
    Ok(None)
}

/// Every allocation induced by a blocking coalition welfare-dominates.
pub fn lemma3a_suite(base_seed: u64, cases: u64, limits: &Limits) -> SuiteReport {
    let cfg = config(2..=6, 2..=4, 0.7, 4);
    run_suite("lemma3a", base_seed, cases, 0, |rng| {
        for _ in 0..ATTEMPTS {
            let (inst, _) = sample_instance(&cfg, rng);
            let a = random_feasible(&inst, rng);
            let c = random_coalition(inst.agent_count(), rng);
            if blocks(&inst, &a, &c, limits)?.is_none() {
                continue;
            }
            if !check_lemma3a(&inst, &a, &c, limits)? {
                return Err(fail(format!("an allocation induced by {c:?} blocking {a} is not welfare dominant")));
            }
            return Ok(1);
        }
        Err(reject())
    })
}

/// Filtered sampling: a blocking pair and a random resource set containing the
/// resources the pair agrees on; samples failing the premises are rejected.
pub fn lemma3b_suite(base_seed: u64, cases: u64, limits: &Limits) -> SuiteReport {
    let cfg = config(2..=6, 2..=4, 0.7, 4);
    run_suite("lemma3b", base_seed, cases, LEMMA3B_MIN_ACCEPTED.min(cases / 5), |rng| {
        let Some((_, structure, a, ci, b)) = draw_blocking(&cfg, rng, limits)? else {
            return Err(reject());
        };
        let c = &structure.coalitions()[ci];
        let m = a.resource_count();
        let mtilde: Vec<bool> = (0..m).map(|i| a.members(i) == b.members(i) || rng.gen_bool(0.25)).collect();
        let bound = stratum_bound(&a, &b, c, &mtilde)?;
        if !bound.holds() {
            return Err(fail(format!("stratum bound {bound:?} fails for {a} -> {b}, M~ {mtilde:?}")));
        }
        Ok(1)
    })
}

/// Proof replay on random blocking pairs, plus the vacuity check on maximal
/// allocations of the same instances.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ProofSuites {
    pub replay: SuiteReport,
    /// No coalition of the structure blocks any maximal allocation, checked by
    /// enumerating every feasible allocation.
    pub vacuity: SuiteReport,
}

fn replay_case(rng: &mut ChaCha8Rng, limits: &Limits) -> (Outcome, Outcome) {
    let cfg = config(2..=6, 2..=4, 0.7, 4);
    let drawn = match draw_blocking(&cfg, rng, limits) {
        Ok(Some(d)) => d,
        Ok(None) => return (Outcome::Rejected, Outcome::Rejected),
        Err(e) => return (Outcome::Violated(e.to_string()), Outcome::Violated(e.to_string())),
    };
    let (inst, structure, a, ci, b) = drawn;
    let c: &Coalition = &structure.coalitions()[ci];
    let replay = Outcome::from_result((|| {
        let trace = check_proof_steps(&inst, &a, &b, c, &structure)?;
        let (n, m) = (inst.agent_count(), inst.resource_count());
        if !trace.residual_lengths_are_two() {
            return Err(fail("a residual chain is longer than 2"));
        }
        if !trace.splits_resources(m) {
            return Err(fail("M0/M-/M+ do not partition the resources"));
        }
        if trace.swaps.len() > n * m {
            return Err(fail("more than n*m shortening updates"));
        }
        Ok(3)
    })());
    let vacuity = Outcome::from_result((|| {
        let maximal = maximal_allocations(&inst, &structure, limits)?;
        for x in &maximal {
            if let Some((ci, y)) = blocking_pairs_by_enumeration(&inst, x, &structure, limits)?.into_iter().next() {
                return Err(fail(format!("coalition {} blocks maximal {x} via {y}", ci + 1)));
            }
        }
        if maximal.contains(&a) {
            return Err(fail(format!("blocked allocation {a} is in the maximal set")));
        }
        Ok(maximal.len() as u64 + 1)
    })());
    (replay, vacuity)
}

pub fn proof_suites(base_seed: u64, pairs: u64, limits: &Limits) -> ProofSuites {
    let results = collect_cases(base_seed, pairs, |rng| replay_case(rng, limits));
    ProofSuites {
        replay: merge("proof-replay", base_seed, pairs, pairs, results.iter().map(|(i, s, o)| (*i, *s, &o.0))),
        vacuity: merge("proof-vacuity", base_seed, pairs, pairs, results.iter().map(|(i, s, o)| (*i, *s, &o.1))),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn small_runs_pass_and_replay() {
        let limits = Limits::default();
        let t = theorem_suites(5, 20, &limits);
        for r in [&t.theorem, &t.appendix, &t.solver] {
            assert!(r.passed(), "{}", r.summary());
            assert_eq!(r.accepted, 20);
        }
        assert!(lemma1_suite(5, 50).passed());
        assert!(lemma2_suite(5, 5, &limits).passed());
        assert!(lemma3a_suite(5, 20, &limits).passed());
        let p = proof_suites(5, 10, &limits);
        assert!(p.replay.passed(), "{}", p.replay.summary());
        assert!(p.vacuity.passed(), "{}", p.vacuity.summary());
        assert_eq!(lemma1_suite(9, 30), lemma1_suite(9, 30));
    }

    #[test]
    fn violations_carry_replayable_seeds() {
        let r = run_suite("odd", 11, 8, 0, |rng| if rng.gen_bool(0.5) { Err(fail("odd")) } else { Ok(1) });
        for v in &r.violations {
            let mut rng = ChaCha8Rng::seed_from_u64(v.seed);
            assert!(rng.gen_bool(0.5));
            assert_eq!(case_seed(11, v.case), v.seed);
        }
        assert_eq!(r.accepted + r.violations.len() as u64, 8);
    }
}
