//! The four worked examples, transcribed with 1-based ids, and a checker that
//! recomputes every claim made about them.

use crate::deviations::{blocks, BlockingWitness};
use crate::error::{IscgError, Result};
use crate::game::{enumerate_feasible, Allocation, Coalition, CoalitionStructure, Instance, Limits};
use crate::kernels::{balance_dominates, coalition_kernel, kernel, welfare_dominates, welfare_kernel};
use crate::solver::{is_c_stable, is_nash, is_pareto, maximal_allocations};

fn alloc(n: usize, sets: &[&[usize]]) -> Allocation {
    let sets: Vec<Vec<usize>> = sets.iter().map(|s| s.iter().map(|j| j - 1).collect()).collect();
    Allocation::from_resource_sets(n, &sets).expect("fixture allocations are total")
}

fn coalition(members: &[usize]) -> Coalition {
    Coalition::new(members.iter().map(|j| j - 1)).expect("fixture coalitions are nonempty")
}

fn partition(n: usize, groups: &[&[usize]]) -> CoalitionStructure {
    let groups: Vec<Vec<usize>> = groups.iter().map(|g| g.iter().map(|j| j - 1).collect()).collect();
    CoalitionStructure::partition_of(n, &groups).expect("fixture structures are partitions")
}

/// Eight agents, four resources, full access; `a_4` empty.
pub struct KernelExample {
    pub instance: Instance,
    pub allocation: Allocation,
    pub coalition: Coalition,
}

pub fn kernel_example() -> KernelExample {
    KernelExample {
        instance: Instance::full_access(8, 4).expect("valid"),
        allocation: alloc(8, &[&[1, 2], &[3, 4, 5], &[6, 7, 8], &[]]),
        coalition: coalition(&[1, 2, 6]),
    }
}

/// A game with a fully stable allocation `a` outside the maximal set, plus an
/// allocation `better` that C-balance dominates it.
pub struct PairExample {
    pub instance: Instance,
    pub structure: CoalitionStructure,
    pub allocation: Allocation,
    pub better: Allocation,
}

/// Fifteen agents, two resources, five triples.
pub fn stable_outside_maximal_example() -> PairExample {
    PairExample {
        instance: Instance::full_access(15, 2).expect("valid"),
        structure: partition(15, &[&[1, 2, 3], &[4, 5, 6], &[7, 8, 9], &[10, 11, 12], &[13, 14, 15]]),
        allocation: alloc(15, &[&[1, 2, 4, 5, 7, 8, 10, 11], &[3, 6, 9, 12, 13, 14, 15]]),
        better: alloc(15, &[&[1, 2, 4, 7, 8, 10, 13, 14], &[3, 5, 6, 9, 11, 12, 15]]),
    }
}

/// Eighteen agents on four resources where a blocking deviation by
/// `{1..13}` leads to an allocation that does not C-balance dominate.
pub fn non_potential_example() -> PairExample {
    PairExample {
        instance: Instance::full_access(18, 4).expect("valid"),
        structure: partition(18, &[&(1..=13).collect::<Vec<_>>(), &[14, 15, 16, 17, 18]]),
        allocation: alloc(18, &[&[1, 14, 15, 16], &[2, 3, 4, 5], &[6, 7, 8, 9, 17], &[10, 11, 12, 13, 18]]),
        better: alloc(18, &[&[6, 10, 14, 15, 16], &[7, 8, 9, 11, 12], &[1, 2, 3, 17], &[4, 5, 13, 18]]),
    }
}

pub fn non_potential_coalition() -> Coalition {
    coalition(&(1..=13).collect::<Vec<_>>())
}

/// Three agents, two resources; agent 1 only on resource 1, agent 2 only on
/// resource 2, agent 3 on both; overlapping coalitions `{1,3}` and `{2,3}`.
pub fn overlapping_example() -> (Instance, CoalitionStructure) {
    let instance = Instance::from_agent_access(2, &[vec![0], vec![1], vec![0, 1]]).expect("valid");
    let family = CoalitionStructure::family_of(3, &[vec![0, 2], vec![1, 2]]).expect("valid");
    (instance, family)
}

/// One line per recomputed claim.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct ExamplesReport {
    pub lines: Vec<String>,
}

struct Checker<'r> {
    example: &'static str,
    report: &'r mut ExamplesReport,
}

impl Checker<'_> {
    fn claim<T: PartialEq + std::fmt::Debug>(&mut self, what: &str, got: T, want: T) -> Result<()> {
        if got != want {
            return Err(IscgError::PropertyViolated(format!(
                "{}: {what}: expected {want:?}, got {got:?}",
                self.example
            )));
        }
        self.report.lines.push(format!("{}: {what} = {got:?}", self.example));
        Ok(())
    }
}

/// Recomputes every stated property of the four examples; the first mismatch
/// is returned as an error naming the example.
pub fn reproduce_examples(limits: &Limits) -> Result<ExamplesReport> {
    let mut report = ExamplesReport::default();

    let ex = kernel_example();
    let mut ck = Checker { example: "example 1", report: &mut report };
    ck.claim("k(a)", kernel(&ex.allocation).entries().to_vec(), vec![3, 3, 2, 0])?;
    ck.claim("k(c,a)", coalition_kernel(&ex.allocation, &ex.coalition).entries().to_vec(), vec![2, 1, 0, 0])?;
    ck.claim("w(c,a)", welfare_kernel(&ex.allocation, &ex.coalition).entries().to_vec(), vec![0, 0, 0, 0, 0, 1, 2, 0])?;

    let ex = stable_outside_maximal_example();
    let mut ck = Checker { example: "example 2", report: &mut report };
    ck.claim("nash(a)", is_nash(&ex.instance, &ex.allocation)?.holds, true)?;
    ck.claim("pareto(a)", is_pareto(&ex.instance, &ex.allocation, limits)?.holds, true)?;
    ck.claim("C-stable(a)", is_c_stable(&ex.instance, &ex.allocation, &ex.structure, limits)?.holds, true)?;
    ck.claim("abar C-balance dominates a", balance_dominates(&ex.better, &ex.allocation, &ex.structure)?, true)?;
    let maximal = maximal_allocations(&ex.instance, &ex.structure, limits)?;
    ck.claim("feasible allocations", ex.instance.feasible_count(), 32768)?;
    ck.claim("a in maximal set", maximal.contains(&ex.allocation), false)?;

    let ex = non_potential_example();
    let c = non_potential_coalition();
    let mut ck = Checker { example: "example 3", report: &mut report };
    let witness = blocks(&ex.instance, &ex.allocation, &c, limits)?;
    ck.claim("c blocks a", witness.is_some(), true)?;
    if let Some(w) = &witness {
        w.validate(&ex.instance)?;
    }
    let stated_is_induced =
        BlockingWitness::new(c.clone(), ex.allocation.clone(), ex.better.clone()).validate(&ex.instance).is_ok();
    ck.claim("abar is induced when c blocks a", stated_is_induced, true)?;
    ck.claim("k(a) = k(abar)", kernel(&ex.allocation) == kernel(&ex.better), true)?;
    ck.claim("k(c,a)", coalition_kernel(&ex.allocation, &c).entries().to_vec(), vec![4, 4, 4, 1])?;
    ck.claim("k(c,abar)", coalition_kernel(&ex.better, &c).entries().to_vec(), vec![5, 3, 3, 2])?;
    ck.claim("abar C-balance dominates a", balance_dominates(&ex.better, &ex.allocation, &ex.structure)?, false)?;
    ck.claim("abar c-welfare dominates a", welfare_dominates(&ex.better, &ex.allocation, &c)?, true)?;

    let (inst, family) = overlapping_example();
    let mut ck = Checker { example: "example 4", report: &mut report };
    let all: Vec<Allocation> = enumerate_feasible(&inst, limits)?.collect();
    ck.claim("feasible allocations", all.len(), 2)?;
    for (idx, a) in all.iter().enumerate() {
        let check = is_c_stable(&inst, a, &family, limits)?;
        ck.claim(&format!("allocation {} is C-stable", idx + 1), check.holds, false)?;
        if let Some(w) = &check.witness {
            w.validate(&inst)?;
        }
    }
    Ok(report)
}
