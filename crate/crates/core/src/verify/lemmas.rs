//! Executable forms of the structural lemmas and of the existence theorem.
//! Each check returns `Err(HypothesisViolated)` when its premise fails and
//! `Ok(false)` when the conclusion fails.

use crate::deviations::{apply_chain, blocks, classify_move, induced_allocations, swap, ImprovingMove};
use crate::error::{IscgError, Result};
use crate::game::{Allocation, Coalition, CoalitionStructure, Instance, Limits};
use crate::kernels::{
    balance_dominates, coalition_counts, coalition_kernel, kernel, welfare_dominates, welfare_kernel,
};
use crate::solver::{is_c_stable, is_nash, is_pareto, maximal_allocations};

fn hypothesis(msg: impl Into<String>) -> IscgError {
    IscgError::HypothesisViolated(msg.into())
}

/// Swapping two members of the same coalition leaves `k`, every `k(c̃, ·)` and
/// every `w(c̃, ·)` unchanged.
pub fn check_lemma1(a: &Allocation, structure: &CoalitionStructure, j1: usize, j2: usize) -> Result<bool> {
    structure.require_partition()?;
    let same = structure.coalition_of(j1).is_some() && structure.coalition_of(j1) == structure.coalition_of(j2);
    if !same {
        return Err(hypothesis(format!("agents {} and {} are in different coalitions", j1 + 1, j2 + 1)));
    }
    if a.resource_of(j1) == a.resource_of(j2) {
        return Err(hypothesis(format!("agents {} and {} share a resource", j1 + 1, j2 + 1)));
    }
    let b = swap(a, j1, j2)?;
    Ok(kernel(a) == kernel(&b)
        && structure.coalitions().iter().all(|c| {
            coalition_kernel(a, c) == coalition_kernel(&b, c) && welfare_kernel(a, c) == welfare_kernel(&b, c)
        }))
}

/// A feasible single move meeting the load-gap or coalition-gap condition
/// yields an allocation that C-balance dominates the original.
pub fn check_lemma2(
    inst: &Instance,
    a: &Allocation,
    structure: &CoalitionStructure,
    mv: &ImprovingMove,
) -> Result<bool> {
    if a.resource_of(mv.agent) != mv.from || !inst.can_use(mv.agent, mv.to) {
        return Err(hypothesis(format!("move of agent {} is not a feasible move", mv.agent + 1)));
    }
    match classify_move(a, structure, mv.agent, mv.to)? {
        Some(case) if case == mv.case => {}
        _ => return Err(hypothesis(format!("move of agent {} meets neither gap condition", mv.agent + 1))),
    }
    let b = apply_chain(a, &mv.chain())?;
    balance_dominates(&b, a, structure)
}

/// Every allocation induced when `c` blocks `a` c-welfare dominates `a`.
pub fn check_lemma3a(inst: &Instance, a: &Allocation, c: &Coalition, limits: &Limits) -> Result<bool> {
    if blocks(inst, a, c, limits)?.is_none() {
        return Err(hypothesis("coalition does not block the allocation"));
    }
    for induced in induced_allocations(inst, a, c, limits)? {
        if !welfare_dominates(&induced?, a, c)? {
            return Ok(false);
        }
    }
    Ok(true)
}

/// Conclusion data of the welfare-stratum lemma on the resources outside `M̃`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct StratumBound {
    pub k_max: usize,
    pub k_bar_max: usize,
    /// Members of `c` on resources outside `M̃` of cardinality `k_max` under `a`.
    pub lhs: usize,
    /// The same count under `b`.
    pub rhs: usize,
}

impl StratumBound {
    pub fn holds(&self) -> bool {
        self.k_bar_max <= self.k_max && self.lhs >= self.rhs
    }
}

/// Checks the premises of the welfare-stratum lemma and computes its conclusion.
///
/// Premises: `b` c-welfare dominates `a`; only members of `c` move; for every
/// cardinality, the member counts on `M̃` agree between `a` and `b`; and `M̃`
/// leaves at least one resource out.
pub fn stratum_bound(a: &Allocation, b: &Allocation, c: &Coalition, mtilde: &[bool]) -> Result<StratumBound> {
    let m = a.resource_count();
    if mtilde.len() != m {
        return Err(IscgError::LengthMismatch(mtilde.len(), m));
    }
    if !welfare_dominates(b, a, c)? {
        return Err(hypothesis("b does not c-welfare dominate a"));
    }
    if (0..a.agent_count()).any(|j| !c.contains(j) && a.resource_of(j) != b.resource_of(j)) {
        return Err(hypothesis("an agent outside the coalition moves"));
    }
    if mtilde.iter().all(|&x| x) {
        return Err(hypothesis("M~ covers every resource"));
    }
    let ca = coalition_counts(a, c);
    let cb = coalition_counts(b, c);
    let n = a.agent_count();
    let mut inside_a = vec![0; n + 1];
    let mut inside_b = vec![0; n + 1];
    for i in (0..m).filter(|&i| mtilde[i]) {
        inside_a[a.load(i)] += ca[i];
        inside_b[b.load(i)] += cb[i];
    }
    if inside_a != inside_b {
        return Err(hypothesis("member counts on M~ differ at some cardinality"));
    }
    let outside: Vec<usize> = (0..m).filter(|&i| !mtilde[i]).collect();
    let k_max = outside.iter().map(|&i| a.load(i)).max().unwrap_or(0);
    let k_bar_max = outside.iter().map(|&i| b.load(i)).max().unwrap_or(0);
    let lhs = outside.iter().filter(|&&i| a.load(i) == k_max).map(|&i| ca[i]).sum();
    let rhs = outside.iter().filter(|&&i| b.load(i) == k_max).map(|&i| cb[i]).sum();
    Ok(StratumBound { k_max, k_bar_max, lhs, rhs })
}

/// `k̄_max <= k_max` and the member count at `k_max` does not grow.
pub fn check_lemma3b(a: &Allocation, b: &Allocation, c: &Coalition, mtilde: &[bool]) -> Result<bool> {
    Ok(stratum_bound(a, b, c, mtilde)?.holds())
}

/// The maximal set is nonempty and each of its members is Nash, Pareto
/// efficient and C-stable.
pub fn check_theorem1(inst: &Instance, structure: &CoalitionStructure, limits: &Limits) -> Result<bool> {
    let maximal = maximal_allocations(inst, structure, limits)?;
    if maximal.is_empty() {
        return Ok(false);
    }
    for a in &maximal {
        if !is_nash(inst, a)?.holds
            || !is_pareto(inst, a, limits)?.holds
            || !is_c_stable(inst, a, structure, limits)?.holds
        {
            return Ok(false);
        }
    }
    Ok(true)
}
