//! Direct transcriptions of the definitions, evaluated by enumeration. They
//! share no search code with the solver and serve as its cross-check.

use crate::error::Result;
use crate::game::{enumerate_feasible, Allocation, CoalitionStructure, Instance, Limits};
use crate::kernels::balance_dominates;

/// No agent has an accessible resource whose load after joining is below its cost.
pub fn nash_by_moves(inst: &Instance, a: &Allocation) -> bool {
    (0..inst.agent_count()).all(|j| {
        let here = a.resource_of(j);
        inst.accessible(j).iter().all(|&r| r == here || a.with_move(j, r).load(r) >= a.load(here))
    })
}

/// Every agent weakly better off under `b` and one strictly.
pub fn pareto_improves(b: &Allocation, a: &Allocation) -> bool {
    let mut strict = false;
    for j in 0..a.agent_count() {
        let (old, new) = (a.load(a.resource_of(j)), b.load(b.resource_of(j)));
        if new > old {
            return false;
        }
        strict |= new < old;
    }
    strict
}

/// No feasible allocation Pareto improves on `a`.
pub fn pareto_by_enumeration(inst: &Instance, a: &Allocation, limits: &Limits) -> Result<bool> {
    for b in enumerate_feasible(inst, limits)? {
        if pareto_improves(&b, a) {
            return Ok(false);
        }
    }
    Ok(true)
}

/// The maximal set by pairwise comparison of all feasible allocations.
pub fn maximal_by_pairs(inst: &Instance, structure: &CoalitionStructure, limits: &Limits) -> Result<Vec<Allocation>> {
    let all: Vec<Allocation> = enumerate_feasible(inst, limits)?.collect();
    let mut out = Vec::new();
    for y in &all {
        let mut dominated = false;
        for x in &all {
            if balance_dominates(x, y, structure)? {
                dominated = true;
                break;
            }
        }
        if !dominated {
            out.push(y.clone());
        }
    }
    Ok(out)
}

/// Every `(coalition index, b)` with `b` induced when that coalition blocks `a`,
/// found by enumerating all feasible `b`.
pub fn blocking_pairs_by_enumeration(
    inst: &Instance,
    a: &Allocation,
    structure: &CoalitionStructure,
    limits: &Limits,
) -> Result<Vec<(usize, Allocation)>> {
    let mut out = Vec::new();
    for b in enumerate_feasible(inst, limits)? {
        for (ci, c) in structure.coalitions().iter().enumerate() {
            let fixed = (0..a.agent_count()).all(|j| c.contains(j) || a.resource_of(j) == b.resource_of(j));
            if !fixed {
                continue;
            }
            let mut strict = false;
            let mut weak = true;
            for &j in c.members() {
                let (old, new) = (a.load(a.resource_of(j)), b.load(b.resource_of(j)));
                weak &= new <= old;
                strict |= new < old;
            }
            if weak && strict {
                out.push((ci, b.clone()));
            }
        }
    }
    Ok(out)
}
