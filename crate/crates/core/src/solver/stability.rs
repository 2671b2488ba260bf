use crate::deviations::{blocks, blocks_with_bound, BlockingWitness};
use crate::error::{IscgError, Result};
use crate::game::{Allocation, Coalition, CoalitionStructure, Instance, Limits};

/// Outcome of one stability test. A failed test always carries a witness.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct StabilityCheck {
    pub holds: bool,
    pub witness: Option<BlockingWitness>,
    /// Index of the blocking coalition within the structure that was tested.
    pub coalition_index: Option<usize>,
}

impl StabilityCheck {
    fn stable() -> Self {
        StabilityCheck { holds: true, witness: None, coalition_index: None }
    }

    fn blocked(witness: BlockingWitness, coalition_index: Option<usize>) -> Self {
        StabilityCheck { holds: false, witness: Some(witness), coalition_index }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct StabilityReport {
    pub nash: Option<StabilityCheck>,
    pub pareto: Option<StabilityCheck>,
    pub partition_stable: Option<StabilityCheck>,
    pub super_strong: Option<StabilityCheck>,
}

impl StabilityReport {
    /// Every requested check holds.
    pub fn all_hold(&self) -> bool {
        [&self.nash, &self.pareto, &self.partition_stable, &self.super_strong].into_iter().flatten().all(|c| c.holds)
    }

    /// Nash, Pareto and partition stability were all checked and all hold.
    pub fn is_certified(&self) -> bool {
        [&self.nash, &self.pareto, &self.partition_stable].into_iter().all(|c| c.as_ref().is_some_and(|c| c.holds))
    }

    /// Re-validates every witness against the instance.
    pub fn validate_witnesses(&self, inst: &Instance) -> Result<()> {
        for check in [&self.nash, &self.pareto, &self.partition_stable, &self.super_strong].into_iter().flatten() {
            match (&check.witness, check.holds) {
                (Some(w), false) => w.validate(inst)?,
                (None, true) => {}
                _ => return Err(IscgError::PropertyViolated("check flag and witness disagree".into())),
            }
        }
        Ok(())
    }
}

/// No single agent can strictly lower its cost by moving.
pub fn is_nash(inst: &Instance, a: &Allocation) -> Result<StabilityCheck> {
    inst.require_feasible(a)?;
    for j in 0..inst.agent_count() {
        let cost = a.load(a.resource_of(j));
        if let Some(&to) = inst.accessible(j).iter().find(|&&r| r != a.resource_of(j) && a.load(r) + 1 < cost) {
            let induced = a.with_move(j, to);
            let witness = BlockingWitness::new(Coalition::singleton(j), a.clone(), induced);
            return Ok(StabilityCheck::blocked(witness, Some(j)));
        }
    }
    Ok(StabilityCheck::stable())
}

/// The grand coalition does not block `a`. The search over the feasible space
/// is budgeted by the enumeration bound.
pub fn is_pareto(inst: &Instance, a: &Allocation, limits: &Limits) -> Result<StabilityCheck> {
    let grand = Coalition::grand(inst.agent_count());
    match blocks_with_bound(inst, a, &grand, limits.enumeration_bound) {
        Ok(None) => Ok(StabilityCheck::stable()),
        Ok(Some(w)) => Ok(StabilityCheck::blocked(w, Some(0))),
        Err(IscgError::SearchBoundExceeded { bound }) => {
            Err(IscgError::EnumerationBoundExceeded { bound, required: inst.feasible_count() })
        }
        Err(e) => Err(e),
    }
}

/// No coalition of the structure blocks `a`. Works for partitions and families.
pub fn is_c_stable(
    inst: &Instance,
    a: &Allocation,
    structure: &CoalitionStructure,
    limits: &Limits,
) -> Result<StabilityCheck> {
    inst.require_feasible(a)?;
    for (ci, c) in structure.coalitions().iter().enumerate() {
        if let Some(w) = blocks(inst, a, c, limits)? {
            return Ok(StabilityCheck::blocked(w, Some(ci)));
        }
    }
    Ok(StabilityCheck::stable())
}

/// No nonempty coalition blocks `a`. Coalitions are tried in increasing
/// bitmask order (agent 1 is the lowest bit); the reported index is that mask.
pub fn is_super_strong(inst: &Instance, a: &Allocation, limits: &Limits) -> Result<StabilityCheck> {
    inst.require_feasible(a)?;
    let n = inst.agent_count();
    if n > limits.super_strong_max_agents || n >= 64 {
        return Err(IscgError::SearchBoundExceeded { bound: limits.super_strong_max_agents as u64 });
    }
    for mask in 1u64..(1u64 << n) {
        let c = Coalition::new((0..n).filter(|&j| mask >> j & 1 == 1))?;
        if let Some(w) = blocks(inst, a, &c, limits)? {
            return Ok(StabilityCheck::blocked(w, Some(mask as usize)));
        }
    }
    Ok(StabilityCheck::stable())
}

/// Nash, Pareto and partition stability (plus super strong when asked).
pub fn stability_report(
    inst: &Instance,
    a: &Allocation,
    structure: &CoalitionStructure,
    super_strong: bool,
    limits: &Limits,
) -> Result<StabilityReport> {
    Ok(StabilityReport {
        nash: Some(is_nash(inst, a)?),
        pareto: Some(is_pareto(inst, a, limits)?),
        partition_stable: Some(is_c_stable(inst, a, structure, limits)?),
        super_strong: if super_strong { Some(is_super_strong(inst, a, limits)?) } else { None },
    })
}
