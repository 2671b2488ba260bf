use std::collections::HashMap;

use crate::deviations::{blocks, BlockingWitness};
use crate::error::Result;
use crate::game::{Allocation, CoalitionStructure, Instance, Limits};

/// Chooses which blocking deviation to follow from the current allocation.
pub trait DeviationPolicy {
    /// `(coalition index, witness)` of the deviation to take, or `None` when stable.
    fn select(
        &self,
        inst: &Instance,
        a: &Allocation,
        structure: &CoalitionStructure,
        limits: &Limits,
    ) -> Result<Option<(usize, BlockingWitness)>>;
}

/// Lowest-index blocking coalition, canonical induced allocation.
#[derive(Debug, Clone, Copy, Default)]
pub struct CanonicalPolicy;

impl DeviationPolicy for CanonicalPolicy {
    fn select(
        &self,
        inst: &Instance,
        a: &Allocation,
        structure: &CoalitionStructure,
        limits: &Limits,
    ) -> Result<Option<(usize, BlockingWitness)>> {
        for (ci, c) in structure.coalitions().iter().enumerate() {
            if let Some(w) = blocks(inst, a, c, limits)? {
                return Ok(Some((ci, w)));
            }
        }
        Ok(None)
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DynamicsStep {
    pub coalition_index: usize,
    pub witness: BlockingWitness,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Terminal {
    Stable,
    /// The allocation reached after the last step equals the one visited at `start`.
    Cycle {
        start: usize,
    },
    StepLimit,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DynamicsTrace {
    pub start: Allocation,
    pub steps: Vec<DynamicsStep>,
    pub terminal: Terminal,
}

impl DynamicsTrace {
    /// Allocation visited at position `index` (0 is the start).
    pub fn state(&self, index: usize) -> &Allocation {
        if index == 0 {
            &self.start
        } else {
            &self.steps[index - 1].witness.induced
        }
    }

    pub fn last(&self) -> &Allocation {
        self.state(self.steps.len())
    }
}

/// Follows blocking deviations until stability, an exact repeat of a visited
/// allocation, or `max_steps` transitions. Stability is not tested once the
/// step limit is reached.
pub fn run_dynamics(
    inst: &Instance,
    structure: &CoalitionStructure,
    start: &Allocation,
    policy: &dyn DeviationPolicy,
    max_steps: usize,
    limits: &Limits,
) -> Result<DynamicsTrace> {
    inst.require_feasible(start)?;
    let mut seen: HashMap<Allocation, usize> = HashMap::from([(start.clone(), 0)]);
    let mut steps = Vec::new();
    let mut current = start.clone();
    loop {
        if steps.len() == max_steps {
            return Ok(DynamicsTrace { start: start.clone(), steps, terminal: Terminal::StepLimit });
        }
        let Some((coalition_index, witness)) = policy.select(inst, &current, structure, limits)? else {
            return Ok(DynamicsTrace { start: start.clone(), steps, terminal: Terminal::Stable });
        };
        current = witness.induced.clone();
        steps.push(DynamicsStep { coalition_index, witness });
        if let Some(&first) = seen.get(&current) {
            return Ok(DynamicsTrace { start: start.clone(), steps, terminal: Terminal::Cycle { start: first } });
        }
        seen.insert(current.clone(), steps.len());
    }
}
