//! Stability checkers, the maximal set, a certified solver and deviation dynamics.

mod dynamics;
pub mod heuristic;
mod maximal;
mod stability;

pub use dynamics::{run_dynamics, CanonicalPolicy, DeviationPolicy, DynamicsStep, DynamicsTrace, Terminal};
pub use maximal::maximal_allocations;
pub use stability::{
    is_c_stable, is_nash, is_pareto, is_super_strong, stability_report, StabilityCheck, StabilityReport,
};

use crate::error::{IscgError, Result};
use crate::game::{Allocation, CoalitionStructure, Instance, Limits};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum SolveMode {
    Exact,
    Heuristic,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SolveOptions {
    pub mode: SolveMode,
    /// Longest chain (in resources) the heuristic tries; defaults to `m`.
    pub chain_limit: Option<usize>,
    pub limits: Limits,
}

impl SolveOptions {
    pub fn new(mode: SolveMode) -> Self {
        SolveOptions { mode, chain_limit: None, limits: Limits::default() }
    }
}

/// A certified allocation.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Solution {
    pub allocation: Allocation,
    pub report: StabilityReport,
    /// The heuristic result failed certification and the exact solver was used.
    pub fell_back: bool,
}

fn exact(inst: &Instance, structure: &CoalitionStructure, limits: &Limits) -> Result<Allocation> {
    maximal_allocations(inst, structure, limits)?
        .into_iter()
        .next()
        .ok_or_else(|| IscgError::PropertyViolated("maximal set is empty".into()))
}

/// An allocation that is simultaneously Nash, Pareto efficient and stable
/// against every coalition of the partition.
pub fn find_stable(inst: &Instance, structure: &CoalitionStructure, opts: &SolveOptions) -> Result<Solution> {
    structure.require_partition()?;
    let limits = &opts.limits;
    let certify = |a: &Allocation| stability_report(inst, a, structure, false, limits);
    match opts.mode {
        SolveMode::Exact => {
            let allocation = exact(inst, structure, limits)?;
            let report = certify(&allocation)?;
            if !report.is_certified() {
                return Err(IscgError::PropertyViolated(format!("maximal allocation {allocation} is not stable")));
            }
            Ok(Solution { allocation, report, fell_back: false })
        }
        SolveMode::Heuristic => {
            let chain_limit = opts.chain_limit.unwrap_or(inst.resource_count()).max(2);
            let candidate = heuristic::ascend(inst, structure, chain_limit)?;
            let report = certify(&candidate)?;
            if report.is_certified() {
                return Ok(Solution { allocation: candidate, report, fell_back: false });
            }
            let allocation = exact(inst, structure, limits)?;
            let report = certify(&allocation)?;
            if !report.is_certified() {
                return Err(IscgError::PropertyViolated(format!("maximal allocation {allocation} is not stable")));
            }
            Ok(Solution { allocation, report, fell_back: true })
        }
    }
}
