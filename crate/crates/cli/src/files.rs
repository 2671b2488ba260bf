//! JSON documents read and written by the command line. All ids are 1-based.

use std::path::Path;

use serde::{Deserialize, Serialize};

use iscg_core::deviations::BlockingWitness;
use iscg_core::kernels::{coalition_kernel, kernel, welfare_kernel};
use iscg_core::solver::{DynamicsTrace, StabilityCheck, StabilityReport, Terminal};
use iscg_core::{
    validate_allocation, validate_instance, AccessSpec, Allocation, Coalition, CoalitionStructure, Instance,
    RawInstance, StructureMode,
};

use crate::error::CliError;

pub const TOOL: &str = "iscg";
pub const VERSION: &str = env!("CARGO_PKG_VERSION");

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum CoalitionMode {
    Partition,
    Family,
}

/// A game with per-agent access lists and an optional coalition structure.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct InstanceFile {
    pub agents: usize,
    pub resources: usize,
    pub access: Vec<Vec<usize>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub coalitions: Option<Vec<Vec<usize>>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub coalition_mode: Option<CoalitionMode>,
}

impl InstanceFile {
    pub fn parse(&self) -> Result<(Instance, Option<CoalitionStructure>), CliError> {
        let inst = validate_instance(&RawInstance {
            agents: self.agents,
            resources: self.resources,
            access: AccessSpec::PerAgent(self.access.clone()),
        })?;
        let structure = match &self.coalitions {
            None => None,
            Some(groups) => {
                let n = self.agents;
                let mut zero_based = Vec::with_capacity(groups.len());
                for g in groups {
                    if let Some(&bad) = g.iter().find(|&&j| j == 0 || j > n) {
                        return Err(CliError::Input(format!("coalition member {bad} outside 1..={n}")));
                    }
                    zero_based.push(g.iter().map(|j| j - 1).collect::<Vec<_>>());
                }
                Some(match self.coalition_mode.unwrap_or(CoalitionMode::Partition) {
                    CoalitionMode::Partition => CoalitionStructure::partition_of(n, &zero_based)?,
                    CoalitionMode::Family => CoalitionStructure::family_of(n, &zero_based)?,
                })
            }
        };
        Ok((inst, structure))
    }

    pub fn from_game(inst: &Instance, structure: Option<&CoalitionStructure>) -> Self {
        InstanceFile {
            agents: inst.agent_count(),
            resources: inst.resource_count(),
            access: (0..inst.agent_count()).map(|j| inst.accessible(j).iter().map(|r| r + 1).collect()).collect(),
            coalitions: structure.map(|s| s.coalitions().iter().map(one_based).collect()),
            coalition_mode: structure.map(|s| match s.mode() {
                StructureMode::Partition => CoalitionMode::Partition,
                StructureMode::Family => CoalitionMode::Family,
            }),
        }
    }
}

/// `{"allocation": [...]}` or a bare array; entry `j` is agent `j+1`'s resource.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum AllocationFile {
    Wrapped { allocation: Vec<Option<usize>> },
    Bare(Vec<Option<usize>>),
}

impl AllocationFile {
    pub fn entries(&self) -> &[Option<usize>] {
        match self {
            AllocationFile::Wrapped { allocation } | AllocationFile::Bare(allocation) => allocation,
        }
    }

    /// The allocation, required to be total, in range and feasible.
    pub fn parse(&self, inst: &Instance) -> Result<Allocation, CliError> {
        let v = validate_allocation(inst, self.entries())?;
        if !v.feasible {
            let (j, r) = inst.first_violation(&v.allocation).unwrap_or((0, 0));
            return Err(CliError::Input(format!(
                "allocation is infeasible: agent {} cannot use resource {}",
                j + 1,
                r + 1
            )));
        }
        Ok(v.allocation)
    }
}

fn one_based(c: &Coalition) -> Vec<usize> {
    c.members().iter().map(|j| j + 1).collect()
}

pub fn assignment_out(a: &Allocation) -> Vec<usize> {
    a.assignment().iter().map(|r| r + 1).collect()
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CoalitionKernels {
    pub members: Vec<usize>,
    pub k: Vec<usize>,
    pub w: Vec<usize>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Kernels {
    pub k: Vec<usize>,
    pub coalitions: Vec<CoalitionKernels>,
}

impl Kernels {
    pub fn of(a: &Allocation, structure: Option<&CoalitionStructure>) -> Self {
        Kernels {
            k: kernel(a).entries().to_vec(),
            coalitions: structure
                .map(|s| {
                    s.coalitions()
                        .iter()
                        .map(|c| CoalitionKernels {
                            members: one_based(c),
                            k: coalition_kernel(a, c).entries().to_vec(),
                            w: welfare_kernel(a, c).entries().to_vec(),
                        })
                        .collect()
                })
                .unwrap_or_default(),
        }
    }
}

/// `(agent, old cost, new cost)` for one coalition member.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MemberCost {
    pub agent: usize,
    pub old: usize,
    pub new: usize,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct WitnessOut {
    pub coalition: Vec<usize>,
    pub induced: Vec<usize>,
    pub member_costs: Vec<MemberCost>,
}

impl WitnessOut {
    pub fn of(w: &BlockingWitness) -> Self {
        WitnessOut {
            coalition: one_based(&w.coalition),
            induced: assignment_out(&w.induced),
            member_costs: w
                .member_costs
                .iter()
                .map(|&(agent, old, new)| MemberCost { agent: agent + 1, old, new })
                .collect(),
        }
    }

    /// Rebuilds the witness against `original` and checks it from scratch,
    /// including that the recorded costs are the actual ones.
    pub fn revalidate(&self, inst: &Instance, original: &Allocation) -> Result<(), CliError> {
        let coalition = Coalition::new(self.coalition.iter().map(|j| j.saturating_sub(1)))?;
        let raw: Vec<Option<usize>> = self.induced.iter().map(|&r| Some(r)).collect();
        let induced = validate_allocation(inst, &raw)?.allocation;
        let w = BlockingWitness::new(coalition, original.clone(), induced);
        w.validate(inst)?;
        if WitnessOut::of(&w) != *self {
            return Err(CliError::Input("witness costs do not match the allocations".into()));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CheckOut {
    pub holds: bool,
    /// 1-based index of the blocking coalition in the structure (partition check only).
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub coalition_index: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub witness: Option<WitnessOut>,
}

impl CheckOut {
    fn of(check: &StabilityCheck, with_index: bool) -> Self {
        CheckOut {
            holds: check.holds,
            coalition_index: if with_index { check.coalition_index.map(|i| i + 1) } else { None },
            witness: check.witness.as_ref().map(WitnessOut::of),
        }
    }
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct StabilityOut {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub nash: Option<CheckOut>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub pareto: Option<CheckOut>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub partition: Option<CheckOut>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub super_strong: Option<CheckOut>,
}

impl StabilityOut {
    pub fn of(report: &StabilityReport) -> Self {
        StabilityOut {
            nash: report.nash.as_ref().map(|c| CheckOut::of(c, false)),
            pareto: report.pareto.as_ref().map(|c| CheckOut::of(c, false)),
            partition: report.partition_stable.as_ref().map(|c| CheckOut::of(c, true)),
            super_strong: report.super_strong.as_ref().map(|c| CheckOut::of(c, false)),
        }
    }

    pub fn checks(&self) -> impl Iterator<Item = (&'static str, &CheckOut)> {
        [
            ("nash", &self.nash),
            ("pareto", &self.pareto),
            ("partition", &self.partition),
            ("super_strong", &self.super_strong),
        ]
        .into_iter()
        .filter_map(|(name, c)| c.as_ref().map(|c| (name, c)))
    }

    pub fn all_hold(&self) -> bool {
        self.checks().all(|(_, c)| c.holds)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SolverOut {
    pub mode: String,
    pub fell_back: bool,
}

/// Output of `check` and `solve`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ReportFile {
    pub tool: String,
    pub version: String,
    pub command: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
    pub allocation: Vec<usize>,
    pub kernels: Kernels,
    pub stability: StabilityOut,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub solver: Option<SolverOut>,
    pub timing_ms: u64,
}

impl ReportFile {
    /// Re-validates every witness against `inst`.
    pub fn revalidate(&self, inst: &Instance) -> Result<(), CliError> {
        let raw: Vec<Option<usize>> = self.allocation.iter().map(|&r| Some(r)).collect();
        let a = validate_allocation(inst, &raw)?.allocation;
        for (name, check) in self.stability.checks() {
            match (&check.witness, check.holds) {
                (Some(w), false) => w.revalidate(inst, &a)?,
                (None, true) => {}
                _ => return Err(CliError::Input(format!("{name}: flag and witness disagree"))),
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct StepOut {
    /// 1-based index of the deviating coalition.
    pub coalition_index: usize,
    pub from: Vec<usize>,
    pub witness: WitnessOut,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case", deny_unknown_fields)]
pub enum TerminalOut {
    Stable,
    /// The last allocation repeats the one visited after `start` steps.
    Cycle {
        start: usize,
    },
    StepLimit,
}

/// Output of `dynamics`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TraceFile {
    pub tool: String,
    pub version: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
    pub policy: String,
    pub max_steps: usize,
    pub start: Vec<usize>,
    pub steps: Vec<StepOut>,
    pub terminal: TerminalOut,
    pub timing_ms: u64,
}

impl TraceFile {
    pub fn of(trace: &DynamicsTrace, policy: &str, max_steps: usize, seed: Option<u64>, timing_ms: u64) -> Self {
        TraceFile {
            tool: TOOL.into(),
            version: VERSION.into(),
            seed,
            policy: policy.into(),
            max_steps,
            start: assignment_out(&trace.start),
            steps: trace
                .steps
                .iter()
                .map(|s| StepOut {
                    coalition_index: s.coalition_index + 1,
                    from: assignment_out(&s.witness.original),
                    witness: WitnessOut::of(&s.witness),
                })
                .collect(),
            terminal: match trace.terminal {
                Terminal::Stable => TerminalOut::Stable,
                Terminal::Cycle { start } => TerminalOut::Cycle { start },
                Terminal::StepLimit => TerminalOut::StepLimit,
            },
            timing_ms,
        }
    }

    /// Every step is a valid blocking deviation from the previous state.
    pub fn revalidate(&self, inst: &Instance) -> Result<(), CliError> {
        let mut current = self.start.clone();
        for (t, step) in self.steps.iter().enumerate() {
            if step.from != current {
                return Err(CliError::Input(format!("step {} does not start where the previous ended", t + 1)));
            }
            let raw: Vec<Option<usize>> = step.from.iter().map(|&r| Some(r)).collect();
            let from = validate_allocation(inst, &raw)?.allocation;
            step.witness.revalidate(inst, &from)?;
            current = step.witness.induced.clone();
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ViolationOut {
    pub case: u64,
    pub seed: u64,
    pub message: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SuiteOut {
    pub name: String,
    pub cases: u64,
    pub accepted: u64,
    pub rejected: u64,
    pub rejection_rate: f64,
    pub checks: u64,
    pub min_accepted: u64,
    pub passed: bool,
    pub violations: Vec<ViolationOut>,
}

impl SuiteOut {
    pub fn of(r: &iscg_core::verify::SuiteReport) -> Self {
        SuiteOut {
            name: r.name.clone(),
            cases: r.cases,
            accepted: r.accepted,
            rejected: r.rejected,
            rejection_rate: r.rejection_rate(),
            checks: r.checks,
            min_accepted: r.min_accepted,
            passed: r.passed(),
            violations: r
                .violations
                .iter()
                .map(|v| ViolationOut { case: v.case, seed: v.seed, message: v.message.clone() })
                .collect(),
        }
    }
}

/// Output of `verify` and `examples`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct VerifyFile {
    pub tool: String,
    pub version: String,
    pub suite: String,
    pub seed: u64,
    pub suites: Vec<SuiteOut>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub examples: Option<ExamplesOut>,
    pub passed: bool,
    pub timing_ms: u64,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExamplesOut {
    pub passed: bool,
    pub lines: Vec<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub error: Option<String>,
}

pub fn read_json<T: serde::de::DeserializeOwned>(path: &Path) -> Result<T, CliError> {
    let text =
        std::fs::read_to_string(path).map_err(|e| CliError::Input(format!("cannot read {}: {e}", path.display())))?;
    serde_json::from_str(&text).map_err(|e| CliError::Input(format!("{}: {e}", path.display())))
}

pub fn to_json<T: Serialize>(value: &T) -> String {
    let mut s = serde_json::to_string_pretty(value).expect("report types serialize");
    s.push('\n');
    s
}
