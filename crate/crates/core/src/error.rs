use std::fmt;

use thiserror::Error;

/// One violated invariant of a raw instance description. Ids are reported
/// exactly as they appeared in the input (1-based).
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum InstanceViolation {
    EmptyGame,
    AgentWithoutAccess(usize),
    AgentIdOutOfRange { agent: usize, agent_count: usize },
    ResourceIdOutOfRange { resource: usize, resource_count: usize },
    AccessLengthMismatch { expected: usize, found: usize },
}

impl fmt::Display for InstanceViolation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            InstanceViolation::EmptyGame => write!(f, "game needs at least one agent and one resource"),
            InstanceViolation::AgentWithoutAccess(j) => write!(f, "agent {j} has no accessible resource"),
            InstanceViolation::AgentIdOutOfRange { agent, agent_count } => {
                write!(f, "agent id {agent} outside 1..={agent_count}")
            }
            InstanceViolation::ResourceIdOutOfRange { resource, resource_count } => {
                write!(f, "resource id {resource} outside 1..={resource_count}")
            }
            InstanceViolation::AccessLengthMismatch { expected, found } => {
                write!(f, "access table has {found} rows, expected {expected}")
            }
        }
    }
}

fn join_violations(v: &[InstanceViolation]) -> String {
    v.iter().map(ToString::to_string).collect::<Vec<_>>().join("; ")
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum IscgError {
    #[error("invalid instance: {}", join_violations(.0))]
    InvalidInstance(Vec<InstanceViolation>),

    /// Agent (1-based, as given) left unassigned by a raw assignment.
    #[error("assignment is not total: agent {0} is unassigned")]
    NotTotal(usize),

    #[error("id out of range: {0}")]
    IdOutOfRange(String),

    #[error("unknown agent {0}")]
    UnknownAgent(usize),

    #[error("coalition is empty")]
    EmptyCoalition,

    #[error("coalition structure is not a partition: {0}")]
    NotAPartition(String),

    #[error("sequences have different lengths ({0} vs {1})")]
    LengthMismatch(usize, usize),

    #[error("allocations belong to different games ({0})")]
    DimensionMismatch(String),

    #[error("allocation is infeasible: agent {agent} cannot use resource {resource}")]
    Infeasible { agent: usize, resource: usize },

    #[error("enumeration bound exceeded: {required} allocations required, bound is {bound}")]
    EnumerationBoundExceeded { bound: u64, required: u128 },

    #[error("search bound exceeded: more than {bound} candidates examined")]
    SearchBoundExceeded { bound: u64 },

    #[error("chain invalid at step {0}")]
    ChainInvalidAt(usize),

    #[error("agents {0} and {1} share a resource")]
    SameResource(usize, usize),

    #[error("hypothesis violated: {0}")]
    HypothesisViolated(String),

    #[error("invalid generator config: {0}")]
    InvalidConfig(String),

    /// A claim that the theory guarantees turned out false. Always a bug or a
    /// counterexample worth reporting.
    #[error("property violated: {0}")]
    PropertyViolated(String),
}

pub type Result<T> = std::result::Result<T, IscgError>;
