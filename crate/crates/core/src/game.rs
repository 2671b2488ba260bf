//! Game model: instances, allocations, coalitions and the feasible allocation space.
//!
//! Internally agents and resources are 0-based indices. The raw description
//! types ([`RawInstance`], raw assignments) use the 1-based ids found in files.

use std::collections::BTreeSet;
use std::fmt;

use crate::error::{InstanceViolation, IscgError, Result};

/// Desk-scale limits for the brute-force routines.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Limits {
    /// Maximum size of the feasible allocation space that may be enumerated.
    pub enumeration_bound: u64,
    /// Maximum number of candidate placements examined by one blocking search.
    pub search_bound: u64,
    /// Largest agent count for which all `2^n - 1` coalitions are searched.
    pub super_strong_max_agents: usize,
}

pub const DEFAULT_ENUMERATION_BOUND: u64 = 10_000_000;
pub const DEFAULT_SEARCH_BOUND: u64 = 1_000_000;
pub const ENUM_BOUND_ENV: &str = "ISCG_ENUM_BOUND";
pub const SEARCH_BOUND_ENV: &str = "ISCG_SEARCH_BOUND";

impl Default for Limits {
    fn default() -> Self {
        Limits {
            enumeration_bound: DEFAULT_ENUMERATION_BOUND,
            search_bound: DEFAULT_SEARCH_BOUND,
            super_strong_max_agents: 12,
        }
    }
}

impl Limits {
    /// Defaults, with the bounds taken from `ISCG_ENUM_BOUND` and
    /// `ISCG_SEARCH_BOUND` when set.
    pub fn from_env() -> Result<Self> {
        let read = |var: &str, default: u64| -> Result<u64> {
            match std::env::var(var) {
                Ok(raw) => raw
                    .trim()
                    .parse()
                    .map_err(|_| IscgError::InvalidConfig(format!("{var}={raw:?} is not a non-negative integer"))),
                Err(_) => Ok(default),
            }
        };
        let defaults = Limits::default();
        Ok(Limits {
            enumeration_bound: read(ENUM_BOUND_ENV, defaults.enumeration_bound)?,
            search_bound: read(SEARCH_BOUND_ENV, defaults.search_bound)?,
            ..defaults
        })
    }
}

/// Accessibility as given in an external description.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum AccessSpec {
    /// Row `j` lists the resources agent `j + 1` may use.
    PerAgent(Vec<Vec<usize>>),
    /// Row `i` lists the agents permitted on resource `i + 1` (the sets `f_i`).
    PerResource(Vec<Vec<usize>>),
}

/// Unvalidated instance description with 1-based ids.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RawInstance {
    pub agents: usize,
    pub resources: usize,
    pub access: AccessSpec,
}

/// A validated game: `n` agents, `m` resources and the accessibility constraint.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Instance {
    agent_count: usize,
    resource_count: usize,
    agent_access: Vec<Vec<usize>>,
    resource_access: Vec<Vec<usize>>,
    matrix: Vec<bool>,
}

/// Checks every invariant of a raw description and reports all violations at once.
pub fn validate_instance(raw: &RawInstance) -> Result<Instance> {
    let n = raw.agents;
    let m = raw.resources;
    let mut violations = Vec::new();
    if n == 0 || m == 0 {
        violations.push(InstanceViolation::EmptyGame);
        return Err(IscgError::InvalidInstance(violations));
    }
    let mut matrix = vec![false; n * m];
    let mut seen_agent_range = BTreeSet::new();
    let mut seen_resource_range = BTreeSet::new();
    let mut mark = |agent: usize, resource: usize, violations: &mut Vec<InstanceViolation>| {
        let mut ok = true;
        if agent == 0 || agent > n {
            if seen_agent_range.insert(agent) {
                violations.push(InstanceViolation::AgentIdOutOfRange { agent, agent_count: n });
            }
            ok = false;
        }
        if resource == 0 || resource > m {
            if seen_resource_range.insert(resource) {
                violations.push(InstanceViolation::ResourceIdOutOfRange { resource, resource_count: m });
            }
            ok = false;
        }
        if ok {
            matrix[(agent - 1) * m + (resource - 1)] = true;
        }
    };
    match &raw.access {
        AccessSpec::PerAgent(rows) => {
            if rows.len() != n {
                violations.push(InstanceViolation::AccessLengthMismatch { expected: n, found: rows.len() });
            }
            for (j, row) in rows.iter().enumerate() {
                for &r in row {
                    mark(j + 1, r, &mut violations);
                }
            }
        }
        AccessSpec::PerResource(rows) => {
            if rows.len() != m {
                violations.push(InstanceViolation::AccessLengthMismatch { expected: m, found: rows.len() });
            }
            for (i, row) in rows.iter().enumerate() {
                for &j in row {
                    mark(j, i + 1, &mut violations);
                }
            }
        }
    }
    for j in 0..n {
        if !matrix[j * m..(j + 1) * m].iter().any(|&b| b) {
            violations.push(InstanceViolation::AgentWithoutAccess(j + 1));
        }
    }
    if !violations.is_empty() {
        return Err(IscgError::InvalidInstance(violations));
    }
    Ok(Instance::from_matrix(n, m, matrix))
}

impl Instance {
    fn from_matrix(n: usize, m: usize, matrix: Vec<bool>) -> Self {
        let agent_access = (0..n).map(|j| (0..m).filter(|&i| matrix[j * m + i]).collect()).collect();
        let resource_access = (0..m).map(|i| (0..n).filter(|&j| matrix[j * m + i]).collect()).collect();
        Instance { agent_count: n, resource_count: m, agent_access, resource_access, matrix }
    }

    /// Every agent may use every resource.
    pub fn full_access(agents: usize, resources: usize) -> Result<Self> {
        validate_instance(&RawInstance {
            agents,
            resources,
            access: AccessSpec::PerAgent(vec![(1..=resources).collect(); agents]),
        })
    }

    /// Builds an instance from 0-based per-agent access lists.
    pub fn from_agent_access(resources: usize, access: &[Vec<usize>]) -> Result<Self> {
        validate_instance(&RawInstance {
            agents: access.len(),
            resources,
            access: AccessSpec::PerAgent(access.iter().map(|row| row.iter().map(|r| r + 1).collect()).collect()),
        })
    }

    pub fn agent_count(&self) -> usize {
        self.agent_count
    }

    pub fn resource_count(&self) -> usize {
        self.resource_count
    }

    /// Resources agent `j` may use, ascending.
    pub fn accessible(&self, agent: usize) -> &[usize] {
        &self.agent_access[agent]
    }

    /// The set `f_i`: agents permitted on resource `i`, ascending.
    pub fn permitted(&self, resource: usize) -> &[usize] {
        &self.resource_access[resource]
    }

    pub fn can_use(&self, agent: usize, resource: usize) -> bool {
        agent < self.agent_count
            && resource < self.resource_count
            && self.matrix[agent * self.resource_count + resource]
    }

    pub fn is_feasible(&self, a: &Allocation) -> bool {
        self.first_violation(a).is_none()
    }

    /// First agent (with its resource) placed outside its access set.
    pub fn first_violation(&self, a: &Allocation) -> Option<(usize, usize)> {
        if a.agent_count() != self.agent_count || a.resource_count() != self.resource_count {
            return Some((0, 0));
        }
        a.assignment().iter().enumerate().find(|&(j, &r)| !self.can_use(j, r)).map(|(j, &r)| (j, r))
    }

    pub fn require_feasible(&self, a: &Allocation) -> Result<()> {
        self.require_same_game(a)?;
        match self.first_violation(a) {
            None => Ok(()),
            Some((agent, resource)) => Err(IscgError::Infeasible { agent, resource }),
        }
    }

    pub(crate) fn require_same_game(&self, a: &Allocation) -> Result<()> {
        if a.agent_count() != self.agent_count || a.resource_count() != self.resource_count {
            return Err(IscgError::DimensionMismatch(format!(
                "instance is {}x{}, allocation is {}x{}",
                self.agent_count,
                self.resource_count,
                a.agent_count(),
                a.resource_count()
            )));
        }
        Ok(())
    }

    /// Same game with a different accessibility relation, given per resource (0-based).
    pub fn with_resource_access(&self, permitted: &[Vec<usize>]) -> Result<Self> {
        validate_instance(&RawInstance {
            agents: self.agent_count,
            resources: self.resource_count,
            access: AccessSpec::PerResource(permitted.iter().map(|row| row.iter().map(|j| j + 1).collect()).collect()),
        })
    }

    /// Size of the feasible allocation space: the product of per-agent access counts.
    pub fn feasible_count(&self) -> u128 {
        self.agent_access.iter().fold(1u128, |acc, row| acc.saturating_mul(row.len() as u128))
    }

    /// Per-agent access lists with 1-based ids, as written to files.
    pub fn to_raw(&self) -> RawInstance {
        RawInstance {
            agents: self.agent_count,
            resources: self.resource_count,
            access: AccessSpec::PerAgent(
                self.agent_access.iter().map(|row| row.iter().map(|r| r + 1).collect()).collect(),
            ),
        }
    }
}

/// A total assignment of agents to resources, stored agent-major.
///
/// Feasibility is not part of the value; check it with [`Instance::is_feasible`].
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Allocation {
    assignment: Vec<usize>,
    loads: Vec<usize>,
}

impl Allocation {
    /// 0-based constructor.
    pub fn from_assignment(resource_count: usize, assignment: Vec<usize>) -> Result<Self> {
        let mut loads = vec![0; resource_count];
        for (j, &r) in assignment.iter().enumerate() {
            if r >= resource_count {
                return Err(IscgError::IdOutOfRange(format!("agent {j} assigned to resource {r} of {resource_count}")));
            }
            loads[r] += 1;
        }
        Ok(Allocation { assignment, loads })
    }

    /// Builds an allocation from its resource sets `a_1, ..., a_m` (0-based agents).
    pub fn from_resource_sets(agent_count: usize, sets: &[Vec<usize>]) -> Result<Self> {
        let mut assignment = vec![usize::MAX; agent_count];
        for (r, set) in sets.iter().enumerate() {
            for &j in set {
                if j >= agent_count {
                    return Err(IscgError::IdOutOfRange(format!("agent {j} of {agent_count}")));
                }
                if assignment[j] != usize::MAX {
                    return Err(IscgError::IdOutOfRange(format!("agent {j} appears in two resource sets")));
                }
                assignment[j] = r;
            }
        }
        if let Some(j) = assignment.iter().position(|&r| r == usize::MAX) {
            return Err(IscgError::NotTotal(j + 1));
        }
        Allocation::from_assignment(sets.len(), assignment)
    }

    pub fn agent_count(&self) -> usize {
        self.assignment.len()
    }

    pub fn resource_count(&self) -> usize {
        self.loads.len()
    }

    pub fn assignment(&self) -> &[usize] {
        &self.assignment
    }

    pub fn resource_of(&self, agent: usize) -> usize {
        self.assignment[agent]
    }

    /// Cardinalities `|a_i|` indexed by resource.
    pub fn loads(&self) -> &[usize] {
        &self.loads
    }

    pub fn load(&self, resource: usize) -> usize {
        self.loads[resource]
    }

    /// Cost of an agent: the number of agents sharing its resource.
    pub fn cost(&self, agent: usize) -> Result<usize> {
        match self.assignment.get(agent) {
            Some(&r) => Ok(self.loads[r]),
            None => Err(IscgError::UnknownAgent(agent)),
        }
    }

    /// The set `a_i`, ascending.
    pub fn members(&self, resource: usize) -> Vec<usize> {
        (0..self.assignment.len()).filter(|&j| self.assignment[j] == resource).collect()
    }

    pub fn resource_sets(&self) -> Vec<Vec<usize>> {
        let mut sets = vec![Vec::new(); self.loads.len()];
        for (j, &r) in self.assignment.iter().enumerate() {
            sets[r].push(j);
        }
        sets
    }

    /// Copy with `agent` moved to `resource`.
    pub fn with_move(&self, agent: usize, resource: usize) -> Allocation {
        let mut next = self.clone();
        next.move_agent(agent, resource);
        next
    }

    pub(crate) fn move_agent(&mut self, agent: usize, resource: usize) {
        let from = self.assignment[agent];
        self.loads[from] -= 1;
        self.loads[resource] += 1;
        self.assignment[agent] = resource;
    }
}

impl fmt::Display for Allocation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let sets = self.resource_sets();
        let parts: Vec<String> = sets
            .iter()
            .enumerate()
            .map(|(r, s)| {
                let ids: Vec<String> = s.iter().map(|j| (j + 1).to_string()).collect();
                format!("a{}={{{}}}", r + 1, ids.join(","))
            })
            .collect();
        write!(f, "{}", parts.join(" "))
    }
}

/// An allocation validated against an instance, with its feasibility flag.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ValidatedAllocation {
    pub allocation: Allocation,
    pub feasible: bool,
}

/// Validates a raw 1-based agent-to-resource map; `None` marks an unassigned agent.
pub fn validate_allocation(inst: &Instance, raw: &[Option<usize>]) -> Result<ValidatedAllocation> {
    let n = inst.agent_count();
    let m = inst.resource_count();
    if raw.len() > n {
        return Err(IscgError::IdOutOfRange(format!("assignment lists {} agents, game has {n}", raw.len())));
    }
    let mut assignment = Vec::with_capacity(n);
    for j in 0..n {
        match raw.get(j).copied().flatten() {
            None => return Err(IscgError::NotTotal(j + 1)),
            Some(r) if r == 0 || r > m => {
                return Err(IscgError::IdOutOfRange(format!(
                    "agent {} assigned to resource {r} outside 1..={m}",
                    j + 1
                )))
            }
            Some(r) => assignment.push(r - 1),
        }
    }
    let allocation = Allocation::from_assignment(m, assignment)?;
    let feasible = inst.is_feasible(&allocation);
    Ok(ValidatedAllocation { allocation, feasible })
}

/// A nonempty set of agents, kept sorted.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Coalition(Vec<usize>);

impl Coalition {
    pub fn new(members: impl IntoIterator<Item = usize>) -> Result<Self> {
        let set: BTreeSet<usize> = members.into_iter().collect();
        if set.is_empty() {
            return Err(IscgError::EmptyCoalition);
        }
        Ok(Coalition(set.into_iter().collect()))
    }

    pub fn singleton(agent: usize) -> Self {
        Coalition(vec![agent])
    }

    pub fn grand(agent_count: usize) -> Self {
        Coalition((0..agent_count).collect())
    }

    pub fn members(&self) -> &[usize] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn contains(&self, agent: usize) -> bool {
        self.0.binary_search(&agent).is_ok()
    }

    pub fn max_agent(&self) -> usize {
        *self.0.last().expect("coalitions are nonempty")
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum StructureMode {
    Partition,
    Family,
}

/// A list of coalitions; either a partition of the agents or an arbitrary family.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CoalitionStructure {
    mode: StructureMode,
    coalitions: Vec<Coalition>,
}

impl CoalitionStructure {
    pub fn partition(agent_count: usize, coalitions: Vec<Coalition>) -> Result<Self> {
        let mut owner = vec![None; agent_count];
        for (ci, c) in coalitions.iter().enumerate() {
            for &j in c.members() {
                if j >= agent_count {
                    return Err(IscgError::IdOutOfRange(format!("coalition member {j} of {agent_count} agents")));
                }
                if let Some(prev) = owner[j] {
                    return Err(IscgError::NotAPartition(format!(
                        "agent {} is in coalitions {} and {}",
                        j + 1,
                        prev + 1,
                        ci + 1
                    )));
                }
                owner[j] = Some(ci);
            }
        }
        if let Some(j) = owner.iter().position(Option::is_none) {
            return Err(IscgError::NotAPartition(format!("agent {} is in no coalition", j + 1)));
        }
        Ok(CoalitionStructure { mode: StructureMode::Partition, coalitions })
    }

    pub fn family(agent_count: usize, coalitions: Vec<Coalition>) -> Result<Self> {
        for c in &coalitions {
            if c.max_agent() >= agent_count {
                return Err(IscgError::IdOutOfRange(format!(
                    "coalition member {} of {agent_count} agents",
                    c.max_agent()
                )));
            }
        }
        Ok(CoalitionStructure { mode: StructureMode::Family, coalitions })
    }

    /// Builds a partition from 0-based member lists.
    pub fn partition_of(agent_count: usize, groups: &[Vec<usize>]) -> Result<Self> {
        let coalitions = groups.iter().map(|g| Coalition::new(g.iter().copied())).collect::<Result<_>>()?;
        Self::partition(agent_count, coalitions)
    }

    pub fn family_of(agent_count: usize, groups: &[Vec<usize>]) -> Result<Self> {
        let coalitions = groups.iter().map(|g| Coalition::new(g.iter().copied())).collect::<Result<_>>()?;
        Self::family(agent_count, coalitions)
    }

    /// `{{1}, {2}, ..., {n}}`.
    pub fn singletons(agent_count: usize) -> Self {
        CoalitionStructure {
            mode: StructureMode::Partition,
            coalitions: (0..agent_count).map(Coalition::singleton).collect(),
        }
    }

    /// `{N}`.
    pub fn grand(agent_count: usize) -> Self {
        CoalitionStructure { mode: StructureMode::Partition, coalitions: vec![Coalition::grand(agent_count)] }
    }

    pub fn mode(&self) -> StructureMode {
        self.mode
    }

    pub fn is_partition(&self) -> bool {
        self.mode == StructureMode::Partition
    }

    pub fn require_partition(&self) -> Result<()> {
        if self.is_partition() {
            Ok(())
        } else {
            Err(IscgError::NotAPartition("coalition structure is in family mode".into()))
        }
    }

    pub fn coalitions(&self) -> &[Coalition] {
        &self.coalitions
    }

    pub fn len(&self) -> usize {
        self.coalitions.len()
    }

    pub fn is_empty(&self) -> bool {
        self.coalitions.is_empty()
    }

    /// Index of the coalition containing `agent` (partition mode: unique).
    pub fn coalition_of(&self, agent: usize) -> Option<usize> {
        self.coalitions.iter().position(|c| c.contains(agent))
    }
}

/// Iterator over feasible allocations in lexicographic order of
/// (agent 1's resource, agent 2's resource, ...).
#[derive(Debug, Clone)]
pub struct FeasibleAllocations<'a> {
    inst: &'a Instance,
    digits: Vec<usize>,
    next: u128,
    end: u128,
}

impl<'a> FeasibleAllocations<'a> {
    fn starting_at(inst: &'a Instance, start: u128, end: u128) -> Self {
        let mut digits = vec![0; inst.agent_count()];
        let mut rest = start;
        for j in (0..inst.agent_count()).rev() {
            let base = inst.accessible(j).len() as u128;
            digits[j] = (rest % base) as usize;
            rest /= base;
        }
        FeasibleAllocations { inst, digits, next: start, end }
    }

    /// Enumeration index of the next allocation to be yielded.
    pub fn position(&self) -> u128 {
        self.next
    }
}

impl Iterator for FeasibleAllocations<'_> {
    type Item = Allocation;

    fn next(&mut self) -> Option<Allocation> {
        if self.next >= self.end {
            return None;
        }
        let assignment = self.digits.iter().enumerate().map(|(j, &d)| self.inst.accessible(j)[d]).collect();
        let out = Allocation::from_assignment(self.inst.resource_count(), assignment)
            .expect("accessible resources are in range");
        self.next += 1;
        for j in (0..self.digits.len()).rev() {
            self.digits[j] += 1;
            if self.digits[j] < self.inst.accessible(j).len() {
                break;
            }
            self.digits[j] = 0;
        }
        Some(out)
    }

    fn size_hint(&self) -> (usize, Option<usize>) {
        let left = usize::try_from(self.end - self.next).unwrap_or(usize::MAX);
        (left, Some(left))
    }
}

fn check_bound(inst: &Instance, limits: &Limits) -> Result<u128> {
    let required = inst.feasible_count();
    if required > limits.enumeration_bound as u128 {
        return Err(IscgError::EnumerationBoundExceeded { bound: limits.enumeration_bound, required });
    }
    Ok(required)
}

/// Every feasible allocation exactly once, in canonical order.
pub fn enumerate_feasible<'a>(inst: &'a Instance, limits: &Limits) -> Result<FeasibleAllocations<'a>> {
    let total = check_bound(inst, limits)?;
    Ok(FeasibleAllocations::starting_at(inst, 0, total))
}

/// The slice `[start, end)` of the canonical enumeration, for splitting work
/// across workers. Concatenating consecutive ranges reproduces the full order.
pub fn enumerate_range<'a>(
    inst: &'a Instance,
    limits: &Limits,
    start: u128,
    end: u128,
) -> Result<FeasibleAllocations<'a>> {
    let total = check_bound(inst, limits)?;
    let end = end.min(total);
    Ok(FeasibleAllocations::starting_at(inst, start.min(end), end))
}
