//! Coalitional deviations: blocking, induced allocations, chains and the
//! single-agent moves that provably improve the balance order.

use std::fmt;

use crate::error::{IscgError, Result};
use crate::game::{Allocation, Coalition, CoalitionStructure, Instance, Limits};
use crate::kernels::coalition_counts;

/// Path `i_1 -(j_1)-> i_2 -(j_2)-> ... -(j_{s-1})-> i_s` of agent moves.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Chain {
    resources: Vec<usize>,
    movers: Vec<usize>,
}

impl Chain {
    pub fn new(resources: Vec<usize>, movers: Vec<usize>) -> Result<Self> {
        if resources.len() < 2 || movers.len() + 1 != resources.len() {
            return Err(IscgError::ChainInvalidAt(0));
        }
        if let Some(t) = resources.windows(2).position(|w| w[0] == w[1]) {
            return Err(IscgError::ChainInvalidAt(t));
        }
        Ok(Chain { resources, movers })
    }

    /// Single move `from -(agent)-> to`.
    pub fn single(agent: usize, from: usize, to: usize) -> Result<Self> {
        Chain::new(vec![from, to], vec![agent])
    }

    /// The two-agent cycle `i_1 -(j_1)-> i_2 -(j_2)-> i_1`.
    pub fn swap_cycle(a: &Allocation, j1: usize, j2: usize) -> Result<Self> {
        let (i1, i2) = (a.resource_of(j1), a.resource_of(j2));
        if i1 == i2 {
            return Err(IscgError::SameResource(j1, j2));
        }
        Chain::new(vec![i1, i2, i1], vec![j1, j2])
    }

    pub fn resources(&self) -> &[usize] {
        &self.resources
    }

    pub fn movers(&self) -> &[usize] {
        &self.movers
    }

    /// Number of resources `s`.
    pub fn len(&self) -> usize {
        self.resources.len()
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    /// Sub-chain covering resources `from..=to`.
    pub fn segment(&self, from: usize, to: usize) -> Result<Chain> {
        if to <= from || to >= self.resources.len() {
            return Err(IscgError::ChainInvalidAt(from));
        }
        Chain::new(self.resources[from..=to].to_vec(), self.movers[from..to].to_vec())
    }

    /// Whether this is an `a b`-chain: each `j_t` sits on `i_t` under `a` and on
    /// `i_{t+1}` under `b`.
    pub fn connects(&self, a: &Allocation, b: &Allocation) -> bool {
        self.movers.iter().enumerate().all(|(t, &j)| {
            j < a.agent_count() && a.resource_of(j) == self.resources[t] && b.resource_of(j) == self.resources[t + 1]
        })
    }
}

impl fmt::Display for Chain {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.resources[0] + 1)?;
        for (t, &j) in self.movers.iter().enumerate() {
            write!(f, " -({})-> {}", j + 1, self.resources[t + 1] + 1)?;
        }
        Ok(())
    }
}

/// `a ⊕ chain`: moves each `j_t` from `i_t` to `i_{t+1}` in order.
pub fn apply_chain(a: &Allocation, chain: &Chain) -> Result<Allocation> {
    let mut next = a.clone();
    for (t, &j) in chain.movers.iter().enumerate() {
        if j >= next.agent_count()
            || chain.resources[t + 1] >= next.resource_count()
            || next.resource_of(j) != chain.resources[t]
        {
            return Err(IscgError::ChainInvalidAt(t));
        }
        next.move_agent(j, chain.resources[t + 1]);
    }
    Ok(next)
}

/// Exchanges the resources of two agents.
pub fn swap(a: &Allocation, j1: usize, j2: usize) -> Result<Allocation> {
    for j in [j1, j2] {
        if j >= a.agent_count() {
            return Err(IscgError::UnknownAgent(j));
        }
    }
    let chain = Chain::swap_cycle(a, j1, j2)?;
    apply_chain(a, &chain)
}

/// Some `a b`-chain with at least `min_length` resources, if any exists.
///
/// Depth-first over the mover graph (each mover used once), trying start
/// resources and movers in increasing id order, so the result is deterministic.
pub fn find_chain(a: &Allocation, b: &Allocation, min_length: usize) -> Option<Chain> {
    if a.agent_count() != b.agent_count() || a.resource_count() != b.resource_count() {
        return None;
    }
    let m = a.resource_count();
    // out[r]: movers leaving r, ascending
    let mut out: Vec<Vec<usize>> = vec![Vec::new(); m];
    for j in 0..a.agent_count() {
        if a.resource_of(j) != b.resource_of(j) {
            out[a.resource_of(j)].push(j);
        }
    }
    let edges_needed = min_length.max(2) - 1;
    let mut used = vec![false; a.agent_count()];
    let mut resources = Vec::new();
    let mut movers = Vec::new();

    fn extend(
        at: usize,
        need: usize,
        out: &[Vec<usize>],
        b: &Allocation,
        used: &mut [bool],
        resources: &mut Vec<usize>,
        movers: &mut Vec<usize>,
    ) -> bool {
        if movers.len() >= need {
            return true;
        }
        for &j in &out[at] {
            if used[j] {
                continue;
            }
            let to = b.resource_of(j);
            used[j] = true;
            resources.push(to);
            movers.push(j);
            if extend(to, need, out, b, used, resources, movers) {
                return true;
            }
            used[j] = false;
            resources.pop();
            movers.pop();
        }
        false
    }

    for start in 0..m {
        resources.clear();
        movers.clear();
        resources.push(start);
        if extend(start, edges_needed, &out, b, &mut used, &mut resources, &mut movers) {
            return Some(Chain { resources, movers });
        }
    }
    None
}

/// Certificate that a coalition blocks an allocation.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BlockingWitness {
    pub coalition: Coalition,
    pub original: Allocation,
    pub induced: Allocation,
    /// `(agent, old cost, new cost)` for every member, ascending by agent.
    pub member_costs: Vec<(usize, usize, usize)>,
}

impl BlockingWitness {
    pub fn new(coalition: Coalition, original: Allocation, induced: Allocation) -> Self {
        let member_costs = coalition
            .members()
            .iter()
            .map(|&j| (j, original.load(original.resource_of(j)), induced.load(induced.resource_of(j))))
            .collect();
        BlockingWitness { coalition, original, induced, member_costs }
    }

    /// Re-checks all blocking conditions from the fields alone.
    pub fn validate(&self, inst: &Instance) -> Result<()> {
        let bad = |msg: String| Err(IscgError::PropertyViolated(format!("invalid blocking witness: {msg}")));
        inst.require_feasible(&self.original)?;
        inst.require_feasible(&self.induced)?;
        for j in 0..inst.agent_count() {
            if !self.coalition.contains(j) && self.original.resource_of(j) != self.induced.resource_of(j) {
                return bad(format!("non-member {} moved", j + 1));
            }
        }
        if self.member_costs.len() != self.coalition.len() {
            return bad("member cost table does not match coalition".into());
        }
        let mut strict = false;
        for (&(j, old, new), &member) in self.member_costs.iter().zip(self.coalition.members()) {
            if j != member || old != self.original.cost(j)? || new != self.induced.cost(j)? {
                return bad(format!("recorded costs of agent {} are stale", j + 1));
            }
            if new > old {
                return bad(format!("agent {} worse off ({old} -> {new})", j + 1));
            }
            strict |= new < old;
        }
        if !strict {
            return bad("no member strictly better off".into());
        }
        Ok(())
    }
}

/// Lazily enumerates every allocation induced when a coalition blocks `a`, in
/// lexicographic order of the members' new resources (members by id,
/// resources by id). Members may keep their current resource.
///
/// Subtrees in which some placed member's resource is already too crowded to
/// be weakly improving are skipped; this never changes the order of results.
pub struct InducedAllocations<'a> {
    inst: &'a Instance,
    original: &'a Allocation,
    members: Vec<usize>,
    old_cost: Vec<usize>,
    load: Vec<usize>,
    cap: Vec<usize>,
    placed: Vec<usize>,
    saved_cap: Vec<usize>,
    cursor: Vec<usize>,
    depth: usize,
    nodes: u64,
    bound: u64,
    finished: bool,
}

impl<'a> InducedAllocations<'a> {
    fn new(inst: &'a Instance, original: &'a Allocation, c: &Coalition, bound: u64) -> Self {
        let members = c.members().to_vec();
        let old_cost = members.iter().map(|&j| original.load(original.resource_of(j))).collect();
        let mut load = original.loads().to_vec();
        for &j in &members {
            load[original.resource_of(j)] -= 1;
        }
        let k = members.len();
        InducedAllocations {
            inst,
            original,
            members,
            old_cost,
            load,
            cap: vec![usize::MAX; inst.resource_count()],
            placed: vec![0; k],
            saved_cap: vec![0; k],
            cursor: vec![0; k],
            depth: 0,
            nodes: 0,
            bound,
            finished: false,
        }
    }

    fn fits(&self, level: usize, r: usize) -> bool {
        let next = self.load[r] + 1;
        next <= self.old_cost[level] && next <= self.cap[r]
    }

    fn push(&mut self, r: usize) {
        let level = self.depth;
        self.placed[level] = r;
        self.saved_cap[level] = self.cap[r];
        self.cap[r] = self.cap[r].min(self.old_cost[level]);
        self.load[r] += 1;
        self.depth += 1;
    }

    fn pop(&mut self) {
        self.depth -= 1;
        let level = self.depth;
        let r = self.placed[level];
        self.load[r] -= 1;
        self.cap[r] = self.saved_cap[level];
    }

    /// Every unplaced member still has somewhere to go.
    fn forward_ok(&self) -> bool {
        (self.depth..self.members.len())
            .all(|lvl| self.inst.accessible(self.members[lvl]).iter().any(|&r| self.fits(lvl, r)))
    }

    fn strict_somewhere(&self) -> bool {
        (0..self.members.len()).any(|lvl| self.load[self.placed[lvl]] < self.old_cost[lvl])
    }

    fn advance(&mut self) -> Result<bool> {
        let k = self.members.len();
        if self.depth == k {
            self.pop();
        }
        loop {
            if self.depth == k {
                if self.strict_somewhere() {
                    return Ok(true);
                }
                self.pop();
                continue;
            }
            let level = self.depth;
            let choices = self.inst.accessible(self.members[level]);
            let mut descended = false;
            while self.cursor[level] < choices.len() {
                let r = choices[self.cursor[level]];
                self.cursor[level] += 1;
                self.nodes += 1;
                if self.nodes > self.bound {
                    return Err(IscgError::SearchBoundExceeded { bound: self.bound });
                }
                if self.fits(level, r) {
                    self.push(r);
                    if self.forward_ok() {
                        descended = true;
                        break;
                    }
                    self.pop();
                }
            }
            if !descended {
                self.cursor[level] = 0;
                if level == 0 {
                    return Ok(false);
                }
                self.pop();
            }
        }
    }

    fn current(&self) -> Allocation {
        let mut assignment = self.original.assignment().to_vec();
        for (lvl, &j) in self.members.iter().enumerate() {
            assignment[j] = self.placed[lvl];
        }
        Allocation::from_assignment(self.inst.resource_count(), assignment).expect("placements are in range")
    }

    /// Candidate placements examined so far.
    pub fn nodes_examined(&self) -> u64 {
        self.nodes
    }
}

impl Iterator for InducedAllocations<'_> {
    type Item = Result<Allocation>;

    fn next(&mut self) -> Option<Self::Item> {
        if self.finished {
            return None;
        }
        match self.advance() {
            Ok(true) => Some(Ok(self.current())),
            Ok(false) => {
                self.finished = true;
                None
            }
            Err(e) => {
                self.finished = true;
                Some(Err(e))
            }
        }
    }
}

fn check_coalition(inst: &Instance, c: &Coalition) -> Result<()> {
    if c.max_agent() >= inst.agent_count() {
        return Err(IscgError::UnknownAgent(c.max_agent()));
    }
    Ok(())
}

/// Stream of all allocations induced when `c` blocks `a`; empty iff `c` does not block `a`.
pub fn induced_allocations<'a>(
    inst: &'a Instance,
    a: &'a Allocation,
    c: &Coalition,
    limits: &Limits,
) -> Result<InducedAllocations<'a>> {
    inst.require_feasible(a)?;
    check_coalition(inst, c)?;
    Ok(InducedAllocations::new(inst, a, c, limits.search_bound))
}

pub(crate) fn blocks_with_bound(
    inst: &Instance,
    a: &Allocation,
    c: &Coalition,
    bound: u64,
) -> Result<Option<BlockingWitness>> {
    inst.require_feasible(a)?;
    check_coalition(inst, c)?;
    let mut search = InducedAllocations::new(inst, a, c, bound);
    match search.next() {
        None => Ok(None),
        Some(Err(e)) => Err(e),
        Some(Ok(induced)) => Ok(Some(BlockingWitness::new(c.clone(), a.clone(), induced))),
    }
}

/// The canonical witness that `c` blocks `a`, or `None`.
pub fn blocks(inst: &Instance, a: &Allocation, c: &Coalition, limits: &Limits) -> Result<Option<BlockingWitness>> {
    blocks_with_bound(inst, a, c, limits.search_bound)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum MoveCase {
    /// `|a_from| >= |a_to| + 2`.
    LoadGap,
    /// `|a_from| = |a_to| + 1` and `|c ∩ a_from| >= |c ∩ a_to| + 2`.
    CoalitionGap,
}

/// A feasible single-agent move that strictly improves the balance order.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct ImprovingMove {
    pub agent: usize,
    pub from: usize,
    pub to: usize,
    pub case: MoveCase,
}

impl ImprovingMove {
    pub fn chain(&self) -> Chain {
        Chain { resources: vec![self.from, self.to], movers: vec![self.agent] }
    }
}

/// Classifies the move of `agent` to `to` under `a`, if it is an improving move.
pub fn classify_move(
    a: &Allocation,
    structure: &CoalitionStructure,
    agent: usize,
    to: usize,
) -> Result<Option<MoveCase>> {
    structure.require_partition()?;
    let from = a.resource_of(agent);
    if from == to {
        return Ok(None);
    }
    let (lf, lt) = (a.load(from), a.load(to));
    if lf >= lt + 2 {
        return Ok(Some(MoveCase::LoadGap));
    }
    if lf == lt + 1 {
        let ci = structure
            .coalition_of(agent)
            .ok_or_else(|| IscgError::NotAPartition(format!("agent {} in no coalition", agent + 1)))?;
        let counts = coalition_counts(a, &structure.coalitions()[ci]);
        if counts[from] >= counts[to] + 2 {
            return Ok(Some(MoveCase::CoalitionGap));
        }
    }
    Ok(None)
}

/// All feasible improving single-agent moves, by agent then target resource.
pub fn improving_moves(inst: &Instance, a: &Allocation, structure: &CoalitionStructure) -> Result<Vec<ImprovingMove>> {
    structure.require_partition()?;
    inst.require_feasible(a)?;
    let counts: Vec<Vec<usize>> = structure.coalitions().iter().map(|c| coalition_counts(a, c)).collect();
    let mut owner = vec![0; inst.agent_count()];
    for (ci, c) in structure.coalitions().iter().enumerate() {
        for &j in c.members() {
            owner[j] = ci;
        }
    }
    let mut moves = Vec::new();
    for j in 0..inst.agent_count() {
        let from = a.resource_of(j);
        let cc = &counts[owner[j]];
        for &to in inst.accessible(j) {
            if to == from {
                continue;
            }
            let (lf, lt) = (a.load(from), a.load(to));
            let case = if lf >= lt + 2 {
                Some(MoveCase::LoadGap)
            } else if lf == lt + 1 && cc[from] >= cc[to] + 2 {
                Some(MoveCase::CoalitionGap)
            } else {
                None
            };
            if let Some(case) = case {
                moves.push(ImprovingMove { agent: j, from, to, case });
            }
        }
    }
    Ok(moves)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::kernels::{balance_dominates, kernel};

    fn ex1() -> Allocation {
        Allocation::from_resource_sets(8, &[vec![0, 1], vec![2, 3, 4], vec![5, 6, 7], vec![]]).unwrap()
    }

    #[test]
    fn chain_application() {
        let a = ex1();
        let moved = apply_chain(&a, &Chain::single(2, 1, 3).unwrap()).unwrap();
        assert_eq!(moved.resource_of(2), 3);
        assert_eq!(kernel(&moved).entries(), &[3, 2, 2, 1]);
        let back = apply_chain(&moved, &Chain::single(2, 3, 1).unwrap()).unwrap();
        assert_eq!(back, a);
    }

    #[test]
    fn invalid_chains_are_rejected() {
        let a = ex1();
        assert_eq!(apply_chain(&a, &Chain::single(2, 0, 3).unwrap()), Err(IscgError::ChainInvalidAt(0)));
        let two = Chain::new(vec![1, 3, 0], vec![2, 0]).unwrap();
        assert_eq!(apply_chain(&a, &two), Err(IscgError::ChainInvalidAt(1)));
        assert_eq!(Chain::new(vec![1, 1], vec![2]), Err(IscgError::ChainInvalidAt(0)));
        assert!(Chain::new(vec![1], vec![]).is_err());
    }

    #[test]
    fn swap_example1() {
        let a = ex1();
        let b = swap(&a, 0, 5).unwrap();
        assert_eq!(b.members(0), vec![1, 5]);
        assert_eq!(b.members(2), vec![0, 6, 7]);
        assert_eq!(kernel(&b).entries(), &[3, 3, 2, 0]);
        assert_eq!(swap(&b, 0, 5).unwrap(), a);
        assert_eq!(swap(&a, 0, 1), Err(IscgError::SameResource(0, 1)));
    }

    #[test]
    fn chain_search() {
        let a = ex1();
        assert!(find_chain(&a, &a, 2).is_none());
        let b = swap(&a, 0, 5).unwrap();
        let ch = find_chain(&a, &b, 3).unwrap();
        assert!(ch.connects(&a, &b));
        assert_eq!(ch.len(), 3);
        assert!(find_chain(&a, &b, 4).is_none());
    }

    #[test]
    fn example4_blocking() {
        let inst = Instance::from_agent_access(2, &[vec![0], vec![1], vec![0, 1]]).unwrap();
        let a = Allocation::from_assignment(2, vec![0, 1, 0]).unwrap();
        let w = blocks(&inst, &a, &Coalition::new([0, 2]).unwrap(), &Limits::default()).unwrap().unwrap();
        assert_eq!(w.induced.assignment(), &[0, 1, 1]);
        assert_eq!(w.member_costs, vec![(0, 2, 1), (2, 2, 2)]);
        w.validate(&inst).unwrap();
    }

    #[test]
    fn lone_agent_cannot_block() {
        let inst = Instance::full_access(3, 3).unwrap();
        let a = Allocation::from_assignment(3, vec![0, 1, 1]).unwrap();
        assert!(blocks(&inst, &a, &Coalition::singleton(0), &Limits::default()).unwrap().is_none());
    }

    #[test]
    fn search_bound_surfaces() {
        let inst = Instance::full_access(10, 3).unwrap();
        let a = Allocation::from_assignment(3, vec![0; 10]).unwrap();
        let limits = Limits { search_bound: 3, ..Limits::default() };
        let c = Coalition::grand(10);
        assert_eq!(blocks(&inst, &a, &c, &limits), Err(IscgError::SearchBoundExceeded { bound: 3 }));
    }

    #[test]
    fn moves_on_unbalanced_pair() {
        let inst = Instance::full_access(4, 2).unwrap();
        let a = Allocation::from_assignment(2, vec![0, 0, 0, 1]).unwrap();
        let structure = CoalitionStructure::singletons(4);
        let moves = improving_moves(&inst, &a, &structure).unwrap();
        assert_eq!(moves.len(), 3);
        for mv in moves {
            assert_eq!(mv.case, MoveCase::LoadGap);
            let b = apply_chain(&a, &mv.chain()).unwrap();
            assert!(balance_dominates(&b, &a, &structure).unwrap());
        }
    }

    #[test]
    fn coalition_gap_move() {
        // loads 3/2, coalition {1,2,3,4} split 3/1
        let inst = Instance::full_access(5, 2).unwrap();
        let a = Allocation::from_resource_sets(5, &[vec![0, 1, 2], vec![3, 4]]).unwrap();
        let structure = CoalitionStructure::partition_of(5, &[vec![0, 1, 2, 3], vec![4]]).unwrap();
        let moves = improving_moves(&inst, &a, &structure).unwrap();
        assert_eq!(moves.len(), 3);
        assert!(moves.iter().all(|m| m.case == MoveCase::CoalitionGap && m.to == 1));
        let balanced = Allocation::from_resource_sets(5, &[vec![0, 1, 4], vec![2, 3]]).unwrap();
        assert!(improving_moves(&inst, &balanced, &structure).unwrap().is_empty());
    }
}
