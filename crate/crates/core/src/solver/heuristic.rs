//! Two-tier local ascent toward the maximal set.
//!
//! Tier 1 pushes single units of load along augmenting chains until no chain
//! from a resource of load `x` reaches one of load `<= x - 2`. With chains of
//! up to `m` resources this leaves the kernel lexicographically minimal.
//! Tier 2 keeps the kernel fixed and accepts any kernel-preserving move, chain
//! or cross-coalition swap that C-balance dominates the current allocation.
//! Nothing here is trusted: callers certify the result.

use std::cell::Cell;
use std::collections::VecDeque;

use crate::deviations::{apply_chain, improving_moves, swap, Chain};
use crate::error::Result;
use crate::game::{Allocation, CoalitionStructure, Instance};
use crate::kernels::balance_dominates;

const MAX_ROUNDS: usize = 100_000;
const MAX_CANDIDATES_PER_ROUND: usize = 50_000;

/// Each agent on its first accessible resource.
pub fn canonical_start(inst: &Instance) -> Allocation {
    let assignment = (0..inst.agent_count()).map(|j| inst.accessible(j)[0]).collect();
    Allocation::from_assignment(inst.resource_count(), assignment).expect("accessible resources are in range")
}

/// Shortest chain (at most `chain_limit` resources) from `source` to a resource
/// whose load is at most `load(source) - 2`.
fn load_reducing_chain(inst: &Instance, a: &Allocation, source: usize, chain_limit: usize) -> Option<Chain> {
    let m = inst.resource_count();
    let target_load = a.load(source).checked_sub(2)?;
    let sets = a.resource_sets();
    let mut parent: Vec<Option<(usize, usize)>> = vec![None; m];
    let mut depth = vec![usize::MAX; m];
    depth[source] = 0;
    let mut queue = VecDeque::from([source]);
    while let Some(r) = queue.pop_front() {
        if depth[r] + 1 >= chain_limit {
            continue;
        }
        for next in 0..m {
            if depth[next] != usize::MAX {
                continue;
            }
            let Some(&mover) = sets[r].iter().find(|&&j| inst.can_use(j, next)) else {
                continue;
            };
            depth[next] = depth[r] + 1;
            parent[next] = Some((r, mover));
            if a.load(next) <= target_load {
                let mut resources = vec![next];
                let mut movers = Vec::new();
                let mut at = next;
                while let Some((prev, j)) = parent[at] {
                    resources.push(prev);
                    movers.push(j);
                    at = prev;
                }
                resources.reverse();
                movers.reverse();
                return Chain::new(resources, movers).ok();
            }
            queue.push_back(next);
        }
    }
    None
}

/// Tier 1: lexicographically lowers the kernel until no load-reducing chain remains.
pub fn balance_loads(inst: &Instance, start: &Allocation, chain_limit: usize) -> Result<Allocation> {
    let mut a = start.clone();
    for _ in 0..MAX_ROUNDS {
        let mut sources: Vec<usize> = (0..inst.resource_count()).collect();
        sources.sort_by(|&x, &y| a.load(y).cmp(&a.load(x)).then(x.cmp(&y)));
        let chain = sources
            .into_iter()
            .take_while(|&s| a.load(s) >= 2)
            .find_map(|s| load_reducing_chain(inst, &a, s, chain_limit));
        match chain {
            Some(ch) => a = apply_chain(&a, &ch)?,
            None => break,
        }
    }
    Ok(a)
}

/// Kernel-preserving chains: simple paths from `s` to `t` with
/// `load(s) = load(t) + 1`, one mover per coalition represented on each hop.
fn kernel_preserving_chains(
    inst: &Instance,
    a: &Allocation,
    owner: &[usize],
    chain_limit: usize,
    budget: usize,
) -> Vec<Chain> {
    let m = inst.resource_count();
    let sets = a.resource_sets();
    let mut found = Vec::new();
    let mut on_path = vec![false; m];

    struct Walk<'w> {
        inst: &'w Instance,
        a: &'w Allocation,
        sets: &'w [Vec<usize>],
        owner: &'w [usize],
        chain_limit: usize,
        budget: usize,
        visits: Cell<usize>,
    }

    fn walk(
        w: &Walk<'_>,
        resources: &mut Vec<usize>,
        movers: &mut Vec<usize>,
        on_path: &mut [bool],
        found: &mut Vec<Chain>,
    ) {
        w.visits.set(w.visits.get() + 1);
        if found.len() >= w.budget || w.visits.get() > 4 * w.budget {
            return;
        }
        let source = resources[0];
        let at = *resources.last().expect("path is nonempty");
        if resources.len() >= 2 && w.a.load(source) == w.a.load(at) + 1 {
            if let Ok(ch) = Chain::new(resources.clone(), movers.clone()) {
                found.push(ch);
            }
        }
        if resources.len() >= w.chain_limit {
            return;
        }
        for next in 0..w.a.resource_count() {
            if on_path[next] {
                continue;
            }
            let mut seen_coalitions: Vec<usize> = Vec::new();
            for &j in &w.sets[at] {
                if !w.inst.can_use(j, next) || seen_coalitions.contains(&w.owner[j]) {
                    continue;
                }
                seen_coalitions.push(w.owner[j]);
                on_path[next] = true;
                resources.push(next);
                movers.push(j);
                walk(w, resources, movers, on_path, found);
                resources.pop();
                movers.pop();
                on_path[next] = false;
            }
        }
    }

    let ctx = Walk { inst, a, sets: &sets, owner, chain_limit, budget, visits: Cell::new(0) };
    for s in 0..m {
        if a.load(s) == 0 {
            continue;
        }
        on_path[s] = true;
        let mut resources = vec![s];
        let mut movers = Vec::new();
        walk(&ctx, &mut resources, &mut movers, &mut on_path, &mut found);
        on_path[s] = false;
    }
    found
}

fn improving_neighbor(
    inst: &Instance,
    a: &Allocation,
    structure: &CoalitionStructure,
    owner: &[usize],
    chain_limit: usize,
) -> Result<Option<Allocation>> {
    if let Some(mv) = improving_moves(inst, a, structure)?.first() {
        return Ok(Some(apply_chain(a, &mv.chain())?));
    }
    for ch in kernel_preserving_chains(inst, a, owner, chain_limit, MAX_CANDIDATES_PER_ROUND) {
        let cand = apply_chain(a, &ch)?;
        if balance_dominates(&cand, a, structure)? {
            return Ok(Some(cand));
        }
    }
    let mut tried = 0;
    for j1 in 0..inst.agent_count() {
        for j2 in j1 + 1..inst.agent_count() {
            let (r1, r2) = (a.resource_of(j1), a.resource_of(j2));
            if owner[j1] == owner[j2] || r1 == r2 || !inst.can_use(j1, r2) || !inst.can_use(j2, r1) {
                continue;
            }
            tried += 1;
            if tried > MAX_CANDIDATES_PER_ROUND {
                return Ok(None);
            }
            let cand = swap(a, j1, j2)?;
            if balance_dominates(&cand, a, structure)? {
                return Ok(Some(cand));
            }
        }
    }
    Ok(None)
}

/// Tier 2: within the current kernel, climbs the coalition-kernel order.
pub fn rebalance_coalitions(
    inst: &Instance,
    start: &Allocation,
    structure: &CoalitionStructure,
    chain_limit: usize,
) -> Result<Allocation> {
    structure.require_partition()?;
    let mut owner = vec![0; inst.agent_count()];
    for (ci, c) in structure.coalitions().iter().enumerate() {
        for &j in c.members() {
            owner[j] = ci;
        }
    }
    let mut a = start.clone();
    for _ in 0..MAX_ROUNDS {
        match improving_neighbor(inst, &a, structure, &owner, chain_limit)? {
            Some(next) => a = next,
            None => break,
        }
    }
    Ok(a)
}

/// Both tiers from the canonical start.
pub fn ascend(inst: &Instance, structure: &CoalitionStructure, chain_limit: usize) -> Result<Allocation> {
    let balanced = balance_loads(inst, &canonical_start(inst), chain_limit)?;
    rebalance_coalitions(inst, &balanced, structure, chain_limit)
}
