//! Step-by-step replay of the existence proof on a concrete blocking pair.
//!
//! Given `a`, a coalition `c` of the partition and an allocation `b` induced
//! when `c` blocks `a`, the replay restricts the access sets, shortens every
//! chain to length 2, splits the resources into unchanged / shrinking / growing
//! sets and runs the stratum iteration. Because `c` blocks `a`, the proof says
//! the iteration must stop at an improving move; the replay turns that move
//! into an allocation of the original game that C-balance dominates `a`.
//! Every intermediate claim is checked and a failure is reported as
//! `PropertyViolated`.

use std::collections::BTreeSet;

use crate::deviations::{apply_chain, classify_move, find_chain, BlockingWitness, Chain, ImprovingMove};
use crate::error::{IscgError, Result};
use crate::game::{Allocation, Coalition, CoalitionStructure, Instance};
use crate::kernels::{
    balance_dominates, coalition_counts, coalition_kernel, kernel, welfare_dominates, welfare_kernel,
};
use crate::verify::lemmas::stratum_bound;

/// One shortening update on the chain `i1 -(j1)-> i2 -(j2)-> i3`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ChainSwap {
    pub i1: usize,
    pub i2: usize,
    pub i3: usize,
    pub j1: usize,
    pub j2: usize,
    /// Resources in the chain that was found.
    pub chain_length: usize,
}

/// One pass of the stratum iteration.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct StratumRound {
    /// `M̃` at the start of the round, ascending.
    pub mtilde: Vec<usize>,
    pub k_max: usize,
    pub k_bar_max: usize,
    /// `M⁻(k_max)` outside `M̃`.
    pub minus_stratum: Vec<usize>,
    /// `M⁺(k_max − 1)` outside `M̃`.
    pub plus_stratum: Vec<usize>,
    /// Pairs `(i, υ(i))`; empty when the round stopped at an improving move.
    pub upsilon: Vec<(usize, usize)>,
}

/// The improving move the iteration stopped at, and its image in the original game.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Improvement {
    pub round: usize,
    pub step: ImprovingMove,
    /// `a ⊕ (i1 -(j)-> i2)`, feasible under the final restricted access.
    pub restricted: Allocation,
    /// Indices of the shortening updates undone to reach the original game.
    pub undone: Vec<usize>,
    /// Feasible in the original game; C-balance dominates `a`.
    pub allocation: Allocation,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ProofTrace {
    /// `f_i = a_i ∪ b_i`, per resource.
    pub restricted_access: Vec<Vec<usize>>,
    pub swaps: Vec<ChainSwap>,
    /// Access sets after all shortening updates.
    pub final_access: Vec<Vec<usize>>,
    /// `b` after all shortening updates.
    pub reduced: Allocation,
    /// The remaining chains, one per mover, by mover id.
    pub residual_chains: Vec<Chain>,
    pub unchanged: Vec<usize>,
    pub shrinking: Vec<usize>,
    pub growing: Vec<usize>,
    pub rounds: Vec<StratumRound>,
    pub improvement: Improvement,
}

impl ProofTrace {
    pub fn residual_lengths_are_two(&self) -> bool {
        self.residual_chains.iter().all(|ch| ch.len() == 2)
    }

    /// `M⁰`, `M⁻`, `M⁺` are disjoint and cover all `m` resources.
    pub fn splits_resources(&self, m: usize) -> bool {
        let mut seen = vec![0u8; m];
        for &i in self.unchanged.iter().chain(&self.shrinking).chain(&self.growing) {
            if i >= m {
                return false;
            }
            seen[i] += 1;
        }
        seen.iter().all(|&x| x == 1)
    }
}

fn violated(msg: impl Into<String>) -> IscgError {
    IscgError::PropertyViolated(msg.into())
}

fn access_instance(inst: &Instance, f: &[BTreeSet<usize>]) -> Result<Instance> {
    let rows: Vec<Vec<usize>> = f.iter().map(|s| s.iter().copied().collect()).collect();
    inst.with_resource_access(&rows)
}

fn as_rows(f: &[BTreeSet<usize>]) -> Vec<Vec<usize>> {
    f.iter().map(|s| s.iter().copied().collect()).collect()
}

/// Replays the proof on the blocking pair `(a, b)` of coalition `c`.
///
/// `c` must be a coalition of the partition `structure`, and `b` must be an
/// allocation induced when `c` blocks `a` (otherwise `HypothesisViolated`).
pub fn check_proof_steps(
    inst: &Instance,
    a: &Allocation,
    b: &Allocation,
    c: &Coalition,
    structure: &CoalitionStructure,
) -> Result<ProofTrace> {
    structure.require_partition()?;
    if !structure.coalitions().contains(c) {
        return Err(IscgError::HypothesisViolated("coalition is not part of the structure".into()));
    }
    BlockingWitness::new(c.clone(), a.clone(), b.clone())
        .validate(inst)
        .map_err(|e| IscgError::HypothesisViolated(format!("b is not induced when c blocks a: {e}")))?;
    if !welfare_dominates(b, a, c)? {
        return Err(violated("induced allocation does not c-welfare dominate a"));
    }

    let n = a.agent_count();
    let m = a.resource_count();

    // Step 1
    let mut f: Vec<BTreeSet<usize>> = (0..m).map(|i| a.members(i).into_iter().chain(b.members(i)).collect()).collect();
    let restricted_access = as_rows(&f);
    let mut history: Vec<Instance> = vec![access_instance(inst, &f)?];

    // Step 2
    let mut bar = b.clone();
    let mut swaps = Vec::new();
    while let Some(chain) = find_chain(a, &bar, 3) {
        if swaps.len() >= n * m {
            return Err(violated("chain shortening did not terminate within n*m updates"));
        }
        let r = chain.resources();
        let mv = chain.movers();
        let (i1, i2, i3, j1, j2) = (r[0], r[1], r[2], mv[0], mv[1]);
        if !c.contains(j1) || !c.contains(j2) {
            return Err(violated("a chain mover lies outside the coalition"));
        }
        f[i3].remove(&j2);
        f[i3].insert(j1);
        let next = apply_chain(&bar, &Chain::new(vec![i3, i2, i3], vec![j2, j1])?)?;
        if kernel(&next) != kernel(&bar)
            || coalition_kernel(&next, c) != coalition_kernel(&bar, c)
            || welfare_kernel(&next, c) != welfare_kernel(&bar, c)
        {
            return Err(violated(format!("shortening update {} changed a kernel", swaps.len() + 1)));
        }
        let restricted = access_instance(inst, &f)?;
        if !restricted.is_feasible(a) || !restricted.is_feasible(&next) {
            return Err(violated(format!("shortening update {} lost feasibility", swaps.len() + 1)));
        }
        if !welfare_dominates(&next, a, c)? {
            return Err(violated(format!("c-welfare dominance lost at update {}", swaps.len() + 1)));
        }
        let movers = |x: &Allocation| (0..n).filter(|&j| a.resource_of(j) != x.resource_of(j)).count();
        if movers(&next) >= movers(&bar) {
            return Err(violated("shortening update did not reduce the movers"));
        }
        swaps.push(ChainSwap { i1, i2, i3, j1, j2, chain_length: chain.len() });
        history.push(restricted);
        bar = next;
    }
    let final_instance = history.last().expect("step 1 access is recorded").clone();

    let residual_chains: Vec<Chain> = (0..n)
        .filter(|&j| a.resource_of(j) != bar.resource_of(j))
        .map(|j| Chain::single(j, a.resource_of(j), bar.resource_of(j)))
        .collect::<Result<_>>()?;

    let mut unchanged = Vec::new();
    let mut shrinking = Vec::new();
    let mut growing = Vec::new();
    for i in 0..m {
        let before: BTreeSet<usize> = a.members(i).into_iter().collect();
        let after: BTreeSet<usize> = bar.members(i).into_iter().collect();
        if before == after {
            unchanged.push(i);
        } else if after.is_subset(&before) {
            shrinking.push(i);
        } else if before.is_subset(&after) {
            growing.push(i);
        } else {
            return Err(violated(format!("resource {} both gains and loses agents", i + 1)));
        }
    }
    for ch in &residual_chains {
        let r = ch.resources();
        if !shrinking.contains(&r[0]) || !growing.contains(&r[1]) {
            return Err(violated(format!("residual chain {ch} does not run from M- to M+")));
        }
    }

    // Stratum iteration
    let ca = coalition_counts(a, c);
    let cb = coalition_counts(&bar, c);
    let mut in_mtilde = vec![false; m];
    for &i in &unchanged {
        in_mtilde[i] = true;
    }
    let mut rounds = Vec::new();
    loop {
        if in_mtilde.iter().all(|&x| x) {
            return Err(violated("M~ reached M: welfare kernels coincide, contradicting c-welfare dominance"));
        }
        let mtilde: Vec<usize> = (0..m).filter(|&i| in_mtilde[i]).collect();
        let bound = stratum_bound(a, &bar, c, &in_mtilde)
            .map_err(|e| violated(format!("stratum lemma premises fail for M~ = {mtilde:?}: {e}")))?;
        if !bound.holds() {
            return Err(violated(format!("stratum lemma conclusion fails for M~ = {mtilde:?}")));
        }
        let k_max = bound.k_max;
        if growing.iter().any(|&i| !in_mtilde[i] && a.load(i) >= k_max) {
            return Err(violated(format!("M+({k_max}) or above is nonempty outside M~")));
        }
        let minus_stratum: Vec<usize> =
            shrinking.iter().copied().filter(|&i| !in_mtilde[i] && a.load(i) == k_max).collect();
        let plus_stratum: Vec<usize> =
            growing.iter().copied().filter(|&i| !in_mtilde[i] && k_max >= 1 && a.load(i) == k_max - 1).collect();
        let mut round = StratumRound {
            mtilde,
            k_max,
            k_bar_max: bound.k_bar_max,
            minus_stratum: minus_stratum.clone(),
            plus_stratum: plus_stratum.clone(),
            upsilon: Vec::new(),
        };

        // An improving move along a residual chain ends the replay.
        for ch in residual_chains.iter().filter(|ch| minus_stratum.contains(&ch.resources()[0])) {
            let (j, i1, i2) = (ch.movers()[0], ch.resources()[0], ch.resources()[1]);
            if let Some(case) = classify_move(a, structure, j, i2)? {
                rounds.push(round);
                let step = ImprovingMove { agent: j, from: i1, to: i2, case };
                let improvement =
                    lift_improvement(inst, a, structure, &final_instance, &history, &swaps, step, rounds.len() - 1)?;
                return Ok(ProofTrace {
                    restricted_access,
                    swaps,
                    final_access: as_rows(&f),
                    reduced: bar,
                    residual_chains,
                    unchanged,
                    shrinking,
                    growing,
                    rounds,
                    improvement,
                });
            }
        }

        // No improving move: υ must be a count-preserving bijection.
        let mut upsilon = Vec::new();
        let mut hit = vec![false; m];
        for &i in &minus_stratum {
            for ch in residual_chains.iter().filter(|ch| ch.resources()[0] == i) {
                let i2 = ch.resources()[1];
                if !plus_stratum.contains(&i2) {
                    return Err(violated(format!("chain {ch} does not end in M+({})", k_max - 1)));
                }
                if bar.load(i2) != a.load(i2) + 1 || hit[i2] {
                    return Err(violated(format!("resource {} receives more than one agent", i2 + 1)));
                }
                hit[i2] = true;
                upsilon.push((i, i2));
            }
        }
        if upsilon.len() != minus_stratum.len() || upsilon.len() != plus_stratum.len() {
            return Err(violated(format!("upsilon is not a bijection at k_max = {k_max}")));
        }
        if let Some(&(i, u)) = upsilon.iter().find(|&&(i, u)| cb[u] != ca[i]) {
            return Err(violated(format!("coalition counts differ on resource {} and its image {}", i + 1, u + 1)));
        }
        round.upsilon = upsilon;
        rounds.push(round);
        let before = in_mtilde.iter().filter(|&&x| x).count();
        for &i in minus_stratum.iter().chain(&plus_stratum) {
            in_mtilde[i] = true;
        }
        if in_mtilde.iter().filter(|&&x| x).count() == before {
            return Err(violated("M~ did not grow"));
        }
    }
}

/// Applies the improving move and undoes shortening updates, newest first,
/// until the allocation is feasible under each earlier access relation.
#[allow(clippy::too_many_arguments)]
fn lift_improvement(
    inst: &Instance,
    a: &Allocation,
    structure: &CoalitionStructure,
    final_instance: &Instance,
    history: &[Instance],
    swaps: &[ChainSwap],
    step: ImprovingMove,
    round: usize,
) -> Result<Improvement> {
    let restricted = apply_chain(a, &step.chain())?;
    if !final_instance.is_feasible(&restricted) {
        return Err(violated("improving move is infeasible under the restricted access"));
    }
    if !balance_dominates(&restricted, a, structure)? {
        return Err(violated("improving move does not C-balance dominate a"));
    }
    let mut current = restricted.clone();
    let mut undone = Vec::new();
    for (k, sw) in swaps.iter().enumerate().rev() {
        let earlier = &history[k];
        if earlier.is_feasible(&current) {
            continue;
        }
        if current.resource_of(sw.j1) != sw.i3 || current.resource_of(sw.j2) != sw.i2 {
            return Err(violated(format!("update {} cannot be undone", k + 1)));
        }
        let back = apply_chain(&current, &Chain::new(vec![sw.i3, sw.i2, sw.i3], vec![sw.j1, sw.j2])?)?;
        if !earlier.is_feasible(&back) {
            return Err(violated(format!("undoing update {} leaves an infeasible allocation", k + 1)));
        }
        current = back;
        undone.push(k);
    }
    if !inst.is_feasible(&current) || !balance_dominates(&current, a, structure)? {
        return Err(violated("lifted allocation does not C-balance dominate a in the original game"));
    }
    Ok(Improvement { round, step, restricted, undone, allocation: current })
}
