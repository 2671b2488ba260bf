use std::collections::BTreeMap;

use crate::error::Result;
use crate::game::{enumerate_feasible, Allocation, CoalitionStructure, Instance, Limits};
use crate::kernels::{coalition_kernel, kernel, lex_less, SortedKernel};

/// Coalition-kernel profile `k(c, ·)` for every coalition, in structure order.
type Profile = Vec<SortedKernel>;

fn profile(a: &Allocation, structure: &CoalitionStructure) -> Profile {
    structure.coalitions().iter().map(|c| coalition_kernel(a, c)).collect()
}

/// Every coalition kernel of `x` is weakly smaller and one strictly smaller.
fn profile_dominates(x: &Profile, y: &Profile) -> bool {
    let mut strict = false;
    for (cx, cy) in x.iter().zip(y) {
        if cx == cy {
            continue;
        }
        if lex_less(cx.entries(), cy.entries()).unwrap_or(false) {
            strict = true;
        } else {
            return false;
        }
    }
    strict
}

/// The feasible allocations not C-balance dominated by any feasible allocation,
/// in canonical enumeration order.
///
/// Anything above the lexicographically least kernel is dominated by an
/// allocation attaining it, so only that kernel class is kept; within it the
/// order reduces to Pareto comparison of coalition-kernel profiles, which is
/// done once per distinct profile.
pub fn maximal_allocations(
    inst: &Instance,
    structure: &CoalitionStructure,
    limits: &Limits,
) -> Result<Vec<Allocation>> {
    structure.require_partition()?;
    let mut best: Option<SortedKernel> = None;
    let mut class: Vec<(Allocation, Profile)> = Vec::new();
    for a in enumerate_feasible(inst, limits)? {
        let k = kernel(&a);
        match &best {
            Some(b) if &k > b => continue,
            Some(b) if &k == b => {}
            _ => {
                best = Some(k);
                class.clear();
            }
        }
        let p = profile(&a, structure);
        class.push((a, p));
    }
    let mut distinct: BTreeMap<Profile, bool> = BTreeMap::new();
    for (_, p) in &class {
        distinct.entry(p.clone()).or_insert(true);
    }
    let keys: Vec<Profile> = distinct.keys().cloned().collect();
    for y in &keys {
        let dominated = keys.iter().any(|x| profile_dominates(x, y));
        distinct.insert(y.clone(), !dominated);
    }
    Ok(class.into_iter().filter(|(_, p)| distinct[p]).map(|(a, _)| a).collect())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn single_resource() {
        let inst = Instance::full_access(3, 1).unwrap();
        let max = maximal_allocations(&inst, &CoalitionStructure::singletons(3), &Limits::default()).unwrap();
        assert_eq!(max.len(), 1);
    }

    #[test]
    fn two_by_two() {
        let inst = Instance::full_access(2, 2).unwrap();
        let max = maximal_allocations(&inst, &CoalitionStructure::singletons(2), &Limits::default()).unwrap();
        let got: Vec<&[usize]> = max.iter().map(|a| a.assignment()).collect();
        assert_eq!(got, vec![&[0, 1][..], &[1, 0][..]]);
    }

    #[test]
    fn family_mode_is_rejected() {
        let inst = Instance::full_access(2, 2).unwrap();
        let fam = CoalitionStructure::family_of(2, &[vec![0]]).unwrap();
        assert!(maximal_allocations(&inst, &fam, &Limits::default()).is_err());
    }
}
