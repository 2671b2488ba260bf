use iscg_core::deviations::{apply_chain, blocks, find_chain, induced_allocations, swap, Chain};
use iscg_core::kernels::{balance_dominates, coalition_kernel, kernel, lex_less, welfare_dominates, welfare_kernel};
use iscg_core::solver::{
    find_stable, is_c_stable, is_nash, is_pareto, is_super_strong, maximal_allocations, run_dynamics, stability_report,
    CanonicalPolicy, SolveMode, SolveOptions, Terminal,
};
use iscg_core::verify::fixtures::{
    kernel_example, non_potential_coalition, non_potential_example, overlapping_example, stable_outside_maximal_example,
};
use iscg_core::verify::{check_theorem1, reproduce_examples};
use iscg_core::{enumerate_feasible, Allocation, Coalition, CoalitionStructure, Instance, IscgError, Limits};

fn limits() -> Limits {
    Limits::default()
}

#[test]
fn all_examples_reproduce() {
    let report = reproduce_examples(&limits()).unwrap();
    assert!(report.lines.iter().any(|l| l.starts_with("example 4")));
    assert!(report.lines.len() >= 18);
}

#[test]
fn example1_kernels_and_moves() {
    let ex = kernel_example();
    let a = &ex.allocation;
    assert_eq!(kernel(a).entries(), &[3, 3, 2, 0]);
    assert_eq!(coalition_kernel(a, &ex.coalition).entries(), &[2, 1, 0, 0]);
    assert_eq!(welfare_kernel(a, &ex.coalition).entries(), &[0, 0, 0, 0, 0, 1, 2, 0]);

    // agent 3 from resource 2 to resource 4
    let moved = apply_chain(a, &Chain::single(2, 1, 3).unwrap()).unwrap();
    assert_eq!(moved.resource_of(2), 3);
    assert_eq!(kernel(&moved).entries(), &[3, 2, 2, 1]);

    let swapped = swap(a, 0, 5).unwrap();
    assert_eq!(swapped.members(0), vec![1, 5]);
    assert_eq!(swapped.members(2), vec![0, 6, 7]);
    assert_eq!(kernel(&swapped), kernel(a));
    assert_eq!(swap(&swapped, 0, 5).unwrap(), *a);
    assert!(matches!(swap(a, 0, 1), Err(IscgError::SameResource(0, 1))));
}

#[test]
fn example2_claims() {
    let ex = stable_outside_maximal_example();
    let l = limits();
    assert!(is_nash(&ex.instance, &ex.allocation).unwrap().holds);
    assert!(is_pareto(&ex.instance, &ex.allocation, &l).unwrap().holds);
    assert!(is_c_stable(&ex.instance, &ex.allocation, &ex.structure, &l).unwrap().holds);
    for c in ex.structure.coalitions() {
        assert_eq!(induced_allocations(&ex.instance, &ex.allocation, c, &l).unwrap().count(), 0);
    }
    assert!(balance_dominates(&ex.better, &ex.allocation, &ex.structure).unwrap());
    assert!(!balance_dominates(&ex.allocation, &ex.allocation, &ex.structure).unwrap());

    assert_eq!(enumerate_feasible(&ex.instance, &l).unwrap().count(), 32768);
    let maximal = maximal_allocations(&ex.instance, &ex.structure, &l).unwrap();
    assert!(!maximal.contains(&ex.allocation));
    assert!(check_theorem1(&ex.instance, &ex.structure, &l).unwrap());

    let sol = find_stable(&ex.instance, &ex.structure, &SolveOptions::new(SolveMode::Exact)).unwrap();
    assert!(sol.report.is_certified());
    assert!(maximal.contains(&sol.allocation));
    let better = stability_report(&ex.instance, &ex.better, &ex.structure, false, &l).unwrap();
    assert!(better.is_certified());
}

#[test]
fn example3_claims() {
    let ex = non_potential_example();
    let c = non_potential_coalition();
    let l = limits();
    let (a, abar) = (&ex.allocation, &ex.better);
    assert_eq!(kernel(a).entries(), &[5, 5, 4, 4]);
    assert_eq!(coalition_kernel(a, &c).entries(), &[4, 4, 4, 1]);
    assert_eq!(coalition_kernel(abar, &c).entries(), &[5, 3, 3, 2]);
    assert!(lex_less(&[4, 4, 4, 1], &[5, 3, 3, 2]).unwrap());
    let w = welfare_kernel(a, &c);
    assert_eq!((w.at_cardinality(5), w.at_cardinality(4)), (8, 5));
    assert_eq!(w.entries().iter().sum::<usize>(), 13);
    assert!(welfare_dominates(abar, a, &c).unwrap());
    assert!(!welfare_dominates(a, a, &c).unwrap());
    assert!(!balance_dominates(abar, a, &ex.structure).unwrap());

    let witness = blocks(&ex.instance, a, &c, &l).unwrap().expect("c blocks a");
    witness.validate(&ex.instance).unwrap();
    let wide = Limits { search_bound: 10_000_000, ..l };
    let mut found = false;
    for b in induced_allocations(&ex.instance, a, &c, &wide).unwrap() {
        if b.unwrap() == *abar {
            found = true;
            break;
        }
    }
    assert!(found);
    assert!(find_chain(a, abar, 3).is_some());
    assert!(find_chain(a, a, 2).is_none());
}

#[test]
fn example3_dynamics_first_step() {
    let ex = non_potential_example();
    let trace = run_dynamics(&ex.instance, &ex.structure, &ex.allocation, &CanonicalPolicy, 1, &limits()).unwrap();
    assert_eq!(trace.steps.len(), 1);
    assert_eq!(trace.terminal, Terminal::StepLimit);
    let step = &trace.steps[0];
    assert_eq!(step.coalition_index, 0);
    assert_eq!(step.witness.coalition, non_potential_coalition());
    step.witness.validate(&ex.instance).unwrap();
}

#[test]
fn example4_claims() {
    let (inst, family) = overlapping_example();
    let l = limits();
    let all: Vec<Allocation> = enumerate_feasible(&inst, &l).unwrap().collect();
    assert_eq!(all.len(), 2);
    for a in &all {
        let check = is_c_stable(&inst, a, &family, &l).unwrap();
        assert!(!check.holds);
        check.witness.unwrap().validate(&inst).unwrap();
        assert!(!is_super_strong(&inst, a, &l).unwrap().holds);
    }
    // 1 and 3 on resource 1: {1,3} blocks by moving 3
    let a = Allocation::from_assignment(2, vec![0, 1, 0]).unwrap();
    let c = Coalition::new([0, 2]).unwrap();
    let w = blocks(&inst, &a, &c, &l).unwrap().unwrap();
    assert_eq!(w.induced.assignment(), &[0, 1, 1]);
    assert_eq!(w.member_costs, vec![(0, 2, 1), (2, 2, 2)]);
    assert!(matches!(maximal_allocations(&inst, &family, &l), Err(IscgError::NotAPartition(_))));
}

#[test]
fn small_spec_cases() {
    let l = limits();
    // alone on a resource: nothing to gain
    let inst = Instance::full_access(3, 3).unwrap();
    let a = Allocation::from_assignment(3, vec![0, 1, 2]).unwrap();
    assert!(blocks(&inst, &a, &Coalition::singleton(0), &l).unwrap().is_none());

    // chained access: Nash but not Pareto
    let inst = Instance::from_agent_access(3, &[vec![0], vec![0, 1], vec![1, 2]]).unwrap();
    let a = Allocation::from_assignment(3, vec![0, 0, 1]).unwrap();
    assert!(is_nash(&inst, &a).unwrap().holds);
    let p = is_pareto(&inst, &a, &l).unwrap();
    assert!(!p.holds);
    p.witness.unwrap().validate(&inst).unwrap();

    // one resource
    let inst = Instance::full_access(3, 1).unwrap();
    let only = Allocation::from_assignment(1, vec![0; 3]).unwrap();
    assert!(is_pareto(&inst, &only, &l).unwrap().holds);
    assert_eq!(maximal_allocations(&inst, &CoalitionStructure::singletons(3), &l).unwrap(), vec![only]);

    // two agents, two resources
    let inst = Instance::full_access(2, 2).unwrap();
    let k: Vec<Vec<usize>> = maximal_allocations(&inst, &CoalitionStructure::singletons(2), &l)
        .unwrap()
        .iter()
        .map(|a| a.assignment().to_vec())
        .collect();
    assert_eq!(k, vec![vec![0, 1], vec![1, 0]]);

    // balanced, coalition-balanced: super strong
    let inst = Instance::full_access(4, 2).unwrap();
    let a = Allocation::from_assignment(2, vec![0, 1, 0, 1]).unwrap();
    assert!(is_super_strong(&inst, &a, &l).unwrap().holds);

    // n = 1: super strong iff Nash
    let inst = Instance::from_agent_access(2, &[vec![0, 1]]).unwrap();
    for r in 0..2 {
        let a = Allocation::from_assignment(2, vec![r]).unwrap();
        assert_eq!(is_super_strong(&inst, &a, &l).unwrap().holds, is_nash(&inst, &a).unwrap().holds);
    }

    // overloaded full access
    let inst = Instance::full_access(4, 2).unwrap();
    let a = Allocation::from_assignment(2, vec![0, 0, 0, 1]).unwrap();
    assert!(!is_nash(&inst, &a).unwrap().holds);
}

#[test]
fn n1_solver() {
    let inst = Instance::from_agent_access(2, &[vec![1]]).unwrap();
    let sol = find_stable(&inst, &CoalitionStructure::singletons(1), &SolveOptions::new(SolveMode::Heuristic)).unwrap();
    assert_eq!(sol.allocation.assignment(), &[1]);
}
