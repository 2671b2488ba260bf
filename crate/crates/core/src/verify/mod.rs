//! Executable checks of the lemmas, the existence theorem and its proof, the
//! worked examples, and seeded suites running them on random small games.

pub mod fixtures;
pub mod generator;
pub mod lemmas;
pub mod oracles;
pub mod proof;
pub mod suites;

pub use fixtures::{reproduce_examples, ExamplesReport};
pub use generator::{gen_instance, grid_instance, CoalitionShape, GeneratorConfig, InstanceStream};
pub use lemmas::{
    check_lemma1, check_lemma2, check_lemma3a, check_lemma3b, check_theorem1, stratum_bound, StratumBound,
};
pub use proof::{check_proof_steps, ChainSwap, Improvement, ProofTrace, StratumRound};
pub use suites::{
    lemma1_suite, lemma2_suite, lemma3a_suite, lemma3b_suite, proof_suites, run_suite, theorem_suites, ProofSuites,
    SuiteReport, TheoremSuites, Violation,
};
