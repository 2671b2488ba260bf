//! Identical singleton congestion games: every agent picks one resource from
//! its accessible set and pays the number of agents sharing that resource.
//!
//! The crate computes kernel vectors and the balance / welfare dominance
//! orders, decides blocking by coalitions, checks Nash, Pareto, partition and
//! super strong stability by exhaustive search, computes the maximal set under
//! C-balance dominance, and ships a seeded harness that checks the structural
//! lemmas and the existence theorem on random small games.

pub mod deviations;
pub mod error;
pub mod game;
pub mod kernels;
pub mod solver;
pub mod verify;

pub use error::{IscgError, Result};
pub use game::{
    enumerate_feasible, enumerate_range, validate_allocation, validate_instance, AccessSpec, Allocation, Coalition,
    CoalitionStructure, FeasibleAllocations, Instance, Limits, RawInstance, StructureMode, ValidatedAllocation,
};
