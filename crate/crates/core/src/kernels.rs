//! Kernel vectors and the two lexicographic dominance relations.
//!
//! Smaller is better throughout: a lexicographically smaller kernel means a
//! more even spread of agents, and a smaller welfare kernel means coalition
//! members sit on less congested resources.

use crate::error::{IscgError, Result};
use crate::game::{Allocation, Coalition, CoalitionStructure};

/// Non-increasing count profile of length `m` (zeros included for empty resources).
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct SortedKernel {
    entries: Vec<usize>,
    total: usize,
}

impl SortedKernel {
    fn from_counts(mut counts: Vec<usize>) -> Self {
        counts.sort_unstable_by(|a, b| b.cmp(a));
        let total = counts.iter().sum();
        SortedKernel { entries: counts, total }
    }

    pub fn entries(&self) -> &[usize] {
        &self.entries
    }

    pub fn total(&self) -> usize {
        self.total
    }
}

/// `w(c, a)`: position `p` (0-based) counts members on resources of cardinality `n - p`.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct WelfareKernel {
    entries: Vec<usize>,
}

impl WelfareKernel {
    pub fn entries(&self) -> &[usize] {
        &self.entries
    }

    /// Number of members on resources holding exactly `cardinality` agents.
    pub fn at_cardinality(&self, cardinality: usize) -> usize {
        let n = self.entries.len();
        if cardinality == 0 || cardinality > n {
            return 0;
        }
        self.entries[n - cardinality]
    }
}

/// `k(a)`: resource cardinalities, sorted non-increasingly.
pub fn kernel(a: &Allocation) -> SortedKernel {
    SortedKernel::from_counts(a.loads().to_vec())
}

/// `|c ∩ a_i|` for every resource, unsorted.
pub fn coalition_counts(a: &Allocation, c: &Coalition) -> Vec<usize> {
    let mut counts = vec![0; a.resource_count()];
    for &j in c.members() {
        counts[a.resource_of(j)] += 1;
    }
    counts
}

/// `k(c, a)`.
pub fn coalition_kernel(a: &Allocation, c: &Coalition) -> SortedKernel {
    SortedKernel::from_counts(coalition_counts(a, c))
}

/// `w(c, a)`, of length `n`.
pub fn welfare_kernel(a: &Allocation, c: &Coalition) -> WelfareKernel {
    let n = a.agent_count();
    let mut entries = vec![0; n];
    for &j in c.members() {
        let card = a.load(a.resource_of(j));
        entries[n - card] += 1;
    }
    WelfareKernel { entries }
}

/// Strict lexicographic order on equal-length sequences.
pub fn lex_less(u: &[usize], v: &[usize]) -> Result<bool> {
    if u.len() != v.len() {
        return Err(IscgError::LengthMismatch(u.len(), v.len()));
    }
    Ok(u.iter().zip(v).find(|(x, y)| x != y).is_some_and(|(x, y)| x < y))
}

fn require_comparable(x: &Allocation, y: &Allocation) -> Result<()> {
    if x.agent_count() != y.agent_count() || x.resource_count() != y.resource_count() {
        return Err(IscgError::DimensionMismatch(format!(
            "{}x{} vs {}x{}",
            x.agent_count(),
            x.resource_count(),
            y.agent_count(),
            y.resource_count()
        )));
    }
    Ok(())
}

/// Whether `x` C-balance dominates `y`: `k(x) ≺ k(y)`, or equal kernels with
/// every coalition kernel weakly smaller and at least one strictly smaller.
pub fn balance_dominates(x: &Allocation, y: &Allocation, structure: &CoalitionStructure) -> Result<bool> {
    structure.require_partition()?;
    require_comparable(x, y)?;
    let kx = kernel(x);
    let ky = kernel(y);
    if kx != ky {
        return lex_less(kx.entries(), ky.entries());
    }
    let mut strict = false;
    for c in structure.coalitions() {
        let cx = coalition_kernel(x, c);
        let cy = coalition_kernel(y, c);
        if cx == cy {
            continue;
        }
        if lex_less(cx.entries(), cy.entries())? {
            strict = true;
        } else {
            return Ok(false);
        }
    }
    Ok(strict)
}

/// Whether `x` c-welfare dominates `y`: `w(c, x) ≺ w(c, y)`.
pub fn welfare_dominates(x: &Allocation, y: &Allocation, c: &Coalition) -> Result<bool> {
    require_comparable(x, y)?;
    lex_less(welfare_kernel(x, c).entries(), welfare_kernel(y, c).entries())
}
