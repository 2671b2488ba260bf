use std::ops::RangeInclusive;

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{IscgError, Result};
use crate::game::{Allocation, Coalition, CoalitionStructure, Instance};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CoalitionShape {
    Singletons,
    /// Shuffled agents cut into consecutive blocks of 1..=max_size.
    RandomPartition {
        max_size: usize,
    },
    Grand,
}

#[derive(Debug, Clone, PartialEq)]
pub struct GeneratorConfig {
    pub seed: u64,
    pub agents: RangeInclusive<usize>,
    pub resources: RangeInclusive<usize>,
    /// Probability that a given agent may use a given resource.
    pub access_density: f64,
    pub coalition_shape: CoalitionShape,
}

impl GeneratorConfig {
    pub fn validate(&self) -> Result<()> {
        let bad = |msg: &str| Err(IscgError::InvalidConfig(msg.to_string()));
        if self.agents.is_empty() || *self.agents.start() == 0 {
            return bad("agent range must be nonempty and start at 1 or more");
        }
        if self.resources.is_empty() || *self.resources.start() == 0 {
            return bad("resource range must be nonempty and start at 1 or more");
        }
        if !(0.0..=1.0).contains(&self.access_density) {
            return bad("access density must lie in [0, 1]");
        }
        if let CoalitionShape::RandomPartition { max_size: 0 } = self.coalition_shape {
            return bad("partition blocks need a positive maximum size");
        }
        Ok(())
    }

    pub fn with_seed(&self, seed: u64) -> Self {
        GeneratorConfig { seed, ..self.clone() }
    }
}

/// Draws one instance and coalition structure from `rng`.
///
/// Every agent lacking access after sampling gets one uniformly chosen resource.
pub fn sample_instance(cfg: &GeneratorConfig, rng: &mut ChaCha8Rng) -> (Instance, CoalitionStructure) {
    let n = rng.gen_range(cfg.agents.clone());
    let m = rng.gen_range(cfg.resources.clone());
    let mut access: Vec<Vec<usize>> =
        (0..n).map(|_| (0..m).filter(|_| rng.gen_bool(cfg.access_density)).collect()).collect();
    for row in access.iter_mut() {
        if row.is_empty() {
            row.push(rng.gen_range(0..m));
        }
    }
    let inst = Instance::from_agent_access(m, &access).expect("repaired access covers every agent");
    let structure = sample_structure(n, cfg.coalition_shape, rng);
    (inst, structure)
}

fn sample_structure(n: usize, shape: CoalitionShape, rng: &mut ChaCha8Rng) -> CoalitionStructure {
    match shape {
        CoalitionShape::Singletons => CoalitionStructure::singletons(n),
        CoalitionShape::Grand => CoalitionStructure::grand(n),
        CoalitionShape::RandomPartition { max_size } => {
            let mut agents: Vec<usize> = (0..n).collect();
            agents.shuffle(rng);
            let mut groups = Vec::new();
            let mut rest = &agents[..];
            while !rest.is_empty() {
                let size = rng.gen_range(1..=max_size.min(rest.len()));
                groups.push(rest[..size].to_vec());
                rest = &rest[size..];
            }
            groups.sort();
            CoalitionStructure::partition_of(n, &groups).expect("blocks of a shuffle form a partition")
        }
    }
}

/// Deterministic stream of instances for one configuration.
pub struct InstanceStream {
    cfg: GeneratorConfig,
    rng: ChaCha8Rng,
}

impl Iterator for InstanceStream {
    type Item = (Instance, CoalitionStructure);

    fn next(&mut self) -> Option<Self::Item> {
        Some(sample_instance(&self.cfg, &mut self.rng))
    }
}

pub fn gen_instance(cfg: &GeneratorConfig) -> Result<InstanceStream> {
    cfg.validate()?;
    Ok(InstanceStream { cfg: cfg.clone(), rng: ChaCha8Rng::seed_from_u64(cfg.seed) })
}

/// Uniform choice among each agent's accessible resources.
pub fn random_feasible(inst: &Instance, rng: &mut ChaCha8Rng) -> Allocation {
    let assignment =
        (0..inst.agent_count()).map(|j| *inst.accessible(j).choose(rng).expect("every agent has access")).collect();
    Allocation::from_assignment(inst.resource_count(), assignment).expect("accessible resources are in range")
}

/// A uniformly random nonempty subset of the agents.
pub fn random_coalition(agent_count: usize, rng: &mut ChaCha8Rng) -> Coalition {
    loop {
        let members: Vec<usize> = (0..agent_count).filter(|_| rng.gen_bool(0.5)).collect();
        if let Ok(c) = Coalition::new(members) {
            return c;
        }
    }
}

/// Replayable seed of case `index` under `base`.
pub fn case_seed(base: u64, index: u64) -> u64 {
    let mut z = base ^ index.wrapping_add(1).wrapping_mul(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Robots on an obstacle grid: free cells are resources, each robot may use its
/// own cell and the free cells next to it. `#` is an obstacle, `.` a free cell,
/// `R` a free cell holding a robot; cells and robots are numbered row-major.
pub fn grid_instance(rows: &[&str]) -> Result<Instance> {
    let grid: Vec<Vec<char>> = rows.iter().map(|r| r.chars().collect()).collect();
    let mut cell_id = vec![vec![None; grid.first().map_or(0, Vec::len)]; grid.len()];
    let mut next = 0;
    for (y, row) in grid.iter().enumerate() {
        if row.len() != cell_id[0].len() {
            return Err(IscgError::InvalidConfig("grid rows must have equal length".into()));
        }
        for (x, &ch) in row.iter().enumerate() {
            match ch {
                '.' | 'R' => {
                    cell_id[y][x] = Some(next);
                    next += 1;
                }
                '#' => {}
                other => return Err(IscgError::InvalidConfig(format!("unknown grid symbol {other:?}"))),
            }
        }
    }
    let mut access = Vec::new();
    for (y, row) in grid.iter().enumerate() {
        for (x, &ch) in row.iter().enumerate() {
            if ch != 'R' {
                continue;
            }
            let mut cells = Vec::new();
            let neighbours = [(0i64, 0i64), (-1, 0), (1, 0), (0, -1), (0, 1)];
            for (dy, dx) in neighbours {
                let (ny, nx) = (y as i64 + dy, x as i64 + dx);
                if ny < 0 || nx < 0 {
                    continue;
                }
                if let Some(Some(id)) = cell_id.get(ny as usize).and_then(|r| r.get(nx as usize)) {
                    cells.push(*id);
                }
            }
            cells.sort_unstable();
            access.push(cells);
        }
    }
    Instance::from_agent_access(next, &access)
}
