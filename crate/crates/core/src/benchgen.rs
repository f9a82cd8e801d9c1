//! Synthetic graph-shaped tasks with a known number of plans.
//!
//! Nodes of a DAG become fluents `at(nK)` and every edge `u -> v` becomes an
//! action moving the token from `u` to `v`. Each requested plan is a
//! source-to-sink path of random length; some paths reuse a prefix of an
//! earlier path so that actions are shared between plans.

use alloc::collections::BTreeSet;
use alloc::format;
use alloc::vec;
use alloc::vec::Vec;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use thiserror::Error;

use crate::strips::{Fluent, FluentSet, GroundAction, PlanningTask};

const SUB_SEED_STRIDE: u64 = 0x9E37_79B9_7F4A_7C15;

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct BenchConfig {
    pub num_plans: usize,
    pub min_len: usize,
    pub max_len: usize,
    /// Probability that a path starts along an earlier path.
    pub share_fraction: f64,
    pub seed: u64,
    /// Attempts with derived seeds before giving up.
    pub max_attempts: u32,
}

impl BenchConfig {
    pub fn new(num_plans: usize, min_len: usize, max_len: usize, seed: u64) -> Self {
        BenchConfig {
            num_plans,
            min_len,
            max_len,
            share_fraction: 0.4,
            seed,
            max_attempts: 64,
        }
    }

    fn check(&self) -> Result<(), BenchError> {
        if self.num_plans == 0 {
            return Err(BenchError::InvalidConfig("num_plans must be at least 1"));
        }
        if self.min_len == 0 || self.min_len > self.max_len {
            return Err(BenchError::InvalidConfig(
                "lengths must satisfy 1 <= min <= max",
            ));
        }
        if !(0.0..=1.0).contains(&self.share_fraction) {
            return Err(BenchError::InvalidConfig(
                "share_fraction must lie in [0, 1]",
            ));
        }
        if self.max_attempts == 0 {
            return Err(BenchError::InvalidConfig("max_attempts must be at least 1"));
        }
        Ok(())
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct Generated {
    pub task: PlanningTask,
    /// Number of distinct source-to-sink paths, i.e. of solution plans.
    pub expected_plans: u128,
    /// Seed of the successful attempt.
    pub seed_used: u64,
    pub attempts: u32,
}

#[derive(Clone, Debug, Error, PartialEq)]
pub enum BenchError {
    #[error("invalid benchmark configuration: {0}")]
    InvalidConfig(&'static str),
    #[error("no graph with exactly {wanted} paths after {attempts} attempts (last had {last})")]
    RetriesExhausted {
        wanted: usize,
        attempts: u32,
        last: u128,
    },
}

pub fn generate(config: &BenchConfig) -> Result<Generated, BenchError> {
    config.check()?;
    let mut last = 0;
    for attempt in 0..config.max_attempts {
        let seed = config
            .seed
            .wrapping_add(u64::from(attempt).wrapping_mul(SUB_SEED_STRIDE));
        let graph = build_graph(config, seed);
        let count = graph.count_paths();
        if count == config.num_plans as u128 {
            return Ok(Generated {
                task: graph.into_task(),
                expected_plans: count,
                seed_used: seed,
                attempts: attempt + 1,
            });
        }
        last = count;
    }
    Err(BenchError::RetriesExhausted {
        wanted: config.num_plans,
        attempts: config.max_attempts,
        last,
    })
}

/// Node 0 is the source; the sink is the last node.
struct Graph {
    nodes: usize,
    edges: BTreeSet<(usize, usize)>,
}

const SINK: usize = usize::MAX;

fn build_graph(config: &BenchConfig, seed: u64) -> Graph {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut next_node = 1;
    let mut paths: Vec<Vec<usize>> = Vec::with_capacity(config.num_plans);
    for _ in 0..config.num_plans {
        let len = rng.gen_range(config.min_len..=config.max_len);
        let mut path = vec![0];
        if !paths.is_empty() && rng.gen_bool(config.share_fraction) {
            let base = &paths[rng.gen_range(0..paths.len())];
            // The graft point must leave room for a fresh node before the
            // sink and must not be the sink itself.
            let reach = (len.saturating_sub(2)).min(base.len().saturating_sub(2));
            if reach >= 1 {
                let shared = rng.gen_range(1..=reach);
                path = base[..=shared].to_vec();
            }
        }
        while path.len() < len {
            path.push(next_node);
            next_node += 1;
        }
        path.push(SINK);
        paths.push(path);
    }
    let sink = next_node;
    let mut edges = BTreeSet::new();
    for path in &paths {
        for w in path.windows(2) {
            let id = |n: usize| if n == SINK { sink } else { n };
            edges.insert((id(w[0]), id(w[1])));
        }
    }
    Graph {
        nodes: sink + 1,
        edges,
    }
}

impl Graph {
    fn sink(&self) -> usize {
        self.nodes - 1
    }

    /// Source-to-sink path count. Every edge leads to a node created later
    /// or to the sink, so reverse creation order is a topological order.
    fn count_paths(&self) -> u128 {
        let mut out: Vec<Vec<usize>> = vec![Vec::new(); self.nodes];
        for &(u, v) in &self.edges {
            out[u].push(v);
        }
        let mut ways = vec![0u128; self.nodes];
        ways[self.sink()] = 1;
        for u in (0..self.sink()).rev() {
            ways[u] = out[u]
                .iter()
                .fold(0u128, |acc, &v| acc.saturating_add(ways[v]));
        }
        ways[0]
    }

    fn into_task(self) -> PlanningTask {
        let n = self.nodes;
        let fluents = (0..n)
            .map(|id| Fluent {
                id,
                name: format!("at(n{id})"),
            })
            .collect();
        let single = |f: usize| FluentSet::from_ids(n, [f]);
        let actions = self
            .edges
            .iter()
            .map(|&(u, v)| GroundAction {
                name: format!("move(n{u} n{v})"),
                pre: single(u),
                add: single(v),
                del: single(u),
                cost: 1.0,
            })
            .collect();
        PlanningTask {
            fluents,
            actions,
            init: single(0),
            goal: single(n - 1),
        }
    }
}
