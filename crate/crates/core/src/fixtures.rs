//! Small synthetic graphs bundled with the harness.

use rand::Rng;

use crate::error::{Error, Result};
use crate::graph::Graph;
use crate::seed;

fn build(n: usize, edges: &[(usize, usize)]) -> Graph {
    Graph::from_edges(n, edges)
        .expect("fixture edges in range")
        .0
}

pub fn triangle() -> Graph {
    build(3, &[(0, 1), (1, 2), (2, 0)])
}

pub fn path(n: usize) -> Graph {
    let edges: Vec<_> = (1..n).map(|i| (i - 1, i)).collect();
    build(n, &edges)
}

pub fn cycle(n: usize) -> Graph {
    let edges: Vec<_> = (0..n).map(|i| (i, (i + 1) % n)).collect();
    build(n, &edges)
}

/// Center `0` joined to leaves `1..=leaves`.
pub fn star(leaves: usize) -> Graph {
    let edges: Vec<_> = (1..=leaves).map(|i| (0, i)).collect();
    build(leaves + 1, &edges)
}

pub fn complete(n: usize) -> Graph {
    let mut edges = Vec::new();
    for u in 0..n {
        for v in u + 1..n {
            edges.push((u, v));
        }
    }
    build(n, &edges)
}

/// `count` disjoint cliques of `size` nodes each.
pub fn disjoint_cliques(count: usize, size: usize) -> Graph {
    let mut edges = Vec::new();
    for c in 0..count {
        let base = c * size;
        for u in 0..size {
            for v in u + 1..size {
                edges.push((base + u, base + v));
            }
        }
    }
    build(count * size, &edges)
}

/// Stochastic block model with equal blocks (node `u` is in block
/// `u * blocks / n`). Deterministic in `seed`.
pub fn planted_partition(n: usize, blocks: usize, p_in: f64, p_out: f64, seed: u64) -> Graph {
    let mut rng = seed::rng(seed::derive(seed, "planted-partition"));
    let block = |u: usize| u * blocks / n;
    let mut edges = Vec::new();
    for u in 0..n {
        for v in u + 1..n {
            let p = if block(u) == block(v) { p_in } else { p_out };
            if rng.gen::<f64>() < p {
                edges.push((u, v));
            }
        }
    }
    build(n, &edges)
}

/// Names accepted by [`named`], with a one-line description each.
pub const NAMES: &[(&str, &str)] = &[
    ("triangle", "3-cycle"),
    ("path4", "path on 4 nodes"),
    (
        "planted",
        "planted partition: 200 nodes, 2 blocks, p_in=0.5, p_out=0.02, seed 1",
    ),
    (
        "planted-small",
        "planted partition: 40 nodes, 2 blocks, p_in=0.5, p_out=0.05, seed 1",
    ),
];

pub fn named(name: &str) -> Result<Graph> {
    Ok(match name {
        "triangle" => triangle(),
        "path4" => path(4),
        "planted" => planted_partition(200, 2, 0.5, 0.02, 1),
        "planted-small" => planted_partition(40, 2, 0.5, 0.05, 1),
        other => return Err(Error::Config(format!("unknown fixture {other:?}"))),
    })
}
