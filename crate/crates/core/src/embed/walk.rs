//! Second-order biased random walks.

use rand::Rng;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::graph::{Graph, NodeId};
use crate::seed;

#[derive(Clone, Debug, PartialEq)]
pub struct WalkParams {
    /// Return parameter: weight `1/p` for stepping back to the previous node.
    pub p: f64,
    /// In-out parameter: weight `1/q` for moving two hops from the previous node.
    pub q: f64,
    /// Steps per walk; a walk holds `length + 1` nodes.
    pub length: usize,
    pub walks_per_node: usize,
    /// Context radius used when turning walks into training pairs.
    pub window: usize,
}

impl WalkParams {
    pub fn validate(&self) -> Result<()> {
        if !(self.p > 0.0 && self.q > 0.0) {
            return Err(Error::Config(format!(
                "walk bias parameters must be positive (p={}, q={})",
                self.p, self.q
            )));
        }
        if self.length == 0 {
            return Err(Error::Config("walk length must be at least 1".into()));
        }
        Ok(())
    }
}

/// `max(2, round(0.05·|V|))`.
pub fn default_walk_length(num_nodes: usize) -> usize {
    walk_length_for_fraction(num_nodes, 0.05).max(2)
}

/// `max(1, round(fraction·|V|))`.
pub fn walk_length_for_fraction(num_nodes: usize, fraction: f64) -> usize {
    ((fraction * num_nodes as f64).round() as usize).max(1)
}

#[derive(Clone, Debug, PartialEq)]
pub struct WalkCorpus {
    pub walks: Vec<Vec<NodeId>>,
    pub params: WalkParams,
}

/// Unnormalized transition weights out of `cur`, given the previous node.
/// Without a previous node every neighbor has weight 1.
pub fn transition_weights(
    g: &Graph,
    prev: Option<NodeId>,
    cur: NodeId,
    p: f64,
    q: f64,
) -> Vec<(NodeId, f64)> {
    g.neighbors(cur)
        .iter()
        .map(|&x| {
            let w = match prev {
                None => 1.0,
                Some(t) if x == t => 1.0 / p,
                Some(t) if g.has_edge(t, x) => 1.0,
                Some(_) => 1.0 / q,
            };
            (x, w)
        })
        .collect()
}

fn step(
    g: &Graph,
    prev: Option<NodeId>,
    cur: NodeId,
    p: f64,
    q: f64,
    rng: &mut impl Rng,
) -> NodeId {
    let adj = g.neighbors(cur);
    if prev.is_none() || (p == 1.0 && q == 1.0) {
        return adj[rng.gen_range(0..adj.len())];
    }
    let weights = transition_weights(g, prev, cur, p, q);
    let total: f64 = weights.iter().map(|w| w.1).sum();
    let mut target = rng.gen::<f64>() * total;
    for &(x, w) in &weights {
        if target < w {
            return x;
        }
        target -= w;
    }
    weights.last().unwrap().0
}

/// Walk of `length` steps from `source`. An isolated source yields `[source]`.
pub fn walk_from(
    g: &Graph,
    source: NodeId,
    params: &WalkParams,
    rng: &mut impl Rng,
) -> Vec<NodeId> {
    let mut walk = Vec::with_capacity(params.length + 1);
    walk.push(source);
    if g.degree(source) == 0 {
        return walk;
    }
    let mut prev = None;
    let mut cur = source;
    for _ in 0..params.length {
        let next = step(g, prev, cur, params.p, params.q, rng);
        walk.push(next);
        prev = Some(cur);
        cur = next;
    }
    walk
}

/// `walks_per_node` rounds over all nodes. Each walk draws from its own RNG
/// stream derived from `(seed, round, source)`, so the corpus does not depend
/// on the number of worker threads.
pub fn sample_walks(g: &Graph, params: &WalkParams, seed: u64) -> Result<WalkCorpus> {
    params.validate()?;
    let n = g.num_nodes();
    let walks = (0..params.walks_per_node * n)
        .into_par_iter()
        .map(|i| {
            let source = i % n;
            let mut rng = seed::rng(seed::derive_indexed(seed, "walk", i as u64));
            walk_from(g, source, params, &mut rng)
        })
        .collect();
    Ok(WalkCorpus {
        walks,
        params: params.clone(),
    })
}

impl WalkCorpus {
    /// Ordered `(center, context)` pairs within the window, in walk order.
    pub fn context_pairs(&self) -> Vec<(NodeId, NodeId)> {
        let w = self.params.window;
        let mut pairs = Vec::new();
        for walk in &self.walks {
            for (i, &u) in walk.iter().enumerate() {
                let lo = i.saturating_sub(w);
                let hi = (i + w).min(walk.len() - 1);
                for (j, &v) in walk.iter().enumerate().take(hi + 1).skip(lo) {
                    if j != i {
                        pairs.push((u, v));
                    }
                }
            }
        }
        pairs
    }

    /// Every consecutive pair is an edge and every walk is non-empty.
    pub fn validate(&self, g: &Graph) -> Result<()> {
        for (i, walk) in self.walks.iter().enumerate() {
            if walk.is_empty() {
                return Err(Error::Contract(format!("walk {i} is empty")));
            }
            if let Some(w) = walk.windows(2).find(|w| !g.has_edge(w[0], w[1])) {
                return Err(Error::Contract(format!(
                    "walk {i} steps along non-edge {}-{}",
                    w[0], w[1]
                )));
            }
        }
        Ok(())
    }
}
