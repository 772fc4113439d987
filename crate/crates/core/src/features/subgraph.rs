use std::collections::{HashMap, VecDeque};

use crate::error::{Error, Result};
use crate::graph::{Graph, NodeId};

/// K-hop enclosing subgraph of a candidate pair. The pair sits at local
/// positions 0 and 1; the edge between them, if any, is left out.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct EnclosingSubgraph {
    /// Graph ids of the local nodes.
    pub nodes: Vec<NodeId>,
    /// Sorted local neighbor lists.
    pub adj: Vec<Vec<usize>>,
    pub dist_u: Vec<Option<usize>>,
    pub dist_v: Vec<Option<usize>>,
}

pub const U_INDEX: usize = 0;
pub const V_INDEX: usize = 1;

impl EnclosingSubgraph {
    pub fn num_nodes(&self) -> usize {
        self.nodes.len()
    }

    pub fn num_edges(&self) -> usize {
        self.adj.iter().map(Vec::len).sum::<usize>() / 2
    }

    pub fn has_local_edge(&self, a: usize, b: usize) -> bool {
        self.adj[a].binary_search(&b).is_ok()
    }

    /// Local edges with `a < b`, in lexicographic order.
    pub fn edges(&self) -> Vec<(usize, usize)> {
        let mut out = Vec::with_capacity(self.num_edges());
        for (a, nbrs) in self.adj.iter().enumerate() {
            out.extend(nbrs.iter().filter(|&&b| a < b).map(|&b| (a, b)));
        }
        out
    }

    /// Checks the structural invariants against the graph it came from.
    pub fn validate(&self, g: &Graph, k: usize) -> Result<()> {
        let fail = |m: String| Err(Error::Contract(format!("enclosing subgraph: {m}")));
        if self.nodes.len() < 2 {
            return fail("fewer than two nodes".into());
        }
        if self.has_local_edge(U_INDEX, V_INDEX) {
            return fail("target edge present".into());
        }
        let (u, v) = (self.nodes[U_INDEX], self.nodes[V_INDEX]);
        let du = g.bfs_distances(u);
        let dv = g.bfs_distances(v);
        for &w in &self.nodes {
            let near = |d: &[Option<usize>]| d[w].is_some_and(|x| x <= k);
            if !near(&du) && !near(&dv) {
                return fail(format!(
                    "node {w} is more than {k} hops from both {u} and {v}"
                ));
            }
        }
        for (a, b) in self.edges() {
            if !g.has_edge(self.nodes[a], self.nodes[b]) {
                return fail(format!("edge {a}-{b} not in graph"));
            }
        }
        Ok(())
    }
}

/// Nodes within `k` hops of `s`, including `s`.
pub fn k_hop_ball(g: &Graph, s: NodeId, k: usize) -> Vec<NodeId> {
    let mut seen = HashMap::from([(s, 0usize)]);
    let mut queue = VecDeque::from([s]);
    let mut out = vec![s];
    while let Some(x) = queue.pop_front() {
        let d = seen[&x];
        if d == k {
            continue;
        }
        for &y in g.neighbors(x) {
            if let std::collections::hash_map::Entry::Vacant(e) = seen.entry(y) {
                e.insert(d + 1);
                out.push(y);
                queue.push_back(y);
            }
        }
    }
    out
}

fn local_bfs(adj: &[Vec<usize>], src: usize) -> Vec<Option<usize>> {
    let mut dist = vec![None; adj.len()];
    dist[src] = Some(0);
    let mut queue = VecDeque::from([src]);
    while let Some(x) = queue.pop_front() {
        let d = dist[x].unwrap();
        for &y in &adj[x] {
            if dist[y].is_none() {
                dist[y] = Some(d + 1);
                queue.push_back(y);
            }
        }
    }
    dist
}

/// Union of the `k`-hop balls around `u` and `v` with induced edges, minus
/// the `u`–`v` edge. Distances are measured inside the subgraph after that
/// removal. Node order: `u`, `v`, then by (min distance, graph id) with
/// unreachable nodes last.
pub fn extract_enclosing_subgraph(
    g: &Graph,
    u: NodeId,
    v: NodeId,
    k: usize,
) -> Result<EnclosingSubgraph> {
    g.check_node(u)?;
    g.check_node(v)?;
    if u == v {
        return Err(Error::Contract(format!("candidate pair repeats node {u}")));
    }
    if k == 0 {
        return Err(Error::Config("hop radius K must be at least 1".into()));
    }
    let mut members = k_hop_ball(g, u, k);
    members.extend(k_hop_ball(g, v, k));
    members.sort_unstable();
    members.dedup();

    let index: HashMap<NodeId, usize> = members.iter().enumerate().map(|(i, &w)| (w, i)).collect();
    let mut adj: Vec<Vec<usize>> = members
        .iter()
        .map(|&w| {
            g.neighbors(w)
                .iter()
                .filter_map(|x| index.get(x).copied())
                .collect()
        })
        .collect();
    let (iu, iv) = (index[&u], index[&v]);
    adj[iu].retain(|&x| x != iv);
    adj[iv].retain(|&x| x != iu);
    let du = local_bfs(&adj, iu);
    let dv = local_bfs(&adj, iv);

    let key = |i: usize| {
        let m = match (du[i], dv[i]) {
            (Some(a), Some(b)) => a.min(b),
            (Some(a), None) | (None, Some(a)) => a,
            (None, None) => usize::MAX,
        };
        (m, members[i])
    };
    let mut order: Vec<usize> = (0..members.len()).filter(|&i| i != iu && i != iv).collect();
    order.sort_by_key(|&i| key(i));
    order.insert(0, iv);
    order.insert(0, iu);

    let mut new_pos = vec![0; members.len()];
    for (p, &i) in order.iter().enumerate() {
        new_pos[i] = p;
    }
    let adj = order
        .iter()
        .map(|&i| {
            let mut row: Vec<usize> = adj[i].iter().map(|&x| new_pos[x]).collect();
            row.sort_unstable();
            row
        })
        .collect();
    Ok(EnclosingSubgraph {
        nodes: order.iter().map(|&i| members[i]).collect(),
        adj,
        dist_u: order.iter().map(|&i| du[i]).collect(),
        dist_v: order.iter().map(|&i| dv[i]).collect(),
    })
}

/// Double-radius label of a node at distances `du`, `dv` from the pair:
/// `1 + min + ⌊d/2⌋(⌊d/2⌋ + d mod 2 − 1)` with `d = du + dv`. Unreachable
/// nodes get 0.
pub fn drnl_value(du: Option<usize>, dv: Option<usize>) -> usize {
    match (du, dv) {
        (Some(a), Some(b)) => {
            let d = a + b;
            let h = d / 2;
            1 + a.min(b) + h * (h + d % 2) - h
        }
        _ => 0,
    }
}

/// Per-node labels; the pair itself gets 1.
pub fn drnl_labels(sub: &EnclosingSubgraph) -> Vec<usize> {
    (0..sub.num_nodes())
        .map(|i| {
            if i == U_INDEX || i == V_INDEX {
                1
            } else {
                drnl_value(sub.dist_u[i], sub.dist_v[i])
            }
        })
        .collect()
}
