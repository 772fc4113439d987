//! Immutable undirected graph in compressed adjacency form.
//!
//! Node ids are dense `0..num_nodes`. Every neighbor list is sorted
//! ascending, duplicate-free and never contains the node itself, so
//! membership tests are binary searches and set operations are merges.

use std::collections::{HashSet, VecDeque};

use sha2::{Digest, Sha256};

use crate::error::{Error, Result};

pub type NodeId = usize;

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Graph {
    offsets: Vec<usize>,
    targets: Vec<NodeId>,
    num_edges: usize,
}

/// Summary row matching the dataset statistics table.
#[derive(Clone, Debug, PartialEq)]
pub struct GraphStats {
    pub num_nodes: usize,
    pub num_edges: usize,
    pub diameter: usize,
    pub num_queries: usize,
    /// `2|E|/|V|`.
    pub avg_degree: f64,
}

impl Graph {
    /// Builds a graph from an arbitrary edge multiset. Reversed duplicates are
    /// merged and self-loops are dropped; the returned count is the number of
    /// self-loop entries discarded.
    pub fn from_edges(num_nodes: usize, edges: &[(NodeId, NodeId)]) -> Result<(Self, usize)> {
        let mut lists: Vec<Vec<NodeId>> = vec![Vec::new(); num_nodes];
        let mut self_loops = 0;
        for &(u, v) in edges {
            for node in [u, v] {
                if node >= num_nodes {
                    return Err(Error::NodeOutOfRange { node, num_nodes });
                }
            }
            if u == v {
                self_loops += 1;
                continue;
            }
            lists[u].push(v);
            lists[v].push(u);
        }
        let mut offsets = Vec::with_capacity(num_nodes + 1);
        let mut targets = Vec::new();
        offsets.push(0);
        for list in &mut lists {
            list.sort_unstable();
            list.dedup();
            targets.extend_from_slice(list);
            offsets.push(targets.len());
        }
        let num_edges = targets.len() / 2;
        Ok((
            Graph {
                offsets,
                targets,
                num_edges,
            },
            self_loops,
        ))
    }

    pub fn num_nodes(&self) -> usize {
        self.offsets.len() - 1
    }

    pub fn num_edges(&self) -> usize {
        self.num_edges
    }

    #[inline]
    pub fn neighbors(&self, u: NodeId) -> &[NodeId] {
        &self.targets[self.offsets[u]..self.offsets[u + 1]]
    }

    #[inline]
    pub fn degree(&self, u: NodeId) -> usize {
        self.offsets[u + 1] - self.offsets[u]
    }

    #[inline]
    pub fn has_edge(&self, u: NodeId, v: NodeId) -> bool {
        self.neighbors(u).binary_search(&v).is_ok()
    }

    pub fn check_node(&self, u: NodeId) -> Result<()> {
        if u >= self.num_nodes() {
            return Err(Error::NodeOutOfRange {
                node: u,
                num_nodes: self.num_nodes(),
            });
        }
        Ok(())
    }

    /// Iterates each undirected edge once as `(u, v)` with `u < v`.
    pub fn edges(&self) -> impl Iterator<Item = (NodeId, NodeId)> + '_ {
        (0..self.num_nodes()).flat_map(move |u| {
            self.neighbors(u)
                .iter()
                .copied()
                .filter(move |&v| v > u)
                .map(move |v| (u, v))
        })
    }

    /// Closed neighborhood: `adj(u) ∪ {u}`, sorted.
    pub fn neighbors_closed(&self, u: NodeId) -> Result<Vec<NodeId>> {
        self.check_node(u)?;
        let adj = self.neighbors(u);
        let mut out = Vec::with_capacity(adj.len() + 1);
        let split = adj.partition_point(|&x| x < u);
        out.extend_from_slice(&adj[..split]);
        out.push(u);
        out.extend_from_slice(&adj[split..]);
        Ok(out)
    }

    /// `V ∖ neighbors_closed(u)`, sorted.
    pub fn non_neighbors(&self, u: NodeId) -> Result<Vec<NodeId>> {
        self.check_node(u)?;
        let adj = self.neighbors(u);
        let mut out = Vec::with_capacity(self.num_nodes().saturating_sub(adj.len() + 1));
        let mut it = adj.iter().peekable();
        for w in 0..self.num_nodes() {
            if w == u {
                continue;
            }
            if it.peek() == Some(&&w) {
                it.next();
                continue;
            }
            out.push(w);
        }
        Ok(out)
    }

    /// Nodes that participate in at least one triangle.
    pub fn query_nodes(&self) -> Vec<NodeId> {
        let n = self.num_nodes();
        let mut is_query = vec![false; n];
        for u in 0..n {
            if is_query[u] {
                continue;
            }
            let adj_u = self.neighbors(u);
            for &v in adj_u {
                if sorted_intersects(adj_u, self.neighbors(v)) {
                    is_query[u] = true;
                    is_query[v] = true;
                    break;
                }
            }
        }
        (0..n).filter(|&u| is_query[u]).collect()
    }

    /// Hop distances from `src`; `None` marks unreachable nodes.
    pub fn bfs_distances(&self, src: NodeId) -> Vec<Option<usize>> {
        let mut dist = vec![None; self.num_nodes()];
        let mut queue = VecDeque::new();
        dist[src] = Some(0);
        queue.push_back(src);
        while let Some(x) = queue.pop_front() {
            let dx = dist[x].unwrap();
            for &y in self.neighbors(x) {
                if dist[y].is_none() {
                    dist[y] = Some(dx + 1);
                    queue.push_back(y);
                }
            }
        }
        dist
    }

    /// Connected components as sorted node lists, largest first (ties by
    /// smallest member).
    pub fn connected_components(&self) -> Vec<Vec<NodeId>> {
        let n = self.num_nodes();
        let mut seen = vec![false; n];
        let mut comps = Vec::new();
        for s in 0..n {
            if seen[s] {
                continue;
            }
            let mut comp = vec![s];
            seen[s] = true;
            let mut head = 0;
            while head < comp.len() {
                let x = comp[head];
                head += 1;
                for &y in self.neighbors(x) {
                    if !seen[y] {
                        seen[y] = true;
                        comp.push(y);
                    }
                }
            }
            comp.sort_unstable();
            comps.push(comp);
        }
        comps.sort_by(|a, b| b.len().cmp(&a.len()).then(a[0].cmp(&b[0])));
        comps
    }

    /// Maximum BFS eccentricity over the largest connected component.
    pub fn diameter(&self) -> usize {
        let comps = self.connected_components();
        let Some(largest) = comps.first() else {
            return 0;
        };
        largest
            .iter()
            .map(|&s| {
                self.bfs_distances(s)
                    .into_iter()
                    .flatten()
                    .max()
                    .unwrap_or(0)
            })
            .max()
            .unwrap_or(0)
    }

    pub fn stats(&self) -> GraphStats {
        let n = self.num_nodes();
        GraphStats {
            num_nodes: n,
            num_edges: self.num_edges,
            diameter: self.diameter(),
            num_queries: self.query_nodes().len(),
            avg_degree: if n == 0 {
                0.0
            } else {
                2.0 * self.num_edges as f64 / n as f64
            },
        }
    }

    /// Copy of the graph with the given undirected edges removed. Pairs are
    /// normalized, so `(u, v)` and `(v, u)` name the same edge.
    pub fn without_edges(&self, removed: &HashSet<(NodeId, NodeId)>) -> Graph {
        let edges: Vec<_> = self
            .edges()
            .filter(|&(u, v)| !removed.contains(&(u.min(v), u.max(v))))
            .collect();
        Graph::from_edges(self.num_nodes(), &edges)
            .expect("edges of a valid graph are in range")
            .0
    }

    /// Applies a node relabeling: node `u` becomes `perm[u]`.
    pub fn relabeled(&self, perm: &[NodeId]) -> Result<Graph> {
        if perm.len() != self.num_nodes() {
            return Err(Error::Contract(format!(
                "permutation has {} entries for {} nodes",
                perm.len(),
                self.num_nodes()
            )));
        }
        let edges: Vec<_> = self.edges().map(|(u, v)| (perm[u], perm[v])).collect();
        Ok(Graph::from_edges(self.num_nodes(), &edges)?.0)
    }

    /// Content hash of the adjacency structure (hex SHA-256).
    pub fn content_hash(&self) -> String {
        let mut hasher = Sha256::new();
        hasher.update((self.num_nodes() as u64).to_le_bytes());
        for (u, v) in self.edges() {
            hasher.update((u as u64).to_le_bytes());
            hasher.update((v as u64).to_le_bytes());
        }
        let digest = hasher.finalize();
        digest.iter().map(|b| format!("{b:02x}")).collect()
    }

    /// Full-scan structural check of every invariant.
    pub fn validate(&self) -> Result<()> {
        let n = self.num_nodes();
        if self.targets.len() != 2 * self.num_edges {
            return Err(Error::Data("adjacency length is not 2|E|".into()));
        }
        for u in 0..n {
            let adj = self.neighbors(u);
            if adj.windows(2).any(|w| w[0] >= w[1]) {
                return Err(Error::Data(format!(
                    "neighbor list of {u} is not strictly sorted"
                )));
            }
            for &v in adj {
                if v == u {
                    return Err(Error::Data(format!("self-loop stored at {u}")));
                }
                if v >= n || !self.has_edge(v, u) {
                    return Err(Error::Data(format!("asymmetric edge {u}->{v}")));
                }
            }
        }
        Ok(())
    }
}

fn sorted_intersects(a: &[NodeId], b: &[NodeId]) -> bool {
    let (mut i, mut j) = (0, 0);
    while i < a.len() && j < b.len() {
        match a[i].cmp(&b[j]) {
            std::cmp::Ordering::Less => i += 1,
            std::cmp::Ordering::Greater => j += 1,
            std::cmp::Ordering::Equal => return true,
        }
    }
    false
}
