//! Per-query train/validation/test splits of neighbors and non-neighbors.

use std::collections::HashSet;

use rand::seq::SliceRandom;

use crate::error::{Error, Result};
use crate::graph::{Graph, NodeId};
use crate::seed;

/// Split fractions in percent: train, validation, test.
pub const SPLIT_PERCENT: [usize; 3] = [70, 10, 20];

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct QuerySplit {
    pub query: NodeId,
    pub train_pos: Vec<NodeId>,
    pub val_pos: Vec<NodeId>,
    pub test_pos: Vec<NodeId>,
    pub train_neg: Vec<NodeId>,
    pub val_neg: Vec<NodeId>,
    pub test_neg: Vec<NodeId>,
    pub seed: u64,
}

/// Largest-remainder apportionment of `n` items over [`SPLIT_PERCENT`].
/// Remainder ties go to the earlier bucket.
pub fn split_sizes(n: usize) -> [usize; 3] {
    let mut sizes = [0usize; 3];
    let mut rems = [0usize; 3];
    for i in 0..3 {
        sizes[i] = n * SPLIT_PERCENT[i] / 100;
        rems[i] = n * SPLIT_PERCENT[i] % 100;
    }
    let mut left = n - sizes.iter().sum::<usize>();
    let mut order = [0usize, 1, 2];
    order.sort_by(|&a, &b| rems[b].cmp(&rems[a]).then(a.cmp(&b)));
    for &i in order.iter() {
        if left == 0 {
            break;
        }
        sizes[i] += 1;
        left -= 1;
    }
    sizes
}

fn partition(mut items: Vec<NodeId>, rng: &mut impl rand::Rng) -> [Vec<NodeId>; 3] {
    items.shuffle(rng);
    let [a, b, _] = split_sizes(items.len());
    let test = items.split_off(a + b);
    let val = items.split_off(a);
    [items, val, test]
}

/// Splits `nbr(q)∖{q}` and the non-neighbors of `q` 70/10/20. Pure function
/// of `(g, q, seed)`.
pub fn split_per_query(g: &Graph, q: NodeId, seed: u64) -> Result<QuerySplit> {
    g.check_node(q)?;
    let adj = g.neighbors(q);
    let is_query = adj
        .iter()
        .any(|&v| g.neighbors(v).iter().any(|w| adj.binary_search(w).is_ok()));
    if !is_query {
        return Err(Error::Contract(format!("node {q} is not in any triangle")));
    }
    let mut rng = seed::rng(seed::derive_indexed(seed, "split", q as u64));
    let [train_pos, val_pos, test_pos] = partition(adj.to_vec(), &mut rng);
    let [train_neg, val_neg, test_neg] = partition(g.non_neighbors(q)?, &mut rng);
    Ok(QuerySplit {
        query: q,
        train_pos,
        val_pos,
        test_pos,
        train_neg,
        val_neg,
        test_neg,
        seed,
    })
}

impl QuerySplit {
    /// Truncates the test negatives. The negatives are already shuffled, so
    /// this keeps a uniform random subset. Capping raises MAP, since fewer
    /// negatives compete with each positive.
    pub fn cap_test_negatives(&mut self, cap: usize) {
        self.test_neg.truncate(cap);
    }

    pub fn cap_val_negatives(&mut self, cap: usize) {
        self.val_neg.truncate(cap);
    }

    pub fn positives(&self) -> impl Iterator<Item = &Vec<NodeId>> {
        [&self.train_pos, &self.val_pos, &self.test_pos].into_iter()
    }

    pub fn negatives(&self) -> impl Iterator<Item = &Vec<NodeId>> {
        [&self.train_neg, &self.val_neg, &self.test_neg].into_iter()
    }

    /// Checks disjointness, coverage and the absence of the query itself.
    pub fn validate(&self, g: &Graph) -> Result<()> {
        let fail = |msg: &str| Err(Error::Contract(format!("split of {}: {msg}", self.query)));
        let mut pos: Vec<NodeId> = self.positives().flatten().copied().collect();
        pos.sort_unstable();
        if pos != g.neighbors(self.query) {
            return fail("positives do not partition the neighborhood");
        }
        let mut neg: Vec<NodeId> = self.negatives().flatten().copied().collect();
        let total = neg.len();
        neg.sort_unstable();
        neg.dedup();
        if neg.len() != total {
            return fail("negative lists overlap");
        }
        if neg
            .iter()
            .any(|&w| w == self.query || g.has_edge(self.query, w))
        {
            return fail("negative list contains the query or a neighbor");
        }
        Ok(())
    }
}

/// Splits every query node. Splits are independent and computed in parallel.
pub fn split_all(g: &Graph, queries: &[NodeId], seed: u64) -> Result<Vec<QuerySplit>> {
    use rayon::prelude::*;
    queries
        .par_iter()
        .map(|&q| split_per_query(g, q, seed))
        .collect()
}

/// Graph used for message passing and transductive training: every edge that
/// appears as a validation or test positive of any query is removed.
pub fn message_passing_graph(g: &Graph, splits: &[QuerySplit]) -> Graph {
    let held_out: HashSet<(NodeId, NodeId)> = splits
        .iter()
        .flat_map(|s| {
            s.val_pos
                .iter()
                .chain(&s.test_pos)
                .map(move |&v| (s.query.min(v), s.query.max(v)))
        })
        .collect();
    g.without_edges(&held_out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fixtures;

    #[test]
    fn exact_fractions() {
        assert_eq!(split_sizes(10), [7, 1, 2]);
        assert_eq!(split_sizes(100), [70, 10, 20]);
        assert_eq!(split_sizes(0), [0, 0, 0]);
    }

    #[test]
    fn largest_remainder_for_three() {
        // Enumerated: quotas 2.1, 0.3, 0.6; one seat left goes to the 0.6.
        assert_eq!(split_sizes(3), [2, 0, 1]);
        assert_eq!(split_sizes(1), [1, 0, 0]);
        // 1.4 vs 0.4 remainders tie; the earlier bucket wins.
        assert_eq!(split_sizes(2), [2, 0, 0]);
    }

    #[test]
    fn sizes_always_sum() {
        for n in 0..500 {
            assert_eq!(split_sizes(n).iter().sum::<usize>(), n);
        }
    }

    #[test]
    fn deterministic_and_valid() {
        let g = fixtures::planted_partition(60, 2, 0.5, 0.05, 3);
        let q = g.query_nodes()[0];
        let a = split_per_query(&g, q, 11).unwrap();
        let b = split_per_query(&g, q, 11).unwrap();
        assert_eq!(a, b);
        a.validate(&g).unwrap();
        let sizes = split_sizes(g.degree(q));
        assert_eq!(
            [a.train_pos.len(), a.val_pos.len(), a.test_pos.len()],
            sizes
        );
        let c = split_per_query(&g, q, 12).unwrap();
        assert_ne!(a, c);
    }

    #[test]
    fn non_query_rejected() {
        let (g, _) = Graph::from_edges(3, &[(0, 1), (1, 2)]).unwrap();
        assert!(matches!(split_per_query(&g, 1, 0), Err(Error::Contract(_))));
    }

    #[test]
    fn held_out_edges_removed_globally() {
        let g = fixtures::planted_partition(40, 2, 0.6, 0.05, 9);
        let splits = split_all(&g, &g.query_nodes(), 5).unwrap();
        let mp = message_passing_graph(&g, &splits);
        for s in &splits {
            for &v in s.val_pos.iter().chain(&s.test_pos) {
                assert!(!mp.has_edge(s.query, v));
            }
        }
        mp.validate().unwrap();
    }
}
