//! Node2Vec: skip-gram over biased walks with one shared embedding table.

use rand::distributions::{Distribution, WeightedIndex};
use rand::seq::SliceRandom;

use super::table::{EmbedMethod, EmbeddingTable};
use super::walk::{default_walk_length, sample_walks, WalkCorpus, WalkParams};
use crate::error::{Error, Result};
use crate::graph::{Graph, NodeId};
use crate::seed;
use crate::tensor::stable_sigmoid;

/// Largest graph accepted by [`Objective::ExactSoftmax`].
pub const EXACT_MAX_NODES: usize = 64;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Objective {
    /// SGD with `negatives` unigram^0.75 samples per context pair.
    NegativeSampling,
    /// Full-batch descent on the full-softmax loss; small graphs only.
    ExactSoftmax,
}

#[derive(Clone, Debug, PartialEq)]
pub struct Node2VecConfig {
    pub dim: usize,
    pub p: f64,
    pub q: f64,
    /// `None` picks [`default_walk_length`].
    pub walk_length: Option<usize>,
    pub walks_per_node: usize,
    pub window: usize,
    pub epochs: usize,
    pub negatives: usize,
    pub lr: f64,
    pub objective: Objective,
}

impl Default for Node2VecConfig {
    fn default() -> Self {
        Node2VecConfig {
            dim: 128,
            p: 1.0,
            q: 1.0,
            walk_length: None,
            walks_per_node: 10,
            window: 5,
            epochs: 5,
            negatives: 5,
            lr: 0.025,
            objective: Objective::NegativeSampling,
        }
    }
}

impl Node2VecConfig {
    pub fn walk_params(&self, num_nodes: usize) -> WalkParams {
        WalkParams {
            p: self.p,
            q: self.q,
            length: self
                .walk_length
                .unwrap_or_else(|| default_walk_length(num_nodes)),
            walks_per_node: self.walks_per_node,
            window: self.window,
        }
    }
}

/// Context-pair multiplicities `C[u][v]` and per-center totals.
#[derive(Clone, Debug)]
pub struct ContextCounts {
    n: usize,
    counts: Vec<f64>,
    totals: Vec<f64>,
}

impl ContextCounts {
    pub fn from_corpus(corpus: &WalkCorpus, num_nodes: usize) -> Self {
        let mut counts = vec![0.0; num_nodes * num_nodes];
        let mut totals = vec![0.0; num_nodes];
        for (u, v) in corpus.context_pairs() {
            counts[u * num_nodes + v] += 1.0;
            totals[u] += 1.0;
        }
        ContextCounts {
            n: num_nodes,
            counts,
            totals,
        }
    }

    pub fn num_pairs(&self) -> f64 {
        self.totals.iter().sum()
    }

    /// Multiplies every count, as if each context pair occurred `k` times.
    pub fn scaled(&self, k: f64) -> Self {
        ContextCounts {
            n: self.n,
            counts: self.counts.iter().map(|c| c * k).collect(),
            totals: self.totals.iter().map(|c| c * k).collect(),
        }
    }
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

/// Row-wise log-sum-exp of `z_uᵀz_w` over all `w`, and the softmax rows.
fn softmax_rows(z: &EmbeddingTable) -> (Vec<f64>, Vec<f64>) {
    let n = z.num_nodes();
    let mut log_norm = vec![0.0; n];
    let mut probs = vec![0.0; n * n];
    for u in 0..n {
        let row = &mut probs[u * n..(u + 1) * n];
        for (w, s) in row.iter_mut().enumerate() {
            *s = z.dot(u, w);
        }
        let m = row.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
        let mut sum = 0.0;
        for s in row.iter_mut() {
            *s = (*s - m).exp();
            sum += *s;
        }
        for s in row.iter_mut() {
            *s /= sum;
        }
        log_norm[u] = m + sum.ln();
    }
    (log_norm, probs)
}

/// Full-softmax negative log-likelihood summed over context pairs:
/// `Σ_(u,v) [log Σ_w exp(z_uᵀz_w) − z_uᵀz_v]`, `w` ranging over every node
/// including `u`.
pub fn node2vec_loss_exact(z: &EmbeddingTable, corpus: &WalkCorpus) -> Result<f64> {
    check_cover(z, corpus)?;
    Ok(exact_loss(
        z,
        &ContextCounts::from_corpus(corpus, z.num_nodes()),
    ))
}

fn check_cover(z: &EmbeddingTable, corpus: &WalkCorpus) -> Result<()> {
    let n = z.num_nodes();
    match corpus.walks.iter().flatten().find(|&&u| u >= n) {
        Some(&u) => Err(Error::NodeOutOfRange {
            node: u,
            num_nodes: n,
        }),
        None => Ok(()),
    }
}

pub fn exact_loss(z: &EmbeddingTable, counts: &ContextCounts) -> f64 {
    let n = counts.n;
    let (log_norm, _) = softmax_rows(z);
    let mut loss = 0.0;
    for (u, &lz) in log_norm.iter().enumerate().take(n) {
        if counts.totals[u] == 0.0 {
            continue;
        }
        loss += counts.totals[u] * lz;
        for v in 0..n {
            let c = counts.counts[u * n + v];
            if c != 0.0 {
                loss -= c * z.dot(u, v);
            }
        }
    }
    loss
}

/// Gradient of [`exact_loss`] with respect to every table entry.
pub fn exact_gradient(z: &EmbeddingTable, counts: &ContextCounts) -> Vec<f64> {
    let n = counts.n;
    let d = z.dim;
    let (_, probs) = softmax_rows(z);
    // M = diag(c)·P − C; gradient = (M + Mᵀ) Z.
    let mut m = vec![0.0; n * n];
    for u in 0..n {
        for w in 0..n {
            m[u * n + w] = counts.totals[u] * probs[u * n + w] - counts.counts[u * n + w];
        }
    }
    let mut grad = vec![0.0; n * d];
    for a in 0..n {
        let g = &mut grad[a * d..(a + 1) * d];
        for w in 0..n {
            let coef = m[a * n + w] + m[w * n + a];
            if coef != 0.0 {
                for (gi, zi) in g.iter_mut().zip(z.row(w)) {
                    *gi += coef * zi;
                }
            }
        }
    }
    grad
}

/// Trains a table on walks sampled from `g`.
pub fn train_node2vec(g: &Graph, cfg: &Node2VecConfig, seed: u64) -> Result<EmbeddingTable> {
    train_node2vec_traced(g, cfg, seed).map(|(t, _)| t)
}

/// As [`train_node2vec`], also returning a per-epoch loss trace. The trace
/// holds exact losses in exact mode and mean sampled losses otherwise.
pub fn train_node2vec_traced(
    g: &Graph,
    cfg: &Node2VecConfig,
    seed: u64,
) -> Result<(EmbeddingTable, Vec<f64>)> {
    if cfg.dim == 0 {
        return Err(Error::Config("embedding dim must be at least 1".into()));
    }
    if !(cfg.lr > 0.0) {
        return Err(Error::Config(format!(
            "learning rate must be positive, got {}",
            cfg.lr
        )));
    }
    let n = g.num_nodes();
    let mut table = EmbeddingTable::uniform_init(n, cfg.dim, EmbedMethod::Node2Vec, seed);
    if cfg.epochs == 0 {
        return Ok((table, Vec::new()));
    }
    let corpus = sample_walks(g, &cfg.walk_params(n), seed::derive(seed, "walks"))?;
    let trace = match cfg.objective {
        Objective::ExactSoftmax => {
            if n > EXACT_MAX_NODES {
                return Err(Error::Config(format!(
                    "exact softmax mode supports at most {EXACT_MAX_NODES} nodes, graph has {n}"
                )));
            }
            train_exact(&mut table, &corpus, cfg)
        }
        Objective::NegativeSampling => train_sgns(&mut table, &corpus, cfg, seed),
    };
    if !table.is_finite() {
        return Err(Error::Numeric(format!(
            "node2vec training diverged; lower the learning rate (lr={})",
            cfg.lr
        )));
    }
    Ok((table, trace))
}

/// Gradient descent with step halving on rejection, so the recorded loss
/// never increases.
fn train_exact(table: &mut EmbeddingTable, corpus: &WalkCorpus, cfg: &Node2VecConfig) -> Vec<f64> {
    let counts = ContextCounts::from_corpus(corpus, table.num_nodes());
    // The loss is a sum over pairs; scale the step to stay stable.
    let mut lr = cfg.lr / counts.num_pairs().max(1.0) * table.num_nodes() as f64;
    let mut loss = exact_loss(table, &counts);
    let mut trace = vec![loss];
    for _ in 0..cfg.epochs {
        let grad = exact_gradient(table, &counts);
        loop {
            let mut trial = table.clone();
            for (x, g) in trial.data_mut().iter_mut().zip(&grad) {
                *x -= lr * g;
            }
            let trial_loss = exact_loss(&trial, &counts);
            if trial_loss.is_finite() && trial_loss <= loss {
                *table = trial;
                loss = trial_loss;
                lr *= 1.1;
                break;
            }
            lr *= 0.5;
            if lr < 1e-300 {
                return trace;
            }
        }
        trace.push(loss);
    }
    trace
}

fn train_sgns(
    table: &mut EmbeddingTable,
    corpus: &WalkCorpus,
    cfg: &Node2VecConfig,
    seed: u64,
) -> Vec<f64> {
    let n = table.num_nodes();
    let d = table.dim;
    let mut pairs = corpus.context_pairs();
    if pairs.is_empty() {
        return Vec::new();
    }
    let mut freq = vec![0.0f64; n];
    for walk in &corpus.walks {
        for &u in walk {
            freq[u] += 1.0;
        }
    }
    let weights: Vec<f64> = freq.iter().map(|f| f.powf(0.75)).collect();
    let sampler = WeightedIndex::new(&weights).expect("walks visit at least one node");
    let mut rng = seed::rng(seed::derive(seed, "sgns"));

    let total_steps = (cfg.epochs * pairs.len()) as f64;
    let mut step = 0usize;
    let mut trace = Vec::with_capacity(cfg.epochs);
    let mut grad_u = vec![0.0; d];
    let mut targets: Vec<(NodeId, f64)> = Vec::with_capacity(cfg.negatives + 1);
    for _ in 0..cfg.epochs {
        pairs.shuffle(&mut rng);
        let mut epoch_loss = 0.0;
        for &(u, v) in &pairs {
            let lr = cfg.lr * (1.0 - step as f64 / total_steps).max(1e-4);
            step += 1;
            targets.clear();
            targets.push((v, 1.0));
            for _ in 0..cfg.negatives {
                let w = sampler.sample(&mut rng);
                if w != v {
                    targets.push((w, 0.0));
                }
            }
            grad_u.iter_mut().for_each(|x| *x = 0.0);
            for &(w, label) in &targets {
                let s = dot(table.row(u), table.row(w));
                let sig = stable_sigmoid(s);
                epoch_loss -= if label == 1.0 {
                    sig.max(1e-300).ln()
                } else {
                    (1.0 - sig).max(1e-300).ln()
                };
                let g = lr * (label - sig);
                for (gk, wk) in grad_u.iter_mut().zip(table.row(w)) {
                    *gk += g * wk;
                }
                let zu: Vec<f64> = table.row(u).to_vec();
                for (x, zu_k) in table.row_mut(w).iter_mut().zip(&zu) {
                    *x += g * zu_k;
                }
            }
            for (x, g) in table.row_mut(u).iter_mut().zip(&grad_u) {
                *x += g;
            }
        }
        trace.push(epoch_loss / pairs.len() as f64);
    }
    trace
}

#[cfg(test)]
#[allow(clippy::needless_range_loop)]
mod tests {
    use super::*;
    use crate::fixtures;

    fn corpus_for(g: &Graph, length: usize, seed: u64) -> WalkCorpus {
        let p = WalkParams {
            p: 1.0,
            q: 1.0,
            length,
            walks_per_node: 2,
            window: 2,
        };
        sample_walks(g, &p, seed).unwrap()
    }

    #[test]
    fn zero_table_gives_uniform_softmax() {
        let g = fixtures::cycle(5);
        let corpus = corpus_for(&g, 4, 1);
        let c = corpus.context_pairs().len() as f64;
        let z = EmbeddingTable::zeros(5, 3, EmbedMethod::Node2Vec);
        let loss = node2vec_loss_exact(&z, &corpus).unwrap();
        assert!((loss - c * 5f64.ln()).abs() < 1e-9);
    }

    #[test]
    fn doubling_pairs_doubles_loss() {
        let g = fixtures::cycle(5);
        let corpus = corpus_for(&g, 4, 2);
        let z = EmbeddingTable::uniform_init(5, 3, EmbedMethod::Node2Vec, 4);
        let counts = ContextCounts::from_corpus(&corpus, 5);
        let a = exact_loss(&z, &counts);
        let b = exact_loss(&z, &counts.scaled(2.0));
        assert!((b - 2.0 * a).abs() < 1e-9 * a.abs().max(1.0));
    }

    #[test]
    fn gradient_matches_finite_differences() {
        let g = fixtures::planted_partition(5, 1, 0.7, 0.0, 3);
        let corpus = corpus_for(&g, 5, 3);
        let counts = ContextCounts::from_corpus(&corpus, 5);
        let mut z = EmbeddingTable::uniform_init(5, 3, EmbedMethod::Node2Vec, 9);
        for x in z.data_mut() {
            *x *= 40.0;
        }
        let analytic = exact_gradient(&z, &counts);
        let h = 1e-5;
        for i in 0..analytic.len() {
            let mut plus = z.clone();
            plus.data_mut()[i] += h;
            let mut minus = z.clone();
            minus.data_mut()[i] -= h;
            let fd = (exact_loss(&plus, &counts) - exact_loss(&minus, &counts)) / (2.0 * h);
            let rel = (analytic[i] - fd).abs() / analytic[i].abs().max(1.0);
            assert!(rel < 1e-5, "coordinate {i}: {} vs {fd}", analytic[i]);
        }
    }

    #[test]
    fn zero_epochs_returns_init() {
        let g = fixtures::triangle();
        let cfg = Node2VecConfig {
            dim: 4,
            epochs: 0,
            ..Default::default()
        };
        let t = train_node2vec(&g, &cfg, 7).unwrap();
        assert_eq!(
            t,
            EmbeddingTable::uniform_init(3, 4, EmbedMethod::Node2Vec, 7)
        );
    }

    #[test]
    fn exact_mode_is_monotone() {
        let g = fixtures::planted_partition(8, 2, 0.9, 0.2, 1);
        let cfg = Node2VecConfig {
            dim: 4,
            walk_length: Some(6),
            window: 2,
            epochs: 60,
            lr: 0.1,
            objective: Objective::ExactSoftmax,
            ..Default::default()
        };
        let (_, trace) = train_node2vec_traced(&g, &cfg, 3).unwrap();
        assert!(trace.windows(2).all(|w| w[1] <= w[0] + 1e-9));
        assert!(trace.last().unwrap() < &trace[0]);
    }

    #[test]
    fn exact_mode_rejects_large_graphs() {
        let g = fixtures::cycle(65);
        let cfg = Node2VecConfig {
            objective: Objective::ExactSoftmax,
            ..Default::default()
        };
        assert!(matches!(train_node2vec(&g, &cfg, 0), Err(Error::Config(_))));
    }

    #[test]
    fn deterministic() {
        let g = fixtures::planted_partition(20, 2, 0.6, 0.1, 4);
        let cfg = Node2VecConfig {
            dim: 8,
            epochs: 2,
            ..Default::default()
        };
        assert_eq!(
            train_node2vec(&g, &cfg, 1).unwrap(),
            train_node2vec(&g, &cfg, 1).unwrap()
        );
    }
}
