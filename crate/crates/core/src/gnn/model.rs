use std::cmp::Ordering;
use std::sync::Arc;

use super::config::{Architecture, GnnConfig};
use super::params::{Bound, ModelParams};
use crate::error::{Error, Result};
use crate::features::{assemble_features, drnl_labels, EnclosingSubgraph, SideFeatures};
use crate::tensor::{SparseMatrix, Tape, Tensor, Var};

/// Aggregation operator of one subgraph for one architecture.
#[derive(Clone, Debug)]
pub struct PairGraph {
    pub num_nodes: usize,
    agg: Arc<SparseMatrix>,
}

/// `D̃^{-1/2}(A+I)D̃^{-1/2}`.
pub fn gcn_normalized(adj: &[Vec<usize>]) -> SparseMatrix {
    let deg: Vec<f64> = adj.iter().map(|r| (r.len() + 1) as f64).collect();
    let rows = adj
        .iter()
        .enumerate()
        .map(|(i, r)| {
            let mut row: Vec<(usize, f64)> = r
                .iter()
                .map(|&j| (j, 1.0 / (deg[i] * deg[j]).sqrt()))
                .collect();
            row.push((i, 1.0 / deg[i]));
            row.sort_by_key(|e| e.0);
            row
        })
        .collect();
    SparseMatrix::from_rows(adj.len(), rows)
}

/// `D̃^{-1}(A+I)`.
pub fn random_walk_normalized(adj: &[Vec<usize>]) -> SparseMatrix {
    let rows = adj
        .iter()
        .enumerate()
        .map(|(i, r)| {
            let w = 1.0 / (r.len() + 1) as f64;
            let mut row: Vec<(usize, f64)> = r.iter().map(|&j| (j, w)).collect();
            row.push((i, w));
            row.sort_by_key(|e| e.0);
            row
        })
        .collect();
    SparseMatrix::from_rows(adj.len(), rows)
}

/// Plain adjacency `A`.
pub fn adjacency(adj: &[Vec<usize>]) -> SparseMatrix {
    let rows = adj
        .iter()
        .map(|r| r.iter().map(|&j| (j, 1.0)).collect())
        .collect();
    SparseMatrix::from_rows(adj.len(), rows)
}

/// `D^{-1}A`; isolated nodes get an all-zero row.
pub fn mean_adjacency(adj: &[Vec<usize>]) -> SparseMatrix {
    let rows = adj
        .iter()
        .map(|r| {
            let w = 1.0 / r.len().max(1) as f64;
            r.iter().map(|&j| (j, w)).collect()
        })
        .collect();
    SparseMatrix::from_rows(adj.len(), rows)
}

impl PairGraph {
    pub fn new(adj: &[Vec<usize>], arch: Architecture) -> Self {
        let agg = match arch {
            Architecture::Gcn => gcn_normalized(adj),
            Architecture::Gin => adjacency(adj),
            Architecture::Sage => mean_adjacency(adj),
            Architecture::Dgcnn => random_walk_normalized(adj),
        };
        PairGraph {
            num_nodes: adj.len(),
            agg: Arc::new(agg),
        }
    }

    pub fn operator(&self) -> &SparseMatrix {
        &self.agg
    }
}

/// Everything the model needs for one candidate pair, minus the feature
/// values, which are assembled on demand.
#[derive(Clone, Debug)]
pub struct PairInput {
    pub sub: EnclosingSubgraph,
    pub labels: Vec<usize>,
    pub graph: PairGraph,
}

impl PairInput {
    pub fn new(sub: EnclosingSubgraph, arch: Architecture) -> Self {
        let labels = drnl_labels(&sub);
        let graph = PairGraph::new(&sub.adj, arch);
        PairInput { sub, labels, graph }
    }

    pub fn features(&self, side: &SideFeatures, max_label: usize) -> Result<Tensor> {
        Ok(assemble_features(&self.sub, &self.labels, side, max_label)?.values)
    }
}

fn linear(tape: &mut Tape, p: &Bound, name: &str, x: Var) -> Result<Var> {
    let y = tape.matmul(x, p.get(&format!("{name}.weight")))?;
    tape.add_row(y, p.get(&format!("{name}.bias")))
}

/// `(1+ε)·x_u + Σ_{v∈adj(u)} x_v`.
pub fn gin_aggregate(tape: &mut Tape, g: &PairGraph, x: Var, eps: f64) -> Result<Var> {
    let own = tape.scale(x, 1.0 + eps);
    let nbr = tape.spmm(&g.agg, x)?;
    tape.add(own, nbr)
}

/// Per-node embeddings: the outputs of every layer concatenated column-wise.
pub fn embed_nodes(
    tape: &mut Tape,
    p: &Bound,
    cfg: &GnnConfig,
    g: &PairGraph,
    x: Var,
) -> Result<Var> {
    let in_dim = tape.shape(x).get(1).copied().unwrap_or(0);
    let rows = tape.shape(x)[0];
    if rows != g.num_nodes {
        return Err(Error::shape("embed_nodes", &[g.num_nodes], &[rows]));
    }
    let expect_in = tape.shape(first_weight(p, cfg))[0];
    let expect_in = if cfg.architecture == Architecture::Sage {
        expect_in / 2
    } else {
        expect_in
    };
    if in_dim != expect_in {
        return Err(Error::shape(
            "embed_nodes features",
            &[rows, expect_in],
            &[rows, in_dim],
        ));
    }
    let mut h = x;
    let mut outputs = Vec::with_capacity(cfg.k + 1);
    let layers = if cfg.architecture == Architecture::Dgcnn {
        cfg.k + 1
    } else {
        cfg.k
    };
    for layer in 1..=layers {
        let name = format!("layer{layer}");
        h = match cfg.architecture {
            Architecture::Gcn => {
                let xw = tape.matmul(h, p.get(&format!("{name}.weight")))?;
                let ax = tape.spmm(&g.agg, xw)?;
                let z = tape.add_row(ax, p.get(&format!("{name}.bias")))?;
                tape.relu(z)
            }
            Architecture::Gin => {
                let agg = gin_aggregate(tape, g, h, cfg.gin_epsilon)?;
                let m = linear(tape, p, &format!("{name}.mlp0"), agg)?;
                let m = tape.relu(m);
                let m = linear(tape, p, &format!("{name}.mlp1"), m)?;
                tape.relu(m)
            }
            Architecture::Sage => {
                let mean = tape.spmm(&g.agg, h)?;
                let cat = tape.concat_cols(&[h, mean])?;
                let z = linear(tape, p, &name, cat)?;
                tape.relu(z)
            }
            Architecture::Dgcnn => {
                let xw = tape.matmul(h, p.get(&format!("{name}.weight")))?;
                let ax = tape.spmm(&g.agg, xw)?;
                let z = tape.add_row(ax, p.get(&format!("{name}.bias")))?;
                tape.tanh(z)
            }
        };
        outputs.push(h);
    }
    tape.concat_cols(&outputs)
}

fn first_weight(p: &Bound, cfg: &GnnConfig) -> Var {
    match cfg.architecture {
        Architecture::Gin => p.get("layer1.mlp0.weight"),
        _ => p.get("layer1.weight"),
    }
}

/// Two-layer perceptron over `[e_u ⊙ e_v ⊕ |e_u − e_v|]`; symmetric in its
/// arguments by construction.
pub fn score_pair(tape: &mut Tape, p: &Bound, eu: Var, ev: Var) -> Result<Var> {
    let prod = tape.hadamard(eu, ev)?;
    let diff = tape.sub(eu, ev)?;
    let diff = tape.abs(diff);
    let feats = tape.concat_cols(&[prod, diff])?;
    let h = linear(tape, p, "scorer.hidden", feats)?;
    let h = tape.relu(h);
    linear(tape, p, "scorer.out", h)
}

/// SortPooling row order: descending by the last channel, ties by the
/// preceding channels (last to first), then by row index. Rows beyond the
/// subgraph are `None` (zero padding).
pub fn sort_pool_order(values: &Tensor, k: usize) -> Vec<Option<usize>> {
    let c = values.cols();
    let mut idx: Vec<usize> = (0..values.rows()).collect();
    idx.sort_by(|&a, &b| {
        let (ra, rb) = (values.row(a), values.row(b));
        for ch in (0..c).rev() {
            match rb[ch].partial_cmp(&ra[ch]) {
                Some(Ordering::Equal) | None => continue,
                Some(o) => return o,
            }
        }
        a.cmp(&b)
    });
    let mut out: Vec<Option<usize>> = idx.into_iter().take(k).map(Some).collect();
    out.resize(k, None);
    out
}

/// SortPooling, a 1-D convolution with kernel and stride equal to the
/// embedding width, then a dense layer to a scalar.
pub fn score_pair_dgcnn(tape: &mut Tape, p: &Bound, cfg: &GnnConfig, emb: Var) -> Result<Var> {
    let order = sort_pool_order(tape.value(emb), cfg.sortpool_k);
    let pooled = tape.gather_rows(emb, &order)?;
    let conv = linear(tape, p, "conv", pooled)?;
    let conv = tape.relu(conv);
    let flat = tape.reshape(conv, &[1, cfg.sortpool_k * cfg.conv_channels])?;
    let d = linear(tape, p, "dense", flat)?;
    let d = tape.relu(d);
    linear(tape, p, "out", d)
}

/// Score of the pair at local positions 0 and 1, as a `1×1` tape value.
pub fn score(tape: &mut Tape, p: &Bound, cfg: &GnnConfig, g: &PairGraph, x: Var) -> Result<Var> {
    let emb = embed_nodes(tape, p, cfg, g, x)?;
    if cfg.architecture == Architecture::Dgcnn {
        return score_pair_dgcnn(tape, p, cfg, emb);
    }
    let eu = tape.slice_rows(emb, 0, 1)?;
    let ev = tape.slice_rows(emb, 1, 2)?;
    score_pair(tape, p, eu, ev)
}

/// Inference without gradients.
pub fn predict(params: &ModelParams, g: &PairGraph, features: &Tensor) -> Result<f64> {
    let mut tape = Tape::new();
    let p = params.bind(&mut tape, false);
    let x = tape.constant(features.clone());
    let s = score(&mut tape, &p, &params.cfg, g, x)?;
    let v = tape.value(s).item();
    if !v.is_finite() {
        return Err(Error::Numeric(format!("non-finite score {v}")));
    }
    Ok(v)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::features::extract_enclosing_subgraph;
    use crate::fixtures;

    #[test]
    fn gcn_single_edge_by_hand() {
        let adj = vec![vec![1], vec![0]];
        let a = gcn_normalized(&adj).to_dense();
        assert_eq!(a.data(), &[0.5, 0.5, 0.5, 0.5]);
        let cfg = GnnConfig {
            k: 1,
            hidden: 2,
            ..Default::default()
        };
        let mut params = ModelParams::init(&cfg, 2, 0).unwrap();
        *params.get_mut("layer1.weight").unwrap() = Tensor::identity(2);
        let mut tape = Tape::new();
        let p = params.bind(&mut tape, false);
        let x = tape.constant(Tensor::identity(2));
        let e = embed_nodes(
            &mut tape,
            &p,
            &cfg,
            &PairGraph::new(&adj, Architecture::Gcn),
            x,
        )
        .unwrap();
        assert_eq!(tape.value(e).data(), &[0.5, 0.5, 0.5, 0.5]);
    }

    #[test]
    fn gin_star_sum() {
        let g = fixtures::star(3);
        let adj: Vec<Vec<usize>> = (0..4).map(|u| g.neighbors(u).to_vec()).collect();
        let pg = PairGraph::new(&adj, Architecture::Gin);
        let mut tape = Tape::new();
        let x = tape.constant(Tensor::matrix(4, 1, vec![0.0, 1.0, 1.0, 1.0]).unwrap());
        let a = gin_aggregate(&mut tape, &pg, x, 0.0).unwrap();
        assert_eq!(tape.value(a).get(0, 0), 3.0);
        assert_eq!(tape.value(a).get(1, 0), 1.0);
    }

    #[test]
    fn pair_scorer_is_symmetric() {
        let cfg = GnnConfig {
            hidden: 4,
            k: 1,
            ..Default::default()
        };
        let params = ModelParams::init(&cfg, 3, 5).unwrap();
        let mut tape = Tape::new();
        let p = params.bind(&mut tape, false);
        let a = tape.constant(Tensor::matrix(1, 4, vec![0.3, -1.0, 2.0, 0.1]).unwrap());
        let b = tape.constant(Tensor::matrix(1, 4, vec![1.3, 0.4, -0.2, 0.0]).unwrap());
        let ab = score_pair(&mut tape, &p, a, b).unwrap();
        let ba = score_pair(&mut tape, &p, b, a).unwrap();
        assert_eq!(
            tape.value(ab).item().to_bits(),
            tape.value(ba).item().to_bits()
        );
    }

    #[test]
    fn sort_pool_pads_and_orders() {
        let v = Tensor::from_rows(&[vec![0.0, 1.0], vec![5.0, 3.0], vec![1.0, 3.0]]).unwrap();
        assert_eq!(sort_pool_order(&v, 3), vec![Some(1), Some(2), Some(0)]);
        assert_eq!(
            sort_pool_order(&v, 5),
            vec![Some(1), Some(2), Some(0), None, None]
        );
        assert_eq!(sort_pool_order(&v, 2), vec![Some(1), Some(2)]);
    }

    #[test]
    fn every_architecture_scores() {
        let g = fixtures::planted_partition(30, 2, 0.5, 0.1, 2);
        let sub = extract_enclosing_subgraph(&g, 0, 1, 1).unwrap();
        for arch in Architecture::ALL {
            let cfg = GnnConfig {
                architecture: arch,
                hidden: 8,
                sortpool_k: 6,
                ..Default::default()
            };
            let input = PairInput::new(sub.clone(), arch);
            let x = input.features(&SideFeatures::None, 10).unwrap();
            let params = ModelParams::init(&cfg, x.cols(), 1).unwrap();
            assert!(predict(&params, &input.graph, &x).unwrap().is_finite());
            let wrong = Tensor::zeros(&[x.rows(), x.cols() + 1]);
            assert!(matches!(
                predict(&params, &input.graph, &wrong),
                Err(Error::Shape { .. })
            ));
        }
    }
}
