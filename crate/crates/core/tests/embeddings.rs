use linkpred::embed::node2vec::{exact_loss, ContextCounts};
use linkpred::embed::walk::{transition_weights, walk_from};
use linkpred::embed::{
    node2vec_loss_exact, sample_walks, train_node2vec, EmbedMethod, EmbeddingTable, Node2VecConfig,
    Objective, WalkParams,
};
use linkpred::{fixtures, seed, Graph};

fn single_steps(g: &Graph, prev: usize, cur: usize, p: f64, q: f64, samples: usize) -> Vec<f64> {
    // Two-step walks from `prev` conditioned on the first step landing on `cur`.
    let params = WalkParams {
        p,
        q,
        length: 2,
        walks_per_node: 1,
        window: 1,
    };
    let mut counts = vec![0.0; g.num_nodes()];
    let mut kept = 0;
    let mut i = 0u64;
    while kept < samples {
        let mut rng = seed::rng(seed::derive_indexed(99, "step", i));
        i += 1;
        let w = walk_from(g, prev, &params, &mut rng);
        if w[1] == cur {
            counts[w[2]] += 1.0;
            kept += 1;
        }
    }
    counts.iter().map(|c| c / samples as f64).collect()
}

fn analytic(g: &Graph, prev: usize, cur: usize, p: f64, q: f64) -> Vec<f64> {
    let w = transition_weights(g, Some(prev), cur, p, q);
    let total: f64 = w.iter().map(|x| x.1).sum();
    let mut out = vec![0.0; g.num_nodes()];
    for (x, wx) in w {
        out[x] = wx / total;
    }
    out
}

#[test]
fn triangle_uniform_walk_frequencies() {
    let g = fixtures::triangle();
    let params = WalkParams {
        p: 1.0,
        q: 1.0,
        length: 100_000,
        walks_per_node: 1,
        window: 1,
    };
    let mut rng = seed::rng(5);
    let w = walk_from(&g, 0, &params, &mut rng);
    // From each node, count how often the walk moves to the smaller neighbor.
    let mut lower = 0usize;
    for s in w.windows(2) {
        let other: Vec<_> = g.neighbors(s[0]).to_vec();
        if s[1] == other[0] {
            lower += 1;
        }
    }
    let f = lower as f64 / (w.len() - 1) as f64;
    assert!((f - 0.5).abs() < 0.01, "frequency {f}");
}

#[test]
fn square_step_probabilities() {
    let g = fixtures::cycle(4);
    let expect = analytic(&g, 0, 1, 0.25, 4.0);
    assert!((expect[0] - 16.0 / 17.0).abs() < 1e-15);
    assert!((expect[2] - 1.0 / 17.0).abs() < 1e-15);
    let got = single_steps(&g, 0, 1, 0.25, 4.0, 100_000);
    for x in 0..4 {
        assert!(
            (got[x] - expect[x]).abs() < 0.01,
            "node {x}: {} vs {}",
            got[x],
            expect[x]
        );
    }
}

#[test]
fn six_node_step_probabilities() {
    // 0-1, 1-2, 1-3, 1-4, 0-2, 3-5, 4-5: from t=0 at v=1 the candidates are
    // 0 (return), 2 (common neighbor) and 3, 4 (two hops out).
    let (g, _) =
        Graph::from_edges(6, &[(0, 1), (1, 2), (1, 3), (1, 4), (0, 2), (3, 5), (4, 5)]).unwrap();
    let expect = analytic(&g, 0, 1, 0.25, 4.0);
    let total = 4.0 + 1.0 + 0.25 + 0.25;
    assert!((expect[0] - 4.0 / total).abs() < 1e-15);
    assert!((expect[2] - 1.0 / total).abs() < 1e-15);
    let got = single_steps(&g, 0, 1, 0.25, 4.0, 100_000);
    for x in 0..6 {
        assert!(
            (got[x] - expect[x]).abs() < 0.01,
            "node {x}: {} vs {}",
            got[x],
            expect[x]
        );
    }
}

#[test]
fn cliques_separate() {
    let g = fixtures::disjoint_cliques(2, 5);
    let cfg = Node2VecConfig {
        dim: 16,
        walk_length: Some(10),
        window: 3,
        epochs: 5,
        ..Default::default()
    };
    let z = train_node2vec(&g, &cfg, 3).unwrap();
    let (mut intra, mut ni, mut inter, mut nx) = (0.0, 0, 0.0, 0);
    for u in 0..10 {
        for v in 0..10 {
            if u == v {
                continue;
            }
            if u / 5 == v / 5 {
                intra += z.dot(u, v);
                ni += 1;
            } else {
                inter += z.dot(u, v);
                nx += 1;
            }
        }
    }
    assert!(intra / ni as f64 > inter / nx as f64);
}

#[test]
fn negative_sampling_close_to_exact_optimum() {
    let g = fixtures::planted_partition(8, 2, 0.9, 0.2, 1);
    let base = Node2VecConfig {
        dim: 8,
        walk_length: Some(8),
        window: 2,
        ..Default::default()
    };
    let exact_cfg = Node2VecConfig {
        epochs: 2000,
        lr: 0.5,
        objective: Objective::ExactSoftmax,
        ..base.clone()
    };
    let sgns_cfg = Node2VecConfig {
        epochs: 20,
        ..base.clone()
    };
    let corpus = sample_walks(&g, &base.walk_params(8), seed::derive(4, "walks")).unwrap();
    let counts = ContextCounts::from_corpus(&corpus, 8);
    let exact = exact_loss(&train_node2vec(&g, &exact_cfg, 4).unwrap(), &counts);
    let sgns = exact_loss(&train_node2vec(&g, &sgns_cfg, 4).unwrap(), &counts);
    let uniform =
        node2vec_loss_exact(&EmbeddingTable::zeros(8, 8, EmbedMethod::Node2Vec), &corpus).unwrap();
    assert!(exact < uniform);
    assert!(sgns <= 1.2 * exact, "sgns {sgns} exact {exact}");
}
