use std::fmt::{self, Write as _};
use std::str::FromStr;
use std::time::Instant;

use rand::seq::SliceRandom;
use rand::Rng;
use rayon::prelude::*;

use super::adam::Adam;
use super::early::{EarlyStopping, Verdict};
use super::loss::{bce_loss_tape, ranking_loss_tape};
use crate::error::{Error, Result};
use crate::features::{extract_enclosing_subgraph, feature_width, SideFeatures};
use crate::gnn::{predict, score, sortpool_k_for, Architecture, GnnConfig, ModelParams, PairInput};
use crate::graph::{Graph, NodeId};
use crate::metrics::{aggregate, Candidate, EvalReport, RankedList};
use crate::seed;
use crate::split::QuerySplit;
use crate::tensor::{Tape, Var};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum LossKind {
    Bce,
    Rank,
}

impl fmt::Display for LossKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            LossKind::Bce => "bce",
            LossKind::Rank => "rank",
        })
    }
}

impl FromStr for LossKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "bce" => Ok(LossKind::Bce),
            "rank" | "ranking" => Ok(LossKind::Rank),
            other => Err(Error::Config(format!("unknown loss {other:?}"))),
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct TrainConfig {
    pub loss: LossKind,
    pub lr: f64,
    pub patience: usize,
    /// Hinge margin used by a single ranking run.
    pub margin: f64,
    pub margin_grid: Vec<f64>,
    pub max_epochs: usize,
    /// Sampled negatives per training positive (BCE).
    pub neg_per_pos: usize,
    /// Pairs per optimizer step.
    pub batch_size: usize,
    /// Per-query cap on sampled positives and on sampled negatives (ranking).
    pub rank_samples: usize,
    /// Validation negatives kept per query; `None` keeps all.
    pub val_neg_cap: Option<usize>,
}

impl Default for TrainConfig {
    fn default() -> Self {
        TrainConfig {
            loss: LossKind::Bce,
            lr: 1e-3,
            patience: 6,
            margin: 1.0,
            margin_grid: vec![0.1, 1.0, 10.0],
            max_epochs: 200,
            neg_per_pos: 1,
            batch_size: 32,
            rank_samples: 20,
            val_neg_cap: Some(100),
        }
    }
}

impl TrainConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.lr > 0.0) {
            return Err(Error::Config(format!(
                "lr must be positive, got {}",
                self.lr
            )));
        }
        if self.patience == 0 {
            return Err(Error::Config("patience must be at least 1".into()));
        }
        if self.batch_size == 0 {
            return Err(Error::Config("batch_size must be at least 1".into()));
        }
        if self.loss == LossKind::Rank && self.margin_grid.is_empty() {
            return Err(Error::Config("margin_grid is empty".into()));
        }
        Ok(())
    }
}

/// Inputs shared by training and evaluation.
#[derive(Clone, Copy, Debug)]
pub struct TrainData<'a> {
    /// Message-passing graph: held-out positives already removed.
    pub graph: &'a Graph,
    pub splits: &'a [QuerySplit],
    pub side: SideFeatures<'a>,
    /// Hop radius of the enclosing subgraphs.
    pub hops: usize,
    pub max_label: usize,
}

impl TrainData<'_> {
    pub fn feature_width(&self) -> usize {
        feature_width(self.max_label, &self.side)
    }

    fn input(&self, arch: Architecture, u: NodeId, v: NodeId) -> Result<PairInput> {
        Ok(PairInput::new(
            extract_enclosing_subgraph(self.graph, u, v, self.hops)?,
            arch,
        ))
    }

    fn score(&self, params: &ModelParams, u: NodeId, v: NodeId) -> Result<f64> {
        let input = self.input(params.cfg.architecture, u, v)?;
        let x = input.features(&self.side, self.max_label)?;
        predict(params, &input.graph, &x)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Fold {
    Validation,
    Test,
}

/// Ranks each query's held-out candidates of `fold` and aggregates AP/RR.
pub fn evaluate(
    params: &ModelParams,
    data: &TrainData,
    fold: Fold,
    val_neg_cap: Option<usize>,
) -> Result<EvalReport> {
    let mut jobs = Vec::new();
    for (i, s) in data.splits.iter().enumerate() {
        let (pos, neg) = match fold {
            Fold::Validation => {
                let cap = val_neg_cap.unwrap_or(usize::MAX).min(s.val_neg.len());
                (&s.val_pos[..], &s.val_neg[..cap])
            }
            Fold::Test => (&s.test_pos[..], &s.test_neg[..]),
        };
        jobs.extend(pos.iter().map(|&v| (i, v, true)));
        jobs.extend(neg.iter().map(|&v| (i, v, false)));
    }
    let scores: Vec<f64> = jobs
        .par_iter()
        .map(|&(i, v, _)| data.score(params, data.splits[i].query, v))
        .collect::<Result<_>>()?;
    let mut per_query: Vec<Vec<Candidate>> = vec![Vec::new(); data.splits.len()];
    for (&(i, node, positive), score) in jobs.iter().zip(scores) {
        per_query[i].push(Candidate {
            node,
            score,
            positive,
        });
    }
    let lists = per_query
        .into_iter()
        .zip(data.splits)
        .map(|(c, s)| RankedList::new(s.query, c))
        .collect::<Result<Vec<_>>>()?;
    aggregate(&lists)
}

#[derive(Clone, Debug, PartialEq)]
pub struct EpochRecord {
    pub epoch: usize,
    /// Mean loss per scored pair.
    pub train_loss: f64,
    pub val_map: f64,
    pub elapsed_ms: u128,
}

#[derive(Clone, Debug)]
pub struct TrainOutcome {
    /// Parameters from the epoch with the best validation MAP.
    pub params: ModelParams,
    pub trace: Vec<EpochRecord>,
    pub best_epoch: usize,
    pub best_val_map: f64,
}

pub fn trace_csv(trace: &[EpochRecord]) -> String {
    let mut out = String::from("epoch,train_loss,val_MAP,elapsed_ms\n");
    for r in trace {
        let _ = writeln!(
            out,
            "{},{},{},{}",
            r.epoch, r.train_loss, r.val_map, r.elapsed_ms
        );
    }
    out
}

/// Smallest size covering 60% of the training-positive subgraphs.
pub fn auto_sortpool_k(data: &TrainData) -> Result<usize> {
    let sizes = data
        .splits
        .iter()
        .flat_map(|s| s.train_pos.iter().map(move |&v| (s.query, v)))
        .map(|(q, v)| {
            extract_enclosing_subgraph(data.graph, q, v, data.hops).map(|s| s.num_nodes())
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(sortpool_k_for(&sizes))
}

/// One optimizer step's worth of pairs. Ranking groups keep a query's
/// positives and negatives together.
enum Batch {
    Bce(Vec<(NodeId, NodeId, bool)>),
    Rank(Vec<(NodeId, Vec<NodeId>, Vec<NodeId>)>),
}

fn sample(pool: &[NodeId], k: usize, rng: &mut impl Rng) -> Vec<NodeId> {
    pool.choose_multiple(rng, k.min(pool.len()))
        .copied()
        .collect()
}

fn epoch_batches(data: &TrainData, tcfg: &TrainConfig, rng: &mut impl Rng) -> Vec<Batch> {
    match tcfg.loss {
        LossKind::Bce => {
            let mut pairs = Vec::new();
            for s in data.splits {
                for &v in &s.train_pos {
                    pairs.push((s.query, v, true));
                    if !s.train_neg.is_empty() {
                        for _ in 0..tcfg.neg_per_pos {
                            let w = s.train_neg[rng.gen_range(0..s.train_neg.len())];
                            pairs.push((s.query, w, false));
                        }
                    }
                }
            }
            pairs.shuffle(rng);
            pairs
                .chunks(tcfg.batch_size)
                .map(|c| Batch::Bce(c.to_vec()))
                .collect()
        }
        LossKind::Rank => {
            let mut groups: Vec<_> = data
                .splits
                .iter()
                .map(|s| {
                    let pos = sample(&s.train_pos, tcfg.rank_samples, rng);
                    let neg = sample(&s.train_neg, tcfg.rank_samples, rng);
                    (s.query, pos, neg)
                })
                .filter(|(_, p, n)| !p.is_empty() && !n.is_empty())
                .collect();
            groups.shuffle(rng);
            let mut batches = Vec::new();
            let mut current = Vec::new();
            let mut size = 0;
            for g in groups {
                size += g.1.len() + g.2.len();
                current.push(g);
                if size >= tcfg.batch_size {
                    batches.push(Batch::Rank(std::mem::take(&mut current)));
                    size = 0;
                }
            }
            if !current.is_empty() {
                batches.push(Batch::Rank(current));
            }
            batches
        }
    }
}

fn pair_score(
    tape: &mut Tape,
    p: &crate::gnn::Bound,
    data: &TrainData,
    cfg: &GnnConfig,
    u: NodeId,
    v: NodeId,
) -> Result<Var> {
    let input = data.input(cfg.architecture, u, v)?;
    let x = tape.constant(input.features(&data.side, data.max_label)?);
    score(tape, p, cfg, &input.graph, x)
}

/// Runs one batch forward and backward. Returns the summed loss, the number
/// of scored pairs and one gradient per parameter tensor.
fn batch_step(
    params: &ModelParams,
    data: &TrainData,
    batch: &Batch,
    margin: f64,
) -> Result<(f64, usize, Vec<crate::tensor::Tensor>)> {
    let cfg = &params.cfg;
    let mut tape = Tape::new();
    let p = params.bind(&mut tape, true);
    let (loss, pairs) = match batch {
        Batch::Bce(pairs) => {
            let scores = pairs
                .iter()
                .map(|&(u, v, _)| pair_score(&mut tape, &p, data, cfg, u, v))
                .collect::<Result<Vec<_>>>()?;
            let labels: Vec<bool> = pairs.iter().map(|x| x.2).collect();
            (bce_loss_tape(&mut tape, &scores, &labels)?, pairs.len())
        }
        Batch::Rank(groups) => {
            let mut terms = Vec::new();
            let mut count = 0;
            for (q, pos, neg) in groups {
                let ps = pos
                    .iter()
                    .map(|&v| pair_score(&mut tape, &p, data, cfg, *q, v))
                    .collect::<Result<Vec<_>>>()?;
                let ns = neg
                    .iter()
                    .map(|&v| pair_score(&mut tape, &p, data, cfg, *q, v))
                    .collect::<Result<Vec<_>>>()?;
                count += ps.len() + ns.len();
                if let Some(t) = ranking_loss_tape(&mut tape, &ps, &ns, margin)? {
                    terms.push(t);
                }
            }
            let mut total = terms[0];
            for &t in &terms[1..] {
                total = tape.add(total, t)?;
            }
            (total, count)
        }
    };
    let value = tape.value(loss).item();
    if !value.is_finite() {
        let origin = tape.non_finite().map_or(String::new(), |(i, op)| {
            format!(" (first produced by {op} at node {i})")
        });
        return Err(Error::Numeric(format!("non-finite training loss{origin}")));
    }
    let grads = tape.backward(loss)?;
    let g = p.vars.iter().map(|&v| grads.get(v)).collect();
    Ok((value, pairs, g))
}

/// Trains with Adam and early stopping on validation MAP. When no query has
/// a validation positive, the negated training loss is monitored instead.
pub fn train_model(
    data: &TrainData,
    gcfg: &GnnConfig,
    tcfg: &TrainConfig,
    seed: u64,
) -> Result<TrainOutcome> {
    tcfg.validate()?;
    if data.splits.is_empty() {
        return Err(Error::Contract("no query nodes to train on".into()));
    }
    let mut params = ModelParams::init(gcfg, data.feature_width(), seed::derive(seed, "model"))?;
    let mut adam = Adam::new(tcfg.lr, params.tensors());
    let mut stopper = EarlyStopping::new(tcfg.patience);
    let mut best = params.clone();
    let mut trace = Vec::new();
    let start = Instant::now();
    let mut warned = false;
    for epoch in 1..=tcfg.max_epochs {
        let mut rng = seed::rng(seed::derive_indexed(seed, "epoch", epoch as u64));
        let mut total = 0.0;
        let mut count = 0;
        for batch in epoch_batches(data, tcfg, &mut rng) {
            let (loss, pairs, grads) = batch_step(&params, data, &batch, tcfg.margin)?;
            let names = params.names().to_vec();
            adam.step(params.tensors_mut(), &grads, &names)?;
            total += loss;
            count += pairs;
        }
        let train_loss = total / count.max(1) as f64;
        let val_map = match evaluate(&params, data, Fold::Validation, tcfg.val_neg_cap) {
            Ok(r) => r.map,
            Err(Error::Data(_)) => {
                if !warned {
                    log::warn!("no validation positives; early stopping on training loss");
                    warned = true;
                }
                -train_loss
            }
            Err(e) => return Err(e),
        };
        trace.push(EpochRecord {
            epoch,
            train_loss,
            val_map,
            elapsed_ms: start.elapsed().as_millis(),
        });
        log::debug!("epoch {epoch}: loss {train_loss:.5} val MAP {val_map:.4}");
        match stopper.observe(epoch, val_map) {
            Verdict::Improved => best = params.clone(),
            Verdict::Continue => {}
            Verdict::Stop => break,
        }
    }
    let (best_epoch, best_val_map) = stopper.best().unwrap_or((0, f64::NAN));
    Ok(TrainOutcome {
        params: best,
        trace,
        best_epoch,
        best_val_map,
    })
}

#[derive(Clone, Debug)]
pub struct MarginSearch {
    pub delta: f64,
    pub outcome: TrainOutcome,
    /// `(δ, best validation MAP)` for every grid value, in grid order.
    pub results: Vec<(f64, f64)>,
}

/// Trains one ranking model per margin and keeps the best by validation MAP.
/// Ties go to the smaller margin.
pub fn cross_validate_margin(
    data: &TrainData,
    gcfg: &GnnConfig,
    tcfg: &TrainConfig,
    seed: u64,
) -> Result<MarginSearch> {
    if tcfg.loss != LossKind::Rank {
        return Err(Error::Config("margin search needs loss=rank".into()));
    }
    tcfg.validate()?;
    let mut grid = tcfg.margin_grid.clone();
    grid.sort_by(|a, b| a.total_cmp(b));
    let mut best: Option<(f64, TrainOutcome)> = None;
    let mut results = Vec::new();
    for &delta in &grid {
        let cfg = TrainConfig {
            margin: delta,
            ..tcfg.clone()
        };
        let outcome = train_model(data, gcfg, &cfg, seed)?;
        results.push((delta, outcome.best_val_map));
        let better = match &best {
            None => true,
            Some((_, b)) => outcome.best_val_map > b.best_val_map,
        };
        if better {
            best = Some((delta, outcome));
        }
    }
    let (delta, outcome) = best.expect("grid is non-empty");
    Ok(MarginSearch {
        delta,
        outcome,
        results,
    })
}
