use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use rayon::prelude::*;

use super::config::{DatasetSource, ExperimentConfig, Mode};
use crate::embed::walk::walk_length_for_fraction;
use crate::embed::{train_mf, train_node2vec, EmbedMethod, EmbeddingTable};
use crate::error::{Error, Result};
use crate::features::SideFeatures;
use crate::fixtures;
use crate::gnn::{Architecture, GnnConfig};
use crate::graph::Graph;
use crate::io::{load_attributes, load_edge_list, LoadedGraph, NodeAttributes};
use crate::metrics::{gain_report, EvalReport, GainReport};
use crate::seed;
use crate::split::{message_passing_graph, split_all, QuerySplit};
use crate::train::{
    auto_sortpool_k, cross_validate_margin, evaluate, trace_csv, train_model, EpochRecord, Fold,
    LossKind, TrainData, TrainOutcome,
};

#[derive(Clone, Debug)]
pub struct Dataset {
    pub name: String,
    pub loaded: LoadedGraph,
}

pub fn load_dataset(src: &DatasetSource) -> Result<Dataset> {
    let loaded = match src {
        DatasetSource::Fixture(name) => LoadedGraph::identity(fixtures::named(name)?),
        DatasetSource::File(path) => load_edge_list(path)?,
    };
    if loaded.self_loops_dropped > 0 {
        log::warn!(
            "{src}: dropped {} self-loop lines",
            loaded.self_loops_dropped
        );
    }
    Ok(Dataset {
        name: src.name(),
        loaded,
    })
}

/// One `dataset,nodes,edges,diameter,queries` row per dataset.
pub fn cmd_stats(sources: &[DatasetSource]) -> Result<String> {
    let mut out = String::from("dataset,nodes,edges,diameter,queries\n");
    for src in sources {
        let ds = load_dataset(src)?;
        let s = ds.loaded.graph.stats();
        let _ = writeln!(
            out,
            "{},{},{},{},{}",
            ds.name, s.num_nodes, s.num_edges, s.diameter, s.num_queries
        );
    }
    Ok(out)
}

pub fn embed_table(
    g: &Graph,
    cfg: &ExperimentConfig,
    method: EmbedMethod,
    seed: u64,
) -> Result<EmbeddingTable> {
    match method {
        EmbedMethod::Node2Vec => train_node2vec(g, &cfg.node2vec, seed),
        EmbedMethod::Mf => train_mf(g, &cfg.mf, seed),
    }
}

fn provenance(
    cfg: &ExperimentConfig,
    method: EmbedMethod,
    seed: u64,
    g: &Graph,
) -> Vec<(String, String)> {
    let keys: &[&str] = match method {
        EmbedMethod::Node2Vec => &[
            "n2v_dim",
            "n2v_p",
            "n2v_q",
            "walk_length",
            "walks_per_node",
            "window",
            "n2v_epochs",
            "negatives",
            "n2v_lr",
            "n2v_objective",
        ],
        EmbedMethod::Mf => &[
            "mf_dim",
            "mf_lambda",
            "mf_epochs",
            "mf_lr",
            "mf_include_diagonal",
        ],
    };
    let mut p = vec![("method".to_string(), method.to_string())];
    p.extend(
        cfg.to_pairs()
            .into_iter()
            .filter(|(k, _)| keys.contains(k))
            .map(|(k, v)| (k.to_string(), v)),
    );
    p.push(("seed".into(), seed.to_string()));
    p.push(("graph_sha256".into(), g.content_hash()));
    p
}

/// Trains `method` on every dataset's full graph, once per seed, and writes
/// `embeddings/<dataset>.<method>.seed<s>.csv` under the output directory.
pub fn cmd_embed(cfg: &ExperimentConfig, method: EmbedMethod) -> Result<Vec<PathBuf>> {
    let dir = cfg.out.join("embeddings");
    create_dir(&dir)?;
    let mut written = Vec::new();
    for src in &cfg.datasets {
        let ds = load_dataset(src)?;
        for &s in &cfg.seeds {
            let table = embed_table(&ds.loaded.graph, cfg, method, s)?;
            let text = table.to_csv(&ds.loaded, &provenance(cfg, method, s, &ds.loaded.graph));
            let path = dir.join(format!("{}.{method}.seed{s}.csv", ds.name));
            write_file(&path, &text)?;
            written.push(path);
        }
    }
    Ok(written)
}

/// Identifies one grid cell.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord)]
pub struct CellKey {
    pub dataset: String,
    pub architecture: Architecture,
    pub mode: Mode,
    pub loss: LossKind,
    pub seed: u64,
}

impl CellKey {
    pub fn label(&self) -> String {
        format!(
            "{}_{}_{}_seed{}",
            self.architecture, self.mode, self.loss, self.seed
        )
    }

    fn seed(&self) -> u64 {
        let name = format!(
            "cell/{}/{}/{}/{}",
            self.dataset, self.architecture, self.mode, self.loss
        );
        seed::derive(self.seed, &name)
    }
}

#[derive(Clone, Debug)]
pub struct CellResult {
    pub key: CellKey,
    pub report: EvalReport,
    pub trace: Vec<EpochRecord>,
    pub best_epoch: usize,
    /// Margin chosen on validation (ranking loss only).
    pub margin: Option<f64>,
}

/// Splits and side inputs shared by all cells of one (dataset, seed).
struct Prepared {
    splits: Vec<QuerySplit>,
    mp: Graph,
    tables: BTreeMap<EmbedMethod, EmbeddingTable>,
    sortpool_k: usize,
}

impl Prepared {
    fn new(ds: &Dataset, cfg: &ExperimentConfig, seed_value: u64) -> Result<Self> {
        let g = &ds.loaded.graph;
        let queries = g.query_nodes();
        if queries.is_empty() {
            return Err(Error::Data(format!(
                "{}: no node lies on a triangle",
                ds.name
            )));
        }
        let mut splits = split_all(
            g,
            &queries,
            seed::derive(seed_value, &format!("split/{}", ds.name)),
        )?;
        if let Some(cap) = cfg.test_neg_cap {
            splits.iter_mut().for_each(|s| s.cap_test_negatives(cap));
        }
        let mp = message_passing_graph(g, &splits);
        let mut tables = BTreeMap::new();
        for method in cfg.modes.iter().filter_map(|m| m.embed_method()) {
            if let std::collections::btree_map::Entry::Vacant(slot) = tables.entry(method) {
                let s = seed::derive(seed_value, &format!("embed/{}/{method}", ds.name));
                slot.insert(embed_table(&mp, cfg, method, s)?);
            }
        }
        let sortpool_k = match cfg.sortpool_k {
            Some(k) => k,
            None if cfg.architectures.contains(&Architecture::Dgcnn) => {
                let data = TrainData {
                    graph: &mp,
                    splits: &splits,
                    side: SideFeatures::None,
                    hops: cfg.hops,
                    max_label: cfg.max_label,
                };
                auto_sortpool_k(&data)?
            }
            None => cfg.gnn.sortpool_k,
        };
        Ok(Prepared {
            splits,
            mp,
            tables,
            sortpool_k,
        })
    }
}

fn run_cell(
    key: &CellKey,
    prep: &Prepared,
    attrs: Option<&NodeAttributes>,
    cfg: &ExperimentConfig,
) -> Result<CellResult> {
    let side = match key.mode {
        Mode::DrnlOnly => SideFeatures::None,
        Mode::DrnlPlusAttr => SideFeatures::Attributes(attrs.expect("attributes loaded")),
        m => SideFeatures::Embedding(&prep.tables[&m.embed_method().expect("embedding mode")]),
    };
    let data = TrainData {
        graph: &prep.mp,
        splits: &prep.splits,
        side,
        hops: cfg.hops,
        max_label: cfg.max_label,
    };
    let gcfg = GnnConfig {
        architecture: key.architecture,
        sortpool_k: prep.sortpool_k,
        ..cfg.gnn.clone()
    };
    let tcfg = crate::train::TrainConfig {
        loss: key.loss,
        ..cfg.train.clone()
    };
    let (outcome, margin): (TrainOutcome, _) = match key.loss {
        LossKind::Bce => (train_model(&data, &gcfg, &tcfg, key.seed())?, None),
        LossKind::Rank => {
            let s = cross_validate_margin(&data, &gcfg, &tcfg, key.seed())?;
            (s.outcome, Some(s.delta))
        }
    };
    let report = evaluate(&outcome.params, &data, Fold::Test, None)?;
    log::info!(
        "{} {}: test MAP {:.4} MRR {:.4} (best epoch {})",
        key.dataset,
        key.label(),
        report.map,
        report.mrr,
        outcome.best_epoch
    );
    Ok(CellResult {
        key: key.clone(),
        report,
        trace: outcome.trace,
        best_epoch: outcome.best_epoch,
        margin,
    })
}

fn pool(jobs: usize) -> Result<rayon::ThreadPool> {
    rayon::ThreadPoolBuilder::new()
        .num_threads(jobs)
        .build()
        .map_err(|e| Error::Config(format!("thread pool: {e}")))
}

/// Runs every (dataset, seed, architecture, mode, loss) cell. Results come
/// back in grid order regardless of scheduling.
pub fn run_grid(cfg: &ExperimentConfig) -> Result<(Vec<Dataset>, Vec<CellResult>)> {
    cfg.validate()?;
    let pool = pool(cfg.jobs)?;
    let mut datasets = Vec::new();
    let mut results = Vec::new();
    for src in &cfg.datasets {
        let ds = load_dataset(src)?;
        let attrs = match &cfg.attributes {
            Some(p) if cfg.modes.contains(&Mode::DrnlPlusAttr) => {
                Some(load_attributes(p, &ds.loaded)?)
            }
            _ => None,
        };
        for &s in &cfg.seeds {
            let prep = pool.install(|| Prepared::new(&ds, cfg, s))?;
            let mut keys = Vec::new();
            for &architecture in &cfg.architectures {
                for &mode in &cfg.modes {
                    for &loss in &cfg.losses {
                        keys.push(CellKey {
                            dataset: ds.name.clone(),
                            architecture,
                            mode,
                            loss,
                            seed: s,
                        });
                    }
                }
            }
            let cells = pool.install(|| {
                keys.par_iter()
                    .map(|k| run_cell(k, &prep, attrs.as_ref(), cfg))
                    .collect::<Result<Vec<_>>>()
            })?;
            results.extend(cells);
        }
        datasets.push(ds);
    }
    Ok((datasets, results))
}

/// Seed-averaged summary: one row per (dataset, loss), one column per
/// (architecture, mode).
pub fn summary_csv(
    cfg: &ExperimentConfig,
    results: &[CellResult],
    metric: impl Fn(&EvalReport) -> f64,
) -> String {
    let mut out = String::from("dataset,loss");
    for a in &cfg.architectures {
        for m in &cfg.modes {
            let _ = write!(out, ",{} {}", a.display_name(), m.column_label());
        }
    }
    out.push('\n');
    let mut names: Vec<&str> = Vec::new();
    for r in results {
        if !names.contains(&r.key.dataset.as_str()) {
            names.push(&r.key.dataset);
        }
    }
    for name in names {
        for &loss in &cfg.losses {
            let _ = write!(out, "{name},{loss}");
            for &a in &cfg.architectures {
                for &m in &cfg.modes {
                    let vals: Vec<f64> = results
                        .iter()
                        .filter(|r| {
                            r.key.dataset == name
                                && r.key.loss == loss
                                && r.key.architecture == a
                                && r.key.mode == m
                        })
                        .map(|r| metric(&r.report))
                        .collect();
                    let mean = vals.iter().sum::<f64>() / vals.len().max(1) as f64;
                    let _ = write!(out, ",{mean:.6}");
                }
            }
            out.push('\n');
        }
    }
    out
}

pub struct RunOutput {
    pub results: Vec<CellResult>,
    pub summary_map: String,
    pub summary_mrr: String,
}

/// Runs the grid and writes per-cell reports and traces, both summaries
/// and the effective config under `cfg.out`.
pub fn cmd_run(cfg: &ExperimentConfig) -> Result<RunOutput> {
    let (datasets, results) = run_grid(cfg)?;
    create_dir(&cfg.out)?;
    write_file(&cfg.out.join("config.txt"), &cfg.serialize())?;
    for r in &results {
        let ds = datasets
            .iter()
            .find(|d| d.name == r.key.dataset)
            .expect("result belongs to a loaded dataset");
        let ids = &ds.loaded.original_ids;
        let dir = cfg.out.join("reports").join(&ds.name);
        create_dir(&dir)?;
        let mut report = r.report.to_csv(|q| ids[q].to_string());
        if let Some(m) = r.margin {
            let _ = writeln!(report, "# margin={m}");
        }
        write_file(&dir.join(format!("{}.csv", r.key.label())), &report)?;
        write_file(
            &dir.join(format!("{}.trace.csv", r.key.label())),
            &trace_csv(&r.trace),
        )?;
    }
    let summary_map = summary_csv(cfg, &results, |r| r.map);
    let summary_mrr = summary_csv(cfg, &results, |r| r.mrr);
    write_file(&cfg.out.join("summary_map.csv"), &summary_map)?;
    write_file(&cfg.out.join("summary_mrr.csv"), &summary_mrr)?;
    Ok(RunOutput {
        results,
        summary_map,
        summary_mrr,
    })
}

#[derive(Clone, Debug, PartialEq)]
pub struct SweepRow {
    pub dataset: String,
    pub architecture: Architecture,
    pub loss: LossKind,
    pub fraction: f64,
    pub walk_length: usize,
    /// Means over seeds.
    pub map: f64,
    pub mrr: f64,
}

/// Reruns embedding and training in `drnl_plus_n2v` mode for each walk
/// length in `cfg.walk_fractions`.
pub fn sweep_walklength(cfg: &ExperimentConfig) -> Result<Vec<SweepRow>> {
    let mut rows = Vec::new();
    for src in &cfg.datasets {
        let n = load_dataset(src)?.loaded.graph.num_nodes();
        for &fraction in &cfg.walk_fractions {
            let walk_length = walk_length_for_fraction(n, fraction);
            let mut c = cfg.clone();
            c.datasets = vec![src.clone()];
            c.modes = vec![Mode::DrnlPlusN2v];
            c.node2vec.walk_length = Some(walk_length);
            let (_, results) = run_grid(&c)?;
            for &architecture in &cfg.architectures {
                for &loss in &cfg.losses {
                    let cell: Vec<&CellResult> = results
                        .iter()
                        .filter(|r| r.key.architecture == architecture && r.key.loss == loss)
                        .collect();
                    let k = cell.len() as f64;
                    rows.push(SweepRow {
                        dataset: src.name(),
                        architecture,
                        loss,
                        fraction,
                        walk_length,
                        map: cell.iter().map(|r| r.report.map).sum::<f64>() / k,
                        mrr: cell.iter().map(|r| r.report.mrr).sum::<f64>() / k,
                    });
                }
            }
        }
    }
    Ok(rows)
}

pub fn sweep_csv(rows: &[SweepRow]) -> String {
    let mut out = String::from("dataset,architecture,loss,r_fraction,walk_length,MAP,MRR\n");
    for r in rows {
        let _ = writeln!(
            out,
            "{},{},{},{},{},{:.6},{:.6}",
            r.dataset, r.architecture, r.loss, r.fraction, r.walk_length, r.map, r.mrr
        );
    }
    out
}

pub fn cmd_sweep_walklength(cfg: &ExperimentConfig) -> Result<Vec<SweepRow>> {
    let rows = sweep_walklength(cfg)?;
    create_dir(&cfg.out)?;
    write_file(&cfg.out.join("sweep_walklength.csv"), &sweep_csv(&rows))?;
    Ok(rows)
}

/// Compares two per-query report files and writes `gain.csv` and
/// `gain_plot.txt` into `out`.
pub fn cmd_gain(ours: &Path, baseline: &Path, out: &Path) -> Result<GainReport> {
    let read = |p: &Path| -> Result<EvalReport> {
        EvalReport::from_csv(&fs::read_to_string(p).map_err(|e| Error::io(p, e))?)
    };
    let gain = gain_report(&read(ours)?, &read(baseline)?)?;
    create_dir(out)?;
    write_file(&out.join("gain.csv"), &gain.to_csv())?;
    write_file(&out.join("gain_plot.txt"), &gain.plot_data())?;
    Ok(gain)
}

/// Writes every bundled fixture as an edge list into `out`.
pub fn cmd_fixtures(out: &Path) -> Result<Vec<PathBuf>> {
    create_dir(out)?;
    fixtures::NAMES
        .iter()
        .map(|(name, desc)| {
            let path = out.join(format!("{name}.txt"));
            crate::io::write_edge_list(&fixtures::named(name)?, &path, desc)?;
            Ok(path)
        })
        .collect()
}

fn create_dir(p: &Path) -> Result<()> {
    fs::create_dir_all(p).map_err(|e| Error::io(p, e))
}

fn write_file(p: &Path, text: &str) -> Result<()> {
    fs::write(p, text).map_err(|e| Error::io(p, e))
}
