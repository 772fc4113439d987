use std::fmt::{self, Write as _};
use std::path::{Path, PathBuf};
use std::str::FromStr;

use crate::embed::{EmbedMethod, MfConfig, Node2VecConfig, Objective};
use crate::error::{Error, Result};
use crate::features::{FeatureMode, DEFAULT_MAX_LABEL};
use crate::gnn::{Architecture, GnnConfig};
use crate::train::{LossKind, TrainConfig};

/// Feature mode of one grid column, including which transductive method
/// supplies the side vectors.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Mode {
    DrnlOnly,
    DrnlPlusN2v,
    DrnlPlusMf,
    DrnlPlusAttr,
}

impl Mode {
    pub fn feature_mode(self) -> FeatureMode {
        match self {
            Mode::DrnlOnly => FeatureMode::DrnlOnly,
            Mode::DrnlPlusN2v | Mode::DrnlPlusMf => FeatureMode::DrnlPlusEmbed,
            Mode::DrnlPlusAttr => FeatureMode::DrnlPlusAttr,
        }
    }

    pub fn embed_method(self) -> Option<EmbedMethod> {
        match self {
            Mode::DrnlPlusN2v => Some(EmbedMethod::Node2Vec),
            Mode::DrnlPlusMf => Some(EmbedMethod::Mf),
            _ => None,
        }
    }

    pub fn column_label(self) -> &'static str {
        match self {
            Mode::DrnlOnly => "W/o N2V",
            Mode::DrnlPlusN2v => "With N2V",
            Mode::DrnlPlusMf => "With MF",
            Mode::DrnlPlusAttr => "With attributes",
        }
    }
}

impl fmt::Display for Mode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Mode::DrnlOnly => "drnl_only",
            Mode::DrnlPlusN2v => "drnl_plus_n2v",
            Mode::DrnlPlusMf => "drnl_plus_mf",
            Mode::DrnlPlusAttr => "drnl_plus_attr",
        })
    }
}

impl FromStr for Mode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "drnl_only" => Ok(Mode::DrnlOnly),
            "drnl_plus_n2v" | "drnl_plus_embed" => Ok(Mode::DrnlPlusN2v),
            "drnl_plus_mf" => Ok(Mode::DrnlPlusMf),
            "drnl_plus_attr" => Ok(Mode::DrnlPlusAttr),
            other => Err(Error::Config(format!("unknown mode {other:?}"))),
        }
    }
}

/// Where a dataset comes from: a bundled fixture or an edge-list file.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum DatasetSource {
    Fixture(String),
    File(PathBuf),
}

impl DatasetSource {
    /// Short name used in file names and summary rows.
    pub fn name(&self) -> String {
        match self {
            DatasetSource::Fixture(n) => n.clone(),
            DatasetSource::File(p) => p.file_stem().map_or_else(
                || p.display().to_string(),
                |s| s.to_string_lossy().into_owned(),
            ),
        }
    }
}

impl fmt::Display for DatasetSource {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            DatasetSource::Fixture(n) => write!(f, "fixture:{n}"),
            DatasetSource::File(p) => write!(f, "{}", p.display()),
        }
    }
}

impl FromStr for DatasetSource {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        if s.is_empty() {
            return Err(Error::Config("empty dataset entry".into()));
        }
        Ok(match s.strip_prefix("fixture:") {
            Some(name) => DatasetSource::Fixture(name.to_string()),
            None => DatasetSource::File(PathBuf::from(s)),
        })
    }
}

/// Everything one experiment needs. Every field has a default, and the
/// default grid runs on a bundled fixture.
#[derive(Clone, Debug, PartialEq)]
pub struct ExperimentConfig {
    pub datasets: Vec<DatasetSource>,
    /// Node attribute file for `drnl_plus_attr`, shared by all datasets.
    pub attributes: Option<PathBuf>,
    pub modes: Vec<Mode>,
    pub architectures: Vec<Architecture>,
    pub losses: Vec<LossKind>,
    pub seeds: Vec<u64>,
    pub out: PathBuf,
    /// Worker threads; 0 uses all cores.
    pub jobs: usize,
    pub node2vec: Node2VecConfig,
    pub mf: MfConfig,
    /// Walk lengths for the sweep, as fractions of |V|.
    pub walk_fractions: Vec<f64>,
    pub gnn: GnnConfig,
    /// `None` picks the 60th-percentile subgraph size per dataset.
    pub sortpool_k: Option<usize>,
    pub hops: usize,
    pub max_label: usize,
    pub train: TrainConfig,
    pub test_neg_cap: Option<usize>,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        ExperimentConfig {
            datasets: vec![DatasetSource::Fixture("planted-small".into())],
            attributes: None,
            modes: vec![Mode::DrnlOnly, Mode::DrnlPlusN2v],
            architectures: Architecture::ALL.to_vec(),
            losses: vec![LossKind::Bce],
            seeds: vec![0],
            out: PathBuf::from("results"),
            jobs: 0,
            node2vec: Node2VecConfig {
                dim: 32,
                ..Default::default()
            },
            mf: MfConfig {
                dim: 32,
                lambda: 1e-3,
                epochs: 200,
                ..Default::default()
            },
            walk_fractions: vec![0.02, 0.05],
            gnn: GnnConfig {
                hidden: 16,
                scorer_hidden: 16,
                ..Default::default()
            },
            sortpool_k: None,
            hops: 1,
            max_label: DEFAULT_MAX_LABEL,
            train: TrainConfig {
                lr: 1e-2,
                max_epochs: 50,
                ..Default::default()
            },
            test_neg_cap: None,
        }
    }
}

fn list<T: ToString>(items: &[T]) -> String {
    items.iter().map(T::to_string).collect::<Vec<_>>().join(",")
}

fn opt<T: ToString>(v: &Option<T>, none: &str) -> String {
    v.as_ref().map_or_else(|| none.to_string(), T::to_string)
}

fn parse<T: FromStr>(key: &str, value: &str) -> Result<T> {
    value
        .parse()
        .map_err(|_| Error::Config(format!("bad value {value:?} for {key}")))
}

fn parse_list<T: FromStr>(key: &str, value: &str) -> Result<Vec<T>> {
    if value.is_empty() {
        return Ok(Vec::new());
    }
    value.split(',').map(|v| parse(key, v.trim())).collect()
}

fn parse_opt<T: FromStr>(key: &str, value: &str, none: &str) -> Result<Option<T>> {
    if value == none {
        Ok(None)
    } else {
        parse(key, value).map(Some)
    }
}

impl ExperimentConfig {
    /// Ordered `(key, value)` pairs; [`ExperimentConfig::set`] accepts each.
    pub fn to_pairs(&self) -> Vec<(&'static str, String)> {
        let n = &self.node2vec;
        let t = &self.train;
        let mut pairs = vec![
            ("datasets", list(&self.datasets)),
            (
                "attributes",
                opt(&self.attributes.as_ref().map(|p| p.display()), "none"),
            ),
            ("modes", list(&self.modes)),
            ("architectures", list(&self.architectures)),
            ("losses", list(&self.losses)),
            ("seeds", list(&self.seeds)),
            ("out", self.out.display().to_string()),
            ("jobs", self.jobs.to_string()),
            ("n2v_dim", n.dim.to_string()),
            ("n2v_p", n.p.to_string()),
            ("n2v_q", n.q.to_string()),
            ("walk_length", opt(&n.walk_length, "auto")),
            ("walks_per_node", n.walks_per_node.to_string()),
            ("window", n.window.to_string()),
            ("n2v_epochs", n.epochs.to_string()),
            ("negatives", n.negatives.to_string()),
            ("n2v_lr", n.lr.to_string()),
            (
                "n2v_objective",
                match n.objective {
                    Objective::NegativeSampling => "sgns",
                    Objective::ExactSoftmax => "exact",
                }
                .to_string(),
            ),
            ("mf_dim", self.mf.dim.to_string()),
            ("mf_lambda", self.mf.lambda.to_string()),
            ("mf_epochs", self.mf.epochs.to_string()),
            ("mf_lr", self.mf.lr.to_string()),
            ("mf_include_diagonal", self.mf.include_diagonal.to_string()),
            ("walk_fractions", list(&self.walk_fractions)),
        ];
        pairs.extend(
            self.gnn
                .to_pairs()
                .into_iter()
                .filter(|(k, _)| *k != "architecture" && *k != "sortpool_k"),
        );
        pairs.extend([
            ("sortpool_k", opt(&self.sortpool_k, "auto")),
            ("hops", self.hops.to_string()),
            ("max_label", self.max_label.to_string()),
            ("lr", t.lr.to_string()),
            ("patience", t.patience.to_string()),
            ("margin", t.margin.to_string()),
            ("margin_grid", list(&t.margin_grid)),
            ("max_epochs", t.max_epochs.to_string()),
            ("neg_per_pos", t.neg_per_pos.to_string()),
            ("batch_size", t.batch_size.to_string()),
            ("rank_samples", t.rank_samples.to_string()),
            ("val_neg_cap", opt(&t.val_neg_cap, "none")),
            ("test_neg_cap", opt(&self.test_neg_cap, "none")),
        ]);
        pairs
    }

    pub fn serialize(&self) -> String {
        let mut out = String::new();
        for (k, v) in self.to_pairs() {
            let _ = writeln!(out, "{k} = {v}");
        }
        out
    }

    pub fn set(&mut self, key: &str, value: &str) -> Result<()> {
        let value = value.trim();
        let n = &mut self.node2vec;
        let t = &mut self.train;
        match key {
            "datasets" => self.datasets = parse_list(key, value)?,
            "attributes" => self.attributes = parse_opt(key, value, "none")?,
            "modes" => self.modes = parse_list(key, value)?,
            "architectures" => self.architectures = parse_list(key, value)?,
            "losses" => self.losses = parse_list(key, value)?,
            "seeds" => self.seeds = parse_list(key, value)?,
            "out" => self.out = PathBuf::from(value),
            "jobs" => self.jobs = parse(key, value)?,
            "n2v_dim" => n.dim = parse(key, value)?,
            "n2v_p" => n.p = parse(key, value)?,
            "n2v_q" => n.q = parse(key, value)?,
            "walk_length" => n.walk_length = parse_opt(key, value, "auto")?,
            "walks_per_node" => n.walks_per_node = parse(key, value)?,
            "window" => n.window = parse(key, value)?,
            "n2v_epochs" => n.epochs = parse(key, value)?,
            "negatives" => n.negatives = parse(key, value)?,
            "n2v_lr" => n.lr = parse(key, value)?,
            "n2v_objective" => {
                n.objective = match value {
                    "sgns" => Objective::NegativeSampling,
                    "exact" => Objective::ExactSoftmax,
                    _ => return Err(Error::Config(format!("bad value {value:?} for {key}"))),
                }
            }
            "mf_dim" => self.mf.dim = parse(key, value)?,
            "mf_lambda" => self.mf.lambda = parse(key, value)?,
            "mf_epochs" => self.mf.epochs = parse(key, value)?,
            "mf_lr" => self.mf.lr = parse(key, value)?,
            "mf_include_diagonal" => self.mf.include_diagonal = parse(key, value)?,
            "walk_fractions" => self.walk_fractions = parse_list(key, value)?,
            "sortpool_k" => self.sortpool_k = parse_opt(key, value, "auto")?,
            "hops" => self.hops = parse(key, value)?,
            "max_label" => self.max_label = parse(key, value)?,
            "lr" => t.lr = parse(key, value)?,
            "patience" => t.patience = parse(key, value)?,
            "margin" => t.margin = parse(key, value)?,
            "margin_grid" => t.margin_grid = parse_list(key, value)?,
            "max_epochs" => t.max_epochs = parse(key, value)?,
            "neg_per_pos" => t.neg_per_pos = parse(key, value)?,
            "batch_size" => t.batch_size = parse(key, value)?,
            "rank_samples" => t.rank_samples = parse(key, value)?,
            "val_neg_cap" => t.val_neg_cap = parse_opt(key, value, "none")?,
            "test_neg_cap" => self.test_neg_cap = parse_opt(key, value, "none")?,
            "architecture" => return Err(Error::Config("use `architectures` (a list)".into())),
            _ => {
                if !self.gnn.set(key, value)? {
                    return Err(Error::Config(format!("unknown key {key:?}")));
                }
            }
        }
        Ok(())
    }

    /// Parses `key = value` lines over the defaults. `#` starts a comment.
    pub fn parse(text: &str) -> Result<Self> {
        let mut cfg = ExperimentConfig::default();
        for (i, line) in text.lines().enumerate() {
            let line = line.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (k, v) = line
                .split_once('=')
                .ok_or_else(|| Error::Config(format!("line {}: expected key = value", i + 1)))?;
            cfg.set(k.trim(), v)
                .map_err(|e| Error::Config(format!("line {}: {e}", i + 1)))?;
        }
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::parse(&text)
    }

    pub fn validate(&self) -> Result<()> {
        let empty = [
            ("datasets", self.datasets.is_empty()),
            ("modes", self.modes.is_empty()),
            ("architectures", self.architectures.is_empty()),
            ("losses", self.losses.is_empty()),
            ("seeds", self.seeds.is_empty()),
        ];
        if let Some((k, _)) = empty.iter().find(|e| e.1) {
            return Err(Error::Config(format!("{k} must not be empty")));
        }
        if self.hops == 0 {
            return Err(Error::Config("hops must be at least 1".into()));
        }
        if self.modes.contains(&Mode::DrnlPlusAttr) && self.attributes.is_none() {
            return Err(Error::Config(
                "mode drnl_plus_attr needs an attributes file".into(),
            ));
        }
        if self.walk_fractions.iter().any(|f| !(*f > 0.0)) {
            return Err(Error::Config("walk_fractions must be positive".into()));
        }
        self.train.validate()?;
        let mut g = self.gnn.clone();
        g.sortpool_k = self.sortpool_k.unwrap_or(2);
        g.validate()
    }
}
