use std::fmt;
use std::str::FromStr;

use super::subgraph::EnclosingSubgraph;
use crate::embed::EmbeddingTable;
use crate::error::{Error, Result};
use crate::io::NodeAttributes;
use crate::tensor::Tensor;

pub const DEFAULT_MAX_LABEL: usize = 10;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum FeatureMode {
    DrnlOnly,
    DrnlPlusEmbed,
    DrnlPlusAttr,
}

impl FeatureMode {
    pub const ALL: [FeatureMode; 3] = [
        FeatureMode::DrnlOnly,
        FeatureMode::DrnlPlusEmbed,
        FeatureMode::DrnlPlusAttr,
    ];

    /// Column heading used in summary tables.
    pub fn column_label(self) -> &'static str {
        match self {
            FeatureMode::DrnlOnly => "W/o N2V",
            FeatureMode::DrnlPlusEmbed => "With N2V",
            FeatureMode::DrnlPlusAttr => "With attributes",
        }
    }
}

impl fmt::Display for FeatureMode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            FeatureMode::DrnlOnly => "drnl_only",
            FeatureMode::DrnlPlusEmbed => "drnl_plus_embed",
            FeatureMode::DrnlPlusAttr => "drnl_plus_attr",
        })
    }
}

impl FromStr for FeatureMode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "drnl_only" => Ok(FeatureMode::DrnlOnly),
            "drnl_plus_embed" | "drnl_plus_n2v" => Ok(FeatureMode::DrnlPlusEmbed),
            "drnl_plus_attr" => Ok(FeatureMode::DrnlPlusAttr),
            other => Err(Error::Config(format!("unknown feature mode {other:?}"))),
        }
    }
}

/// Per-node vectors appended after the label one-hot.
#[derive(Clone, Copy, Debug)]
pub enum SideFeatures<'a> {
    None,
    Embedding(&'a EmbeddingTable),
    Attributes(&'a NodeAttributes),
}

impl SideFeatures<'_> {
    pub fn mode(&self) -> FeatureMode {
        match self {
            SideFeatures::None => FeatureMode::DrnlOnly,
            SideFeatures::Embedding(_) => FeatureMode::DrnlPlusEmbed,
            SideFeatures::Attributes(_) => FeatureMode::DrnlPlusAttr,
        }
    }

    pub fn width(&self) -> usize {
        match self {
            SideFeatures::None => 0,
            SideFeatures::Embedding(t) => t.dim,
            SideFeatures::Attributes(a) => a.dim,
        }
    }

    fn row(&self, node: usize) -> Option<&[f64]> {
        match self {
            SideFeatures::None => Some(&[]),
            SideFeatures::Embedding(t) => (node < t.num_nodes()).then(|| t.row(node)),
            SideFeatures::Attributes(a) => a.get(node),
        }
    }
}

/// Total row width for a label cap and side source.
pub fn feature_width(max_label: usize, side: &SideFeatures) -> usize {
    max_label + 1 + side.width()
}

#[derive(Clone, Debug, PartialEq)]
pub struct FeatureMatrix {
    pub mode: FeatureMode,
    /// `num_nodes × width`; DRNL one-hot block first.
    pub values: Tensor,
}

/// Rows of `onehot(min(label, max_label)) ⊕ side(node)`.
pub fn assemble_features(
    sub: &EnclosingSubgraph,
    labels: &[usize],
    side: &SideFeatures,
    max_label: usize,
) -> Result<FeatureMatrix> {
    if labels.len() != sub.num_nodes() {
        return Err(Error::shape(
            "assemble_features",
            &[sub.num_nodes()],
            &[labels.len()],
        ));
    }
    let onehot = max_label + 1;
    let width = onehot + side.width();
    let mut data = vec![0.0; sub.num_nodes() * width];
    for (i, (&node, &label)) in sub.nodes.iter().zip(labels).enumerate() {
        let row = &mut data[i * width..(i + 1) * width];
        row[label.min(max_label)] = 1.0;
        let extra = side
            .row(node)
            .ok_or_else(|| Error::Contract(format!("no {} vector for node {node}", side.mode())))?;
        row[onehot..].copy_from_slice(extra);
    }
    Ok(FeatureMatrix {
        mode: side.mode(),
        values: Tensor::matrix(sub.num_nodes(), width, data)?,
    })
}
