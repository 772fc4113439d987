use std::fmt;
use std::str::FromStr;

use crate::error::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Architecture {
    Gcn,
    Gin,
    Sage,
    Dgcnn,
}

impl Architecture {
    pub const ALL: [Architecture; 4] = [
        Architecture::Gcn,
        Architecture::Gin,
        Architecture::Sage,
        Architecture::Dgcnn,
    ];

    /// Row heading used in summary tables.
    pub fn display_name(self) -> &'static str {
        match self {
            Architecture::Gcn => "GCN",
            Architecture::Gin => "GIN",
            Architecture::Sage => "GraphSAGE",
            Architecture::Dgcnn => "DGCNN",
        }
    }
}

impl fmt::Display for Architecture {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Architecture::Gcn => "gcn",
            Architecture::Gin => "gin",
            Architecture::Sage => "sage",
            Architecture::Dgcnn => "dgcnn",
        })
    }
}

impl FromStr for Architecture {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "gcn" => Ok(Architecture::Gcn),
            "gin" => Ok(Architecture::Gin),
            "sage" | "graphsage" => Ok(Architecture::Sage),
            "dgcnn" => Ok(Architecture::Dgcnn),
            other => Err(Error::Config(format!("unknown architecture {other:?}"))),
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct GnnConfig {
    pub architecture: Architecture,
    /// Message-passing layers, 1 to 3.
    pub k: usize,
    pub hidden: usize,
    pub gin_epsilon: f64,
    /// Rows kept by DGCNN SortPooling.
    pub sortpool_k: usize,
    pub scorer_hidden: usize,
    /// Output channels of the DGCNN 1-D convolution.
    pub conv_channels: usize,
}

impl Default for GnnConfig {
    fn default() -> Self {
        GnnConfig {
            architecture: Architecture::Gcn,
            k: 2,
            hidden: 32,
            gin_epsilon: 0.0,
            sortpool_k: 10,
            scorer_hidden: 32,
            conv_channels: 16,
        }
    }
}

impl GnnConfig {
    pub fn validate(&self) -> Result<()> {
        if !(1..=3).contains(&self.k) {
            return Err(Error::Config(format!("K must be in 1..=3, got {}", self.k)));
        }
        if self.hidden == 0 || self.scorer_hidden == 0 || self.conv_channels == 0 {
            return Err(Error::Config("layer widths must be positive".into()));
        }
        if self.architecture == Architecture::Dgcnn && self.sortpool_k < 2 {
            return Err(Error::Config(format!(
                "sortpool_k must be at least 2, got {}",
                self.sortpool_k
            )));
        }
        if !self.gin_epsilon.is_finite() {
            return Err(Error::Config("gin_epsilon must be finite".into()));
        }
        Ok(())
    }

    /// Width of the per-node embedding after the layer-concatenation readout.
    pub fn embedding_width(&self) -> usize {
        match self.architecture {
            Architecture::Dgcnn => self.k * self.hidden + 1,
            _ => self.k * self.hidden,
        }
    }

    pub fn to_pairs(&self) -> Vec<(&'static str, String)> {
        vec![
            ("architecture", self.architecture.to_string()),
            ("k", self.k.to_string()),
            ("hidden", self.hidden.to_string()),
            ("gin_epsilon", self.gin_epsilon.to_string()),
            ("sortpool_k", self.sortpool_k.to_string()),
            ("scorer_hidden", self.scorer_hidden.to_string()),
            ("conv_channels", self.conv_channels.to_string()),
        ]
    }

    /// Applies one `key=value` setting. Returns `false` for unknown keys.
    pub fn set(&mut self, key: &str, value: &str) -> Result<bool> {
        fn num<T: FromStr>(key: &str, value: &str) -> Result<T> {
            value
                .parse()
                .map_err(|_| Error::Config(format!("bad value {value:?} for {key}")))
        }
        match key {
            "architecture" => self.architecture = value.parse()?,
            "k" => self.k = num(key, value)?,
            "hidden" => self.hidden = num(key, value)?,
            "gin_epsilon" => self.gin_epsilon = num(key, value)?,
            "sortpool_k" => self.sortpool_k = num(key, value)?,
            "scorer_hidden" => self.scorer_hidden = num(key, value)?,
            "conv_channels" => self.conv_channels = num(key, value)?,
            _ => return Ok(false),
        }
        Ok(true)
    }
}

/// Smallest `k` such that at least 60% of `sizes` are `≤ k`, floored at 2.
pub fn sortpool_k_for(sizes: &[usize]) -> usize {
    if sizes.is_empty() {
        return 2;
    }
    let mut s = sizes.to_vec();
    s.sort_unstable();
    let need = (6 * s.len()).div_ceil(10);
    s[need.max(1) - 1].max(2)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn validation() {
        assert!(GnnConfig::default().validate().is_ok());
        assert!(GnnConfig {
            k: 4,
            ..Default::default()
        }
        .validate()
        .is_err());
        let d = GnnConfig {
            architecture: Architecture::Dgcnn,
            sortpool_k: 1,
            ..Default::default()
        };
        assert!(d.validate().is_err());
    }

    #[test]
    fn pairs_round_trip() {
        let c = GnnConfig {
            architecture: Architecture::Sage,
            k: 3,
            gin_epsilon: 0.25,
            ..Default::default()
        };
        let mut back = GnnConfig::default();
        for (k, v) in c.to_pairs() {
            assert!(back.set(k, &v).unwrap());
        }
        assert_eq!(back, c);
        assert!(!back.set("nope", "1").unwrap());
    }

    #[test]
    fn percentile_rule() {
        assert_eq!(sortpool_k_for(&[1, 2, 3, 4, 5, 6, 7, 8, 9, 10]), 6);
        assert_eq!(sortpool_k_for(&[3, 3, 3]), 3);
        assert_eq!(sortpool_k_for(&[1, 1]), 2);
        assert_eq!(sortpool_k_for(&[]), 2);
    }
}
