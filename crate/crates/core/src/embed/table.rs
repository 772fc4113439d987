use std::fmt::{self, Write as _};
use std::io::{Read, Write};
use std::path::Path;
use std::str::FromStr;

use byteorder::{LittleEndian, ReadBytesExt, WriteBytesExt};
use rand::Rng;

use crate::error::{Error, Result};
use crate::graph::NodeId;
use crate::io::LoadedGraph;
use crate::seed;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum EmbedMethod {
    Node2Vec,
    Mf,
}

impl fmt::Display for EmbedMethod {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            EmbedMethod::Node2Vec => "node2vec",
            EmbedMethod::Mf => "mf",
        })
    }
}

impl FromStr for EmbedMethod {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "node2vec" | "n2v" => Ok(EmbedMethod::Node2Vec),
            "mf" => Ok(EmbedMethod::Mf),
            other => Err(Error::Config(format!("unknown embedding method {other:?}"))),
        }
    }
}

/// One `dim`-wide row per graph node.
#[derive(Clone, Debug, PartialEq)]
pub struct EmbeddingTable {
    pub dim: usize,
    pub method: EmbedMethod,
    data: Vec<f64>,
}

const BINARY_MAGIC: &[u8; 4] = b"LPEM";
const BINARY_VERSION: u32 = 1;

impl EmbeddingTable {
    pub fn new(num_nodes: usize, dim: usize, method: EmbedMethod, data: Vec<f64>) -> Result<Self> {
        if data.len() != num_nodes * dim {
            return Err(Error::shape(
                "embedding table",
                &[num_nodes, dim],
                &[data.len()],
            ));
        }
        Ok(EmbeddingTable { dim, method, data })
    }

    pub fn zeros(num_nodes: usize, dim: usize, method: EmbedMethod) -> Self {
        EmbeddingTable {
            dim,
            method,
            data: vec![0.0; num_nodes * dim],
        }
    }

    /// Entries uniform in `[-0.5/dim, 0.5/dim]`.
    pub fn uniform_init(num_nodes: usize, dim: usize, method: EmbedMethod, seed: u64) -> Self {
        let mut rng = seed::rng(seed::derive(seed, "embedding-init"));
        let half = 0.5 / dim as f64;
        let data = (0..num_nodes * dim)
            .map(|_| rng.gen_range(-half..=half))
            .collect();
        EmbeddingTable { dim, method, data }
    }

    pub fn num_nodes(&self) -> usize {
        self.data.len().checked_div(self.dim).unwrap_or(0)
    }

    #[inline]
    pub fn row(&self, u: NodeId) -> &[f64] {
        &self.data[u * self.dim..(u + 1) * self.dim]
    }

    #[inline]
    pub fn row_mut(&mut self, u: NodeId) -> &mut [f64] {
        &mut self.data[u * self.dim..(u + 1) * self.dim]
    }

    pub fn data(&self) -> &[f64] {
        &self.data
    }

    pub fn data_mut(&mut self) -> &mut [f64] {
        &mut self.data
    }

    pub fn dot(&self, u: NodeId, v: NodeId) -> f64 {
        self.row(u)
            .iter()
            .zip(self.row(v))
            .map(|(a, b)| a * b)
            .sum()
    }

    pub fn row_norm(&self, u: NodeId) -> f64 {
        self.dot(u, u).sqrt()
    }

    pub fn is_finite(&self) -> bool {
        self.data.iter().all(|x| x.is_finite())
    }

    /// `node_id,v1,…,vdim` rows preceded by `#`-prefixed provenance lines.
    /// Node ids are the original ids of `graph`.
    pub fn to_csv(&self, graph: &LoadedGraph, provenance: &[(String, String)]) -> String {
        let mut out = String::new();
        for (k, v) in provenance {
            let _ = writeln!(out, "# {k}={v}");
        }
        out.push_str("node_id");
        for i in 1..=self.dim {
            let _ = write!(out, ",v{i}");
        }
        out.push('\n');
        for u in 0..self.num_nodes() {
            let _ = write!(out, "{}", graph.original_ids[u]);
            for x in self.row(u) {
                let _ = write!(out, ",{x}");
            }
            out.push('\n');
        }
        out
    }

    /// Parses [`EmbeddingTable::to_csv`] output against `graph`. Every graph
    /// node must have a row.
    pub fn from_csv(text: &str, graph: &LoadedGraph) -> Result<Self> {
        let n = graph.graph.num_nodes();
        let mut method = EmbedMethod::Node2Vec;
        let mut dim = None;
        let mut data = Vec::new();
        let mut seen = Vec::new();
        for (lineno, line) in text.lines().enumerate() {
            let line = line.trim();
            if let Some(rest) = line.strip_prefix('#') {
                if let Some(m) = rest.trim().strip_prefix("method=") {
                    method = m.parse()?;
                }
                continue;
            }
            if line.is_empty() || line.starts_with("node_id") {
                continue;
            }
            let bad = |m: String| Error::Data(format!("embedding csv line {}: {m}", lineno + 1));
            let mut fields = line.split(',');
            let id: u64 = fields
                .next()
                .and_then(|t| t.parse().ok())
                .ok_or_else(|| bad("bad node id".into()))?;
            let values = fields
                .map(|t| {
                    t.parse::<f64>()
                        .map_err(|_| bad(format!("bad value {t:?}")))
                })
                .collect::<Result<Vec<_>>>()?;
            let d = *dim.get_or_insert(values.len());
            if values.len() != d {
                return Err(bad(format!("expected {d} values, got {}", values.len())));
            }
            if data.is_empty() {
                data = vec![0.0; n * d];
                seen = vec![false; n];
            }
            if let Some(u) = graph.compact_id(id) {
                data[u * d..(u + 1) * d].copy_from_slice(&values);
                seen[u] = true;
            }
        }
        let dim = dim.ok_or_else(|| Error::Data("embedding csv has no rows".into()))?;
        if let Some(u) = seen.iter().position(|s| !s) {
            return Err(Error::Data(format!(
                "embedding csv lacks node {}",
                graph.original_ids[u]
            )));
        }
        EmbeddingTable::new(n, dim, method, data)
    }

    /// Binary cache: magic `LPEM`, u32 version, u8 method, u64 rows, u64 dim,
    /// then row-major little-endian f64 values.
    pub fn write_binary(&self, mut w: impl Write) -> std::io::Result<()> {
        w.write_all(BINARY_MAGIC)?;
        w.write_u32::<LittleEndian>(BINARY_VERSION)?;
        w.write_u8(match self.method {
            EmbedMethod::Node2Vec => 0,
            EmbedMethod::Mf => 1,
        })?;
        w.write_u64::<LittleEndian>(self.num_nodes() as u64)?;
        w.write_u64::<LittleEndian>(self.dim as u64)?;
        for &x in &self.data {
            w.write_f64::<LittleEndian>(x)?;
        }
        Ok(())
    }

    pub fn read_binary(mut r: impl Read) -> Result<Self> {
        let corrupt = |m: &str| Error::Data(format!("embedding cache: {m}"));
        let io = |e: std::io::Error| corrupt(&e.to_string());
        let mut magic = [0u8; 4];
        r.read_exact(&mut magic).map_err(io)?;
        if &magic != BINARY_MAGIC {
            return Err(corrupt("bad magic"));
        }
        if r.read_u32::<LittleEndian>().map_err(io)? != BINARY_VERSION {
            return Err(corrupt("unsupported version"));
        }
        let method = match r.read_u8().map_err(io)? {
            0 => EmbedMethod::Node2Vec,
            1 => EmbedMethod::Mf,
            _ => return Err(corrupt("bad method tag")),
        };
        let n = r.read_u64::<LittleEndian>().map_err(io)? as usize;
        let dim = r.read_u64::<LittleEndian>().map_err(io)? as usize;
        let mut data = vec![0.0; n * dim];
        r.read_f64_into::<LittleEndian>(&mut data).map_err(io)?;
        EmbeddingTable::new(n, dim, method, data)
    }

    pub fn save_binary(&self, path: &Path) -> Result<()> {
        let file = std::fs::File::create(path).map_err(|e| Error::io(path, e))?;
        self.write_binary(std::io::BufWriter::new(file))
            .map_err(|e| Error::io(path, e))
    }

    pub fn load_binary(path: &Path) -> Result<Self> {
        let file = std::fs::File::open(path).map_err(|e| Error::io(path, e))?;
        Self::read_binary(std::io::BufReader::new(file))
    }
}
