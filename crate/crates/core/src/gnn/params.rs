use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::io::{Read, Write};
use std::path::Path;

use byteorder::{LittleEndian, ReadBytesExt, WriteBytesExt};
use rand::Rng;

use super::config::{Architecture, GnnConfig};
use crate::error::{Error, Result};
use crate::seed;
use crate::tensor::{Tape, Tensor, Var};

const MAGIC: &[u8; 4] = b"LPCK";
const VERSION: u32 = 1;

/// Named parameter tensors of one model. Shapes depend only on the config
/// and the input feature width.
#[derive(Clone, Debug, PartialEq)]
pub struct ModelParams {
    pub cfg: GnnConfig,
    pub in_dim: usize,
    names: Vec<String>,
    tensors: Vec<Tensor>,
    index: BTreeMap<String, usize>,
}

/// Parameters registered on one tape, in store order.
#[derive(Clone, Debug)]
pub struct Bound<'a> {
    params: &'a ModelParams,
    pub vars: Vec<Var>,
}

impl Bound<'_> {
    pub fn get(&self, name: &str) -> Var {
        self.vars[self.params.index[name]]
    }
}

/// Parameter layout: `(name, rows, cols)`.
fn layout(cfg: &GnnConfig, in_dim: usize) -> Vec<(String, usize, usize)> {
    let mut out = Vec::new();
    let mut linear = |name: &str, rows: usize, cols: usize| {
        out.push((format!("{name}.weight"), rows, cols));
        out.push((format!("{name}.bias"), 1, cols));
    };
    let h = cfg.hidden;
    for layer in 1..=cfg.k {
        let width = if layer == 1 { in_dim } else { h };
        let name = format!("layer{layer}");
        match cfg.architecture {
            Architecture::Gcn | Architecture::Dgcnn => linear(&name, width, h),
            Architecture::Sage => linear(&name, 2 * width, h),
            Architecture::Gin => {
                linear(&format!("{name}.mlp0"), width, h);
                linear(&format!("{name}.mlp1"), h, h);
            }
        }
    }
    if cfg.architecture == Architecture::Dgcnn {
        let c = cfg.embedding_width();
        linear(&format!("layer{}", cfg.k + 1), h, 1);
        linear("conv", c, cfg.conv_channels);
        linear(
            "dense",
            cfg.sortpool_k * cfg.conv_channels,
            cfg.scorer_hidden,
        );
        linear("out", cfg.scorer_hidden, 1);
    } else {
        linear(
            "scorer.hidden",
            2 * cfg.embedding_width(),
            cfg.scorer_hidden,
        );
        linear("scorer.out", cfg.scorer_hidden, 1);
    }
    out
}

impl ModelParams {
    /// Glorot-uniform weights and zero biases.
    pub fn init(cfg: &GnnConfig, in_dim: usize, seed: u64) -> Result<Self> {
        cfg.validate()?;
        if in_dim == 0 {
            return Err(Error::Config("input feature width must be positive".into()));
        }
        let mut rng = seed::rng(seed::derive(seed, "model-init"));
        let mut names = Vec::new();
        let mut tensors = Vec::new();
        for (name, rows, cols) in layout(cfg, in_dim) {
            let t = if name.ends_with(".bias") {
                Tensor::zeros(&[rows, cols])
            } else {
                let a = (6.0 / (rows + cols) as f64).sqrt();
                let data = (0..rows * cols).map(|_| rng.gen_range(-a..a)).collect();
                Tensor::matrix(rows, cols, data)?
            };
            names.push(name);
            tensors.push(t);
        }
        Self::from_parts(cfg.clone(), in_dim, names, tensors)
    }

    fn from_parts(
        cfg: GnnConfig,
        in_dim: usize,
        names: Vec<String>,
        tensors: Vec<Tensor>,
    ) -> Result<Self> {
        let expected = layout(&cfg, in_dim);
        if expected.len() != names.len() {
            return Err(Error::Data(format!(
                "model has {} tensors, config implies {}",
                names.len(),
                expected.len()
            )));
        }
        for ((name, rows, cols), (n, t)) in expected.iter().zip(names.iter().zip(&tensors)) {
            if name != n || t.shape() != [*rows, *cols] {
                return Err(Error::Data(format!(
                    "parameter {n} {:?} does not match expected {name} [{rows}, {cols}]",
                    t.shape()
                )));
            }
        }
        let index = names
            .iter()
            .enumerate()
            .map(|(i, n)| (n.clone(), i))
            .collect();
        Ok(ModelParams {
            cfg,
            in_dim,
            names,
            tensors,
            index,
        })
    }

    pub fn names(&self) -> &[String] {
        &self.names
    }

    pub fn tensors(&self) -> &[Tensor] {
        &self.tensors
    }

    pub fn tensors_mut(&mut self) -> &mut [Tensor] {
        &mut self.tensors
    }

    pub fn get(&self, name: &str) -> Option<&Tensor> {
        self.index.get(name).map(|&i| &self.tensors[i])
    }

    pub fn get_mut(&mut self, name: &str) -> Option<&mut Tensor> {
        self.index.get(name).map(|&i| &mut self.tensors[i])
    }

    pub fn num_scalars(&self) -> usize {
        self.tensors.iter().map(Tensor::len).sum()
    }

    /// Registers every tensor on `tape`, trainable or frozen.
    pub fn bind(&self, tape: &mut Tape, trainable: bool) -> Bound<'_> {
        let vars = self
            .tensors
            .iter()
            .map(|t| tape.leaf(t.clone(), trainable))
            .collect();
        Bound { params: self, vars }
    }

    /// Wraps variables already on a tape, one per tensor in store order.
    pub fn bound_from(&self, vars: Vec<Var>) -> Result<Bound<'_>> {
        if vars.len() != self.tensors.len() {
            return Err(Error::shape(
                "bound_from",
                &[self.tensors.len()],
                &[vars.len()],
            ));
        }
        Ok(Bound { params: self, vars })
    }

    /// Checkpoint: magic `LPCK`, u32 version, length-prefixed `key=value`
    /// config text, u64 input width, u32 tensor count, then per tensor a
    /// length-prefixed name, u32 rows, u32 cols and f64 values.
    pub fn write(&self, mut w: impl Write) -> std::io::Result<()> {
        w.write_all(MAGIC)?;
        w.write_u32::<LittleEndian>(VERSION)?;
        let header: String = self
            .cfg
            .to_pairs()
            .into_iter()
            .map(|(k, v)| format!("{k}={v}\n"))
            .collect();
        w.write_u32::<LittleEndian>(header.len() as u32)?;
        w.write_all(header.as_bytes())?;
        w.write_u64::<LittleEndian>(self.in_dim as u64)?;
        w.write_u32::<LittleEndian>(self.tensors.len() as u32)?;
        for (name, t) in self.names.iter().zip(&self.tensors) {
            w.write_u32::<LittleEndian>(name.len() as u32)?;
            w.write_all(name.as_bytes())?;
            w.write_u32::<LittleEndian>(t.rows() as u32)?;
            w.write_u32::<LittleEndian>(t.cols() as u32)?;
            for &x in t.data() {
                w.write_f64::<LittleEndian>(x)?;
            }
        }
        Ok(())
    }

    pub fn read(mut r: impl Read) -> Result<Self> {
        let corrupt = |m: String| Error::Data(format!("checkpoint: {m}"));
        let io = |e: std::io::Error| corrupt(e.to_string());
        let mut magic = [0u8; 4];
        r.read_exact(&mut magic).map_err(io)?;
        if &magic != MAGIC {
            return Err(corrupt("bad magic".into()));
        }
        let version = r.read_u32::<LittleEndian>().map_err(io)?;
        if version != VERSION {
            return Err(corrupt(format!("unsupported version {version}")));
        }
        let read_string = |r: &mut dyn Read| -> Result<String> {
            let len = r.read_u32::<LittleEndian>().map_err(io)? as usize;
            let mut buf = vec![0u8; len];
            r.read_exact(&mut buf).map_err(io)?;
            String::from_utf8(buf).map_err(|_| corrupt("non-utf-8 text".into()))
        };
        let header = read_string(&mut r)?;
        let mut cfg = GnnConfig::default();
        for line in header.lines() {
            let (k, v) = line
                .split_once('=')
                .ok_or_else(|| corrupt(format!("bad header line {line:?}")))?;
            if !cfg.set(k, v)? {
                return Err(corrupt(format!("unknown header key {k:?}")));
            }
        }
        let in_dim = r.read_u64::<LittleEndian>().map_err(io)? as usize;
        let count = r.read_u32::<LittleEndian>().map_err(io)? as usize;
        let mut names = Vec::with_capacity(count);
        let mut tensors = Vec::with_capacity(count);
        for _ in 0..count {
            names.push(read_string(&mut r)?);
            let rows = r.read_u32::<LittleEndian>().map_err(io)? as usize;
            let cols = r.read_u32::<LittleEndian>().map_err(io)? as usize;
            let mut data = vec![0.0; rows * cols];
            r.read_f64_into::<LittleEndian>(&mut data).map_err(io)?;
            tensors.push(Tensor::matrix(rows, cols, data)?);
        }
        Self::from_parts(cfg, in_dim, names, tensors)
    }

    /// `name,rows,cols,count` per tensor.
    pub fn manifest_csv(&self) -> String {
        let mut out = String::from("name,rows,cols,count\n");
        for (name, t) in self.names.iter().zip(&self.tensors) {
            let _ = writeln!(out, "{name},{},{},{}", t.rows(), t.cols(), t.len());
        }
        out
    }

    /// Writes `<path>` and `<path>.manifest.csv`.
    pub fn save(&self, path: &Path) -> Result<()> {
        let file = std::fs::File::create(path).map_err(|e| Error::io(path, e))?;
        self.write(std::io::BufWriter::new(file))
            .map_err(|e| Error::io(path, e))?;
        let manifest = path.with_extension("manifest.csv");
        std::fs::write(&manifest, self.manifest_csv()).map_err(|e| Error::io(&manifest, e))
    }

    pub fn load(path: &Path) -> Result<Self> {
        let file = std::fs::File::open(path).map_err(|e| Error::io(path, e))?;
        Self::read(std::io::BufReader::new(file))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn shapes_follow_config() {
        for arch in Architecture::ALL {
            let cfg = GnnConfig {
                architecture: arch,
                ..Default::default()
            };
            let p = ModelParams::init(&cfg, 11, 0).unwrap();
            let q = ModelParams::init(&cfg, 11, 1).unwrap();
            assert_eq!(p.names(), q.names());
            assert_ne!(p, q);
            let first = match arch {
                Architecture::Gin => "layer1.mlp0.weight",
                _ => "layer1.weight",
            };
            let rows = if arch == Architecture::Sage { 22 } else { 11 };
            assert_eq!(p.get(first).unwrap().shape(), &[rows, 32]);
        }
    }

    #[test]
    fn checkpoint_round_trip() {
        let cfg = GnnConfig {
            architecture: Architecture::Dgcnn,
            sortpool_k: 5,
            ..Default::default()
        };
        let p = ModelParams::init(&cfg, 7, 3).unwrap();
        let mut buf = Vec::new();
        p.write(&mut buf).unwrap();
        assert_eq!(ModelParams::read(buf.as_slice()).unwrap(), p);
        assert!(p
            .manifest_csv()
            .starts_with("name,rows,cols,count\nlayer1.weight,7,32,224\n"));
        buf[4] = 9;
        assert!(ModelParams::read(buf.as_slice()).is_err());
    }
}
