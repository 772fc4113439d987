//! On-disk cache of enclosing subgraphs. Layout is documented in
//! `docs/subgraph-cache.md`.

use std::collections::BTreeMap;
use std::io::{Read, Write};
use std::path::Path;

use byteorder::{LittleEndian, ReadBytesExt, WriteBytesExt};

use super::subgraph::{extract_enclosing_subgraph, EnclosingSubgraph};
use crate::error::{Error, Result};
use crate::graph::{Graph, NodeId};

const MAGIC: &[u8; 4] = b"LPSG";
const VERSION: u32 = 1;
const UNREACHABLE: u32 = u32::MAX;

/// Subgraphs of one graph at one hop radius, keyed by candidate pair.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct SubgraphCache {
    pub dataset_hash: String,
    pub k: usize,
    entries: BTreeMap<(NodeId, NodeId), EnclosingSubgraph>,
}

impl SubgraphCache {
    pub fn new(g: &Graph, k: usize) -> Self {
        SubgraphCache {
            dataset_hash: g.content_hash(),
            k,
            entries: BTreeMap::new(),
        }
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn get(&self, u: NodeId, v: NodeId) -> Option<&EnclosingSubgraph> {
        self.entries.get(&(u, v))
    }

    /// Returns the cached subgraph or extracts and stores it. `g` must be the
    /// graph the cache was created for.
    pub fn get_or_extract(
        &mut self,
        g: &Graph,
        u: NodeId,
        v: NodeId,
    ) -> Result<&EnclosingSubgraph> {
        if !self.entries.contains_key(&(u, v)) {
            let sub = extract_enclosing_subgraph(g, u, v, self.k)?;
            self.entries.insert((u, v), sub);
        }
        Ok(&self.entries[&(u, v)])
    }

    pub fn write(&self, mut w: impl Write) -> std::io::Result<()> {
        w.write_all(MAGIC)?;
        w.write_u32::<LittleEndian>(VERSION)?;
        w.write_u32::<LittleEndian>(self.dataset_hash.len() as u32)?;
        w.write_all(self.dataset_hash.as_bytes())?;
        w.write_u32::<LittleEndian>(self.k as u32)?;
        w.write_u64::<LittleEndian>(self.entries.len() as u64)?;
        for (&(u, v), sub) in &self.entries {
            w.write_u64::<LittleEndian>(u as u64)?;
            w.write_u64::<LittleEndian>(v as u64)?;
            w.write_u32::<LittleEndian>(sub.num_nodes() as u32)?;
            for &x in &sub.nodes {
                w.write_u64::<LittleEndian>(x as u64)?;
            }
            for d in sub.dist_u.iter().chain(&sub.dist_v) {
                w.write_u32::<LittleEndian>(d.map_or(UNREACHABLE, |d| d as u32))?;
            }
            for row in &sub.adj {
                w.write_u32::<LittleEndian>(row.len() as u32)?;
                for &x in row {
                    w.write_u32::<LittleEndian>(x as u32)?;
                }
            }
        }
        Ok(())
    }

    pub fn read(mut r: impl Read) -> Result<Self> {
        let corrupt = |m: String| Error::Data(format!("subgraph cache: {m}"));
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
        let hash_len = r.read_u32::<LittleEndian>().map_err(io)? as usize;
        let mut hash = vec![0u8; hash_len];
        r.read_exact(&mut hash).map_err(io)?;
        let dataset_hash = String::from_utf8(hash).map_err(|_| corrupt("hash not utf-8".into()))?;
        let k = r.read_u32::<LittleEndian>().map_err(io)? as usize;
        let count = r.read_u64::<LittleEndian>().map_err(io)?;
        let mut entries = BTreeMap::new();
        for _ in 0..count {
            let u = r.read_u64::<LittleEndian>().map_err(io)? as usize;
            let v = r.read_u64::<LittleEndian>().map_err(io)? as usize;
            let n = r.read_u32::<LittleEndian>().map_err(io)? as usize;
            let mut nodes = Vec::with_capacity(n);
            for _ in 0..n {
                nodes.push(r.read_u64::<LittleEndian>().map_err(io)? as usize);
            }
            let mut dist = Vec::with_capacity(2 * n);
            for _ in 0..2 * n {
                let d = r.read_u32::<LittleEndian>().map_err(io)?;
                dist.push((d != UNREACHABLE).then_some(d as usize));
            }
            let dist_v = dist.split_off(n);
            let mut adj = Vec::with_capacity(n);
            for _ in 0..n {
                let deg = r.read_u32::<LittleEndian>().map_err(io)? as usize;
                let mut row = Vec::with_capacity(deg);
                for _ in 0..deg {
                    let x = r.read_u32::<LittleEndian>().map_err(io)? as usize;
                    if x >= n {
                        return Err(corrupt(format!("local index {x} out of range")));
                    }
                    row.push(x);
                }
                adj.push(row);
            }
            entries.insert(
                (u, v),
                EnclosingSubgraph {
                    nodes,
                    adj,
                    dist_u: dist,
                    dist_v,
                },
            );
        }
        Ok(SubgraphCache {
            dataset_hash,
            k,
            entries,
        })
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        let file = std::fs::File::create(path).map_err(|e| Error::io(path, e))?;
        self.write(std::io::BufWriter::new(file))
            .map_err(|e| Error::io(path, e))
    }

    /// Loads a cache for `g` at radius `k`. A missing file or one built for
    /// another graph or radius yields an empty cache.
    pub fn load_or_new(path: &Path, g: &Graph, k: usize) -> Result<Self> {
        let fresh = Self::new(g, k);
        let file = match std::fs::File::open(path) {
            Ok(f) => f,
            Err(e) if e.kind() == std::io::ErrorKind::NotFound => return Ok(fresh),
            Err(e) => return Err(Error::io(path, e)),
        };
        let cached = Self::read(std::io::BufReader::new(file))?;
        if cached.dataset_hash != fresh.dataset_hash || cached.k != k {
            log::info!("ignoring stale subgraph cache {}", path.display());
            return Ok(fresh);
        }
        Ok(cached)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fixtures;

    #[test]
    fn round_trip() {
        let g = fixtures::path(6);
        let mut c = SubgraphCache::new(&g, 2);
        c.get_or_extract(&g, 0, 5).unwrap();
        c.get_or_extract(&g, 2, 3).unwrap();
        let mut buf = Vec::new();
        c.write(&mut buf).unwrap();
        let back = SubgraphCache::read(buf.as_slice()).unwrap();
        assert_eq!(back, c);
        assert_eq!(
            back.get(0, 5),
            Some(&extract_enclosing_subgraph(&g, 0, 5, 2).unwrap())
        );
    }

    #[test]
    fn stale_cache_is_ignored() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("sub.bin");
        let g = fixtures::cycle(5);
        let mut c = SubgraphCache::new(&g, 1);
        c.get_or_extract(&g, 0, 2).unwrap();
        c.save(&path).unwrap();
        assert_eq!(SubgraphCache::load_or_new(&path, &g, 1).unwrap().len(), 1);
        assert!(SubgraphCache::load_or_new(&path, &g, 2).unwrap().is_empty());
        let other = fixtures::cycle(6);
        assert!(SubgraphCache::load_or_new(&path, &other, 1)
            .unwrap()
            .is_empty());
    }

    #[test]
    fn truncated_file_is_error() {
        let g = fixtures::triangle();
        let mut c = SubgraphCache::new(&g, 1);
        c.get_or_extract(&g, 0, 1).unwrap();
        let mut buf = Vec::new();
        c.write(&mut buf).unwrap();
        buf.truncate(buf.len() - 3);
        assert!(SubgraphCache::read(buf.as_slice()).is_err());
    }
}
