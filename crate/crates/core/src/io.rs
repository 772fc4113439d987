//! Edge-list and node-attribute file readers.

use std::collections::{BTreeSet, HashMap};
use std::fs;
use std::io::Write;
use std::path::Path;

use crate::error::{Error, Result};
use crate::graph::{Graph, NodeId};

/// A graph read from disk together with the id compaction it went through.
#[derive(Clone, Debug)]
pub struct LoadedGraph {
    pub graph: Graph,
    /// `original_ids[u]` is the id used in the file for compact node `u`.
    pub original_ids: Vec<u64>,
    pub self_loops_dropped: usize,
}

impl LoadedGraph {
    pub fn compact_id(&self, original: u64) -> Option<NodeId> {
        self.original_ids.binary_search(&original).ok()
    }

    /// Wraps an in-memory graph whose ids are already compact.
    pub fn identity(graph: Graph) -> Self {
        let original_ids = (0..graph.num_nodes() as u64).collect();
        LoadedGraph {
            graph,
            original_ids,
            self_loops_dropped: 0,
        }
    }
}

/// Parses `u v` lines. `#` comments and blank lines are skipped; node ids are
/// compacted in ascending order of their original value.
pub fn parse_edge_list(text: &str, path: &Path) -> Result<LoadedGraph> {
    let mut raw = Vec::new();
    for (lineno, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let mut fields = line.split_whitespace();
        let parse_err = |message: String| Error::Parse {
            path: path.to_path_buf(),
            line: lineno + 1,
            message,
        };
        let mut next_id = || -> Result<u64> {
            let tok = fields
                .next()
                .ok_or_else(|| parse_err(format!("expected two node ids, got {line:?}")))?;
            tok.parse::<u64>()
                .map_err(|_| parse_err(format!("invalid node id {tok:?}")))
        };
        let u = next_id()?;
        let v = next_id()?;
        if fields.next().is_some() {
            return Err(parse_err(format!("trailing fields in {line:?}")));
        }
        raw.push((u, v));
    }
    if raw.is_empty() {
        return Err(Error::Data(format!("{}: empty edge set", path.display())));
    }
    let original_ids: Vec<u64> = raw
        .iter()
        .flat_map(|&(u, v)| [u, v])
        .collect::<BTreeSet<_>>()
        .into_iter()
        .collect();
    let index: HashMap<u64, NodeId> = original_ids
        .iter()
        .enumerate()
        .map(|(i, &id)| (id, i))
        .collect();
    let edges: Vec<_> = raw.iter().map(|(u, v)| (index[u], index[v])).collect();
    let (graph, self_loops_dropped) = Graph::from_edges(original_ids.len(), &edges)?;
    if graph.num_edges() == 0 {
        return Err(Error::Data(format!(
            "{}: no edges left after dropping self-loops",
            path.display()
        )));
    }
    if self_loops_dropped > 0 {
        log::warn!(
            "{}: dropped {self_loops_dropped} self-loop line(s)",
            path.display()
        );
    }
    Ok(LoadedGraph {
        graph,
        original_ids,
        self_loops_dropped,
    })
}

pub fn load_edge_list(path: impl AsRef<Path>) -> Result<LoadedGraph> {
    let path = path.as_ref();
    let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    parse_edge_list(&text, path)
}

pub fn write_edge_list(graph: &Graph, path: impl AsRef<Path>, header: &str) -> Result<()> {
    let path = path.as_ref();
    let mut out = String::new();
    for line in header.lines() {
        out.push_str("# ");
        out.push_str(line);
        out.push('\n');
    }
    for (u, v) in graph.edges() {
        out.push_str(&format!("{u} {v}\n"));
    }
    let mut file = fs::File::create(path).map_err(|e| Error::io(path, e))?;
    file.write_all(out.as_bytes())
        .map_err(|e| Error::io(path, e))
}

/// Raw per-node attribute vectors keyed by compact node id.
#[derive(Clone, Debug)]
pub struct NodeAttributes {
    pub dim: usize,
    rows: HashMap<NodeId, Vec<f64>>,
}

impl NodeAttributes {
    pub fn get(&self, u: NodeId) -> Option<&[f64]> {
        self.rows.get(&u).map(Vec::as_slice)
    }

    pub fn len(&self) -> usize {
        self.rows.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rows.is_empty()
    }
}

/// Reads `id f1 … fd` lines. Ids not present in the graph are ignored; all
/// rows must share the same width.
pub fn load_attributes(path: impl AsRef<Path>, loaded: &LoadedGraph) -> Result<NodeAttributes> {
    let path = path.as_ref();
    let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    let mut rows = HashMap::new();
    let mut dim = None;
    for (lineno, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let parse_err = |message: String| Error::Parse {
            path: path.to_path_buf(),
            line: lineno + 1,
            message,
        };
        let mut fields = line.split_whitespace();
        let id_tok = fields.next().unwrap();
        let id: u64 = id_tok
            .parse()
            .map_err(|_| parse_err(format!("invalid node id {id_tok:?}")))?;
        let values = fields
            .map(|t| {
                t.parse::<f64>()
                    .ok()
                    .filter(|x| x.is_finite())
                    .ok_or_else(|| parse_err(format!("invalid attribute value {t:?}")))
            })
            .collect::<Result<Vec<_>>>()?;
        match dim {
            None => dim = Some(values.len()),
            Some(d) if d != values.len() => {
                return Err(parse_err(format!(
                    "expected {d} attributes, got {}",
                    values.len()
                )))
            }
            _ => {}
        }
        if let Some(u) = loaded.compact_id(id) {
            rows.insert(u, values);
        }
    }
    Ok(NodeAttributes {
        dim: dim.unwrap_or(0),
        rows,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn parse(text: &str) -> Result<LoadedGraph> {
        parse_edge_list(text, Path::new("mem.txt"))
    }

    #[test]
    fn triangle_file() {
        let g = parse("0 1\n1 2\n2 0\n").unwrap();
        assert_eq!(g.graph.num_nodes(), 3);
        assert_eq!(g.graph.num_edges(), 3);
    }

    #[test]
    fn duplicate_reversed_lines() {
        let g = parse("# comment\n0 1\n1 0\n").unwrap();
        assert_eq!(g.graph.num_edges(), 1);
    }

    #[test]
    fn ids_are_compacted() {
        let g = parse("10 30\n30 20\n").unwrap();
        assert_eq!(g.original_ids, vec![10, 20, 30]);
        assert!(g.graph.has_edge(0, 2));
        assert!(g.graph.has_edge(1, 2));
        assert_eq!(g.compact_id(20), Some(1));
    }

    #[test]
    fn self_loops_reported() {
        let g = parse("0 0\n0 1\n").unwrap();
        assert_eq!(g.self_loops_dropped, 1);
        assert_eq!(g.graph.num_edges(), 1);
    }

    #[test]
    fn malformed_line_has_line_number() {
        match parse("0 1\n# ok\n2 x\n") {
            Err(Error::Parse { line, .. }) => assert_eq!(line, 3),
            other => panic!("expected parse error, got {other:?}"),
        }
        assert!(matches!(parse("0\n"), Err(Error::Parse { line: 1, .. })));
        assert!(matches!(parse("-1 2\n"), Err(Error::Parse { .. })));
    }

    #[test]
    fn empty_edge_set() {
        assert!(matches!(parse("# nothing\n\n"), Err(Error::Data(_))));
        assert!(matches!(parse("3 3\n"), Err(Error::Data(_))));
    }
}
