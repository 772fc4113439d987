//! Per-query ranking metrics: average precision, reciprocal rank, their
//! means over queries, and per-query gain between two runs.

use std::cmp::Ordering;
use std::collections::BTreeSet;
use std::fmt::Write as _;

use crate::error::{Error, Result};
use crate::graph::NodeId;

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Candidate {
    pub node: NodeId,
    pub score: f64,
    pub positive: bool,
}

/// Candidates of one query, sorted by score descending with ties broken by
/// candidate id ascending.
#[derive(Clone, Debug, PartialEq)]
pub struct RankedList {
    pub query: NodeId,
    entries: Vec<Candidate>,
}

impl RankedList {
    pub fn new(query: NodeId, mut entries: Vec<Candidate>) -> Result<Self> {
        if let Some(bad) = entries.iter().find(|c| c.score.is_nan()) {
            return Err(Error::Numeric(format!(
                "NaN score for candidate {} of query {query}",
                bad.node
            )));
        }
        entries.sort_by(|a, b| {
            b.score
                .partial_cmp(&a.score)
                .unwrap_or(Ordering::Equal)
                .then(a.node.cmp(&b.node))
        });
        Ok(RankedList { query, entries })
    }

    pub fn entries(&self) -> &[Candidate] {
        &self.entries
    }

    pub fn num_positives(&self) -> usize {
        self.entries.iter().filter(|c| c.positive).count()
    }
}

/// Mean over positive ranks of precision at that rank. `None` when the list
/// holds no positives.
pub fn average_precision(list: &RankedList) -> Option<f64> {
    let mut hits = 0usize;
    let mut sum = 0.0;
    for (i, c) in list.entries.iter().enumerate() {
        if c.positive {
            hits += 1;
            sum += hits as f64 / (i + 1) as f64;
        }
    }
    (hits > 0).then(|| sum / hits as f64)
}

/// Reciprocal rank of the first positive; `None` without positives.
pub fn reciprocal_rank(list: &RankedList) -> Option<f64> {
    list.entries
        .iter()
        .position(|c| c.positive)
        .map(|i| 1.0 / (i + 1) as f64)
}

#[derive(Clone, Debug, PartialEq)]
pub struct QueryScore {
    pub query: NodeId,
    pub ap: f64,
    pub rr: f64,
}

#[derive(Clone, Debug, PartialEq)]
pub struct EvalReport {
    /// Sorted by query id.
    pub per_query: Vec<QueryScore>,
    pub map: f64,
    pub mrr: f64,
    pub skipped: usize,
}

/// Means of AP and RR over lists with at least one positive.
pub fn aggregate(lists: &[RankedList]) -> Result<EvalReport> {
    let mut per_query = Vec::with_capacity(lists.len());
    let mut skipped = 0;
    for list in lists {
        match (average_precision(list), reciprocal_rank(list)) {
            (Some(ap), Some(rr)) => per_query.push(QueryScore {
                query: list.query,
                ap,
                rr,
            }),
            _ => skipped += 1,
        }
    }
    if per_query.is_empty() {
        return Err(Error::Data(format!(
            "no query has a test positive ({skipped} skipped)"
        )));
    }
    per_query.sort_by_key(|s| s.query);
    let n = per_query.len() as f64;
    let map = per_query.iter().map(|s| s.ap).sum::<f64>() / n;
    let mrr = per_query.iter().map(|s| s.rr).sum::<f64>() / n;
    Ok(EvalReport {
        per_query,
        map,
        mrr,
        skipped,
    })
}

#[derive(Clone, Debug, PartialEq)]
pub struct GainRow {
    pub query: NodeId,
    pub ap_ours: f64,
    pub ap_baseline: f64,
    pub gain: f64,
}

#[derive(Clone, Debug, PartialEq)]
pub struct GainReport {
    /// Sorted by gain descending, ties by query id.
    pub rows: Vec<GainRow>,
    /// Fraction of queries with strictly positive gain.
    pub positive_fraction: f64,
}

pub fn gain_report(ours: &EvalReport, baseline: &EvalReport) -> Result<GainReport> {
    let a: BTreeSet<NodeId> = ours.per_query.iter().map(|s| s.query).collect();
    let b: BTreeSet<NodeId> = baseline.per_query.iter().map(|s| s.query).collect();
    if a != b {
        let only_ours: Vec<_> = a.difference(&b).collect();
        let only_base: Vec<_> = b.difference(&a).collect();
        return Err(Error::Contract(format!(
            "query sets differ: only in ours {only_ours:?}, only in baseline {only_base:?}"
        )));
    }
    let mut rows: Vec<GainRow> = ours
        .per_query
        .iter()
        .zip(&baseline.per_query)
        .map(|(o, b)| GainRow {
            query: o.query,
            ap_ours: o.ap,
            ap_baseline: b.ap,
            gain: o.ap - b.ap,
        })
        .collect();
    rows.sort_by(|x, y| {
        y.gain
            .partial_cmp(&x.gain)
            .unwrap_or(Ordering::Equal)
            .then(x.query.cmp(&y.query))
    });
    let positive = rows.iter().filter(|r| r.gain > 0.0).count();
    Ok(GainReport {
        positive_fraction: positive as f64 / rows.len().max(1) as f64,
        rows,
    })
}

impl EvalReport {
    /// Per-query rows followed by a summary row whose query column is `ALL`.
    pub fn to_csv(&self, labels: impl Fn(NodeId) -> String) -> String {
        let mut out = String::from("query,ap,rr\n");
        for s in &self.per_query {
            let _ = writeln!(out, "{},{},{}", labels(s.query), s.ap, s.rr);
        }
        let _ = writeln!(out, "ALL,{},{}", self.map, self.mrr);
        let _ = writeln!(out, "# skipped_queries={}", self.skipped);
        out
    }

    /// Inverse of [`EvalReport::to_csv`] for compact-id labels.
    pub fn from_csv(text: &str) -> Result<EvalReport> {
        let mut per_query = Vec::new();
        let mut summary = None;
        let mut skipped = 0;
        for (i, line) in text.lines().enumerate() {
            if i == 0 || line.trim().is_empty() {
                continue;
            }
            if let Some(rest) = line.strip_prefix("# skipped_queries=") {
                skipped = rest.trim().parse().unwrap_or(0);
                continue;
            }
            let bad = || Error::Data(format!("report line {}: {line:?}", i + 1));
            let fields: Vec<&str> = line.split(',').collect();
            if fields.len() != 3 {
                return Err(bad());
            }
            let ap: f64 = fields[1].parse().map_err(|_| bad())?;
            let rr: f64 = fields[2].parse().map_err(|_| bad())?;
            if fields[0] == "ALL" {
                summary = Some((ap, rr));
            } else {
                let query = fields[0].parse().map_err(|_| bad())?;
                per_query.push(QueryScore { query, ap, rr });
            }
        }
        let (map, mrr) = summary.ok_or_else(|| Error::Data("report has no ALL row".into()))?;
        per_query.sort_by_key(|s| s.query);
        Ok(EvalReport {
            per_query,
            map,
            mrr,
            skipped,
        })
    }
}

impl GainReport {
    pub fn to_csv(&self) -> String {
        let mut out = String::from("rank,query,ap_ours,ap_baseline,gain\n");
        for (i, r) in self.rows.iter().enumerate() {
            let _ = writeln!(
                out,
                "{},{},{},{},{}",
                i, r.query, r.ap_ours, r.ap_baseline, r.gain
            );
        }
        let _ = writeln!(out, "# positive_fraction={}", self.positive_fraction);
        out
    }

    /// `x y` pairs: sorted query index against gain.
    pub fn plot_data(&self) -> String {
        let mut out = String::from("# x=query index (sorted by decreasing gain) y=gain\n");
        for (i, r) in self.rows.iter().enumerate() {
            let _ = writeln!(out, "{} {}", i, r.gain);
        }
        out
    }
}
