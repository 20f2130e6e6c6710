//! Timestamped citation graph.
//!
//! Edges run from the citing document to the cited document and carry the
//! citing document's publication month. Documents are stored sorted by
//! `(pub_month, id)`, so a document's position doubles as its canonical rank
//! and a citer list sorted by position is also sorted by month with ties
//! broken by id. Bibliographies are ordered by cited id.

mod io;

pub use io::{ingest, ingest_files, write_canonical};

use std::collections::{HashMap, HashSet};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Document {
    pub id: String,
    /// Months since 1800-01.
    pub pub_month: i32,
    pub kind: Option<String>,
}

impl Document {
    pub fn new(id: impl Into<String>, pub_month: i32) -> Self {
        Document {
            id: id.into(),
            pub_month,
            kind: None,
        }
    }

    pub fn with_kind(mut self, kind: impl Into<String>) -> Self {
        self.kind = Some(kind.into());
        self
    }
}

/// Position of a document in the graph's canonical `(pub_month, id)` order.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct DocIdx(pub u32);

impl DocIdx {
    #[inline]
    pub fn get(self) -> usize {
        self.0 as usize
    }
}

/// What to do with a citation whose cited document was published after the
/// citing one.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum AnomalyPolicy {
    #[default]
    Drop,
    Keep,
    Fail,
}

impl std::str::FromStr for AnomalyPolicy {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, Self::Err> {
        match s {
            "drop" => Ok(AnomalyPolicy::Drop),
            "keep" => Ok(AnomalyPolicy::Keep),
            "fail" => Ok(AnomalyPolicy::Fail),
            other => Err(format!("unknown anomaly policy `{other}` (expected drop, keep or fail)")),
        }
    }
}

#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct EdgeRef {
    pub citing: String,
    pub cited: String,
}

/// Everything ingest did not turn into a plain backward edge.
#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct IngestReport {
    pub documents: usize,
    pub edges: usize,
    pub dropped_anomalies: Vec<EdgeRef>,
    pub kept_anomalies: usize,
    pub unknown_id_edges: Vec<EdgeRef>,
    pub self_citations: usize,
    pub duplicate_edges: usize,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CitationGraph {
    docs: Vec<Document>,
    index: HashMap<String, DocIdx>,
    out_edges: Vec<Vec<DocIdx>>,
    in_edges: Vec<Vec<DocIdx>>,
    edge_count: usize,
    anomaly_count: usize,
    horizon: i32,
}

impl CitationGraph {
    pub fn builder() -> GraphBuilder {
        GraphBuilder::default()
    }

    pub fn len(&self) -> usize {
        self.docs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.docs.is_empty()
    }

    pub fn edge_count(&self) -> usize {
        self.edge_count
    }

    /// Forward-in-time citations retained under [`AnomalyPolicy::Keep`].
    pub fn anomaly_count(&self) -> usize {
        self.anomaly_count
    }

    /// Exclusive end of the observation period, in months. Defaults to one
    /// month past the latest publication.
    pub fn horizon(&self) -> i32 {
        self.horizon
    }

    /// Replaces the observation horizon. It must lie after every publication.
    pub fn with_horizon(mut self, horizon: i32) -> Result<Self> {
        if let Some(max) = self.max_month() {
            if horizon <= max {
                return Err(Error::InvalidConfig(format!(
                    "horizon {horizon} must exceed the latest publication month {max}"
                )));
            }
        }
        self.horizon = horizon;
        Ok(self)
    }

    pub fn min_month(&self) -> Option<i32> {
        self.docs.first().map(|d| d.pub_month)
    }

    pub fn max_month(&self) -> Option<i32> {
        self.docs.last().map(|d| d.pub_month)
    }

    /// Documents in canonical `(pub_month, id)` order.
    pub fn documents(&self) -> &[Document] {
        &self.docs
    }

    pub fn doc(&self, idx: DocIdx) -> &Document {
        &self.docs[idx.get()]
    }

    #[inline]
    pub fn month(&self, idx: DocIdx) -> i32 {
        self.docs[idx.get()].pub_month
    }

    pub fn indices(&self) -> impl ExactSizeIterator<Item = DocIdx> + '_ {
        (0..self.docs.len() as u32).map(DocIdx)
    }

    pub fn idx_of(&self, id: &str) -> Result<DocIdx> {
        self.index
            .get(id)
            .copied()
            .ok_or_else(|| Error::UnknownDocument(id.to_string()))
    }

    /// Documents cited by `idx`, ordered by id.
    #[inline]
    pub fn references(&self, idx: DocIdx) -> &[DocIdx] {
        &self.out_edges[idx.get()]
    }

    /// Documents citing `idx`, ascending by month then id.
    #[inline]
    pub fn citers(&self, idx: DocIdx) -> &[DocIdx] {
        &self.in_edges[idx.get()]
    }

    /// Citers of `idx` published in `[from, to)`. Callers guarantee `from <= to`.
    pub fn citers_in_window(&self, idx: DocIdx, from: i32, to: i32) -> &[DocIdx] {
        let citers = self.citers(idx);
        let lo = citers.partition_point(|&c| self.month(c) < from);
        let hi = citers.partition_point(|&c| self.month(c) < to);
        &citers[lo..hi.max(lo)]
    }

    /// Ids of the documents citing `doc` with publication month in
    /// `[from_month, to_month)`, ascending by month then id.
    pub fn citations_in_window(&self, doc: &str, from_month: i32, to_month: i32) -> Result<Vec<&str>> {
        if from_month > to_month {
            return Err(Error::InvalidWindow {
                from: from_month,
                to: to_month,
            });
        }
        let idx = self.idx_of(doc)?;
        Ok(self
            .citers_in_window(idx, from_month, to_month)
            .iter()
            .map(|&c| self.doc(c).id.as_str())
            .collect())
    }

    /// Ids of the documents `doc` cites within this corpus.
    pub fn references_of(&self, doc: &str) -> Result<Vec<&str>> {
        let idx = self.idx_of(doc)?;
        Ok(self
            .references(idx)
            .iter()
            .map(|&c| self.doc(c).id.as_str())
            .collect())
    }

    pub fn in_degree(&self, idx: DocIdx) -> usize {
        self.in_edges[idx.get()].len()
    }

    pub fn out_degree(&self, idx: DocIdx) -> usize {
        self.out_edges[idx.get()].len()
    }
}

#[derive(Debug, Default)]
pub struct GraphBuilder {
    docs: Vec<Document>,
    seen: HashSet<String>,
    edges: Vec<EdgeRef>,
    horizon: Option<i32>,
}

impl GraphBuilder {
    pub fn add_document(&mut self, doc: Document) -> Result<()> {
        if !self.seen.insert(doc.id.clone()) {
            return Err(Error::DuplicateDocument(doc.id));
        }
        self.docs.push(doc);
        Ok(())
    }

    pub fn document(mut self, id: &str, pub_month: i32) -> Result<Self> {
        self.add_document(Document::new(id, pub_month))?;
        Ok(self)
    }

    pub fn add_citation(&mut self, citing: impl Into<String>, cited: impl Into<String>) {
        self.edges.push(EdgeRef {
            citing: citing.into(),
            cited: cited.into(),
        });
    }

    pub fn citation(mut self, citing: &str, cited: &str) -> Self {
        self.add_citation(citing, cited);
        self
    }

    pub fn horizon(mut self, horizon: i32) -> Self {
        self.horizon = Some(horizon);
        self
    }

    pub fn finalize(self, policy: AnomalyPolicy) -> Result<(CitationGraph, IngestReport)> {
        let GraphBuilder {
            mut docs,
            edges,
            horizon,
            ..
        } = self;
        docs.sort_by(|a, b| (a.pub_month, &a.id).cmp(&(b.pub_month, &b.id)));
        let index: HashMap<String, DocIdx> = docs
            .iter()
            .enumerate()
            .map(|(i, d)| (d.id.clone(), DocIdx(i as u32)))
            .collect();

        let mut report = IngestReport {
            documents: docs.len(),
            ..Default::default()
        };
        let mut out_edges = vec![Vec::new(); docs.len()];
        let mut in_edges = vec![Vec::new(); docs.len()];
        let mut pairs = HashSet::with_capacity(edges.len());
        let mut anomaly_count = 0;

        for edge in edges {
            let (citing, cited) = match (index.get(&edge.citing), index.get(&edge.cited)) {
                (Some(&a), Some(&b)) => (a, b),
                (a, _) => {
                    if policy == AnomalyPolicy::Fail {
                        let missing = if a.is_none() { &edge.citing } else { &edge.cited }.clone();
                        return Err(Error::UnknownEdgeEndpoint {
                            citing: edge.citing,
                            cited: edge.cited,
                            missing,
                        });
                    }
                    report.unknown_id_edges.push(edge);
                    continue;
                }
            };
            if citing == cited {
                report.self_citations += 1;
                continue;
            }
            if !pairs.insert((citing, cited)) {
                report.duplicate_edges += 1;
                continue;
            }
            let citing_month = docs[citing.get()].pub_month;
            let cited_month = docs[cited.get()].pub_month;
            if citing_month < cited_month {
                match policy {
                    AnomalyPolicy::Drop => {
                        report.dropped_anomalies.push(edge);
                        continue;
                    }
                    AnomalyPolicy::Keep => anomaly_count += 1,
                    AnomalyPolicy::Fail => {
                        return Err(Error::ForwardCitation {
                            citing: edge.citing,
                            cited: edge.cited,
                            citing_month,
                            cited_month,
                        })
                    }
                }
            }
            out_edges[citing.get()].push(cited);
            in_edges[cited.get()].push(citing);
        }
        for list in &mut out_edges {
            list.sort_unstable_by(|a: &DocIdx, b: &DocIdx| docs[a.get()].id.cmp(&docs[b.get()].id));
        }
        for list in &mut in_edges {
            list.sort_unstable();
        }
        let edge_count = out_edges.iter().map(Vec::len).sum();
        report.edges = edge_count;
        report.kept_anomalies = anomaly_count;

        let graph = CitationGraph {
            horizon: docs.last().map_or(0, |d| d.pub_month + 1),
            docs,
            index,
            out_edges,
            in_edges,
            edge_count,
            anomaly_count,
        };
        let graph = match horizon {
            Some(h) => graph.with_horizon(h)?,
            None => graph,
        };
        Ok((graph, report))
    }
}
