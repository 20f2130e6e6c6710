#![allow(dead_code)]

pub mod oracle;

use citelens_core::{AnomalyPolicy, CitationGraph, Document};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// A small valid corpus as plain lists: `(id, month)` and `(citing, cited)`.
#[derive(Clone, Debug)]
pub struct RawCorpus {
    pub docs: Vec<(String, i32)>,
    pub edges: Vec<(String, String)>,
    pub horizon: i32,
}

impl RawCorpus {
    pub fn graph(&self) -> CitationGraph {
        let mut b = CitationGraph::builder().horizon(self.horizon);
        for (id, m) in &self.docs {
            b.add_document(Document::new(id.clone(), *m)).unwrap();
        }
        for (c, d) in &self.edges {
            b.add_citation(c.clone(), d.clone());
        }
        b.finalize(AnomalyPolicy::Fail).unwrap().0
    }
}

/// Random corpus with up to `max_docs` documents and `max_edges` distinct,
/// backward-in-time, non-self edges.
pub fn random_corpus(seed: u64, max_docs: usize, max_edges: usize) -> RawCorpus {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let n = rng.random_range(1..=max_docs);
    let span = rng.random_range(1..=120);
    let docs: Vec<(String, i32)> = (0..n).map(|i| (format!("d{i}"), rng.random_range(-10..span))).collect();
    let target = rng.random_range(0..=max_edges);
    let mut edges = Vec::new();
    let mut seen = std::collections::HashSet::new();
    for _ in 0..target * 3 {
        if edges.len() == target || n < 2 {
            break;
        }
        let a = rng.random_range(0..n);
        let b = rng.random_range(0..n);
        if a == b || docs[a].1 < docs[b].1 || !seen.insert((a, b)) {
            continue;
        }
        edges.push((docs[a].0.clone(), docs[b].0.clone()));
    }
    let max_month = docs.iter().map(|d| d.1).max().unwrap();
    let horizon = max_month + 1 + rng.random_range(0..60);
    RawCorpus { docs, edges, horizon }
}
