//! Seeded generative citation networks.
//!
//! Month by month, `docs_per_month` new documents each draw a bibliography
//! from the documents of earlier months. A reference is either copied (with
//! probability `copy_prob`) from the bibliography of one of the document's
//! already-chosen references, or drawn with weight
//!
//! ```text
//! fitness · (in_degree + 1)^α · (age + 1)^(−γ) · (1 + halo · max in-degree of citers)
//! ```
//!
//! where every quantity is taken as of the start of the month. Documents in
//! the same month therefore draw independently of each other; each one gets
//! its own ChaCha stream (key = seed, stream = document number), so output is
//! identical for any worker count.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, LogNormal};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::corpus::{AnomalyPolicy, CitationGraph, Document};
use crate::error::{Error, Result};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct GeneratorConfig {
    pub months: u32,
    pub docs_per_month: u32,
    /// Bibliography length, or its lower bound when `refs_per_doc_max` is set.
    pub refs_per_doc: u32,
    /// When set, each bibliography length is uniform in
    /// `[refs_per_doc, refs_per_doc_max]`.
    pub refs_per_doc_max: Option<u32>,
    pub recency_exponent: f64,
    pub attachment_exponent: f64,
    pub copy_prob: f64,
    /// Lognormal σ of per-document fitness; 0 means every fitness is 1.
    pub fitness_spread: f64,
    pub seed: u64,
}

impl Default for GeneratorConfig {
    fn default() -> Self {
        GeneratorConfig {
            months: 240,
            docs_per_month: 100,
            refs_per_doc: 10,
            refs_per_doc_max: None,
            recency_exponent: 1.5,
            attachment_exponent: 0.0,
            copy_prob: 0.0,
            fitness_spread: 0.0,
            seed: 0,
        }
    }
}

impl GeneratorConfig {
    pub fn validate(&self) -> Result<()> {
        let bad = |m: &str| Err(Error::InvalidConfig(m.to_string()));
        if self.months < 2 {
            return bad("months must be at least 2");
        }
        if self.docs_per_month == 0 {
            return bad("docs_per_month must be positive");
        }
        if let Some(max) = self.refs_per_doc_max {
            if max < self.refs_per_doc {
                return bad("refs_per_doc_max must be at least refs_per_doc");
            }
        }
        if !(self.recency_exponent >= 0.0 && self.recency_exponent.is_finite()) {
            return bad("recency_exponent must be a finite value >= 0");
        }
        if !(self.attachment_exponent >= 0.0 && self.attachment_exponent.is_finite()) {
            return bad("attachment_exponent must be a finite value >= 0");
        }
        if !(0.0..=1.0).contains(&self.copy_prob) {
            return bad("copy_prob must lie in [0, 1]");
        }
        if !(self.fitness_spread >= 0.0 && self.fitness_spread.is_finite()) {
            return bad("fitness_spread must be a finite value >= 0");
        }
        Ok(())
    }

    pub fn total_documents(&self) -> usize {
        self.months as usize * self.docs_per_month as usize
    }
}

pub fn generate(config: &GeneratorConfig) -> Result<CitationGraph> {
    generate_with_halo(config, 0.0)
}

/// Like [`generate`], with each attachment weight further multiplied by
/// `1 + halo_weight · (largest in-degree among the document's citers)`.
pub fn generate_with_halo(config: &GeneratorConfig, halo_weight: f64) -> Result<CitationGraph> {
    config.validate()?;
    if !(halo_weight >= 0.0 && halo_weight.is_finite()) {
        return Err(Error::InvalidConfig("halo_weight must be a finite value >= 0".into()));
    }
    let bibliographies = draw_bibliographies(config, halo_weight);

    let total = config.total_documents();
    let width = total.saturating_sub(1).to_string().len();
    let id = |i: usize| format!("s{i:0width$}");
    let per_month = config.docs_per_month as usize;
    let mut builder = CitationGraph::builder().horizon(config.months as i32);
    for (i, refs) in bibliographies.iter().enumerate() {
        builder.add_document(Document::new(id(i), (i / per_month) as i32))?;
        for &r in refs {
            builder.add_citation(id(i), id(r as usize));
        }
    }
    // Every draw is from an earlier month, so Fail never triggers on valid output.
    let (graph, _) = builder.finalize(AnomalyPolicy::Fail)?;
    Ok(graph)
}

struct Pool<'a> {
    cumulative: &'a [f64],
    weights: &'a [f64],
    bibliographies: &'a [Vec<u32>],
}

impl Pool<'_> {
    fn len(&self) -> usize {
        self.cumulative.len()
    }

    fn total(&self) -> f64 {
        *self.cumulative.last().unwrap()
    }

    fn draw(&self, rng: &mut ChaCha8Rng, taken: &[u32]) -> u32 {
        for _ in 0..64 {
            let u = rng.random::<f64>() * self.total();
            let j = self.cumulative.partition_point(|&c| c <= u).min(self.len() - 1) as u32;
            if !taken.contains(&j) {
                return j;
            }
        }
        // Mass is concentrated on already-chosen documents: sample exactly
        // from what remains.
        let remaining: f64 = self.total() - taken.iter().map(|&t| self.weights[t as usize]).sum::<f64>();
        let mut u = rng.random::<f64>() * remaining.max(0.0);
        let mut fallback = None;
        for (j, &w) in self.weights.iter().enumerate() {
            let j = j as u32;
            if taken.contains(&j) {
                continue;
            }
            fallback = Some(j);
            if u < w {
                return j;
            }
            u -= w;
        }
        fallback.expect("pool larger than bibliography")
    }
}

fn draw_bibliographies(config: &GeneratorConfig, halo_weight: f64) -> Vec<Vec<u32>> {
    let per_month = config.docs_per_month as usize;
    let total = config.total_documents();
    let alpha = config.attachment_exponent;
    let gamma = config.recency_exponent;
    let lognormal = (config.fitness_spread > 0.0).then(|| LogNormal::new(0.0, config.fitness_spread).unwrap());

    let mut bibliographies: Vec<Vec<u32>> = Vec::with_capacity(total);
    let mut fitness: Vec<f64> = Vec::with_capacity(total);
    let mut in_degree: Vec<u32> = Vec::with_capacity(total);
    let mut citers: Vec<Vec<u32>> = if halo_weight > 0.0 { Vec::with_capacity(total) } else { Vec::new() };
    let mut weights: Vec<f64> = Vec::with_capacity(total);
    let mut cumulative: Vec<f64> = Vec::with_capacity(total);
    let mut warned = false;

    for month in 0..config.months as usize {
        let existing = month * per_month;
        weights.clear();
        cumulative.clear();
        let mut acc = 0.0;
        for j in 0..existing {
            let age = (month - j / per_month) as f64;
            let mut w = fitness[j];
            if alpha != 0.0 {
                w *= (in_degree[j] as f64 + 1.0).powf(alpha);
            }
            if gamma != 0.0 {
                w *= (age + 1.0).powf(-gamma);
            }
            if halo_weight > 0.0 {
                let top = citers[j].iter().map(|&c| in_degree[c as usize]).max().unwrap_or(0);
                w *= 1.0 + halo_weight * top as f64;
            }
            weights.push(w);
            acc += w;
            cumulative.push(acc);
        }
        let max_refs = config.refs_per_doc_max.unwrap_or(config.refs_per_doc) as usize;
        if existing > 0 && max_refs > existing && !warned {
            log::warn!("month {month}: bibliography length clamped to the {existing} available documents");
            warned = true;
        }

        let pool = Pool {
            cumulative: &cumulative,
            weights: &weights,
            bibliographies: &bibliographies,
        };
        let drawn: Vec<(f64, Vec<u32>)> = (existing..existing + per_month)
            .into_par_iter()
            .map(|doc| {
                let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
                rng.set_stream(doc as u64);
                let fit = lognormal.map_or(1.0, |d| d.sample(&mut rng));
                let len = match config.refs_per_doc_max {
                    Some(max) => rng.random_range(config.refs_per_doc..=max),
                    None => config.refs_per_doc,
                } as usize;
                let refs = if existing == 0 {
                    Vec::new()
                } else {
                    draw_references(&pool, len.min(existing), config.copy_prob, &mut rng)
                };
                (fit, refs)
            })
            .collect();

        for (fit, refs) in drawn {
            let doc = bibliographies.len() as u32;
            for &r in &refs {
                in_degree[r as usize] += 1;
                if halo_weight > 0.0 {
                    citers[r as usize].push(doc);
                }
            }
            fitness.push(fit);
            in_degree.push(0);
            if halo_weight > 0.0 {
                citers.push(Vec::new());
            }
            bibliographies.push(refs);
        }
    }
    bibliographies
}

/// Copy draws that land on an empty bibliography or an already-chosen
/// reference are retried this many times before falling back to the kernel.
const COPY_ATTEMPTS: usize = 16;

fn draw_references(pool: &Pool<'_>, len: usize, copy_prob: f64, rng: &mut ChaCha8Rng) -> Vec<u32> {
    let mut refs: Vec<u32> = Vec::with_capacity(len);
    while refs.len() < len {
        let copied = if !refs.is_empty() && copy_prob > 0.0 && rng.random::<f64>() < copy_prob {
            (0..COPY_ATTEMPTS).find_map(|_| {
                let via = refs[rng.random_range(0..refs.len())];
                let candidates = &pool.bibliographies[via as usize];
                if candidates.is_empty() {
                    return None;
                }
                Some(candidates[rng.random_range(0..candidates.len())]).filter(|c| !refs.contains(c))
            })
        } else {
            None
        };
        let next = match copied {
            Some(c) => c,
            None => pool.draw(rng, &refs),
        };
        refs.push(next);
    }
    refs
}
