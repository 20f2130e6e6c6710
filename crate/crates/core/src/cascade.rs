//! Per-document knowledge-discovery cascades.
//!
//! For an original document published at `t1` the windows are
//!
//! ```text
//! t2 = t1 + latency     initial citations:  citers in [t1, t2)
//! t3 = t2 + exposure    exposures:          citations of initial citers in [t2, t3)
//! t4 = t2 + infection   infections:         new citers of the original in [t2, t4)
//! ```
//!
//! All windows are half-open. A document whose infection window ends past the
//! corpus horizon is censored rather than reported with truncated counts.

use std::collections::HashSet;
use std::io::Write;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::corpus::{CitationGraph, DocIdx};
use crate::error::{Error, Result};
use crate::filter::CohortFilter;
use crate::month::format_month;

/// How exposures through initial citations are counted.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ExposureCounting {
    /// One exposure per (exposing document, initial citer) edge.
    #[default]
    PerEdge,
    /// One exposure per distinct exposing document.
    DistinctDocuments,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct CascadeWindows {
    pub latency_months: u32,
    pub exposure_months: u32,
    pub infection_months: u32,
    #[serde(default)]
    pub exposure_counting: ExposureCounting,
}

impl Default for CascadeWindows {
    fn default() -> Self {
        CascadeWindows {
            latency_months: 24,
            exposure_months: 12,
            infection_months: 24,
            exposure_counting: ExposureCounting::PerEdge,
        }
    }
}

impl CascadeWindows {
    pub fn new(latency_months: u32, exposure_months: u32, infection_months: u32) -> Result<Self> {
        let w = CascadeWindows {
            latency_months,
            exposure_months,
            infection_months,
            exposure_counting: ExposureCounting::PerEdge,
        };
        w.validate()?;
        Ok(w)
    }

    pub fn with_counting(mut self, counting: ExposureCounting) -> Self {
        self.exposure_counting = counting;
        self
    }

    pub fn validate(&self) -> Result<()> {
        if self.latency_months == 0 || self.exposure_months == 0 || self.infection_months == 0 {
            return Err(Error::InvalidConfig("cascade windows must be positive".into()));
        }
        if self.infection_months < self.exposure_months {
            return Err(Error::InvalidConfig(format!(
                "infection window ({}) must contain the exposure window ({})",
                self.infection_months, self.exposure_months
            )));
        }
        Ok(())
    }

    /// Months of data needed after publication.
    pub fn span(&self) -> i32 {
        (self.latency_months + self.infection_months) as i32
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CascadeCounts {
    pub doc: String,
    pub t1: i32,
    /// R: size of the document's bibliography within the corpus.
    pub references: usize,
    /// IC: citers during the latency period.
    pub initial_citations: usize,
    /// E_C: exposures through initial citers during the exposure period.
    pub exposures: usize,
    /// D_total: other references made by the initial citers.
    pub distractions_total: usize,
    /// D_mean: `distractions_total / initial_citations`, absent when IC = 0.
    pub distractions_mean: Option<f64>,
    /// I: new citers during the infection period, initial citers excluded.
    pub infections: usize,
    /// In-degree over the whole corpus; the quality proxy for class splits.
    pub total_citations: usize,
}

/// Infections per exposure, with one added to exposures so unexposed
/// documents have a finite rate.
pub fn infection_rate(counts: &CascadeCounts) -> f64 {
    counts.infections as f64 / (counts.exposures as f64 + 1.0)
}

/// Cascade counts for the document with id `doc`.
pub fn compute_cascade(graph: &CitationGraph, doc: &str, windows: &CascadeWindows) -> Result<CascadeCounts> {
    windows.validate()?;
    let idx = graph.idx_of(doc)?;
    cascade_at(graph, idx, windows)
}

pub(crate) fn cascade_at(graph: &CitationGraph, idx: DocIdx, windows: &CascadeWindows) -> Result<CascadeCounts> {
    let t1 = graph.month(idx);
    let t2 = t1 + windows.latency_months as i32;
    let t3 = t2 + windows.exposure_months as i32;
    let t4 = t2 + windows.infection_months as i32;
    if t4 > graph.horizon() {
        return Err(Error::Censored {
            doc: graph.doc(idx).id.clone(),
            needed: t4,
            horizon: graph.horizon(),
        });
    }

    let red = graph.citers_in_window(idx, t1, t2);

    let exposures = match windows.exposure_counting {
        ExposureCounting::PerEdge => red.iter().map(|&r| graph.citers_in_window(r, t2, t3).len()).sum(),
        ExposureCounting::DistinctDocuments => red
            .iter()
            .flat_map(|&r| graph.citers_in_window(r, t2, t3))
            .collect::<HashSet<_>>()
            .len(),
    };

    // `red` is sorted, so membership is a binary search.
    let infections = graph
        .citers_in_window(idx, t2, t4)
        .iter()
        .filter(|c| red.binary_search(c).is_err())
        .count();

    let distractions_total: usize = red.iter().map(|&r| graph.out_degree(r) - 1).sum();
    let distractions_mean = if red.is_empty() {
        None
    } else {
        Some(distractions_total as f64 / red.len() as f64)
    };

    Ok(CascadeCounts {
        doc: graph.doc(idx).id.clone(),
        t1,
        references: graph.out_degree(idx),
        initial_citations: red.len(),
        exposures,
        distractions_total,
        distractions_mean,
        infections,
        total_citations: graph.in_degree(idx),
    })
}

/// One row per non-censored document passing a filter, in `(pub_month, id)` order.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CascadeTable {
    pub windows: CascadeWindows,
    pub rows: Vec<CascadeCounts>,
    pub censored: usize,
    pub filtered_out: usize,
}

impl CascadeTable {
    pub fn from_rows(windows: CascadeWindows, rows: Vec<CascadeCounts>) -> Self {
        CascadeTable {
            windows,
            rows,
            censored: 0,
            filtered_out: 0,
        }
    }

    pub fn len(&self) -> usize {
        self.rows.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rows.is_empty()
    }

    /// `doc_id,t1,R,IC,E_C,D_total,D_mean,I`; a missing D_mean is an empty field.
    pub fn write_csv<W: Write>(&self, out: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(out);
        w.write_record(["doc_id", "t1", "R", "IC", "E_C", "D_total", "D_mean", "I"])?;
        for row in &self.rows {
            w.write_record([
                row.doc.clone(),
                format_month(row.t1),
                row.references.to_string(),
                row.initial_citations.to_string(),
                row.exposures.to_string(),
                row.distractions_total.to_string(),
                row.distractions_mean.map_or_else(String::new, |d| d.to_string()),
                row.infections.to_string(),
            ])?;
        }
        w.flush()?;
        Ok(())
    }
}

pub fn compute_all(graph: &CitationGraph, windows: &CascadeWindows, filter: &CohortFilter) -> Result<CascadeTable> {
    windows.validate()?;
    let selected: Vec<DocIdx> = graph.indices().filter(|&i| filter.matches(graph.doc(i))).collect();
    let filtered_out = graph.len() - selected.len();
    let results: Vec<Option<CascadeCounts>> = selected
        .par_iter()
        .map(|&idx| match cascade_at(graph, idx, windows) {
            Ok(c) => Ok(Some(c)),
            Err(Error::Censored { .. }) => Ok(None),
            Err(e) => Err(e),
        })
        .collect::<Result<_>>()?;
    let censored = results.iter().filter(|r| r.is_none()).count();
    let rows: Vec<CascadeCounts> = results.into_iter().flatten().collect();
    if rows.is_empty() {
        return Err(Error::Empty(format!(
            "no non-censored documents ({censored} censored, {filtered_out} filtered out)"
        )));
    }
    Ok(CascadeTable {
        windows: *windows,
        rows,
        censored,
        filtered_out,
    })
}
