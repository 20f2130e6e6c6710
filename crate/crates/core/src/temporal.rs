//! Descriptive temporal statistics over a citation graph.
//!
//! Every series is computed on unit-width bins (months or counts) and can be
//! re-binned on a base-2 logarithmic axis for heavy-tailed displays.

use std::collections::BTreeMap;
use std::io::Write;

use serde::{Deserialize, Serialize};

use crate::corpus::CitationGraph;
use crate::error::{Error, Result};
use crate::filter::CohortFilter;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Normalization {
    RawCount,
    Probability,
    PerTotalCitations,
    /// Per-bin mean of some other quantity.
    Mean,
}

/// Values over half-open bins `[bin_edges[i], bin_edges[i + 1])`. A `None`
/// value is missing (e.g. a zero denominator), which is not the same as zero.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BinnedSeries {
    pub bin_edges: Vec<f64>,
    pub values: Vec<Option<f64>>,
    pub normalization: Normalization,
}

impl BinnedSeries {
    pub fn new(bin_edges: Vec<f64>, values: Vec<Option<f64>>, normalization: Normalization) -> Result<Self> {
        let expected = bin_edges.len().saturating_sub(1);
        if values.len() != expected || (bin_edges.len() == 1) {
            return Err(Error::LengthMismatch(bin_edges.len(), values.len()));
        }
        if bin_edges.windows(2).any(|w| !(w[0] < w[1])) {
            return Err(Error::InvalidConfig("bin edges must be strictly increasing".into()));
        }
        Ok(BinnedSeries {
            bin_edges,
            values,
            normalization,
        })
    }

    pub fn empty(normalization: Normalization) -> Self {
        BinnedSeries {
            bin_edges: Vec::new(),
            values: Vec::new(),
            normalization,
        }
    }

    /// Unit-width bins starting at `first`.
    pub fn unit(first: i64, values: Vec<Option<f64>>, normalization: Normalization) -> Self {
        if values.is_empty() {
            return Self::empty(normalization);
        }
        let bin_edges = (0..=values.len() as i64).map(|i| (first + i) as f64).collect();
        BinnedSeries {
            bin_edges,
            values,
            normalization,
        }
    }

    /// Raw-count histogram of integer observations on unit bins spanning
    /// `[min, max]`.
    pub fn histogram(observations: impl IntoIterator<Item = i64>) -> Self {
        let counts: BTreeMap<i64, u64> = observations.into_iter().fold(BTreeMap::new(), |mut m, v| {
            *m.entry(v).or_insert(0) += 1;
            m
        });
        let (Some(&lo), Some(&hi)) = (counts.keys().next(), counts.keys().next_back()) else {
            return Self::empty(Normalization::RawCount);
        };
        let values = (lo..=hi).map(|v| Some(*counts.get(&v).unwrap_or(&0) as f64)).collect();
        Self::unit(lo, values, Normalization::RawCount)
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    /// `(bin_lo, bin_hi, value)` triples.
    pub fn bins(&self) -> impl Iterator<Item = (f64, f64, Option<f64>)> + '_ {
        self.bin_edges
            .windows(2)
            .zip(&self.values)
            .map(|(w, v)| (w[0], w[1], *v))
    }

    /// Value of the bin containing `x`.
    pub fn value_at(&self, x: f64) -> Option<f64> {
        self.bins().find(|(lo, hi, _)| *lo <= x && x < *hi).and_then(|b| b.2)
    }

    pub fn total(&self) -> f64 {
        self.values.iter().flatten().sum()
    }

    pub fn to_probability(&self) -> Result<Self> {
        let total = self.total();
        if total <= 0.0 {
            return Err(Error::Degenerate("cannot normalize a series with zero mass".into()));
        }
        Ok(BinnedSeries {
            bin_edges: self.bin_edges.clone(),
            values: self.values.iter().map(|v| v.map(|x| x / total)).collect(),
            normalization: Normalization::Probability,
        })
    }

    pub fn scaled(&self, factor: f64) -> Self {
        BinnedSeries {
            bin_edges: self.bin_edges.clone(),
            values: self.values.iter().map(|v| v.map(|x| x * factor)).collect(),
            normalization: self.normalization,
        }
    }

    /// Re-bins a unit-width series over nonnegative integers onto
    /// `[0,1), [1,2), [2,4), [4,8), ...`. Values are summed; with `density`
    /// each sum is divided by its bin width. Negative bins are dropped and a
    /// log bin with only missing values stays missing.
    pub fn log2_rebin(&self, density: bool) -> Result<Self> {
        if self.bins().any(|(lo, hi, _)| hi - lo != 1.0 || lo.fract() != 0.0) {
            return Err(Error::InvalidConfig("log2 re-binning needs unit integer bins".into()));
        }
        let max = match self.bin_edges.last() {
            Some(&hi) if hi > 0.0 => hi as i64 - 1,
            _ => return Ok(Self::empty(self.normalization)),
        };
        let mut edges = vec![0.0, 1.0];
        while (*edges.last().unwrap() as i64) <= max {
            let last = *edges.last().unwrap();
            edges.push(last * 2.0);
        }
        let mut sums: Vec<Option<f64>> = vec![None; edges.len() - 1];
        for (lo, _, v) in self.bins() {
            if lo < 0.0 {
                continue;
            }
            let k = edges.partition_point(|&e| e <= lo) - 1;
            if let Some(v) = v {
                *sums[k].get_or_insert(0.0) += v;
            }
        }
        if density {
            for (k, s) in sums.iter_mut().enumerate() {
                if let Some(s) = s {
                    *s /= edges[k + 1] - edges[k];
                }
            }
        }
        BinnedSeries::new(edges, sums, self.normalization)
    }

    /// CSV `bin_lo,bin_hi,value`; a missing value is an empty field.
    pub fn write_csv<W: Write>(&self, out: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(out);
        w.write_record(["bin_lo", "bin_hi", "value"])?;
        for (lo, hi, v) in self.bins() {
            w.write_record([lo.to_string(), hi.to_string(), v.map_or_else(String::new, |x| x.to_string())])?;
        }
        w.flush()?;
        Ok(())
    }
}

fn require_nonempty(graph: &CitationGraph) -> Result<()> {
    if graph.is_empty() {
        Err(Error::Empty("graph has no documents".into()))
    } else {
        Ok(())
    }
}

/// Documents published and citations made per bin of `bin_width_months`.
/// Bins are aligned to multiples of the width (12 gives calendar years).
pub fn activity_series(graph: &CitationGraph, bin_width_months: u32) -> Result<(BinnedSeries, BinnedSeries)> {
    require_nonempty(graph)?;
    if bin_width_months == 0 {
        return Err(Error::InvalidConfig("bin width must be positive".into()));
    }
    let w = bin_width_months as i32;
    let first = graph.min_month().unwrap().div_euclid(w);
    let last = graph.max_month().unwrap().div_euclid(w);
    let bins = (last - first + 1) as usize;
    let mut nodes = vec![0.0; bins];
    let mut edges = vec![0.0; bins];
    for idx in graph.indices() {
        let b = (graph.month(idx).div_euclid(w) - first) as usize;
        nodes[b] += 1.0;
        edges[b] += graph.out_degree(idx) as f64;
    }
    let bin_edges: Vec<f64> = (0..=bins as i32).map(|i| ((first + i) * w) as f64).collect();
    let wrap = |v: Vec<f64>| BinnedSeries::new(bin_edges.clone(), v.into_iter().map(Some).collect(), Normalization::RawCount);
    Ok((wrap(nodes)?, wrap(edges)?))
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CountDistribution {
    /// Number of documents per total in-degree.
    pub series: BinnedSeries,
    /// Share of documents cited fewer than ten times.
    pub fraction_below_ten: f64,
    pub documents: usize,
}

pub fn citation_count_distribution(graph: &CitationGraph, filter: &CohortFilter) -> Result<CountDistribution> {
    let degrees: Vec<i64> = graph
        .indices()
        .filter(|&i| filter.matches(graph.doc(i)))
        .map(|i| graph.in_degree(i) as i64)
        .collect();
    if degrees.is_empty() {
        return Err(Error::Empty("cohort filter matches no documents".into()));
    }
    let below = degrees.iter().filter(|&&d| d < 10).count();
    Ok(CountDistribution {
        fraction_below_ten: below as f64 / degrees.len() as f64,
        documents: degrees.len(),
        series: BinnedSeries::histogram(degrees.iter().copied()),
    })
}

/// Mean in-degree per out-degree value. Out-degrees with no documents are
/// missing.
pub fn citations_vs_references(graph: &CitationGraph) -> Result<BinnedSeries> {
    let mut acc: BTreeMap<usize, (f64, usize)> = BTreeMap::new();
    for idx in graph.indices() {
        let e = acc.entry(graph.out_degree(idx)).or_insert((0.0, 0));
        e.0 += graph.in_degree(idx) as f64;
        e.1 += 1;
    }
    let Some(&max) = acc.keys().next_back() else {
        return Ok(BinnedSeries::empty(Normalization::Mean));
    };
    let values = (0..=max).map(|k| acc.get(&k).map(|(s, n)| s / *n as f64)).collect();
    Ok(BinnedSeries::unit(0, values, Normalization::Mean))
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FirstCitation {
    /// Documents per month from publication to first citation.
    pub series: BinnedSeries,
    pub uncited: usize,
    pub cohort_size: usize,
}

pub fn time_to_first_citation(graph: &CitationGraph, filter: &CohortFilter) -> Result<FirstCitation> {
    let mut uncited = 0;
    let mut cohort_size = 0;
    let mut delays = Vec::new();
    for idx in graph.indices().filter(|&i| filter.matches(graph.doc(i))) {
        cohort_size += 1;
        match graph.citers(idx).first() {
            Some(&first) => delays.push((graph.month(first) - graph.month(idx)) as i64),
            None => uncited += 1,
        }
    }
    Ok(FirstCitation {
        series: BinnedSeries::histogram(delays),
        uncited,
        cohort_size,
    })
}

/// Citations received by the documents published in `cohort_month`, by age.
/// With `normalize`, each month's count is divided by all citations made
/// that month; months in which nobody cites are missing.
pub fn citation_age_curve(graph: &CitationGraph, cohort_month: i32, normalize: bool) -> Result<BinnedSeries> {
    let cohort: Vec<_> = graph.indices().filter(|&i| graph.month(i) == cohort_month).collect();
    if cohort.is_empty() {
        return Err(Error::Empty(format!("no documents published in month {cohort_month}")));
    }
    let mut received: BTreeMap<i32, f64> = BTreeMap::new();
    for &idx in &cohort {
        for &c in graph.citers(idx) {
            *received.entry(graph.month(c) - cohort_month).or_insert(0.0) += 1.0;
        }
    }
    let first = received.keys().next().copied().unwrap_or(0).min(0);
    let last = (graph.horizon() - 1 - cohort_month).max(first);

    let made = if normalize { citations_made_per_month(graph) } else { BTreeMap::new() };
    let values = (first..=last)
        .map(|dt| {
            let count = received.get(&dt).copied().unwrap_or(0.0);
            if normalize {
                match made.get(&(cohort_month + dt)) {
                    Some(&total) if total > 0.0 => Some(count / total),
                    _ => None,
                }
            } else {
                Some(count)
            }
        })
        .collect();
    let norm = if normalize {
        Normalization::PerTotalCitations
    } else {
        Normalization::RawCount
    };
    Ok(BinnedSeries::unit(first as i64, values, norm))
}

/// Total citations made by documents published in each month.
pub fn citations_made_per_month(graph: &CitationGraph) -> BTreeMap<i32, f64> {
    let mut made = BTreeMap::new();
    for idx in graph.indices() {
        *made.entry(graph.month(idx)).or_insert(0.0) += graph.out_degree(idx) as f64;
    }
    made
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LastCitation {
    pub age_at_last: BinnedSeries,
    pub time_since_last: BinnedSeries,
}

pub fn last_citation_stats(graph: &CitationGraph, horizon_month: i32) -> Result<LastCitation> {
    if let Some(max) = graph.max_month() {
        if horizon_month < max {
            return Err(Error::InvalidConfig(format!(
                "horizon {horizon_month} precedes the latest publication {max}"
            )));
        }
    }
    let mut ages = Vec::new();
    let mut since = Vec::new();
    for idx in graph.indices() {
        if let Some(&last) = graph.citers(idx).last() {
            let m = graph.month(last);
            ages.push((m - graph.month(idx)) as i64);
            since.push((horizon_month - m) as i64);
        }
    }
    Ok(LastCitation {
        age_at_last: BinnedSeries::histogram(ages),
        time_since_last: BinnedSeries::histogram(since),
    })
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct TailFit {
    /// Slope of `ln value` against `ln Δt`.
    pub exponent: f64,
    /// Natural-log intercept.
    pub intercept: f64,
    /// Smallest and largest bin lower edges used.
    pub fit_range: (f64, f64),
    pub r_squared: f64,
    pub points: usize,
}

/// Least-squares line through `(ln bin_lo, ln value)` for bins whose lower
/// edge lies in `[lo, hi]`. Zero, missing and non-positive-edge bins are
/// skipped; at least three usable points are required.
pub fn fit_tail(series: &BinnedSeries, fit_range: (f64, f64)) -> Result<TailFit> {
    let (lo, hi) = fit_range;
    let pts: Vec<(f64, f64, f64)> = series
        .bins()
        .filter_map(|(x, _, v)| match v {
            Some(v) if v > 0.0 && x > 0.0 && x >= lo && x <= hi => Some((x, x.ln(), v.ln())),
            _ => None,
        })
        .collect();
    if pts.len() < 3 {
        return Err(Error::Degenerate(format!(
            "tail fit needs at least 3 nonzero bins in [{lo}, {hi}], found {}",
            pts.len()
        )));
    }
    let n = pts.len() as f64;
    let mx = pts.iter().map(|p| p.1).sum::<f64>() / n;
    let my = pts.iter().map(|p| p.2).sum::<f64>() / n;
    let sxx: f64 = pts.iter().map(|p| (p.1 - mx).powi(2)).sum();
    let sxy: f64 = pts.iter().map(|p| (p.1 - mx) * (p.2 - my)).sum();
    let syy: f64 = pts.iter().map(|p| (p.2 - my).powi(2)).sum();
    let exponent = sxy / sxx;
    let intercept = my - exponent * mx;
    let ss_res: f64 = pts.iter().map(|p| (p.2 - intercept - exponent * p.1).powi(2)).sum();
    let r_squared = if syy > 0.0 { (1.0 - ss_res / syy).clamp(0.0, 1.0) } else { 1.0 };
    Ok(TailFit {
        exponent,
        intercept,
        fit_range: (pts[0].0, pts[pts.len() - 1].0),
        r_squared,
        points: pts.len(),
    })
}
