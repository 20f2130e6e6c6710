//! Bias analyses over cascade tables: visibility, novelty, popularity, halo
//! and divided attention.
//!
//! Response curves bin their x axis with `floor(log2(x + 1))`, so bin `b`
//! covers `[2^b - 1, 2^(b+1) - 1)`. Empty bins are omitted. Rows with no
//! initial citations have no popularity or distraction class and are left out
//! of the popularity, halo and divided-attention analyses; each result
//! reports how many rows were dropped that way.

use std::fmt;
use std::io::Write;
use std::str::FromStr;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::cascade::{compute_all, infection_rate, CascadeCounts, CascadeTable, CascadeWindows};
use crate::corpus::CitationGraph;
use crate::error::{Error, Result};
use crate::filter::CohortFilter;
use crate::infotheory::{log2_bin, mi_triple, Bin, Estimator, MiTriple};
use crate::stats::{median, ols2, pearson};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Variable {
    #[serde(rename = "IC")]
    InitialCitations,
    #[serde(rename = "E_C")]
    Exposures,
    #[serde(rename = "D_mean")]
    DistractionsMean,
    #[serde(rename = "total_citations")]
    TotalCitations,
}

impl Variable {
    pub fn name(self) -> &'static str {
        match self {
            Variable::InitialCitations => "IC",
            Variable::Exposures => "E_C",
            Variable::DistractionsMean => "D_mean",
            Variable::TotalCitations => "total_citations",
        }
    }

    /// `None` only for `D_mean` of a row without initial citations.
    pub fn value(self, row: &CascadeCounts) -> Option<f64> {
        match self {
            Variable::InitialCitations => Some(row.initial_citations as f64),
            Variable::Exposures => Some(row.exposures as f64),
            Variable::DistractionsMean => row.distractions_mean,
            Variable::TotalCitations => Some(row.total_citations as f64),
        }
    }
}

impl fmt::Display for Variable {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Variable {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "IC" | "ic" => Ok(Variable::InitialCitations),
            "E_C" | "ec" | "e_c" => Ok(Variable::Exposures),
            "D_mean" | "d_mean" => Ok(Variable::DistractionsMean),
            "total_citations" => Ok(Variable::TotalCitations),
            _ => Err(Error::InvalidConfig(format!("unknown variable `{s}`"))),
        }
    }
}

/// Half-open classes `[b_i, b_(i+1))` over one variable; the last class is
/// unbounded above and values below the first boundary belong to no class.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ClassSpec {
    pub variable: Variable,
    pub boundaries: Vec<f64>,
    pub labels: Vec<String>,
}

impl ClassSpec {
    pub fn new(variable: Variable, boundaries: Vec<f64>, labels: Vec<String>) -> Result<Self> {
        if boundaries.is_empty() {
            return Err(Error::InvalidConfig("class spec needs at least one boundary".into()));
        }
        if boundaries.len() != labels.len() {
            return Err(Error::InvalidConfig(format!(
                "{} boundaries but {} labels",
                boundaries.len(),
                labels.len()
            )));
        }
        if boundaries.iter().any(|b| !b.is_finite()) || boundaries.windows(2).any(|w| w[0] >= w[1]) {
            return Err(Error::InvalidConfig("class boundaries must be finite and strictly increasing".into()));
        }
        Ok(ClassSpec {
            variable,
            boundaries,
            labels,
        })
    }

    /// Classes with generated labels such as `1-2`, `3-10`, `11+` for integer
    /// boundaries and `[10,30)` otherwise.
    pub fn from_boundaries(variable: Variable, boundaries: Vec<f64>) -> Result<Self> {
        let labels = boundaries
            .iter()
            .enumerate()
            .map(|(i, &lo)| match boundaries.get(i + 1) {
                None => format!("{lo}+"),
                Some(&hi) if lo.fract() == 0.0 && hi.fract() == 0.0 => {
                    if hi - lo == 1.0 {
                        format!("{lo}")
                    } else {
                        format!("{lo}-{}", hi - 1.0)
                    }
                }
                Some(&hi) => format!("[{lo},{hi})"),
            })
            .collect();
        ClassSpec::new(variable, boundaries, labels)
    }

    /// IC classes 1-2, 3-10, 11+.
    pub fn popularity_default() -> Self {
        ClassSpec::new(
            Variable::InitialCitations,
            vec![1.0, 3.0, 11.0],
            vec!["low".into(), "medium".into(), "high".into()],
        )
        .unwrap()
    }

    /// D_mean classes below 10, 10 to 30, 30 and above.
    pub fn distraction_default() -> Self {
        ClassSpec::new(
            Variable::DistractionsMean,
            vec![0.0, 10.0, 30.0],
            vec!["few".into(), "moderate".into(), "many".into()],
        )
        .unwrap()
    }

    pub fn exposure_default() -> Self {
        ClassSpec::from_boundaries(Variable::Exposures, vec![0.0, 1.0, 4.0, 16.0, 64.0]).unwrap()
    }

    pub fn quality_default() -> Self {
        ClassSpec::new(
            Variable::TotalCitations,
            vec![0.0, 10.0, 50.0],
            vec!["low".into(), "medium".into(), "high".into()],
        )
        .unwrap()
    }

    pub fn len(&self) -> usize {
        self.boundaries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.boundaries.is_empty()
    }

    pub fn class_of_value(&self, v: f64) -> Option<usize> {
        let k = self.boundaries.partition_point(|&b| b <= v);
        k.checked_sub(1)
    }

    pub fn class_of(&self, row: &CascadeCounts) -> Option<usize> {
        self.variable.value(row).and_then(|v| self.class_of_value(v))
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CurvePoint {
    pub x_lo: f64,
    pub x_hi: f64,
    /// Mean x over the bin's members.
    pub x_mean: f64,
    pub mean_y: f64,
    pub n: usize,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ResponseCurve {
    pub x_variable: Variable,
    pub class_label: Option<String>,
    pub points: Vec<CurvePoint>,
}

impl ResponseCurve {
    /// Mean of `y` per log2 bin of `x`.
    pub fn from_pairs(x_variable: Variable, class_label: Option<String>, pairs: &[(f64, f64)]) -> Self {
        let mut acc: Vec<(Bin, f64, f64, usize)> = Vec::new();
        let mut keyed: Vec<(Bin, f64, f64)> = pairs.iter().map(|&(x, y)| (log2_bin(x), x, y)).collect();
        keyed.sort_by_key(|k| k.0);
        for (b, x, y) in keyed {
            match acc.last_mut() {
                Some(last) if last.0 == b => {
                    last.1 += x;
                    last.2 += y;
                    last.3 += 1;
                }
                _ => acc.push((b, x, y, 1)),
            }
        }
        let points = acc
            .into_iter()
            .map(|(b, sx, sy, n)| CurvePoint {
                x_lo: 2f64.powi(b as i32) - 1.0,
                x_hi: 2f64.powi(b as i32 + 1) - 1.0,
                x_mean: sx / n as f64,
                mean_y: sy / n as f64,
                n,
            })
            .collect();
        ResponseCurve {
            x_variable,
            class_label,
            points,
        }
    }

    pub fn n(&self) -> usize {
        self.points.iter().map(|p| p.n).sum()
    }

    pub fn point_at(&self, x_lo: f64) -> Option<&CurvePoint> {
        self.points.iter().find(|p| p.x_lo == x_lo)
    }

    /// Shape of the curve over bins holding at least `min_n` samples.
    pub fn trend(&self, min_n: usize) -> Trend {
        let pts: Vec<&CurvePoint> = self.points.iter().filter(|p| p.n >= min_n).collect();
        if pts.len() < 2 {
            return Trend::Undetermined;
        }
        if pts.windows(2).all(|w| w[1].mean_y >= w[0].mean_y) {
            return Trend::Nondecreasing;
        }
        // n-weighted least-squares slope of mean_y against bin position.
        let w: f64 = pts.iter().map(|p| p.n as f64).sum();
        let xs: Vec<f64> = pts.iter().map(|p| (p.x_lo + 1.0).log2()).collect();
        let mx = pts.iter().zip(&xs).map(|(p, x)| p.n as f64 * x).sum::<f64>() / w;
        let my = pts.iter().map(|p| p.n as f64 * p.mean_y).sum::<f64>() / w;
        let sxy: f64 = pts.iter().zip(&xs).map(|(p, x)| p.n as f64 * (x - mx) * (p.mean_y - my)).sum();
        if sxy < 0.0 {
            Trend::Decreasing
        } else {
            Trend::Mixed
        }
    }

    pub fn write_csv<W: Write>(&self, out: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(out);
        w.write_record(["x_lo", "x_hi", "x_mean", "mean_y", "n"])?;
        for p in &self.points {
            w.write_record([
                p.x_lo.to_string(),
                p.x_hi.to_string(),
                p.x_mean.to_string(),
                p.mean_y.to_string(),
                p.n.to_string(),
            ])?;
        }
        w.flush()?;
        Ok(())
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Trend {
    /// Every step between retained bins is nondecreasing.
    Nondecreasing,
    /// Not monotone and the n-weighted slope is negative.
    Decreasing,
    Mixed,
    /// Fewer than two bins with enough samples.
    Undetermined,
}

fn curves_by_class(
    rows: &[&CascadeCounts],
    x: Variable,
    classes: Option<&ClassSpec>,
) -> Vec<ResponseCurve> {
    let pairs_of = |keep: &dyn Fn(&CascadeCounts) -> bool| -> Vec<(f64, f64)> {
        rows.iter()
            .filter(|r| keep(r))
            .filter_map(|r| x.value(r).map(|v| (v, r.infections as f64)))
            .collect()
    };
    match classes {
        None => {
            let pairs = pairs_of(&|_| true);
            if pairs.is_empty() {
                Vec::new()
            } else {
                vec![ResponseCurve::from_pairs(x, None, &pairs)]
            }
        }
        Some(spec) => (0..spec.len())
            .filter_map(|k| {
                let pairs = pairs_of(&|r| spec.class_of(r) == Some(k));
                if pairs.is_empty() {
                    log::warn!("class `{}` of {} has no members; omitted", spec.labels[k], spec.variable);
                    None
                } else {
                    Some(ResponseCurve::from_pairs(x, Some(spec.labels[k].clone()), &pairs))
                }
            })
            .collect(),
    }
}

/// Mean infections per log2 bin of `x`, one curve per nonempty class.
pub fn exposure_response(table: &CascadeTable, x: Variable, classes: Option<&ClassSpec>) -> Result<Vec<ResponseCurve>> {
    if table.rows.is_empty() {
        return Err(Error::Empty("cascade table has no rows".into()));
    }
    let rows: Vec<&CascadeCounts> = table.rows.iter().collect();
    Ok(curves_by_class(&rows, x, classes))
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct VisibilityStats {
    pub r_ic: f64,
    pub r_ec: f64,
    pub r_combined: f64,
    pub a: f64,
    pub b: f64,
    pub c: f64,
    pub n: usize,
}

impl VisibilityStats {
    /// Correlations and the fit `I ≈ a·IC + b·E_C + c` from raw columns.
    pub fn from_columns(ic: &[f64], ec: &[f64], i: &[f64]) -> Result<Self> {
        if ic.len() != i.len() {
            return Err(Error::LengthMismatch(ic.len(), i.len()));
        }
        if ec.len() != i.len() {
            return Err(Error::LengthMismatch(ec.len(), i.len()));
        }
        if i.len() < 3 {
            return Err(Error::Empty("visibility statistics need at least three rows".into()));
        }
        let r_ic = pearson(ic, i, "IC", "I")?;
        let r_ec = pearson(ec, i, "E_C", "I")?;
        let fit = ols2(ic, ec, i)?;
        let fitted: Vec<f64> = ic.iter().zip(ec).map(|(&x1, &x2)| fit.predict(x1, x2)).collect();
        let r_combined = pearson(&fitted, i, "fitted I", "I")?;
        Ok(VisibilityStats {
            r_ic,
            r_ec,
            r_combined,
            a: fit.a,
            b: fit.b,
            c: fit.c,
            n: i.len(),
        })
    }
}

pub fn visibility_stats(table: &CascadeTable) -> Result<VisibilityStats> {
    let ic: Vec<f64> = table.rows.iter().map(|r| r.initial_citations as f64).collect();
    let ec: Vec<f64> = table.rows.iter().map(|r| r.exposures as f64).collect();
    let i: Vec<f64> = table.rows.iter().map(|r| r.infections as f64).collect();
    VisibilityStats::from_columns(&ic, &ec, &i)
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct NoveltyPoint {
    pub latency_months: u32,
    pub median_rate: f64,
    pub n: usize,
}

/// Median infection rate per latency, other windows held at `base`.
pub fn novelty_curve(
    graph: &CitationGraph,
    latencies: &[u32],
    base: &CascadeWindows,
    filter: &CohortFilter,
) -> Result<Vec<NoveltyPoint>> {
    if latencies.is_empty() {
        return Err(Error::Empty("no latencies given".into()));
    }
    latencies
        .par_iter()
        .map(|&latency| {
            let windows = CascadeWindows {
                latency_months: latency,
                ..*base
            };
            let table = match compute_all(graph, &windows, filter) {
                Err(Error::Empty(_)) => return Err(Error::EmptyLatency(latency)),
                other => other?,
            };
            let rates: Vec<f64> = table.rows.iter().map(infection_rate).collect();
            Ok(NoveltyPoint {
                latency_months: latency,
                median_rate: median(&rates).unwrap(),
                n: rates.len(),
            })
        })
        .collect()
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PopularityResult {
    pub curves: Vec<ResponseCurve>,
    /// `X = E_C`, `Y = I`, `Z = IC`, all log2-binned.
    pub mi: MiTriple,
    pub n: usize,
    pub excluded_no_initial_citations: usize,
}

fn with_initial_citations(table: &CascadeTable) -> Result<(Vec<&CascadeCounts>, usize)> {
    if table.rows.is_empty() {
        return Err(Error::Empty("cascade table has no rows".into()));
    }
    let rows: Vec<&CascadeCounts> = table.rows.iter().filter(|r| r.initial_citations > 0).collect();
    let excluded = table.rows.len() - rows.len();
    if rows.is_empty() {
        return Err(Error::Empty("every row has zero initial citations".into()));
    }
    if excluded > 0 {
        log::info!("{excluded} rows without initial citations excluded");
    }
    Ok((rows, excluded))
}

fn binned(rows: &[&CascadeCounts], f: impl Fn(&CascadeCounts) -> f64) -> Vec<Bin> {
    rows.iter().map(|r| log2_bin(f(r))).collect()
}

fn require_spread(bins: &[Bin], name: &str) -> Result<()> {
    if bins.iter().all(|&b| b == bins[0]) {
        return Err(Error::Degenerate(format!("{name} falls into a single log2 bin")));
    }
    Ok(())
}

fn require_classes(curves: &[ResponseCurve], spec: &ClassSpec) -> Result<()> {
    if curves.len() < 2 {
        return Err(Error::Degenerate(format!(
            "need at least two nonempty {} classes, found {}",
            spec.variable,
            curves.len()
        )));
    }
    Ok(())
}

pub fn popularity_analysis(table: &CascadeTable, classes: &ClassSpec, estimator: Estimator) -> Result<PopularityResult> {
    let (rows, excluded) = with_initial_citations(table)?;
    let curves = curves_by_class(&rows, Variable::Exposures, Some(classes));
    require_classes(&curves, classes)?;
    let x = binned(&rows, |r| r.exposures as f64);
    let y = binned(&rows, |r| r.infections as f64);
    let z = binned(&rows, |r| r.initial_citations as f64);
    require_spread(&x, "E_C")?;
    require_spread(&y, "I")?;
    require_spread(&z, "IC")?;
    Ok(PopularityResult {
        curves,
        mi: mi_triple(&x, &y, &z, estimator)?,
        n: rows.len(),
        excluded_no_initial_citations: excluded,
    })
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct HaloClass {
    pub curve: ResponseCurve,
    pub trend: Trend,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct HaloResult {
    /// Mean I against IC, one entry per nonempty exposure class in class order.
    pub classes: Vec<HaloClass>,
    pub min_n: usize,
    pub excluded_no_initial_citations: usize,
}

impl HaloResult {
    /// Trend of the highest nonempty exposure class.
    pub fn top_trend(&self) -> Trend {
        self.classes.last().map_or(Trend::Undetermined, |c| c.trend)
    }

    pub fn halo_detected(&self) -> bool {
        self.top_trend() == Trend::Decreasing
    }
}

/// `min_n` is the per-bin sample count below which bins are ignored by the
/// trend detector.
pub fn halo_analysis(table: &CascadeTable, classes: &ClassSpec, min_n: usize) -> Result<HaloResult> {
    let (rows, excluded) = with_initial_citations(table)?;
    let curves = curves_by_class(&rows, Variable::InitialCitations, Some(classes));
    require_classes(&curves, classes)?;
    Ok(HaloResult {
        classes: curves
            .into_iter()
            .map(|curve| HaloClass {
                trend: curve.trend(min_n),
                curve,
            })
            .collect(),
        min_n,
        excluded_no_initial_citations: excluded,
    })
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DividedAttentionResult {
    /// Mean I against E_C per distraction class.
    pub by_distraction: Vec<ResponseCurve>,
    /// Mean I against D_mean per quality class.
    pub by_quality: Vec<ResponseCurve>,
    /// `X = E_C`, `Y = I`, `Z = D_mean`, all log2-binned.
    pub mi: MiTriple,
    pub n: usize,
    pub excluded_no_initial_citations: usize,
}

pub fn divided_attention_analysis(
    table: &CascadeTable,
    distraction: &ClassSpec,
    quality: &ClassSpec,
    estimator: Estimator,
) -> Result<DividedAttentionResult> {
    let (rows, excluded) = with_initial_citations(table)?;
    let by_distraction = curves_by_class(&rows, Variable::Exposures, Some(distraction));
    let by_quality = curves_by_class(&rows, Variable::DistractionsMean, Some(quality));
    if by_distraction.is_empty() || by_quality.is_empty() {
        return Err(Error::Empty("no rows fall into any class".into()));
    }
    let x = binned(&rows, |r| r.exposures as f64);
    let y = binned(&rows, |r| r.infections as f64);
    let z = binned(&rows, |r| r.distractions_mean.unwrap_or(0.0));
    Ok(DividedAttentionResult {
        by_distraction,
        by_quality,
        mi: mi_triple(&x, &y, &z, estimator)?,
        n: rows.len(),
        excluded_no_initial_citations: excluded,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::cascade::CascadeWindows;

    fn row(ic: usize, ec: usize, i: usize, d_total: usize, total: usize) -> CascadeCounts {
        CascadeCounts {
            doc: format!("d{ic}-{ec}-{i}"),
            t1: 0,
            references: 0,
            initial_citations: ic,
            exposures: ec,
            distractions_total: d_total,
            distractions_mean: (ic > 0).then(|| d_total as f64 / ic as f64),
            infections: i,
            total_citations: total,
        }
    }

    fn table(rows: Vec<CascadeCounts>) -> CascadeTable {
        CascadeTable::from_rows(CascadeWindows::default(), rows)
    }

    #[test]
    fn class_membership() {
        let spec = ClassSpec::popularity_default();
        let got: Vec<Option<usize>> = [0.0, 1.0, 2.0, 3.0, 10.0, 11.0, 500.0]
            .iter()
            .map(|&v| spec.class_of_value(v))
            .collect();
        assert_eq!(got, vec![None, Some(0), Some(0), Some(1), Some(1), Some(2), Some(2)]);
        assert_eq!(ClassSpec::exposure_default().labels, vec!["0", "1-3", "4-15", "16-63", "64+"]);
        assert!(ClassSpec::new(Variable::Exposures, vec![1.0, 1.0], vec!["a".into(), "b".into()]).is_err());
        assert!(ClassSpec::new(Variable::Exposures, vec![1.0], vec![]).is_err());
    }

    #[test]
    fn identity_response_within_bins() {
        let rows = (0..200).map(|e| row(1, e, e, 0, e)).collect();
        let curves = exposure_response(&table(rows), Variable::Exposures, None).unwrap();
        assert_eq!(curves.len(), 1);
        for p in &curves[0].points {
            assert!(p.mean_y >= p.x_lo && p.mean_y < p.x_hi);
            assert_eq!(p.mean_y, p.x_mean);
        }
        assert_eq!(curves[0].n(), 200);
    }

    #[test]
    fn single_row_single_point() {
        let t = table(vec![row(2, 2, 2, 1, 4)]);
        let curves = exposure_response(&t, Variable::Exposures, None).unwrap();
        assert_eq!(curves[0].points.len(), 1);
        let p = &curves[0].points[0];
        assert_eq!((p.x_lo, p.x_hi, p.mean_y, p.n), (1.0, 3.0, 2.0, 1));
        assert!(exposure_response(&table(vec![]), Variable::Exposures, None).is_err());
    }

    #[test]
    fn empty_classes_are_omitted() {
        let t = table(vec![row(1, 1, 1, 0, 1), row(2, 3, 1, 0, 2), row(12, 3, 5, 0, 20)]);
        let curves = exposure_response(&t, Variable::Exposures, Some(&ClassSpec::popularity_default())).unwrap();
        let labels: Vec<_> = curves.iter().map(|c| c.class_label.clone().unwrap()).collect();
        assert_eq!(labels, vec!["low", "high"]);
    }

    #[test]
    fn noiseless_plane_visibility() {
        let mut rows = Vec::new();
        for ic in 0..6 {
            for ec in 0..7 {
                rows.push(row(ic, ec, 2 * ic + 3 * ec + 1, 0, 0));
            }
        }
        let s = visibility_stats(&table(rows)).unwrap();
        assert!((s.a - 2.0).abs() < 1e-12 && (s.b - 3.0).abs() < 1e-12 && (s.c - 1.0).abs() < 1e-12);
        assert!((s.r_combined - 1.0).abs() < 1e-12);
        assert!(s.r_combined >= s.r_ic.abs().max(s.r_ec.abs()) - 1e-9);
    }

    #[test]
    fn visibility_names_flat_variable() {
        let rows = (0..5).map(|k| row(3, k, k, 0, 0)).collect();
        let err = visibility_stats(&table(rows)).unwrap_err();
        assert!(matches!(err, Error::ZeroVariance(ref v) if v == "IC"));
    }

    #[test]
    fn negative_ic_correlation() {
        let ic = [1.0, 2.0, 3.0, 4.0, 5.0];
        let i: Vec<f64> = ic.iter().map(|v| -v).collect();
        let ec = [0.3, -0.1, 0.0, 0.1, -0.3];
        let s = VisibilityStats::from_columns(&ic, &ec, &i).unwrap();
        assert!((s.r_ic + 1.0).abs() < 1e-12);
    }

    #[test]
    fn popularity_conditioning_on_copy() {
        let mut rows = Vec::new();
        for k in 1..40usize {
            rows.push(row(k, k, k / 3, 0, k));
            rows.push(row(k, k, k / 2 + 1, 0, k));
        }
        let spec = ClassSpec::from_boundaries(Variable::InitialCitations, vec![1.0, 8.0]).unwrap();
        let p = popularity_analysis(&table(rows), &spec, Estimator::PlugIn).unwrap();
        assert!(p.mi.cmi.abs() < 1e-12);
        assert!((p.mi.ii + p.mi.mi).abs() < 1e-12);
        assert_eq!(p.curves.len(), 2);
    }

    #[test]
    fn popularity_rejects_degenerate() {
        let rows = (1..10).map(|k| row(1, k, k, 0, 1)).collect();
        assert!(popularity_analysis(&table(rows), &ClassSpec::popularity_default(), Estimator::PlugIn).is_err());
    }

    #[test]
    fn halo_identity_classes() {
        let mut rows = Vec::new();
        for ic in 1..30 {
            for ec in [0, 2, 5, 20, 70] {
                rows.push(row(ic, ec, ic, 0, ic));
            }
        }
        let h = halo_analysis(&table(rows), &ClassSpec::exposure_default(), 1).unwrap();
        assert_eq!(h.classes.len(), 5);
        for c in &h.classes {
            assert_eq!(c.trend, Trend::Nondecreasing);
            assert!(c.curve.points.iter().all(|p| p.mean_y == p.x_mean));
        }
        assert!(!h.halo_detected());
    }

    #[test]
    fn trend_detector() {
        let down = ResponseCurve::from_pairs(Variable::InitialCitations, None, &[(1.0, 9.0), (3.0, 5.0), (7.0, 6.0), (15.0, 1.0)]);
        assert_eq!(down.trend(1), Trend::Decreasing);
        let up = ResponseCurve::from_pairs(Variable::InitialCitations, None, &[(1.0, 1.0), (3.0, 1.0), (7.0, 4.0)]);
        assert_eq!(up.trend(1), Trend::Nondecreasing);
        assert_eq!(up.trend(2), Trend::Undetermined);
    }

    #[test]
    fn divided_attention_single_row() {
        let t = table(vec![row(2, 2, 2, 1, 4), row(0, 0, 1, 0, 1)]);
        let d = divided_attention_analysis(&t, &ClassSpec::distraction_default(), &ClassSpec::quality_default(), Estimator::PlugIn)
            .unwrap();
        assert_eq!(d.excluded_no_initial_citations, 1);
        assert_eq!(d.by_distraction.len(), 1);
        let p = &d.by_distraction[0].points[0];
        assert_eq!((p.x_mean, p.mean_y), (2.0, 2.0));
        assert_eq!(d.by_quality[0].points[0].x_mean, 0.5);
        assert!(divided_attention_analysis(
            &table(vec![row(0, 0, 1, 0, 1)]),
            &ClassSpec::distraction_default(),
            &ClassSpec::quality_default(),
            Estimator::PlugIn
        )
        .is_err());
    }

    #[test]
    fn novelty_stops_after_activity() {
        // All citations land in the first year; later latencies see none.
        let mut b = CitationGraph::builder().horizon(120);
        b.add_document(crate::corpus::Document::new("a", 0)).unwrap();
        for k in 0..5 {
            let id = format!("c{k}");
            b.add_document(crate::corpus::Document::new(id.clone(), 1 + k)).unwrap();
            b.add_citation(id, "a");
        }
        let (g, _) = b.finalize(crate::corpus::AnomalyPolicy::Fail).unwrap();
        let base = CascadeWindows::new(12, 12, 24).unwrap();
        let filter = CohortFilter::months(Some(0), Some(1));
        let curve = novelty_curve(&g, &[12, 24, 36], &base, &filter).unwrap();
        assert!(curve.iter().all(|p| p.median_rate == 0.0 && p.n == 1));
        assert!(matches!(novelty_curve(&g, &[100], &base, &filter), Err(Error::EmptyLatency(100))));
    }
}
