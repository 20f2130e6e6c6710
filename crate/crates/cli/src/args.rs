use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;

#[derive(Debug, Parser)]
#[command(name = "citelens", version, about = "Temporal citation-network analysis")]
pub struct Cli {
    /// Worker threads; 0 uses the available parallelism.
    #[arg(long, global = true, default_value_t = 0)]
    pub threads: usize,

    /// Log progress and warnings to stderr.
    #[arg(long, short, global = true)]
    pub verbose: bool,

    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Validate a corpus and write its canonical form plus an ingest report.
    Ingest(IngestArgs),
    /// Descriptive temporal statistics.
    Stats(StatsArgs),
    /// Per-document cascade counts.
    Cascade(CascadeArgs),
    /// Bias analyses over cascade counts.
    Bias(BiasArgs),
    /// Generate a synthetic corpus.
    Simulate(SimulateArgs),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Policy {
    Drop,
    Keep,
    Fail,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Format {
    Csv,
    Json,
}

impl Format {
    pub fn ext(self) -> &'static str {
        match self {
            Format::Csv => "csv",
            Format::Json => "json",
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Analysis {
    Visibility,
    Novelty,
    Popularity,
    Halo,
    Divided,
}

#[derive(Debug, Args, Serialize)]
pub struct InputArgs {
    #[arg(long)]
    pub documents: PathBuf,
    #[arg(long)]
    pub citations: PathBuf,
    /// What to do with forward-in-time and unknown-id citations.
    #[arg(long, value_enum, default_value_t = Policy::Drop)]
    pub on_anomaly: Policy,
    /// Exclusive end of the data as YYYY-MM; defaults to the month after the
    /// latest publication.
    #[arg(long)]
    pub horizon: Option<String>,
}

#[derive(Debug, Args, Serialize)]
pub struct OutputArgs {
    /// Output directory, created by the run.
    #[arg(long)]
    pub out: PathBuf,
    /// Replace an existing output directory.
    #[arg(long)]
    pub force: bool,
}

#[derive(Debug, Args, Serialize)]
pub struct CohortArgs {
    /// Only documents of this kind.
    #[arg(long)]
    pub kind: Option<String>,
    /// Only documents published from this month (YYYY-MM, inclusive).
    #[arg(long)]
    pub from: Option<String>,
    /// Only documents published before this month (YYYY-MM, exclusive).
    #[arg(long)]
    pub to: Option<String>,
}

#[derive(Debug, Args, Serialize)]
pub struct WindowArgs {
    #[arg(long, default_value_t = 24)]
    pub latency_months: u32,
    #[arg(long, default_value_t = 12)]
    pub exposure_months: u32,
    #[arg(long, default_value_t = 24)]
    pub infection_months: u32,
    /// Count distinct exposing documents instead of exposure edges.
    #[arg(long)]
    pub distinct_exposures: bool,
}

#[derive(Debug, Args, Serialize)]
pub struct IngestArgs {
    #[command(flatten)]
    pub input: InputArgs,
    #[command(flatten)]
    pub output: OutputArgs,
}

#[derive(Debug, Args, Serialize)]
pub struct StatsArgs {
    #[command(flatten)]
    pub input: InputArgs,
    #[command(flatten)]
    pub output: OutputArgs,
    #[command(flatten)]
    pub cohort: CohortArgs,
    #[arg(long, value_enum, default_value_t = Format::Csv)]
    pub format: Format,
    /// Bin width of the activity series.
    #[arg(long, default_value_t = 12)]
    pub bin_months: u32,
    /// Publication month (YYYY-MM) of the cohort for the citation-age curve.
    #[arg(long)]
    pub age_cohort: Option<String>,
    /// Divide the age curve by all citations made each month.
    #[arg(long)]
    pub normalize: bool,
    /// Re-bin count distributions on a log2 axis (as densities).
    #[arg(long)]
    pub log2_bins: bool,
    /// Fit a power-law tail to the age curve over Δt in LO:HI months.
    #[arg(long, value_parser = parse_range)]
    pub fit_range: Option<(f64, f64)>,
}

#[derive(Debug, Args, Serialize)]
pub struct CascadeArgs {
    #[command(flatten)]
    pub input: InputArgs,
    #[command(flatten)]
    pub output: OutputArgs,
    #[command(flatten)]
    pub cohort: CohortArgs,
    #[command(flatten)]
    pub windows: WindowArgs,
    #[arg(long, value_enum, default_value_t = Format::Csv)]
    pub format: Format,
}

#[derive(Debug, Args, Serialize)]
pub struct BiasArgs {
    #[command(flatten)]
    pub input: InputArgs,
    #[command(flatten)]
    pub output: OutputArgs,
    #[command(flatten)]
    pub cohort: CohortArgs,
    #[command(flatten)]
    pub windows: WindowArgs,
    #[arg(long, value_enum, default_value_t = Format::Csv)]
    pub format: Format,
    #[arg(long, value_enum)]
    pub analysis: Analysis,
    /// Class boundaries for the analysis' class variable (IC for
    /// popularity, E_C for halo, D_mean for divided), comma separated.
    #[arg(long, value_delimiter = ',')]
    pub classes: Option<Vec<f64>>,
    /// Total-citation class boundaries for divided attention.
    #[arg(long, value_delimiter = ',')]
    pub quality_classes: Option<Vec<f64>>,
    /// Latencies in months for novelty.
    #[arg(long, value_delimiter = ',', default_value = "12,24,36,48,60")]
    pub latencies: Vec<u32>,
    /// Smallest bin size the halo trend detector considers.
    #[arg(long, default_value_t = 20)]
    pub min_n: usize,
    /// Add the Miller–Madow correction to information estimates.
    #[arg(long)]
    pub miller_madow: bool,
}

#[derive(Debug, Args, Serialize)]
pub struct SimulateArgs {
    #[command(flatten)]
    pub output: OutputArgs,
    /// Generator settings as key = value lines (TOML).
    #[arg(long)]
    pub config: Option<PathBuf>,
    #[arg(long)]
    pub months: Option<u32>,
    #[arg(long)]
    pub docs_per_month: Option<u32>,
    #[arg(long)]
    pub refs_per_doc: Option<u32>,
    #[arg(long)]
    pub refs_per_doc_max: Option<u32>,
    #[arg(long)]
    pub recency_exponent: Option<f64>,
    #[arg(long)]
    pub attachment_exponent: Option<f64>,
    #[arg(long)]
    pub copy_prob: Option<f64>,
    #[arg(long)]
    pub fitness_spread: Option<f64>,
    #[arg(long)]
    pub seed: Option<u64>,
    #[arg(long)]
    pub halo_weight: Option<f64>,
}

fn parse_range(s: &str) -> Result<(f64, f64), String> {
    let (lo, hi) = s.split_once(':').ok_or("expected LO:HI")?;
    let lo: f64 = lo.trim().parse().map_err(|_| format!("bad number `{lo}`"))?;
    let hi: f64 = hi.trim().parse().map_err(|_| format!("bad number `{hi}`"))?;
    if !(lo <= hi) {
        return Err("LO must not exceed HI".into());
    }
    Ok((lo, hi))
}
