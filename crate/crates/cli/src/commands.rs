use std::collections::BTreeMap;
use std::fs;
use std::io::Cursor;
use std::path::Path;

use chrono::{SecondsFormat, Utc};
use serde::{Deserialize, Serialize};
use serde_json::json;

use citelens_core::bias::{self, ClassSpec, ResponseCurve, Variable};
use citelens_core::infotheory::{Estimator, MiTriple};
use citelens_core::month::{format_month, parse_month};
use citelens_core::synth::{self, GeneratorConfig};
use citelens_core::temporal::{self, BinnedSeries};
use citelens_core::{compute_all, AnomalyPolicy, CascadeTable, CascadeWindows, CitationGraph, CohortFilter, ExposureCounting, IngestReport};

use crate::args::{Analysis, BiasArgs, CascadeArgs, CohortArgs, Format, IngestArgs, InputArgs, Policy, SimulateArgs, StatsArgs, WindowArgs};
use crate::output::{file_label, io_error, sha256_hex, CliError, RunManifest, Staging};

const BINNING: &str = "log2: floor(log2(x+1))";

pub struct Context {
    pub command_line: String,
    pub started: String,
}

impl Context {
    fn finish<C: Serialize>(
        &self,
        staging: Staging,
        config: &C,
        inputs: BTreeMap<String, String>,
        seed: Option<u64>,
    ) -> Result<(), CliError> {
        let config_bytes = serde_json::to_vec(config).map_err(|e| CliError::Data(e.to_string()))?;
        let manifest = RunManifest {
            command_line: self.command_line.clone(),
            tool_version: env!("CARGO_PKG_VERSION").to_string(),
            config_sha256: sha256_hex(&config_bytes),
            inputs,
            seed,
            started: self.started.clone(),
            finished: now(),
            outputs: staging.files().to_vec(),
        };
        staging.commit(&manifest)
    }
}

pub fn now() -> String {
    Utc::now().to_rfc3339_opts(SecondsFormat::Secs, true)
}

fn read_input(path: &Path, inputs: &mut BTreeMap<String, String>) -> Result<Vec<u8>, CliError> {
    let bytes = fs::read(path).map_err(|e| io_error(path, e))?;
    inputs.insert(path.display().to_string(), sha256_hex(&bytes));
    Ok(bytes)
}

fn month_flag(flag: &str, value: &Option<String>) -> Result<Option<i32>, CliError> {
    value
        .as_deref()
        .map(|s| parse_month(s).map_err(|e| CliError::Usage(format!("--{flag}: {e}"))))
        .transpose()
}

struct Loaded {
    graph: CitationGraph,
    report: IngestReport,
    inputs: BTreeMap<String, String>,
}

fn load(input: &InputArgs) -> Result<Loaded, CliError> {
    let horizon = month_flag("horizon", &input.horizon)?;
    let mut inputs = BTreeMap::new();
    let docs = read_input(&input.documents, &mut inputs)?;
    let cits = read_input(&input.citations, &mut inputs)?;
    let policy = match input.on_anomaly {
        Policy::Drop => AnomalyPolicy::Drop,
        Policy::Keep => AnomalyPolicy::Keep,
        Policy::Fail => AnomalyPolicy::Fail,
    };
    let (mut graph, report) = citelens_core::corpus::ingest(
        Cursor::new(docs),
        &input.documents.display().to_string(),
        Cursor::new(cits),
        &input.citations.display().to_string(),
        policy,
    )
    .map_err(|e| CliError::Data(e.to_string()))?;
    if let Some(h) = horizon {
        graph = graph.with_horizon(h).map_err(|e| CliError::Usage(format!("--horizon: {e}")))?;
    }
    log::info!(
        "loaded {} documents and {} citations ({} dropped anomalies, {} unknown-id edges)",
        graph.len(),
        graph.edge_count(),
        report.dropped_anomalies.len(),
        report.unknown_id_edges.len()
    );
    Ok(Loaded { graph, report, inputs })
}

fn cohort(args: &CohortArgs) -> Result<CohortFilter, CliError> {
    Ok(CohortFilter {
        kind: args.kind.clone(),
        from_month: month_flag("from", &args.from)?,
        to_month: month_flag("to", &args.to)?,
    })
}

fn windows(args: &WindowArgs) -> Result<CascadeWindows, CliError> {
    let w = CascadeWindows::new(args.latency_months, args.exposure_months, args.infection_months)
        .map_err(|e| CliError::Usage(e.to_string()))?;
    Ok(w.with_counting(if args.distinct_exposures {
        ExposureCounting::DistinctDocuments
    } else {
        ExposureCounting::PerEdge
    }))
}

fn to_vec<F>(f: F) -> Result<Vec<u8>, CliError>
where
    F: FnOnce(&mut Vec<u8>) -> citelens_core::Result<()>,
{
    let mut buf = Vec::new();
    f(&mut buf)?;
    Ok(buf)
}

pub fn ingest(ctx: &Context, args: &IngestArgs) -> Result<(), CliError> {
    let loaded = load(&args.input)?;
    let mut staging = Staging::create(&args.output.out, args.output.force)?;
    let mut docs = Vec::new();
    let mut cits = Vec::new();
    citelens_core::corpus::write_canonical(&loaded.graph, &mut docs, &mut cits)?;
    staging.write("documents.csv", &docs)?;
    staging.write("citations.csv", &cits)?;
    staging.write_json(
        "report.json",
        &json!({
            "report": loaded.report,
            "horizon": format_month(loaded.graph.horizon()),
        }),
    )?;
    ctx.finish(staging, args, loaded.inputs, None)
}

fn write_series(staging: &mut Staging, name: &str, series: &BinnedSeries, format: Format) -> Result<String, CliError> {
    let file = format!("{name}.{}", format.ext());
    match format {
        Format::Csv => {
            let bytes = to_vec(|b| series.write_csv(b))?;
            staging.write(&file, &bytes)?;
        }
        Format::Json => staging.write_json(&file, series)?,
    }
    Ok(file)
}

pub fn stats(ctx: &Context, args: &StatsArgs) -> Result<(), CliError> {
    let filter = cohort(&args.cohort)?;
    let age_cohort = month_flag("age-cohort", &args.age_cohort)?;
    if args.fit_range.is_some() && age_cohort.is_none() {
        return Err(CliError::Usage("--fit-range needs --age-cohort".into()));
    }
    if args.bin_months == 0 {
        return Err(CliError::Usage("--bin-months must be positive".into()));
    }
    let loaded = load(&args.input)?;
    let g = &loaded.graph;
    let mut staging = Staging::create(&args.output.out, args.output.force)?;
    let mut sidecar = serde_json::Map::new();
    let fmt = args.format;

    let rebin = |s: BinnedSeries| -> Result<BinnedSeries, CliError> {
        if args.log2_bins && !s.is_empty() {
            Ok(s.log2_rebin(true)?)
        } else {
            Ok(s)
        }
    };

    let (docs, cits) = temporal::activity_series(g, args.bin_months)?;
    for (name, s) in [("activity_documents", docs), ("activity_citations", cits)] {
        let file = write_series(&mut staging, name, &s, fmt)?;
        sidecar.insert(name.into(), json!({"file": file, "normalization": s.normalization, "bin_months": args.bin_months}));
    }

    let counts = temporal::citation_count_distribution(g, &filter)?;
    let s = rebin(counts.series)?;
    let file = write_series(&mut staging, "citation_counts", &s, fmt)?;
    sidecar.insert(
        "citation_counts".into(),
        json!({
            "file": file,
            "normalization": s.normalization,
            "log2_bins": args.log2_bins,
            "documents": counts.documents,
            "fraction_below_ten": counts.fraction_below_ten,
        }),
    );

    let s = temporal::citations_vs_references(g)?;
    let file = write_series(&mut staging, "citations_vs_references", &s, fmt)?;
    sidecar.insert("citations_vs_references".into(), json!({"file": file, "normalization": s.normalization}));

    let first = temporal::time_to_first_citation(g, &filter)?;
    let s = rebin(first.series)?;
    let file = write_series(&mut staging, "first_citation", &s, fmt)?;
    sidecar.insert(
        "first_citation".into(),
        json!({
            "file": file,
            "normalization": s.normalization,
            "log2_bins": args.log2_bins,
            "cohort_size": first.cohort_size,
            "uncited": first.uncited,
        }),
    );

    let last = temporal::last_citation_stats(g, g.horizon())?;
    for (name, s) in [("last_citation_age", last.age_at_last), ("last_citation_since", last.time_since_last)] {
        let file = write_series(&mut staging, name, &s, fmt)?;
        sidecar.insert(name.into(), json!({"file": file, "normalization": s.normalization, "horizon": format_month(g.horizon())}));
    }

    if let Some(month) = age_cohort {
        let s = temporal::citation_age_curve(g, month, args.normalize)?;
        let file = write_series(&mut staging, "age_curve", &s, fmt)?;
        let fit = args.fit_range.map(|r| temporal::fit_tail(&s, r)).transpose()?;
        sidecar.insert(
            "age_curve".into(),
            json!({
                "file": file,
                "normalization": s.normalization,
                "cohort": format_month(month),
                "tail_fit": fit,
            }),
        );
    }

    staging.write_json("series.json", &sidecar)?;
    ctx.finish(staging, args, loaded.inputs, None)
}

#[derive(Serialize)]
struct CascadeJson<'a> {
    windows: &'a CascadeWindows,
    censored: usize,
    filtered_out: usize,
    rows: Vec<CascadeRow<'a>>,
}

#[derive(Serialize)]
struct CascadeRow<'a> {
    doc_id: &'a str,
    t1: String,
    #[serde(rename = "R")]
    r: usize,
    #[serde(rename = "IC")]
    ic: usize,
    #[serde(rename = "E_C")]
    ec: usize,
    #[serde(rename = "D_total")]
    d_total: usize,
    #[serde(rename = "D_mean")]
    d_mean: Option<f64>,
    #[serde(rename = "I")]
    i: usize,
}

pub fn cascade(ctx: &Context, args: &CascadeArgs) -> Result<(), CliError> {
    let filter = cohort(&args.cohort)?;
    let w = windows(&args.windows)?;
    let loaded = load(&args.input)?;
    let table = compute_all(&loaded.graph, &w, &filter)?;
    log::info!("{} rows, {} censored, {} filtered out", table.len(), table.censored, table.filtered_out);
    let mut staging = Staging::create(&args.output.out, args.output.force)?;
    match args.format {
        Format::Csv => {
            let bytes = to_vec(|b| table.write_csv(b))?;
            staging.write("cascade.csv", &bytes)?;
        }
        Format::Json => staging.write_json("cascade.json", &cascade_json(&table))?,
    }
    ctx.finish(staging, args, loaded.inputs, None)
}

fn cascade_json(table: &CascadeTable) -> CascadeJson<'_> {
    CascadeJson {
        windows: &table.windows,
        censored: table.censored,
        filtered_out: table.filtered_out,
        rows: table
            .rows
            .iter()
            .map(|r| CascadeRow {
                doc_id: &r.doc,
                t1: format_month(r.t1),
                r: r.references,
                ic: r.initial_citations,
                ec: r.exposures,
                d_total: r.distractions_total,
                d_mean: r.distractions_mean,
                i: r.infections,
            })
            .collect(),
    }
}

fn write_curves(
    staging: &mut Staging,
    prefix: &str,
    curves: &[ResponseCurve],
    format: Format,
) -> Result<Vec<String>, CliError> {
    let mut files = Vec::new();
    for (k, curve) in curves.iter().enumerate() {
        let label = curve.class_label.as_deref().map_or_else(|| "all".to_string(), file_label);
        let file = format!("{prefix}_{k}_{label}.{}", format.ext());
        match format {
            Format::Csv => {
                let bytes = to_vec(|b| curve.write_csv(b))?;
                staging.write(&file, &bytes)?;
            }
            Format::Json => staging.write_json(&file, curve)?,
        }
        files.push(file);
    }
    Ok(files)
}

fn mi_json(x: Variable, y: &str, z: Variable, t: &MiTriple) -> serde_json::Value {
    json!({"x": x.name(), "y": y, "z": z.name(), "mi": t.mi, "cmi": t.cmi, "ii": t.ii})
}

fn class_spec(variable: Variable, custom: &Option<Vec<f64>>, default: fn() -> ClassSpec) -> Result<ClassSpec, CliError> {
    match custom {
        Some(b) => ClassSpec::from_boundaries(variable, b.clone()).map_err(|e| CliError::Usage(e.to_string())),
        None => Ok(default()),
    }
}

pub fn bias(ctx: &Context, args: &BiasArgs) -> Result<(), CliError> {
    let filter = cohort(&args.cohort)?;
    let w = windows(&args.windows)?;
    let estimator = if args.miller_madow {
        Estimator::MillerMadow
    } else {
        Estimator::PlugIn
    };
    let specs = match args.analysis {
        Analysis::Popularity => Some(class_spec(Variable::InitialCitations, &args.classes, ClassSpec::popularity_default)?),
        Analysis::Halo => Some(class_spec(Variable::Exposures, &args.classes, ClassSpec::exposure_default)?),
        Analysis::Divided => Some(class_spec(Variable::DistractionsMean, &args.classes, ClassSpec::distraction_default)?),
        _ => None,
    };
    let quality = class_spec(Variable::TotalCitations, &args.quality_classes, ClassSpec::quality_default)?;
    if args.analysis == Analysis::Novelty && args.latencies.contains(&0) {
        return Err(CliError::Usage("--latencies must be positive".into()));
    }

    let loaded = load(&args.input)?;
    let mut staging = Staging::create(&args.output.out, args.output.force)?;
    let mut stats = json!({
        "analysis": args.analysis,
        "units": "nats",
        "binning": BINNING,
        "estimator": estimator,
        "windows": w,
    });

    if args.analysis == Analysis::Novelty {
        let points = bias::novelty_curve(&loaded.graph, &args.latencies, &w, &filter)?;
        let file = format!("novelty.{}", args.format.ext());
        match args.format {
            Format::Csv => {
                let mut wtr = csv::Writer::from_writer(Vec::new());
                wtr.write_record(["latency_months", "median_rate", "n"]).map_err(|e| CliError::Data(e.to_string()))?;
                for p in &points {
                    wtr.write_record([p.latency_months.to_string(), p.median_rate.to_string(), p.n.to_string()])
                        .map_err(|e| CliError::Data(e.to_string()))?;
                }
                let bytes = wtr.into_inner().map_err(|e| CliError::Data(e.to_string()))?;
                staging.write(&file, &bytes)?;
            }
            Format::Json => staging.write_json(&file, &points)?,
        }
        stats["novelty"] = json!({"file": file, "points": points});
        staging.write_json("stats.json", &stats)?;
        return ctx.finish(staging, args, loaded.inputs, None);
    }

    let table = compute_all(&loaded.graph, &w, &filter)?;
    stats["rows"] = json!(table.len());
    stats["censored"] = json!(table.censored);
    stats["filtered_out"] = json!(table.filtered_out);

    match args.analysis {
        Analysis::Visibility => {
            let v = bias::visibility_stats(&table)?;
            let curves = bias::exposure_response(&table, Variable::Exposures, None)?;
            let files = write_curves(&mut staging, "curve", &curves, args.format)?;
            stats["visibility"] = json!(v);
            stats["curves"] = json!(files);
        }
        Analysis::Popularity => {
            let spec = specs.expect("popularity classes");
            let r = bias::popularity_analysis(&table, &spec, estimator)?;
            let files = write_curves(&mut staging, "curve", &r.curves, args.format)?;
            stats["classes"] = json!(spec);
            stats["curves"] = json!(files);
            stats["mi"] = json!([mi_json(Variable::Exposures, "I", Variable::InitialCitations, &r.mi)]);
            stats["n"] = json!(r.n);
            stats["excluded_no_initial_citations"] = json!(r.excluded_no_initial_citations);
        }
        Analysis::Halo => {
            let spec = specs.expect("halo classes");
            let r = bias::halo_analysis(&table, &spec, args.min_n)?;
            let curves: Vec<ResponseCurve> = r.classes.iter().map(|c| c.curve.clone()).collect();
            let files = write_curves(&mut staging, "curve", &curves, args.format)?;
            let trends: Vec<_> = r
                .classes
                .iter()
                .map(|c| json!({"class": c.curve.class_label, "trend": c.trend, "n": c.curve.n()}))
                .collect();
            stats["classes"] = json!(spec);
            stats["curves"] = json!(files);
            stats["trends"] = json!(trends);
            stats["min_n"] = json!(r.min_n);
            stats["top_trend"] = json!(r.top_trend());
            stats["halo_detected"] = json!(r.halo_detected());
            stats["excluded_no_initial_citations"] = json!(r.excluded_no_initial_citations);
        }
        Analysis::Divided => {
            let spec = specs.expect("distraction classes");
            let r = bias::divided_attention_analysis(&table, &spec, &quality, estimator)?;
            let by_d = write_curves(&mut staging, "by_distraction", &r.by_distraction, args.format)?;
            let by_q = write_curves(&mut staging, "by_quality", &r.by_quality, args.format)?;
            stats["classes"] = json!(spec);
            stats["quality_classes"] = json!(quality);
            stats["curves"] = json!({"by_distraction": by_d, "by_quality": by_q});
            stats["mi"] = json!([mi_json(Variable::Exposures, "I", Variable::DistractionsMean, &r.mi)]);
            stats["n"] = json!(r.n);
            stats["excluded_no_initial_citations"] = json!(r.excluded_no_initial_citations);
        }
        Analysis::Novelty => unreachable!(),
    }
    staging.write_json("stats.json", &stats)?;
    ctx.finish(staging, args, loaded.inputs, None)
}

#[derive(Serialize)]
struct EffectiveSimulation<'a> {
    generator: &'a GeneratorConfig,
    halo_weight: f64,
}

pub fn simulate(ctx: &Context, args: &SimulateArgs) -> Result<(), CliError> {
    let mut inputs = BTreeMap::new();
    let (mut cfg, mut halo) = match &args.config {
        Some(path) => {
            let bytes = read_input(path, &mut inputs)?;
            let text = String::from_utf8(bytes).map_err(|e| CliError::Usage(format!("{}: {e}", path.display())))?;
            parse_config(&text).map_err(|e| CliError::Usage(format!("{}: {e}", path.display())))?
        }
        None => (GeneratorConfig::default(), 0.0),
    };
    macro_rules! apply {
        ($($field:ident),*) => { $( if let Some(v) = args.$field { cfg.$field = v; } )* };
    }
    apply!(months, docs_per_month, refs_per_doc, recency_exponent, attachment_exponent, copy_prob, fitness_spread, seed);
    if args.refs_per_doc_max.is_some() {
        cfg.refs_per_doc_max = args.refs_per_doc_max;
    }
    if let Some(h) = args.halo_weight {
        halo = h;
    }
    cfg.validate().map_err(|e| CliError::Usage(e.to_string()))?;
    if !(halo.is_finite() && halo >= 0.0) {
        return Err(CliError::Usage(format!("halo_weight must be finite and nonnegative, got {halo}")));
    }

    let mut staging = Staging::create(&args.output.out, args.output.force)?;
    log::info!("generating {} documents", cfg.total_documents());
    let graph = synth::generate_with_halo(&cfg, halo)?;
    let mut docs = Vec::new();
    let mut cits = Vec::new();
    citelens_core::corpus::write_canonical(&graph, &mut docs, &mut cits)?;
    staging.write("documents.csv", &docs)?;
    staging.write("citations.csv", &cits)?;
    let effective = EffectiveSimulation {
        generator: &cfg,
        halo_weight: halo,
    };
    staging.write_json("config.json", &effective)?;
    ctx.finish(staging, &effective, inputs, Some(cfg.seed))
}

/// Generator settings plus an optional `halo_weight` key.
pub fn parse_config(text: &str) -> Result<(GeneratorConfig, f64), String> {
    let mut table: toml::Table = toml::from_str(text).map_err(|e| e.to_string())?;
    let halo = match table.remove("halo_weight") {
        None => 0.0,
        Some(toml::Value::Float(f)) => f,
        Some(toml::Value::Integer(i)) => i as f64,
        Some(other) => return Err(format!("halo_weight must be a number, got {other}")),
    };
    let cfg = GeneratorConfig::deserialize(toml::Value::Table(table)).map_err(|e| e.to_string())?;
    Ok((cfg, halo))
}
