//! Acceptance checks. Runs as a plain binary under `cargo test` and prints
//! one PASS/FAIL line per criterion; exits nonzero if any criterion fails.

#[path = "../../core/tests/common/mod.rs"]
mod common;

use std::fs;
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::path::Path;
use std::process::Command;
use std::time::{Duration, Instant};

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Exp, Normal};

use citelens_core::bias::{
    divided_attention_analysis, halo_analysis, novelty_curve, visibility_stats, ClassSpec, Trend, Variable,
    VisibilityStats,
};
use citelens_core::infotheory::{conditional_mi, interaction_information, mi_triple, mutual_information, Bin, Estimator};
use citelens_core::synth::{generate, generate_with_halo, GeneratorConfig};
use citelens_core::temporal::{citation_age_curve, fit_tail, BinnedSeries, Normalization};
use citelens_core::{compute_all, compute_cascade, AnomalyPolicy, CascadeWindows, CohortFilter, ExposureCounting};
use common::oracle::cascade_rows;

type Outcome = Result<String, String>;
type Criterion = (&'static str, fn() -> Outcome);

fn check(cond: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(msg())
    }
}

fn c1_cascade_oracle() -> Outcome {
    let start = Instant::now();
    let mut rows = 0;
    for seed in 0..1000u64 {
        let raw = common::random_corpus(seed, 50, 300);
        let g = raw.graph();
        let (l, e, extra) = (1 + seed as u32 % 30, 1 + seed as u32 % 13, seed as u32 % 17);
        let distinct = seed % 2 == 1;
        let w = CascadeWindows::new(l, e, e + extra).unwrap().with_counting(if distinct {
            ExposureCounting::DistinctDocuments
        } else {
            ExposureCounting::PerEdge
        });
        let expected = cascade_rows(&raw, l as i32, e as i32, (e + extra) as i32, distinct);
        let got = match compute_all(&g, &w, &CohortFilter::all()) {
            Ok(t) => t.rows,
            Err(citelens_core::Error::Empty(_)) => Vec::new(),
            Err(err) => return Err(format!("seed {seed}: {err}")),
        };
        let got: Vec<_> = got
            .iter()
            .map(|r| {
                (
                    r.doc.clone(),
                    r.t1,
                    r.references,
                    r.initial_citations,
                    r.exposures,
                    r.distractions_total,
                    r.infections,
                    r.total_citations,
                )
            })
            .collect();
        let want: Vec<_> = expected
            .iter()
            .map(|r| (r.doc.clone(), r.t1, r.r, r.ic, r.ec, r.d_total, r.i, r.total))
            .collect();
        check(got == want, || format!("seed {seed}: library and edge scan disagree"))?;
        rows += got.len();
    }
    let elapsed = start.elapsed();
    check(elapsed < Duration::from_secs(30), || format!("took {elapsed:?}"))?;
    Ok(format!("1000 graphs, {rows} rows identical, {elapsed:.2?}"))
}

fn c2_g1_row() -> Outcome {
    let dir = Path::new(env!("CARGO_MANIFEST_DIR")).join("../core/tests/fixtures/g1");
    let (g, _) = citelens_core::corpus::ingest_files(&dir.join("documents.csv"), &dir.join("citations.csv"), AnomalyPolicy::Fail)
        .map_err(|e| e.to_string())?;
    let g = g.with_horizon(48).map_err(|e| e.to_string())?;
    let b = compute_cascade(&g, "B", &CascadeWindows::new(24, 12, 24).unwrap()).map_err(|e| e.to_string())?;
    let got = (b.references, b.initial_citations, b.exposures, b.distractions_total, b.distractions_mean, b.infections);
    check(got == (0, 2, 2, 1, Some(0.5), 2), || format!("got {got:?}"))?;
    Ok("R=0 IC=2 E_C=2 D_total=1 D_mean=0.5 I=2".into())
}

fn repeat(cells: &[(&[Bin], usize)]) -> Vec<Vec<Bin>> {
    let arity = cells[0].0.len();
    let mut cols = vec![Vec::new(); arity];
    for (values, count) in cells {
        for _ in 0..*count {
            for (col, v) in cols.iter_mut().zip(values.iter()) {
                col.push(*v);
            }
        }
    }
    cols
}

fn c3_mi_fixtures() -> Outcome {
    let ln2 = std::f64::consts::LN_2;
    let e = |r: citelens_core::Result<f64>| r.map_err(|e| e.to_string());

    let ind = repeat(&[(&[0, 0], 5), (&[0, 1], 5), (&[1, 0], 5), (&[1, 1], 5)]);
    let mi = e(mutual_information(&ind[0], &ind[1]))?;
    check(mi.abs() < 1e-12, || format!("independent MI {mi}"))?;

    let same = repeat(&[(&[0, 0], 7), (&[1, 1], 7)]);
    let mi = e(mutual_information(&same[0], &same[1]))?;
    check((mi - ln2).abs() < 1e-12, || format!("copy MI {mi}"))?;

    let joint = repeat(&[(&[0, 0], 3), (&[0, 1], 1), (&[1, 0], 1), (&[1, 1], 3)]);
    let mi = e(mutual_information(&joint[0], &joint[1]))?;
    // 2·(3/8)·ln(3/2) + 2·(1/8)·ln(1/2)
    let want = 0.75 * 1.5f64.ln() + 0.25 * 0.5f64.ln();
    check((mi - want).abs() < 1e-12 && (mi - 0.130812).abs() < 1e-6, || format!("[[3,1],[1,3]] MI {mi}"))?;

    let xor = repeat(&[(&[0, 0, 0], 4), (&[0, 1, 1], 4), (&[1, 0, 1], 4), (&[1, 1, 0], 4)]);
    let t = mi_triple(&xor[0], &xor[1], &xor[2], Estimator::PlugIn).map_err(|e| e.to_string())?;
    check(t.mi.abs() < 1e-12, || format!("xor MI {}", t.mi))?;
    check((t.cmi - ln2).abs() < 1e-12, || format!("xor CMI {}", t.cmi))?;
    let ii = e(interaction_information(&xor[0], &xor[1], &xor[2]))?;
    check((ii - (t.cmi - t.mi)).abs() < 1e-12 && ii > 0.0, || format!("xor II {ii}"))?;

    let red = repeat(&[(&[0, 0, 0], 6), (&[1, 1, 1], 6)]);
    let ii = e(interaction_information(&red[0], &red[1], &red[2]))?;
    let cmi = e(conditional_mi(&red[0], &red[1], &red[2]))?;
    check((ii + ln2).abs() < 1e-12 && cmi.abs() < 1e-12, || format!("redundant II {ii}"))?;
    Ok(format!("0, ln 2, {want:.6}, xor CMI = ln 2, II = CMI - MI (xor +, redundant -)"))
}

fn c4_visibility_recovery() -> Outcome {
    let (a, b, c) = (0.43, 0.07, 0.6);
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    let ic_d = Exp::<f64>::new(1.0 / 10.0).unwrap();
    let ec_d = Exp::<f64>::new(1.0 / 40.0).unwrap();
    let noise = Normal::new(0.0, 0.05).unwrap();
    let (mut ic, mut ec, mut i) = (Vec::new(), Vec::new(), Vec::new());
    for _ in 0..10_000 {
        let x1 = ic_d.sample(&mut rng).floor();
        let x2 = ec_d.sample(&mut rng).floor();
        ic.push(x1);
        ec.push(x2);
        i.push((a * x1 + b * x2 + c) * (1.0 + noise.sample(&mut rng)));
    }
    let v = VisibilityStats::from_columns(&ic, &ec, &i).map_err(|e| e.to_string())?;
    let msg = format!("a={:.4} b={:.4} c={:.4} r_combined={:.4}", v.a, v.b, v.c, v.r_combined);
    check((v.a - a).abs() <= 0.02 && (v.b - b).abs() <= 0.02 && (v.c - c).abs() <= 0.02, || msg.clone())?;
    check(v.r_combined > 0.99, || msg.clone())?;
    Ok(msg)
}

fn c5_novelty() -> Outcome {
    let start = Instant::now();
    let cfg = GeneratorConfig {
        months: 200,
        docs_per_month: 100,
        refs_per_doc: 60,
        recency_exponent: 1.5,
        seed: 1,
        ..Default::default()
    };
    let g = generate(&cfg).map_err(|e| e.to_string())?;
    let base = CascadeWindows::new(12, 12, 24).unwrap();
    let points = novelty_curve(&g, &[12, 24, 36, 48, 60], &base, &CohortFilter::all()).map_err(|e| e.to_string())?;
    let medians: Vec<f64> = points.iter().map(|p| p.median_rate).collect();
    let elapsed = start.elapsed();
    let msg = format!("medians {medians:.4?} in {elapsed:.2?}");
    check(medians.windows(2).all(|w| w[1] < w[0]), || msg.clone())?;
    check(elapsed < Duration::from_secs(120), || msg.clone())?;
    Ok(msg)
}

fn copying_r(p: f64) -> Result<(f64, usize), String> {
    let cfg = GeneratorConfig {
        months: 200,
        docs_per_month: 100,
        refs_per_doc: 20,
        recency_exponent: 2.0,
        copy_prob: p,
        seed: 2,
        ..Default::default()
    };
    let g = generate(&cfg).map_err(|e| e.to_string())?;
    let t = compute_all(&g, &CascadeWindows::default(), &CohortFilter::months(Some(48), None)).map_err(|e| e.to_string())?;
    let v = visibility_stats(&t).map_err(|e| e.to_string())?;
    Ok((v.r_ec, v.n))
}

fn c6_copying() -> Outcome {
    let (r_copy, n) = copying_r(0.5)?;
    let (r_null, _) = copying_r(0.0)?;
    let msg = format!("p=0.5 r={r_copy:.4}, p=0 r={r_null:.4} ({n} rows)");
    check(r_copy > 0.2 && r_null.abs() < 0.1, || msg.clone())?;
    Ok(msg)
}

fn c7_halo() -> Outcome {
    let cfg = GeneratorConfig {
        months: 200,
        docs_per_month: 100,
        refs_per_doc: 10,
        recency_exponent: 1.5,
        attachment_exponent: 0.0,
        fitness_spread: 0.1,
        seed: 5,
        ..Default::default()
    };
    let w = CascadeWindows::new(3, 12, 24).unwrap();
    let spec = ClassSpec::from_boundaries(Variable::Exposures, vec![0.0, 2.0, 8.0]).unwrap();
    let run = |h: f64| -> Result<Vec<Trend>, String> {
        let g = generate_with_halo(&cfg, h).map_err(|e| e.to_string())?;
        let t = compute_all(&g, &w, &CohortFilter::months(Some(48), None)).map_err(|e| e.to_string())?;
        let r = halo_analysis(&t, &spec, 20).map_err(|e| e.to_string())?;
        Ok(r.classes.iter().map(|c| c.trend).collect())
    };
    let null = run(0.0)?;
    let planted = run(5.0)?;
    let msg = format!("h=0 trends {null:?}, h=5 trends {planted:?}");
    check(null.iter().all(|t| matches!(t, Trend::Nondecreasing | Trend::Undetermined)), || msg.clone())?;
    check(null.last() == Some(&Trend::Nondecreasing), || msg.clone())?;
    check(planted.last() == Some(&Trend::Decreasing), || msg.clone())?;
    Ok(msg)
}

fn c8_divided_attention() -> Outcome {
    let cfg = GeneratorConfig {
        months: 200,
        docs_per_month: 100,
        refs_per_doc: 2,
        refs_per_doc_max: Some(40),
        copy_prob: 1.0,
        recency_exponent: 1.5,
        seed: 6,
        ..Default::default()
    };
    let g = generate(&cfg).map_err(|e| e.to_string())?;
    let t = compute_all(&g, &CascadeWindows::new(3, 12, 12).unwrap(), &CohortFilter::months(Some(48), None))
        .map_err(|e| e.to_string())?;
    let r = divided_attention_analysis(&t, &ClassSpec::distraction_default(), &ClassSpec::quality_default(), Estimator::PlugIn)
        .map_err(|e| e.to_string())?;
    let curve = |label: &str| {
        r.by_distraction
            .iter()
            .find(|c| c.class_label.as_deref() == Some(label))
            .ok_or_else(|| format!("no `{label}` class"))
    };
    let (few, many) = (curve("few")?, curve("many")?);
    let (mut num, mut den) = (0.0, 0.0);
    let mut per_bin = Vec::new();
    for a in &few.points {
        let Some(b) = many.point_at(a.x_lo) else { continue };
        if a.x_lo < 1.0 || a.n < 20 || b.n < 20 {
            continue;
        }
        let (ra, rb) = (a.mean_y / a.x_mean, b.mean_y / b.x_mean);
        let wgt = a.n.min(b.n) as f64;
        num += wgt * ra;
        den += wgt * rb;
        per_bin.push((a.x_lo, ra / rb));
    }
    let pooled = num / den;
    let msg = format!("pooled ratio {pooled:.3}, per E_C bin {per_bin:.2?}");
    check(per_bin.len() >= 2, || msg.clone())?;
    check(pooled >= 1.5 && per_bin.iter().all(|&(_, q)| q >= 1.5), || msg.clone())?;
    Ok(msg)
}

fn c9_collapse() -> Outcome {
    let cfg = GeneratorConfig {
        months: 480,
        docs_per_month: 100,
        refs_per_doc: 10,
        recency_exponent: 1.5,
        seed: 7,
        ..Default::default()
    };
    let g = generate(&cfg).map_err(|e| e.to_string())?;
    let a = citation_age_curve(&g, 240, true).map_err(|e| e.to_string())?;
    let b = citation_age_curve(&g, 360, true).map_err(|e| e.to_string())?;
    let mut sup: f64 = 0.0;
    let mut common = 0;
    for (lo, _, vb) in b.bins() {
        if let (Some(va), Some(vb)) = (a.value_at(lo), vb) {
            sup = sup.max((va - vb).abs());
            common += 1;
        }
    }
    let msg = format!("sup distance {sup:.4} over {common} common ages");
    check(common >= 60 && sup < 0.05, || msg.clone())?;
    Ok(msg)
}

fn power_series(exponent: f64, noise: Option<(u64, f64)>) -> BinnedSeries {
    let mut rng = noise.map(|(seed, _)| ChaCha8Rng::seed_from_u64(seed));
    let values = (1..=120)
        .map(|dt| {
            let v = 50.0 * (dt as f64).powf(exponent);
            Some(match (&mut rng, noise) {
                (Some(r), Some((_, sd))) => v * (1.0 + Normal::new(0.0, sd).unwrap().sample(r)),
                _ => v,
            })
        })
        .collect();
    BinnedSeries::unit(1, values, Normalization::RawCount)
}

fn c10_tail_fit() -> Outcome {
    let clean = fit_tail(&power_series(-2.3, None), (1.0, 120.0)).map_err(|e| e.to_string())?;
    let noisy = fit_tail(&power_series(-1.4, Some((10, 0.01))), (1.0, 120.0)).map_err(|e| e.to_string())?;
    let msg = format!("noiseless {:.8}, 1% noise {:.4}", clean.exponent, noisy.exponent);
    check((clean.exponent + 2.3).abs() <= 1e-6, || msg.clone())?;
    check((noisy.exponent + 1.4).abs() <= 0.05, || msg.clone())?;
    Ok(msg)
}

fn cli(args: &[&str]) -> Result<(), String> {
    let o = Command::new(env!("CARGO_BIN_EXE_citelens"))
        .args(args)
        .output()
        .map_err(|e| e.to_string())?;
    check(o.status.success(), || {
        format!("{args:?}: {}", String::from_utf8_lossy(&o.stderr).trim())
    })
}

fn outputs(dir: &Path) -> Result<Vec<(String, Vec<u8>)>, String> {
    let mut files = Vec::new();
    for entry in fs::read_dir(dir).map_err(|e| e.to_string())? {
        let entry = entry.map_err(|e| e.to_string())?;
        let name = entry.file_name().to_string_lossy().into_owned();
        if name != "manifest.json" {
            files.push((name, fs::read(entry.path()).map_err(|e| e.to_string())?));
        }
    }
    files.sort();
    Ok(files)
}

fn c11_cli_determinism() -> Outcome {
    let tmp = tempfile::tempdir().map_err(|e| e.to_string())?;
    let root = tmp.path();
    let path = |p: &str| root.join(p).to_string_lossy().into_owned();
    let mut compared = 0;
    let runs = ["1", "4", "4"];
    for (k, threads) in runs.iter().enumerate() {
        let sim = path(&format!("sim{k}"));
        cli(&[
            "simulate", "--months", "96", "--docs-per-month", "60", "--refs-per-doc", "8", "--copy-prob", "0.3",
            "--halo-weight", "1", "--seed", "11", "--threads", threads, "--out", &sim,
        ])?;
        let docs = format!("{sim}/documents.csv");
        let cits = format!("{sim}/citations.csv");
        let input = ["--documents", docs.as_str(), "--citations", cits.as_str()];
        let mut jobs: Vec<(String, Vec<&str>)> = vec![
            ("ingest".into(), vec!["ingest"]),
            ("stats".into(), vec!["stats", "--age-cohort", "1802-01", "--fit-range", "2:40"]),
            ("cascade".into(), vec!["cascade", "--latency-months", "6", "--exposure-months", "6", "--infection-months", "12"]),
        ];
        for analysis in ["visibility", "novelty", "popularity", "halo", "divided"] {
            jobs.push((
                analysis.into(),
                vec!["bias", "--analysis", analysis, "--latency-months", "6", "--exposure-months", "6", "--infection-months", "12", "--latencies", "3,6,9"],
            ));
        }
        for (name, mut job) in jobs {
            let out = path(&format!("{name}{k}"));
            job.extend_from_slice(&input);
            job.extend_from_slice(&["--threads", threads, "--out", &out]);
            cli(&job)?;
        }
    }
    for name in ["sim", "ingest", "stats", "cascade", "visibility", "novelty", "popularity", "halo", "divided"] {
        let first = outputs(&root.join(format!("{name}0")))?;
        check(!first.is_empty(), || format!("{name}: no outputs"))?;
        for (k, threads) in runs.iter().enumerate().skip(1) {
            let other = outputs(&root.join(format!("{name}{k}")))?;
            check(first == other, || format!("{name}: outputs differ between --threads 1 and --threads {threads}"))?;
        }
        compared += first.len();
    }
    Ok(format!("{compared} output files byte-identical across --threads 1, 4, 4"))
}

fn main() {
    let criteria: [Criterion; 11] = [
        ("cascade oracle equivalence", c1_cascade_oracle),
        ("G1 document B row", c2_g1_row),
        ("MI analytic fixtures", c3_mi_fixtures),
        ("visibility recovery", c4_visibility_recovery),
        ("novelty regime", c5_novelty),
        ("visibility/copying regime", c6_copying),
        ("halo null and planted halo", c7_halo),
        ("divided attention", c8_divided_attention),
        ("normalization collapse", c9_collapse),
        ("tail fit", c10_tail_fit),
        ("CLI determinism", c11_cli_determinism),
    ];
    let mut failed = 0;
    for (k, (name, f)) in criteria.iter().enumerate() {
        let start = Instant::now();
        let outcome = catch_unwind(AssertUnwindSafe(f)).unwrap_or_else(|p| {
            Err(p
                .downcast_ref::<String>()
                .cloned()
                .or_else(|| p.downcast_ref::<&str>().map(|s| s.to_string()))
                .unwrap_or_else(|| "panicked".into()))
        });
        let secs = start.elapsed().as_secs_f64();
        match outcome {
            Ok(detail) => println!("PASS {:>2} {name}: {detail} [{secs:.1}s]", k + 1),
            Err(detail) => {
                failed += 1;
                println!("FAIL {:>2} {name}: {detail} [{secs:.1}s]", k + 1);
            }
        }
    }
    println!("acceptance: {} passed, {failed} failed", criteria.len() - failed);
    if failed > 0 {
        std::process::exit(1);
    }
}
