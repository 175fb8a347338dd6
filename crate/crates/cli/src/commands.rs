use std::path::{Path, PathBuf};
use std::time::Instant;

use anyhow::{Context, Result};
use ocl_core::cluster::write_timing_csv;
use ocl_core::metric::write_matrix_csv;
use ocl_core::oracle::run_verification;
use ocl_core::{
    efficiency_bench, export_orders, fit_ocl, pairwise_distances, to_toml, write_csv_rows,
    BenchRow, Dataset, DistanceTable, Error, FitConfig, MetricReport, Metrics, OrderMode, Summary,
    SweepSpec,
};
use serde::{Deserialize, Serialize};

use crate::run::{
    create, load, output_dir, resolve_k, run_seeds, schema_path, seeds, write_text, CliError,
    Method, ResolvedConfig, Run, RunRecord, SummaryBlock,
};
use crate::{
    AblateArgs, BenchArgs, DataArgs, DemoArgs, EfficiencyArgs, ExportArgs, FitArgs, FitOptions,
    OrderArg, VerifyArgs,
};

struct Prepared {
    data: Dataset,
    data_path: PathBuf,
    schema_path: PathBuf,
}

fn prepare(args: &DataArgs) -> Result<Prepared> {
    let schema_path = schema_path(&args.data, args.schema.as_deref());
    let data = load(&args.data, &schema_path, args.missing.into())?;
    Ok(Prepared {
        data,
        data_path: args.data.clone(),
        schema_path,
    })
}

fn base_config(d: &Dataset, opts: &FitOptions) -> Result<FitConfig> {
    let mut cfg = FitConfig::new(resolve_k(d, opts.k)?)
        .with_init(opts.init.into())
        .with_ordinal_policy(opts.ordinal_policy.into());
    cfg.max_outer = opts.max_outer;
    cfg.max_inner = opts.max_inner;
    Ok(cfg)
}

fn summary_line(label: &str, s: &SummaryBlock) -> String {
    let na = || "n/a".to_string();
    format!(
        "{label:<12} CA {:<14} ARI {:<14} NMI {:<14} CMP {}",
        s.ca.clone().unwrap_or_else(na),
        s.ari.clone().unwrap_or_else(na),
        s.nmi.clone().unwrap_or_else(na),
        s.cmp
    )
}

#[derive(Serialize)]
struct FitReport<'a> {
    method: &'a str,
    config: ResolvedConfig,
    summary: SummaryBlock,
    run: Vec<RunRecord>,
}

pub fn fit(args: FitArgs) -> Result<()> {
    let p = prepare(&args.data)?;
    let d = &p.data;
    if args.method != Method::Ocl && args.order_mode != OrderArg::Learned {
        return Err(CliError::Config("--order-mode applies to --method ocl only".into()).into());
    }
    let cfg = base_config(d, &args.fit)?.with_order_mode(args.order_mode.into());
    let seeds = seeds(args.fit.base_seed, args.fit.runs)?;
    let runs = run_seeds(d, args.method, &cfg, &seeds)?;

    let out = &args.out.out;
    output_dir(out)?;
    let records: Vec<RunRecord> = runs.iter().map(|r| r.record.clone()).collect();
    let report = FitReport {
        method: args.method.name(),
        config: ResolvedConfig::new(&p.data_path, &p.schema_path, d, &cfg, &seeds),
        summary: SummaryBlock::of(&records),
        run: records,
    };
    write_text(&out.join("report.toml"), &to_toml(&report)?)?;
    write_assignments(&out.join("assignments.csv"), &runs)?;

    if let Some(best) = best_fit(&runs) {
        let fit = best
            .fit
            .as_ref()
            .expect("best_fit only returns fitted runs");
        write_text(&out.join("orders.toml"), &to_toml(&export_orders(d, fit))?)?;
    }
    if !args.no_trace {
        for run in &runs {
            if let Some(fit) = &run.fit {
                let path = out.join(format!("trace_seed{}.csv", run.record.seed));
                fit.trace.write_csv(create(&path)?)?;
            }
        }
    }
    println!("{}", summary_line(args.method.name(), &report.summary));
    println!("wrote {}", out.display());
    Ok(())
}

/// The fitted run with the lowest objective, earliest seed on ties.
fn best_fit(runs: &[Run]) -> Option<&Run> {
    runs.iter().filter(|r| r.fit.is_some()).min_by(|a, b| {
        let key = |r: &Run| {
            r.fit
                .as_ref()
                .map_or(f64::INFINITY, |f| f.trace.best_objective)
        };
        key(a).total_cmp(&key(b))
    })
}

fn write_assignments(path: &Path, runs: &[Run]) -> Result<()> {
    let mut w = csv::Writer::from_writer(create(path)?);
    let mut header = vec!["sample".to_string()];
    header.extend(runs.iter().map(|r| format!("seed{}", r.record.seed)));
    w.write_record(&header)?;
    let n = runs.first().map_or(0, |r| r.partition.len());
    for i in 0..n {
        let mut row = vec![i.to_string()];
        row.extend(runs.iter().map(|r| r.partition.assignment()[i].to_string()));
        w.write_record(&row)?;
    }
    w.flush()?;
    Ok(())
}

#[derive(Serialize)]
struct DemoRow<'a> {
    method: &'a str,
    seed: u64,
    ca: f64,
}

#[derive(Serialize)]
struct Distribution<'a> {
    method: &'a str,
    runs: usize,
    mean: f64,
    std: f64,
    min: f64,
    q25: f64,
    median: f64,
    q75: f64,
    max: f64,
}

/// Linear-interpolation quantile of sorted values.
fn quantile(sorted: &[f64], q: f64) -> f64 {
    let pos = q * (sorted.len() - 1) as f64;
    let lo = pos.floor() as usize;
    let hi = pos.ceil() as usize;
    sorted[lo] + (sorted[hi] - sorted[lo]) * (pos - lo as f64)
}

fn distribution<'a>(method: &'a str, cas: &[f64]) -> Distribution<'a> {
    let mut sorted = cas.to_vec();
    sorted.sort_by(f64::total_cmp);
    let s = Summary::of(cas);
    Distribution {
        method,
        runs: cas.len(),
        mean: s.mean,
        std: s.std,
        min: sorted[0],
        q25: quantile(&sorted, 0.25),
        median: quantile(&sorted, 0.5),
        q75: quantile(&sorted, 0.75),
        max: sorted[sorted.len() - 1],
    }
}

pub fn demo_orders(args: DemoArgs) -> Result<()> {
    let p = prepare(&args.data)?;
    let d = &p.data;
    if d.labels().is_none() {
        return Err(Error::NoLabels.into());
    }
    let base = base_config(d, &args.fit)?;
    let mut blocks: Vec<(&str, OrderMode, Vec<u64>)> = vec![(
        "wo",
        OrderMode::Hamming,
        seeds(args.fit.base_seed, args.baseline_runs)?,
    )];
    if d.has_ordinal() {
        blocks.push((
            "so",
            OrderMode::Semantic,
            seeds(args.fit.base_seed, args.baseline_runs)?,
        ));
    } else {
        println!("note: no ordinal attributes, semantic-order block omitted");
    }
    blocks.push((
        "ro",
        OrderMode::Random,
        seeds(args.fit.base_seed, args.draws)?,
    ));
    blocks.push((
        "ocl",
        OrderMode::Learned,
        seeds(args.fit.base_seed, args.fit.runs)?,
    ));

    let mut rows = Vec::new();
    let mut dists = Vec::new();
    for (name, mode, seeds) in &blocks {
        let cfg = base.clone().with_order_mode(mode.clone());
        let runs = run_seeds(d, Method::Ocl, &cfg, seeds)?;
        let cas: Vec<f64> = runs.iter().map(|r| r.record.ca.unwrap_or(0.0)).collect();
        for (run, &ca) in runs.iter().zip(&cas) {
            rows.push(DemoRow {
                method: name,
                seed: run.record.seed,
                ca,
            });
        }
        let dist = distribution(name, &cas);
        println!(
            "{name:<4} runs {:>5} mean {:.4} max {:.4}",
            dist.runs, dist.mean, dist.max
        );
        dists.push(dist);
    }

    let out = &args.out.out;
    output_dir(out)?;
    write_csv_rows(create(&out.join("demo_runs.csv"))?, &rows)?;
    write_csv_rows(create(&out.join("demo_summary.csv"))?, &dists)?;
    let all_seeds: Vec<u64> = blocks.iter().flat_map(|b| b.2.clone()).collect();
    let config = ResolvedConfig::new(&p.data_path, &p.schema_path, d, &base, &all_seeds);
    write_text(&out.join("demo_config.toml"), &to_toml(&config)?)?;
    println!("wrote {}", out.display());
    Ok(())
}

fn default_runs() -> usize {
    10
}

#[derive(Debug, Clone, Deserialize, Serialize)]
struct Suite {
    #[serde(default = "default_runs")]
    runs: usize,
    #[serde(default)]
    base_seed: u64,
    methods: Vec<Method>,
    dataset: Vec<SuiteDataset>,
}

#[derive(Debug, Clone, Deserialize, Serialize)]
struct SuiteDataset {
    name: String,
    data: PathBuf,
    schema: Option<PathBuf>,
    k: Option<usize>,
}

fn metric_report(runs: &[Run]) -> Option<MetricReport> {
    let per_seed: Option<Vec<Metrics>> = runs
        .iter()
        .map(|r| {
            Some(Metrics {
                ca: r.record.ca?,
                ari: r.record.ari?,
                nmi: r.record.nmi?,
                cmp: r.record.cmp,
            })
        })
        .collect();
    ocl_core::aggregate(&per_seed?).ok()
}

fn bench_row(dataset: &str, method: Method, runs: Result<Vec<Run>>) -> BenchRow {
    match runs {
        Ok(runs) => {
            let seconds = runs.iter().map(|r| r.record.seconds).sum();
            match metric_report(&runs) {
                Some(report) => BenchRow::from_report(dataset, method.name(), &report, seconds),
                None => BenchRow::failed(dataset, method.name(), "dataset has no labels".into()),
            }
        }
        Err(e) => BenchRow::failed(dataset, method.name(), format!("{e:#}")),
    }
}

fn print_rows(rows: &[BenchRow]) {
    for r in rows {
        match (&r.error, r.ca_mean, r.ca_std) {
            (None, Some(m), Some(s)) => {
                println!("{:<14} {:<12} CA {m:.4}±{s:.2}", r.dataset, r.method)
            }
            (err, _, _) => println!(
                "{:<14} {:<12} failed: {}",
                r.dataset,
                r.method,
                err.as_deref().unwrap_or("no metrics")
            ),
        }
    }
}

#[derive(Serialize)]
struct BenchReport<'a> {
    suite: &'a Suite,
    seeds: Vec<u64>,
}

pub fn bench(args: BenchArgs) -> Result<()> {
    let text = std::fs::read_to_string(&args.suite)
        .with_context(|| format!("cannot read suite {}", args.suite.display()))
        .map_err(|e| CliError::Config(format!("{e:#}")))?;
    let suite: Suite = toml::from_str(&text)
        .map_err(|e| CliError::Config(format!("suite {}: {e}", args.suite.display())))?;
    if suite.methods.is_empty() || suite.dataset.is_empty() {
        return Err(
            CliError::Config("suite needs at least one method and one dataset".into()).into(),
        );
    }
    let seeds = seeds(suite.base_seed, suite.runs)?;
    let root = args.suite.parent().unwrap_or(Path::new("."));

    let mut rows = Vec::new();
    for entry in &suite.dataset {
        let data = root.join(&entry.data);
        let schema = entry
            .schema
            .as_ref()
            .map(|s| root.join(s))
            .unwrap_or_else(|| data.with_extension("toml"));
        let loaded = load(&data, &schema, Default::default()).and_then(|d| {
            let k = resolve_k(&d, entry.k)?;
            Ok((d, k))
        });
        let (d, k) = match loaded {
            Ok(x) => x,
            Err(e) => {
                log::warn!("{}: {e:#}", entry.name);
                for &m in &suite.methods {
                    rows.push(BenchRow::failed(&entry.name, m.name(), format!("{e:#}")));
                }
                continue;
            }
        };
        let cfg = FitConfig::new(k);
        for &m in &suite.methods {
            let start = Instant::now();
            let row = bench_row(&entry.name, m, run_seeds(&d, m, &cfg, &seeds));
            log::info!("{} {} in {:.2?}", entry.name, m.name(), start.elapsed());
            rows.push(row);
        }
    }

    let out = &args.out.out;
    output_dir(out)?;
    write_csv_rows(create(&out.join("bench_matrix.csv"))?, &rows)?;
    let report = BenchReport {
        suite: &suite,
        seeds,
    };
    write_text(&out.join("bench_config.toml"), &to_toml(&report)?)?;
    print_rows(&rows);
    println!("wrote {}", out.display());
    Ok(())
}

pub fn bench_efficiency(args: EfficiencyArgs) -> Result<()> {
    let spec = match &args.spec {
        Some(path) => {
            let text = std::fs::read_to_string(path)
                .map_err(|e| CliError::Config(format!("cannot read {}: {e}", path.display())))?;
            toml::from_str::<SweepSpec>(&text)
                .map_err(|e| CliError::Config(format!("sweep {}: {e}", path.display())))?
        }
        None => SweepSpec {
            axis: args.axis.into(),
            values: args.values.clone(),
            n: args.n,
            s: args.s,
            k: args.k,
            values_per_attribute: args.values_per_attribute,
            seed: args.seed,
            repeats: args.repeats,
        },
    };
    let rows = efficiency_bench(&spec)?;
    for r in &rows {
        println!(
            "n {:>7} s {:>6} k {:>4} {:>9.3}s epochs {} inner {}",
            r.n, r.s, r.k, r.seconds, r.epochs, r.inner_iterations
        );
    }
    let out = &args.out.out;
    output_dir(out)?;
    write_timing_csv(create(&out.join("timing.csv"))?, &rows)?;
    write_text(&out.join("timing_config.toml"), &to_toml(&spec)?)?;
    println!("wrote {}", out.display());
    Ok(())
}

#[derive(Serialize)]
struct AblationReport {
    config: ResolvedConfig,
    methods: Vec<&'static str>,
}

pub fn ablate(args: AblateArgs) -> Result<()> {
    let p = prepare(&args.data)?;
    let d = &p.data;
    if d.labels().is_none() {
        return Err(Error::NoLabels.into());
    }
    let cfg = base_config(d, &args.fit)?;
    let seeds = seeds(args.fit.base_seed, args.fit.runs)?;
    let mut methods = vec![Method::Ocl, Method::OclI, Method::OclIi, Method::OclIii];
    if d.has_ordinal() {
        methods.extend([Method::Lnro, Method::Rnro]);
    }
    let name = p
        .data_path
        .file_stem()
        .and_then(|s| s.to_str())
        .unwrap_or("data")
        .to_string();
    let rows: Vec<BenchRow> = methods
        .iter()
        .map(|&m| bench_row(&name, m, run_seeds(d, m, &cfg, &seeds)))
        .collect();

    let out = &args.out.out;
    output_dir(out)?;
    write_csv_rows(create(&out.join("ablation.csv"))?, &rows)?;
    let report = AblationReport {
        config: ResolvedConfig::new(&p.data_path, &p.schema_path, d, &cfg, &seeds),
        methods: methods.iter().map(|m| m.name()).collect(),
    };
    write_text(&out.join("ablation_config.toml"), &to_toml(&report)?)?;
    print_rows(&rows);
    println!("wrote {}", out.display());
    Ok(())
}

pub fn verify(args: VerifyArgs) -> Result<()> {
    let results = run_verification(args.instances, args.seed);
    let mut failed = Vec::new();
    for r in &results {
        let status = match (r.passed, r.gating) {
            (true, _) => "PASS",
            (false, true) => "FAIL",
            (false, false) => "NOTE",
        };
        println!("{status} {} ({} checks)", r.name, r.checked);
        if let Some(c) = &r.counterexample {
            println!("     counterexample: {c}");
        }
        if r.gating && !r.passed {
            failed.push(r.name);
        }
    }
    if failed.is_empty() {
        Ok(())
    } else {
        Err(CliError::Runtime(format!("failing properties: {}", failed.join(", "))).into())
    }
}

pub fn export_distances(args: ExportArgs) -> Result<()> {
    let p = prepare(&args.data)?;
    let d = &p.data;
    let out = &args.out.out;
    output_dir(out)?;
    let table = if args.hamming {
        DistanceTable::hamming(d)
    } else {
        let cfg = FitConfig::new(resolve_k(d, args.k)?).with_seed(args.seed);
        let fit = fit_ocl(d, &cfg)?;
        write_text(&out.join("orders.toml"), &to_toml(&export_orders(d, &fit))?)?;
        DistanceTable::new(d, &fit.orders, &fit.metrics)?
    };
    let values = pairwise_distances(d, &table)?;
    let path = out.join("distances.csv");
    write_matrix_csv(create(&path)?, d.n_samples(), &values)
        .with_context(|| format!("cannot write {}", path.display()))?;
    println!("wrote {}", path.display());
    Ok(())
}
