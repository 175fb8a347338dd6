//! Shared plumbing: dataset loading, method dispatch over seeds, report files.

use std::fs;
use std::path::{Path, PathBuf};
use std::time::Instant;

use anyhow::{Context, Result};
use clap::ValueEnum;
use ocl_core::{
    compactness, evaluate, fit_kmodes, fit_kprototypes, fit_mixed, fit_ocl, load_csv, Ablation,
    Dataset, ErrorClass, FitConfig, FitOutcome, MissingPolicy, OrdinalPolicy, Partition, Schema,
    Summary,
};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("{0}")]
    Config(String),
    #[error("{0}")]
    Runtime(String),
}

impl CliError {
    pub fn class(&self) -> ErrorClass {
        match self {
            CliError::Config(_) => ErrorClass::Config,
            CliError::Runtime(_) => ErrorClass::Runtime,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Method {
    /// Joint order and partition learning.
    Ocl,
    /// Mode-based distance instead of probability weighting.
    OclI,
    /// Orders learned once.
    OclIi,
    /// Probability-weighted Hamming distance, no orders.
    OclIii,
    /// Declared orders kept on ordinal attributes, nominal ones learned.
    Lnro,
    /// Declared orders kept on ordinal attributes, nothing learned.
    Rnro,
    /// Plain k-modes.
    Kmodes,
    /// k-means on learned-order codes plus numerical columns.
    KmsOcl,
    /// k-prototypes with Hamming distance on categorical columns.
    Kprototypes,
}

impl Method {
    pub fn name(self) -> &'static str {
        match self {
            Method::Ocl => "ocl",
            Method::OclI => "ocl-i",
            Method::OclIi => "ocl-ii",
            Method::OclIii => "ocl-iii",
            Method::Lnro => "lnro",
            Method::Rnro => "rnro",
            Method::Kmodes => "kmodes",
            Method::KmsOcl => "kms-ocl",
            Method::Kprototypes => "kprototypes",
        }
    }

    fn configure(self, mut cfg: FitConfig) -> FitConfig {
        match self {
            Method::OclI => cfg.ablation = Ablation::NoProbWeight,
            Method::OclIi => cfg.ablation = Ablation::SingleOrderUpdate,
            Method::OclIii => cfg.ablation = Ablation::HammingOnly,
            Method::Lnro => cfg.ordinal_policy = OrdinalPolicy::PreserveOrdinal,
            Method::Rnro => cfg.ordinal_policy = OrdinalPolicy::PreserveAll,
            _ => {}
        }
        cfg
    }
}

pub fn schema_path(data: &Path, schema: Option<&Path>) -> PathBuf {
    schema
        .map(Path::to_path_buf)
        .unwrap_or_else(|| data.with_extension("toml"))
}

pub fn load(data: &Path, schema: &Path, policy: MissingPolicy) -> Result<Dataset> {
    let schema = Schema::load(schema)?;
    let d = load_csv(data, &schema, policy)?;
    for dropped in d.degenerate() {
        log::warn!(
            "attribute {} has a single observed value and is ignored",
            dropped.name
        );
    }
    Ok(d)
}

pub fn resolve_k(d: &Dataset, k: Option<usize>) -> Result<usize> {
    match (k, d.labels()) {
        (Some(k), _) => Ok(k),
        (None, Some(l)) => Ok(l.num_classes()),
        (None, None) => Err(CliError::Config(
            "--k is required when the schema has no label column".into(),
        )
        .into()),
    }
}

pub fn seeds(base: u64, runs: usize) -> Result<Vec<u64>> {
    if runs == 0 {
        return Err(CliError::Config("--runs must be at least 1".into()).into());
    }
    Ok((0..runs as u64).map(|i| base + i).collect())
}

pub fn output_dir(dir: &Path) -> Result<()> {
    fs::create_dir_all(dir)
        .map_err(|e| CliError::Config(format!("cannot create {}: {e}", dir.display())).into())
}

/// Everything measured for one seed.
#[derive(Debug, Clone, Serialize)]
pub struct RunRecord {
    pub seed: u64,
    pub ca: Option<f64>,
    pub ari: Option<f64>,
    pub nmi: Option<f64>,
    pub cmp: f64,
    pub objective: Option<f64>,
    pub epochs: Option<usize>,
    pub order_updates: Option<usize>,
    pub inner_iterations: Option<usize>,
    pub seconds: f64,
}

pub struct Run {
    pub record: RunRecord,
    pub partition: Partition,
    pub fit: Option<FitOutcome>,
}

pub fn run_once(d: &Dataset, method: Method, base: &FitConfig, seed: u64) -> Result<Run> {
    let start = Instant::now();
    let cfg = method.configure(base.clone().with_seed(seed));
    let (partition, fit) = match method {
        Method::Kmodes => (fit_kmodes(d, cfg.k, seed)?.0, None),
        Method::Kprototypes => (fit_kprototypes(d, cfg.k, None, seed)?.0, None),
        Method::KmsOcl => {
            let f = fit_mixed(d, &cfg)?;
            (f.partition.clone(), Some(f))
        }
        _ => {
            let f = fit_ocl(d, &cfg)?;
            (f.partition.clone(), Some(f))
        }
    };
    let seconds = start.elapsed().as_secs_f64();
    let metrics = if d.labels().is_some() {
        Some(evaluate(d, &partition)?)
    } else {
        None
    };
    let trace = fit.as_ref().map(|f| &f.trace);
    let record = RunRecord {
        seed,
        ca: metrics.map(|m| m.ca),
        ari: metrics.map(|m| m.ari),
        nmi: metrics.map(|m| m.nmi),
        cmp: match metrics {
            Some(m) => m.cmp,
            None => compactness(d, &partition)?,
        },
        objective: trace.map(|t| t.best_objective),
        epochs: trace.map(|t| t.inner_counts.len()),
        order_updates: trace.map(|t| t.order_updates),
        inner_iterations: trace.map(|t| t.total_inner_iterations()),
        seconds,
    };
    Ok(Run {
        record,
        partition,
        fit,
    })
}

/// Runs `method` once per seed, in parallel, keeping seed order.
pub fn run_seeds(d: &Dataset, method: Method, base: &FitConfig, seeds: &[u64]) -> Result<Vec<Run>> {
    seeds
        .par_iter()
        .map(|&s| run_once(d, method, base, s))
        .collect()
}

#[derive(Debug, Clone, Serialize)]
pub struct SummaryBlock {
    pub ca: Option<String>,
    pub ari: Option<String>,
    pub nmi: Option<String>,
    pub cmp: String,
    pub ca_mean: Option<f64>,
    pub ca_std: Option<f64>,
    pub ari_mean: Option<f64>,
    pub ari_std: Option<f64>,
    pub nmi_mean: Option<f64>,
    pub nmi_std: Option<f64>,
    pub cmp_mean: f64,
    pub cmp_std: f64,
    pub seconds: f64,
}

impl SummaryBlock {
    pub fn of(runs: &[RunRecord]) -> Self {
        let col = |f: fn(&RunRecord) -> Option<f64>| -> Option<Summary> {
            let xs: Option<Vec<f64>> = runs.iter().map(f).collect();
            xs.map(|xs| Summary::of(&xs))
        };
        let ca = col(|r| r.ca);
        let ari = col(|r| r.ari);
        let nmi = col(|r| r.nmi);
        let cmp = Summary::of(&runs.iter().map(|r| r.cmp).collect::<Vec<_>>());
        Self {
            ca: ca.map(|s| s.to_string()),
            ari: ari.map(|s| s.to_string()),
            nmi: nmi.map(|s| s.to_string()),
            cmp: cmp.to_string(),
            ca_mean: ca.map(|s| s.mean),
            ca_std: ca.map(|s| s.std),
            ari_mean: ari.map(|s| s.mean),
            ari_std: ari.map(|s| s.std),
            nmi_mean: nmi.map(|s| s.mean),
            nmi_std: nmi.map(|s| s.std),
            cmp_mean: cmp.mean,
            cmp_std: cmp.std,
            seconds: runs.iter().map(|r| r.seconds).sum(),
        }
    }
}

/// Resolved settings echoed into every report.
#[derive(Debug, Clone, Serialize)]
pub struct ResolvedConfig {
    pub dataset: String,
    pub schema: String,
    pub samples: usize,
    pub categorical_attributes: usize,
    pub numerical_attributes: usize,
    pub k: usize,
    pub init: String,
    pub order_mode: String,
    pub ordinal_policy: String,
    pub max_outer: usize,
    pub max_inner: usize,
    pub base_seed: u64,
    pub seeds: Vec<u64>,
}

impl ResolvedConfig {
    pub fn new(data: &Path, schema: &Path, d: &Dataset, cfg: &FitConfig, seeds: &[u64]) -> Self {
        Self {
            dataset: data.display().to_string(),
            schema: schema.display().to_string(),
            samples: d.n_samples(),
            categorical_attributes: d.n_categorical(),
            numerical_attributes: d.n_numerical(),
            k: cfg.k,
            init: format!("{:?}", cfg.init),
            order_mode: cfg.order_mode.name().into(),
            ordinal_policy: format!("{:?}", cfg.ordinal_policy),
            max_outer: cfg.max_outer,
            max_inner: cfg.max_inner,
            base_seed: seeds.first().copied().unwrap_or(0),
            seeds: seeds.to_vec(),
        }
    }
}

pub fn write_text(path: &Path, text: &str) -> Result<()> {
    fs::write(path, text).with_context(|| format!("cannot write {}", path.display()))
}

pub fn create(path: &Path) -> Result<fs::File> {
    fs::File::create(path).with_context(|| format!("cannot write {}", path.display()))
}
