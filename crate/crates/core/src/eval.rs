//! External (CA, ARI, NMI) and internal (CMP) validity indices.

use serde::Serialize;

use crate::cluster::Partition;
use crate::data::Dataset;
use crate::error::{Error, Result};

fn check_lengths(pred: &[usize], truth: &[usize]) -> Result<()> {
    if pred.len() != truth.len() {
        return Err(Error::LengthMismatch {
            left: pred.len(),
            right: truth.len(),
        });
    }
    if pred.is_empty() {
        return Err(Error::EmptyDataset);
    }
    Ok(())
}

/// Confusion counts with rows indexed by `pred` and columns by `truth`.
pub fn contingency(pred: &[usize], truth: &[usize]) -> Vec<Vec<u64>> {
    let rows = pred.iter().max().map_or(0, |&m| m + 1);
    let cols = truth.iter().max().map_or(0, |&m| m + 1);
    let mut table = vec![vec![0u64; cols]; rows];
    for (&p, &t) in pred.iter().zip(truth) {
        table[p][t] += 1;
    }
    table
}

/// Minimum-cost perfect matching on a square matrix (Hungarian method with
/// potentials). Returns the column matched to each row.
pub fn min_cost_assignment(cost: &[Vec<i64>]) -> Vec<usize> {
    let n = cost.len();
    if n == 0 {
        return Vec::new();
    }
    const INF: i64 = i64::MAX / 4;
    // 1-based arrays; column 0 is a virtual start.
    let mut u = vec![0i64; n + 1];
    let mut v = vec![0i64; n + 1];
    let mut owner = vec![0usize; n + 1];
    let mut way = vec![0usize; n + 1];
    for i in 1..=n {
        owner[0] = i;
        let mut j0 = 0;
        let mut minv = vec![INF; n + 1];
        let mut used = vec![false; n + 1];
        loop {
            used[j0] = true;
            let i0 = owner[j0];
            let mut delta = INF;
            let mut j1 = 0;
            for j in 1..=n {
                if used[j] {
                    continue;
                }
                let cur = cost[i0 - 1][j - 1] - u[i0] - v[j];
                if cur < minv[j] {
                    minv[j] = cur;
                    way[j] = j0;
                }
                if minv[j] < delta {
                    delta = minv[j];
                    j1 = j;
                }
            }
            for j in 0..=n {
                if used[j] {
                    u[owner[j]] += delta;
                    v[j] -= delta;
                } else {
                    minv[j] -= delta;
                }
            }
            j0 = j1;
            if owner[j0] == 0 {
                break;
            }
        }
        loop {
            let j1 = way[j0];
            owner[j0] = owner[j1];
            j0 = j1;
            if j0 == 0 {
                break;
            }
        }
    }
    let mut row_to_col = vec![0usize; n];
    for j in 1..=n {
        if owner[j] > 0 {
            row_to_col[owner[j] - 1] = j - 1;
        }
    }
    row_to_col
}

/// Fraction of samples correctly labelled under the best one-to-one matching
/// of clusters to classes.
pub fn clustering_accuracy(pred: &[usize], truth: &[usize]) -> Result<f64> {
    check_lengths(pred, truth)?;
    let table = contingency(pred, truth);
    let size = table.len().max(table[0].len());
    let cost: Vec<Vec<i64>> = (0..size)
        .map(|i| {
            (0..size)
                .map(|j| -(table.get(i).and_then(|r| r.get(j)).copied().unwrap_or(0) as i64))
                .collect()
        })
        .collect();
    let matching = min_cost_assignment(&cost);
    let hits: i64 = matching.iter().enumerate().map(|(i, &j)| -cost[i][j]).sum();
    Ok(hits as f64 / pred.len() as f64)
}

fn comb2(x: u64) -> f64 {
    (x as f64) * (x as f64 - 1.0) / 2.0
}

/// Pair-counting adjusted Rand index; 1 when the expected and maximal index
/// coincide (for instance two all-singleton partitions).
pub fn adjusted_rand_index(pred: &[usize], truth: &[usize]) -> Result<f64> {
    check_lengths(pred, truth)?;
    let table = contingency(pred, truth);
    let n = pred.len() as u64;
    let index: f64 = table.iter().flatten().map(|&c| comb2(c)).sum();
    let rows: f64 = table.iter().map(|r| comb2(r.iter().sum())).sum();
    let cols: f64 = (0..table[0].len())
        .map(|j| comb2(table.iter().map(|r| r[j]).sum()))
        .sum();
    let total = comb2(n);
    let expected = if total > 0.0 {
        rows * cols / total
    } else {
        0.0
    };
    let max = (rows + cols) / 2.0;
    let denom = max - expected;
    if denom == 0.0 {
        return Ok(1.0);
    }
    Ok((index - expected) / denom)
}

fn entropy(counts: impl Iterator<Item = u64>, n: f64) -> f64 {
    counts
        .filter(|&c| c > 0)
        .map(|c| {
            let p = c as f64 / n;
            -p * p.ln()
        })
        .sum()
}

/// Mutual information over the arithmetic mean of the two entropies.
/// A constant partition scores 0 unless both are constant (then 1).
pub fn normalized_mutual_info(pred: &[usize], truth: &[usize]) -> Result<f64> {
    check_lengths(pred, truth)?;
    let table = contingency(pred, truth);
    let n = pred.len() as f64;
    let rows: Vec<u64> = table.iter().map(|r| r.iter().sum()).collect();
    let cols: Vec<u64> = (0..table[0].len())
        .map(|j| table.iter().map(|r| r[j]).sum())
        .collect();
    let hp = entropy(rows.iter().copied(), n);
    let ht = entropy(cols.iter().copied(), n);
    let pred_constant = rows.iter().filter(|&&c| c > 0).count() <= 1;
    let truth_constant = cols.iter().filter(|&&c| c > 0).count() <= 1;
    if pred_constant && truth_constant {
        return Ok(1.0);
    }
    if pred_constant || truth_constant {
        return Ok(0.0);
    }
    let mut mi = 0.0;
    for (i, row) in table.iter().enumerate() {
        for (j, &c) in row.iter().enumerate() {
            if c == 0 {
                continue;
            }
            let c = c as f64;
            mi += c / n * (n * c / (rows[i] as f64 * cols[j] as f64)).ln();
        }
    }
    let nmi = mi / ((hp + ht) / 2.0);
    Ok(nmi.clamp(0.0, 1.0))
}

/// Mean within-cluster value entropy normalized by `ln l_r`, over non-empty
/// clusters and attributes with more than one value. Lower is more compact.
pub fn compactness(d: &Dataset, pred: &Partition) -> Result<f64> {
    if pred.len() != d.n_samples() {
        return Err(Error::LengthMismatch {
            left: pred.len(),
            right: d.n_samples(),
        });
    }
    let prof = crate::metric::compute_profile(d, pred);
    let attrs: Vec<usize> = (0..d.n_categorical())
        .filter(|&r| d.cardinality(r) > 1)
        .collect();
    let clusters: Vec<usize> = (0..pred.k()).filter(|&m| !prof.is_empty(m)).collect();
    if attrs.is_empty() || clusters.is_empty() {
        return Ok(0.0);
    }
    let mut total = 0.0;
    for &m in &clusters {
        for &r in &attrs {
            let h: f64 = prof
                .probabilities(m, r)
                .iter()
                .filter(|&&p| p > 0.0)
                .map(|&p| -p * p.ln())
                .sum();
            total += h / (d.cardinality(r) as f64).ln();
        }
    }
    Ok(total / (attrs.len() * clusters.len()) as f64)
}

/// The four indices of one run.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Metrics {
    pub ca: f64,
    pub ari: f64,
    pub nmi: f64,
    pub cmp: f64,
}

/// All indices of `pred` against the dataset's labels.
pub fn evaluate(d: &Dataset, pred: &Partition) -> Result<Metrics> {
    let truth = &d.labels().ok_or(Error::NoLabels)?.codes;
    let p = pred.assignment();
    Ok(Metrics {
        ca: clustering_accuracy(p, truth)?,
        ari: adjusted_rand_index(p, truth)?,
        nmi: normalized_mutual_info(p, truth)?,
        cmp: compactness(d, pred)?,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Summary {
    pub mean: f64,
    /// Sample standard deviation; 0 for a single run.
    pub std: f64,
}

impl Summary {
    pub fn of(values: &[f64]) -> Self {
        let n = values.len();
        if n == 0 {
            return Self {
                mean: f64::NAN,
                std: f64::NAN,
            };
        }
        let mean = values.iter().sum::<f64>() / n as f64;
        let std = if n < 2 {
            0.0
        } else {
            (values.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / (n - 1) as f64).sqrt()
        };
        Self { mean, std }
    }
}

impl std::fmt::Display for Summary {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "{:.4}±{:.2}", self.mean, self.std)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MetricReport {
    pub ca: Summary,
    pub ari: Summary,
    pub nmi: Summary,
    pub cmp: Summary,
    pub per_seed: Vec<Metrics>,
}

pub fn aggregate(per_seed: &[Metrics]) -> Result<MetricReport> {
    if per_seed.is_empty() {
        return Err(Error::InvalidArgument(
            "aggregate needs at least one run".into(),
        ));
    }
    let col = |f: fn(&Metrics) -> f64| Summary::of(&per_seed.iter().map(f).collect::<Vec<_>>());
    Ok(MetricReport {
        ca: col(|m| m.ca),
        ari: col(|m| m.ari),
        nmi: col(|m| m.nmi),
        cmp: col(|m| m.cmp),
        per_seed: per_seed.to_vec(),
    })
}
