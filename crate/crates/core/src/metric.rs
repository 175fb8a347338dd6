//! Order distance between samples and clusters, and the clustering objective.
//!
//! With ranks `o(·)` on attribute `r` of cardinality `l_r`, the distance
//! between values `x` and `v` is `|o(x) - o(v)| / (l_r - 1)`. A sample's
//! distance to a cluster is the mean over attributes of its distance vector
//! weighted by the cluster's value probabilities.

use std::io::Write;

use rayon::prelude::*;

use crate::cluster::Partition;
use crate::data::Dataset;
use crate::error::{Error, Result};
use crate::order::OrderSet;

/// How a single attribute measures value differences.
#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum AttributeMetric {
    /// Normalized rank difference under the attribute's order.
    Order,
    /// 0 for equal values, 1 otherwise.
    Hamming,
}

/// How a sample's distance vector is reduced against a cluster.
#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Theta {
    /// `d_{i,r}ᵀ p_{m,r}`.
    Weighted,
    /// Distance to the cluster's most frequent value only.
    Mode,
}

/// Per-cluster value probabilities `p_{m,r,g}` and the raw counts behind them.
#[derive(Debug, Clone, PartialEq)]
pub struct ClusterProfile {
    k: usize,
    offsets: Vec<usize>,
    counts: Vec<u32>,
    probs: Vec<f64>,
    sizes: Vec<usize>,
}

pub(crate) fn value_offsets(cards: &[usize]) -> Vec<usize> {
    let mut offsets = Vec::with_capacity(cards.len() + 1);
    let mut acc = 0;
    offsets.push(0);
    for &l in cards {
        acc += l;
        offsets.push(acc);
    }
    offsets
}

impl ClusterProfile {
    pub fn k(&self) -> usize {
        self.k
    }

    pub fn n_attributes(&self) -> usize {
        self.offsets.len() - 1
    }

    pub fn sizes(&self) -> &[usize] {
        &self.sizes
    }

    pub fn is_empty(&self, m: usize) -> bool {
        self.sizes[m] == 0
    }

    /// Clusters holding at least one sample.
    pub fn effective_k(&self) -> usize {
        self.sizes.iter().filter(|&&s| s > 0).count()
    }

    /// `p_{m,r}`; all zeros for an empty cluster.
    pub fn probabilities(&self, m: usize, r: usize) -> &[f64] {
        let width = self.width();
        &self.probs[m * width + self.offsets[r]..m * width + self.offsets[r + 1]]
    }

    pub fn counts(&self, m: usize, r: usize) -> &[u32] {
        let width = self.width();
        &self.counts[m * width + self.offsets[r]..m * width + self.offsets[r + 1]]
    }

    /// Most frequent value of attribute `r` in cluster `m`, lowest index on ties.
    pub fn mode(&self, m: usize, r: usize) -> u32 {
        let counts = self.counts(m, r);
        let mut best = 0;
        for (g, &c) in counts.iter().enumerate() {
            if c > counts[best] {
                best = g;
            }
        }
        best as u32
    }

    fn width(&self) -> usize {
        *self.offsets.last().unwrap()
    }
}

/// Relative frequency of every value within every cluster.
pub fn compute_profile(d: &Dataset, q: &Partition) -> ClusterProfile {
    let k = q.k();
    let offsets = value_offsets(&d.cardinalities());
    let width = *offsets.last().unwrap();
    let mut counts = vec![0u32; k * width];
    let mut sizes = vec![0usize; k];
    for (i, &m) in q.assignment().iter().enumerate() {
        sizes[m] += 1;
        let base = m * width;
        for (r, &x) in d.row(i).iter().enumerate() {
            counts[base + offsets[r] + x as usize] += 1;
        }
    }
    let probs = counts
        .iter()
        .enumerate()
        .map(|(j, &c)| {
            let size = sizes[j / width.max(1)];
            if size == 0 {
                0.0
            } else {
                c as f64 / size as f64
            }
        })
        .collect();
    ClusterProfile {
        k,
        offsets,
        counts,
        probs,
        sizes,
    }
}

/// Normalized rank differences between the value with index `g` and every
/// value of an attribute whose ranks are `ranks`.
pub fn order_distance_vector(g: u32, ranks: &[u32]) -> Result<Vec<f64>> {
    let l = ranks.len();
    if l < 2 {
        return Err(Error::DegenerateAttribute { attribute: 0 });
    }
    crate::data::check_permutation(ranks)?;
    let own = ranks
        .get(g as usize)
        .copied()
        .ok_or_else(|| Error::InvalidArgument(format!("value index {g} out of range")))?;
    let scale = (l - 1) as f64;
    Ok(ranks
        .iter()
        .map(|&o| (own as f64 - o as f64).abs() / scale)
        .collect())
}

/// Value-to-value distances per attribute: an `l_r × l_r` matrix for each
/// attribute. Row `x` is the distance vector of any sample whose value is `x`.
#[derive(Debug, Clone, PartialEq)]
pub struct DistanceTable {
    cards: Vec<usize>,
    matrices: Vec<Vec<f64>>,
}

impl DistanceTable {
    pub fn new(d: &Dataset, o: &OrderSet, metrics: &[AttributeMetric]) -> Result<Self> {
        o.check_against(d)?;
        if metrics.len() != d.n_categorical() {
            return Err(Error::LengthMismatch {
                left: metrics.len(),
                right: d.n_categorical(),
            });
        }
        let cards = d.cardinalities();
        let matrices = cards
            .iter()
            .enumerate()
            .map(|(r, &l)| {
                let ranks = o.ranks(r);
                let scale = (l - 1) as f64;
                let mut mat = vec![0.0; l * l];
                for x in 0..l {
                    for g in 0..l {
                        mat[x * l + g] = match metrics[r] {
                            AttributeMetric::Hamming => f64::from(u8::from(x != g)),
                            AttributeMetric::Order => {
                                (ranks[x] as f64 - ranks[g] as f64).abs() / scale
                            }
                        };
                    }
                }
                mat
            })
            .collect();
        Ok(Self { cards, matrices })
    }

    pub fn from_orders(d: &Dataset, o: &OrderSet) -> Result<Self> {
        Self::new(d, o, &vec![AttributeMetric::Order; d.n_categorical()])
    }

    pub fn hamming(d: &Dataset) -> Self {
        let o = OrderSet::identity(&d.cardinalities());
        Self::new(d, &o, &vec![AttributeMetric::Hamming; d.n_categorical()])
            .expect("identity order fits its own dataset")
    }

    pub fn n_attributes(&self) -> usize {
        self.cards.len()
    }

    /// Distance vector `d_{·,r}` for a sample holding value `x` on attribute `r`.
    pub fn vector(&self, r: usize, x: u32) -> &[f64] {
        let l = self.cards[r];
        &self.matrices[r][x as usize * l..(x as usize + 1) * l]
    }

    pub fn between(&self, r: usize, x: u32, y: u32) -> f64 {
        self.matrices[r][x as usize * self.cards[r] + y as usize]
    }
}

/// `θ` of every (cluster, attribute, value) triple, so assignment costs one
/// lookup per attribute.
#[derive(Debug, Clone)]
pub struct CostTable {
    k: usize,
    offsets: Vec<usize>,
    cost: Vec<f64>,
    empty: Vec<bool>,
}

impl CostTable {
    pub fn new(prof: &ClusterProfile, dist: &DistanceTable, theta: Theta) -> Self {
        let k = prof.k();
        let offsets = prof.offsets.clone();
        let width = prof.width();
        let mut cost = vec![0.0; k * width];
        for m in 0..k {
            if prof.is_empty(m) {
                continue;
            }
            for r in 0..offsets.len() - 1 {
                let l = offsets[r + 1] - offsets[r];
                let p = prof.probabilities(m, r);
                let mode = prof.mode(m, r);
                for x in 0..l {
                    let dv = dist.vector(r, x as u32);
                    cost[m * width + offsets[r] + x] = match theta {
                        Theta::Weighted => dv.iter().zip(p).map(|(a, b)| a * b).sum(),
                        Theta::Mode => dv[mode as usize],
                    };
                }
            }
        }
        Self {
            k,
            offsets,
            cost,
            empty: prof.sizes.iter().map(|&s| s == 0).collect(),
        }
    }

    pub fn theta(&self, m: usize, r: usize, x: u32) -> f64 {
        self.cost[m * self.width() + self.offsets[r] + x as usize]
    }

    /// `Σ_r θ` for sample `row` against cluster `m` (not yet divided by `s`).
    pub fn summed(&self, m: usize, row: &[u32]) -> f64 {
        let base = m * self.width();
        row.iter()
            .zip(&self.offsets)
            .map(|(&x, &off)| self.cost[base + off + x as usize])
            .sum()
    }

    pub fn is_empty(&self, m: usize) -> bool {
        self.empty[m]
    }

    pub fn k(&self) -> usize {
        self.k
    }

    fn width(&self) -> usize {
        *self.offsets.last().unwrap()
    }
}

/// `Θ(x_i, C_m)`: mean over attributes of `d_{i,r}ᵀ p_{m,r}`.
pub fn sample_cluster_distance(
    d: &Dataset,
    i: usize,
    m: usize,
    dist: &DistanceTable,
    prof: &ClusterProfile,
) -> Result<f64> {
    if prof.is_empty(m) {
        return Err(Error::EmptyCluster(m));
    }
    let s = d.n_categorical();
    if s == 0 {
        return Ok(0.0);
    }
    let total: f64 = d
        .row(i)
        .iter()
        .enumerate()
        .map(|(r, &x)| {
            dist.vector(r, x)
                .iter()
                .zip(prof.probabilities(m, r))
                .map(|(a, b)| a * b)
                .sum::<f64>()
        })
        .sum();
    Ok(total / s as f64)
}

/// The objective and its per-cluster, per-attribute and per-value parts.
///
/// `per_value[m][r][g]` sums `θ` over the samples of cluster `m` holding
/// value `g`; `per_cluster_attribute[m][r]` sums those over `g`; `total`
/// divides the grand sum by the number of attributes.
#[derive(Debug, Clone, PartialEq)]
pub struct ObjectiveReport {
    pub total: f64,
    k: usize,
    s: usize,
    offsets: Vec<usize>,
    per_cluster_attribute: Vec<f64>,
    per_value: Vec<f64>,
}

impl ObjectiveReport {
    pub fn k(&self) -> usize {
        self.k
    }

    pub fn n_attributes(&self) -> usize {
        self.s
    }

    /// `L_{m,r}`.
    pub fn cluster_attribute(&self, m: usize, r: usize) -> f64 {
        self.per_cluster_attribute[m * self.s + r]
    }

    /// `L_{m,r,g}` for every `g`.
    pub fn per_value(&self, m: usize, r: usize) -> &[f64] {
        let width = *self.offsets.last().unwrap();
        &self.per_value[m * width + self.offsets[r]..m * width + self.offsets[r + 1]]
    }
}

/// Objective of `prof` under precomputed costs.
pub fn objective_from_costs(prof: &ClusterProfile, costs: &CostTable) -> ObjectiveReport {
    let k = prof.k();
    let s = prof.n_attributes();
    let width = prof.width();
    let mut per_value = vec![0.0; k * width];
    let mut per_cluster_attribute = vec![0.0; k * s];
    for m in 0..k {
        if prof.is_empty(m) {
            continue;
        }
        for r in 0..s {
            let counts = prof.counts(m, r);
            let mut acc = 0.0;
            for (g, &c) in counts.iter().enumerate() {
                let part = c as f64 * costs.theta(m, r, g as u32);
                per_value[m * width + prof.offsets[r] + g] = part;
                acc += part;
            }
            per_cluster_attribute[m * s + r] = acc;
        }
    }
    let grand: f64 = per_cluster_attribute.iter().sum();
    let total = if s == 0 { 0.0 } else { grand / s as f64 };
    ObjectiveReport {
        total,
        k,
        s,
        offsets: prof.offsets.clone(),
        per_cluster_attribute,
        per_value,
    }
}

/// Objective of partition `q` under orders `o` with probability-weighted
/// order distance on every attribute.
pub fn objective(d: &Dataset, q: &Partition, o: &OrderSet) -> Result<ObjectiveReport> {
    check_partition(d, q)?;
    let prof = compute_profile(d, q);
    let dist = DistanceTable::from_orders(d, o)?;
    Ok(objective_from_costs(
        &prof,
        &CostTable::new(&prof, &dist, Theta::Weighted),
    ))
}

pub(crate) fn check_partition(d: &Dataset, q: &Partition) -> Result<()> {
    if q.len() != d.n_samples() {
        return Err(Error::LengthMismatch {
            left: q.len(),
            right: d.n_samples(),
        });
    }
    Ok(())
}

/// Row-major `n × n` matrix of mean per-attribute distances between samples.
pub fn pairwise_distances(d: &Dataset, dist: &DistanceTable) -> Result<Vec<f64>> {
    let n = d.n_samples();
    crate::oracle::guard("pairwise distance matrix", n, 20_000)?;
    let s = d.n_categorical().max(1) as f64;
    let rows: Vec<Vec<f64>> = (0..n)
        .into_par_iter()
        .map(|i| {
            let a = d.row(i);
            (0..n)
                .map(|j| {
                    let b = d.row(j);
                    let sum: f64 = a
                        .iter()
                        .zip(b)
                        .enumerate()
                        .map(|(r, (&x, &y))| dist.between(r, x, y))
                        .sum();
                    sum / s
                })
                .collect()
        })
        .collect();
    Ok(rows.concat())
}

/// Writes an `n × n` matrix as headerless CSV.
pub fn write_matrix_csv<W: Write>(mut out: W, n: usize, values: &[f64]) -> std::io::Result<()> {
    for row in values.chunks(n.max(1)) {
        let line: Vec<String> = row.iter().map(|v| format!("{v}")).collect();
        writeln!(out, "{}", line.join(","))?;
    }
    Ok(())
}
