//! Clustering drivers: joint order and partition learning, k-modes, fixed-order
//! variants, ablations, the mixed-data pipeline and a k-prototypes baseline.

use std::io::Write;
use std::time::{Duration, Instant};

use rand::seq::{index, SliceRandom};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::data::{synthesize, Dataset};
use crate::error::{Error, Result};
use crate::metric::{
    compute_profile, objective_from_costs, AttributeMetric, ClusterProfile, CostTable,
    DistanceTable, ObjectiveReport, Theta,
};
use crate::order::{learn_orders_from, OrderSet};

/// Hard assignment of every sample to one of `k` clusters.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Partition {
    assignment: Vec<usize>,
    k: usize,
}

impl Partition {
    pub fn new(assignment: Vec<usize>, k: usize) -> Result<Self> {
        if k == 0 {
            return Err(Error::InvalidArgument("k must be at least 1".into()));
        }
        if let Some(&bad) = assignment.iter().find(|&&m| m >= k) {
            return Err(Error::InvalidArgument(format!(
                "cluster id {bad} out of range for k = {k}"
            )));
        }
        Ok(Self { assignment, k })
    }

    /// Random labels with every cluster non-empty when `n >= k`.
    pub fn random<R: Rng + ?Sized>(n: usize, k: usize, rng: &mut R) -> Result<Self> {
        if k == 0 {
            return Err(Error::InvalidArgument("k must be at least 1".into()));
        }
        let mut assignment: Vec<usize> = (0..n).map(|_| rng.random_range(0..k)).collect();
        let mut order: Vec<usize> = (0..n).collect();
        order.shuffle(rng);
        for (m, &i) in order.iter().take(k).enumerate() {
            assignment[i] = m;
        }
        Self::new(assignment, k)
    }

    pub fn assignment(&self) -> &[usize] {
        &self.assignment
    }

    pub fn into_assignment(self) -> Vec<usize> {
        self.assignment
    }

    pub fn k(&self) -> usize {
        self.k
    }

    pub fn len(&self) -> usize {
        self.assignment.len()
    }

    pub fn is_empty(&self) -> bool {
        self.assignment.is_empty()
    }

    pub fn sizes(&self) -> Vec<usize> {
        let mut sizes = vec![0; self.k];
        for &m in &self.assignment {
            sizes[m] += 1;
        }
        sizes
    }

    /// Number of clusters holding at least one sample.
    pub fn effective_k(&self) -> usize {
        self.sizes().iter().filter(|&&s| s > 0).count()
    }

    /// Renames cluster `m` to `perm[m]`.
    pub fn relabel(&self, perm: &[usize]) -> Result<Self> {
        if perm.len() != self.k {
            return Err(Error::LengthMismatch {
                left: perm.len(),
                right: self.k,
            });
        }
        Self::new(self.assignment.iter().map(|&m| perm[m]).collect(), self.k)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum InitMode {
    /// Start from one converged k-modes run.
    #[default]
    KmodesOnce,
    /// Start from uniformly random labels.
    RandomPartition,
}

#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub enum OrderMode {
    /// Orders relearned between inner loops.
    #[default]
    Learned,
    /// Declared order on ordinal attributes, Hamming on nominal ones.
    Semantic,
    /// One uniform random order per attribute, drawn from the seed.
    Random,
    /// Hamming distance on every attribute.
    Hamming,
    /// Caller-supplied orders, kept fixed.
    Fixed(OrderSet),
}

impl OrderMode {
    pub fn name(&self) -> &'static str {
        match self {
            OrderMode::Learned => "learned",
            OrderMode::Semantic => "semantic",
            OrderMode::Random => "random",
            OrderMode::Hamming => "hamming",
            OrderMode::Fixed(_) => "fixed",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Ablation {
    #[default]
    Full,
    /// Distance to the cluster mode instead of the probability-weighted sum.
    NoProbWeight,
    /// Orders learned once, then only the inner loop runs.
    SingleOrderUpdate,
    /// Probability-weighted Hamming distance, no orders at all.
    HammingOnly,
}

impl Ablation {
    pub fn name(self) -> &'static str {
        match self {
            Ablation::Full => "full",
            Ablation::NoProbWeight => "no_prob_weight",
            Ablation::SingleOrderUpdate => "single_order_update",
            Ablation::HammingOnly => "hamming_only",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum OrdinalPolicy {
    /// Learn orders for nominal and ordinal attributes alike.
    #[default]
    LearnAll,
    /// Keep declared orders on ordinal attributes; learn nominal ones.
    PreserveOrdinal,
    /// Keep declared orders on ordinal attributes and learn nothing.
    PreserveAll,
}

#[derive(Debug, Clone, PartialEq)]
pub struct FitConfig {
    pub k: usize,
    pub init: InitMode,
    pub order_mode: OrderMode,
    pub ablation: Ablation,
    pub ordinal_policy: OrdinalPolicy,
    pub seed: u64,
    /// Cap on order-learning epochs.
    pub max_outer: usize,
    /// Cap on assignment passes per epoch.
    pub max_inner: usize,
    /// Start from random orders instead of dictionary order.
    pub random_initial_order: bool,
}

impl FitConfig {
    pub fn new(k: usize) -> Self {
        Self {
            k,
            init: InitMode::default(),
            order_mode: OrderMode::default(),
            ablation: Ablation::default(),
            ordinal_policy: OrdinalPolicy::default(),
            seed: 0,
            max_outer: 50,
            max_inner: 200,
            random_initial_order: false,
        }
    }

    pub fn with_seed(mut self, seed: u64) -> Self {
        self.seed = seed;
        self
    }

    pub fn with_ablation(mut self, ablation: Ablation) -> Self {
        self.ablation = ablation;
        self
    }

    pub fn with_order_mode(mut self, mode: OrderMode) -> Self {
        self.order_mode = mode;
        self
    }

    pub fn with_ordinal_policy(mut self, policy: OrdinalPolicy) -> Self {
        self.ordinal_policy = policy;
        self
    }

    pub fn with_init(mut self, init: InitMode) -> Self {
        self.init = init;
        self
    }

    fn validate(&self, d: &Dataset) -> Result<()> {
        if self.k == 0 || self.max_outer == 0 || self.max_inner == 0 {
            return Err(Error::InvalidArgument(
                "k, max_outer and max_inner must be at least 1".into(),
            ));
        }
        if self.k > d.n_samples() {
            return Err(Error::InvalidArgument(format!(
                "k = {} exceeds the {} samples",
                self.k,
                d.n_samples()
            )));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct TracePoint {
    /// 0 for the starting state, then one per order-learning epoch.
    pub epoch: usize,
    /// 0 right after the orders were (re)set, then one per assignment pass.
    pub inner: usize,
    pub objective: f64,
    pub order_update: bool,
    /// False only for the terminal non-improving pass of an inner loop.
    pub accepted: bool,
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct FitTrace {
    pub points: Vec<TracePoint>,
    /// Order-learning rounds performed.
    pub learning_rounds: usize,
    /// Learning rounds that changed at least one order.
    pub order_updates: usize,
    /// Assignment passes per epoch, terminal pass included.
    pub inner_counts: Vec<usize>,
    /// Objective of the accepted state at the end of each epoch.
    pub epoch_objectives: Vec<f64>,
    pub initial_objective: f64,
    pub best_objective: f64,
    /// False when a safety cap stopped the run.
    pub converged: bool,
    pub wall_time: Duration,
}

impl FitTrace {
    pub fn total_inner_iterations(&self) -> usize {
        self.inner_counts.iter().sum()
    }

    /// Objective values of accepted states in visiting order.
    pub fn accepted_objectives(&self) -> Vec<f64> {
        self.points
            .iter()
            .filter(|p| p.accepted)
            .map(|p| p.objective)
            .collect()
    }

    /// True when every inner loop strictly decreased over its accepted
    /// passes and every accepted epoch improved on the previous one.
    pub fn is_monotone(&self) -> bool {
        let inner_ok = self
            .points
            .windows(2)
            .filter(|w| w[1].inner > 0 && w[1].accepted)
            .all(|w| w[1].objective < w[0].objective);
        let epochs = std::iter::once(self.initial_objective).chain(
            self.epoch_objectives
                .iter()
                .take(self.epoch_objectives.len().saturating_sub(1))
                .copied(),
        );
        let outer_ok = epochs.collect::<Vec<_>>().windows(2).all(|w| w[1] < w[0]);
        inner_ok && outer_ok
    }

    pub fn write_csv<W: Write>(&self, out: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(out);
        for p in &self.points {
            w.serialize(p)?;
        }
        w.flush().map_err(|e| Error::Csv(e.into()))?;
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct FitOutcome {
    pub partition: Partition,
    pub orders: OrderSet,
    /// Per-attribute distance kind used by the fit.
    pub metrics: Vec<AttributeMetric>,
    /// Consensus scores of the orders returned, for learned attributes.
    pub scores: Vec<Option<Vec<f64>>>,
    pub trace: FitTrace,
}

/// Assigns every sample to its nearest non-empty cluster under
/// probability-weighted distances; ties go to the lowest cluster id.
pub fn assign(d: &Dataset, prof: &ClusterProfile, dist: &DistanceTable) -> Partition {
    let costs = CostTable::new(prof, dist, Theta::Weighted);
    Partition {
        assignment: assign_with_costs(d, &costs),
        k: prof.k(),
    }
}

fn assign_with_costs(d: &Dataset, costs: &CostTable) -> Vec<usize> {
    let k = costs.k();
    (0..d.n_samples())
        .into_par_iter()
        .map(|i| {
            let row = d.row(i);
            let mut best = usize::MAX;
            let mut best_cost = f64::INFINITY;
            for m in 0..k {
                if costs.is_empty(m) {
                    continue;
                }
                let c = costs.summed(m, row);
                if best == usize::MAX || c < best_cost {
                    best = m;
                    best_cost = c;
                }
            }
            best
        })
        .collect()
}

struct Plan {
    metrics: Vec<AttributeMetric>,
    initial: OrderSet,
    learnable: Vec<bool>,
    theta: Theta,
    max_epochs: usize,
}

fn plan(d: &Dataset, cfg: &FitConfig, rng: &mut ChaCha8Rng) -> Result<Plan> {
    let s = d.n_categorical();
    let cards = d.cardinalities();
    let mut metrics = vec![AttributeMetric::Order; s];
    let mut learnable: Vec<bool> = cards.iter().map(|&l| l > 2).collect();
    let mut theta = Theta::Weighted;
    let mut max_epochs = cfg.max_outer;

    let initial = match &cfg.order_mode {
        OrderMode::Learned => {
            let mut o = if cfg.random_initial_order {
                OrderSet::random(&cards, rng)
            } else {
                OrderSet::identity(&cards)
            };
            if cfg.ordinal_policy != OrdinalPolicy::LearnAll {
                let semantic = OrderSet::semantic(d)?;
                for (r, attr) in d.attributes().iter().enumerate() {
                    if attr.is_ordinal() {
                        o.set_ranks(r, semantic.ranks(r).to_vec());
                        learnable[r] = false;
                    } else if cfg.ordinal_policy == OrdinalPolicy::PreserveAll {
                        learnable[r] = false;
                    }
                }
            }
            o
        }
        OrderMode::Semantic => {
            let o = OrderSet::semantic(d)?;
            for (r, attr) in d.attributes().iter().enumerate() {
                if !attr.is_ordinal() {
                    metrics[r] = AttributeMetric::Hamming;
                }
            }
            learnable.fill(false);
            o
        }
        OrderMode::Random => {
            learnable.fill(false);
            OrderSet::random(&cards, rng)
        }
        OrderMode::Hamming => {
            learnable.fill(false);
            metrics.fill(AttributeMetric::Hamming);
            OrderSet::identity(&cards)
        }
        OrderMode::Fixed(o) => {
            o.check_against(d)?;
            learnable.fill(false);
            o.clone()
        }
    };

    match cfg.ablation {
        Ablation::Full => {}
        Ablation::NoProbWeight => theta = Theta::Mode,
        Ablation::SingleOrderUpdate => max_epochs = 1,
        Ablation::HammingOnly => {
            metrics.fill(AttributeMetric::Hamming);
            learnable.fill(false);
        }
    }
    Ok(Plan {
        metrics,
        initial,
        learnable,
        theta,
        max_epochs,
    })
}

struct State {
    partition: Partition,
    profile: ClusterProfile,
    report: ObjectiveReport,
}

fn evaluate(d: &Dataset, q: Partition, dist: &DistanceTable, theta: Theta) -> (State, CostTable) {
    let profile = compute_profile(d, &q);
    let costs = CostTable::new(&profile, dist, theta);
    let report = objective_from_costs(&profile, &costs);
    (
        State {
            partition: q,
            profile,
            report,
        },
        costs,
    )
}

fn initial_partition(d: &Dataset, cfg: &FitConfig, rng: &mut ChaCha8Rng) -> Result<Partition> {
    match cfg.init {
        InitMode::KmodesOnce => Ok(fit_kmodes(d, cfg.k, cfg.seed)?.0),
        InitMode::RandomPartition => Partition::random(d.n_samples(), cfg.k, rng),
    }
}

/// Alternates assignment/profile refresh (inner loop) with order learning
/// (outer loop) and returns the lowest-objective state visited.
pub fn fit_ocl(d: &Dataset, cfg: &FitConfig) -> Result<FitOutcome> {
    cfg.validate(d)?;
    let start = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    rng.set_stream(1);
    let plan = plan(d, cfg, &mut rng)?;
    let q0 = initial_partition(d, cfg, &mut rng)?;
    let learning = plan.learnable.iter().any(|&b| b);

    let mut orders = plan.initial.clone();
    let mut scores: Vec<Option<Vec<f64>>> = vec![None; orders.len()];
    let dist = DistanceTable::new(d, &orders, &plan.metrics)?;
    let (mut state, _) = evaluate(d, q0, &dist, plan.theta);

    let mut trace = FitTrace {
        initial_objective: state.report.total,
        converged: true,
        ..FitTrace::default()
    };
    trace.points.push(TracePoint {
        epoch: 0,
        inner: 0,
        objective: state.report.total,
        order_update: false,
        accepted: true,
    });
    let mut best = (
        state.report.total,
        state.partition.clone(),
        orders.clone(),
        scores.clone(),
    );
    let mut previous_epoch = state.report.total;

    for epoch in 1..=plan.max_epochs {
        if learning {
            let learned =
                learn_orders_from(&state.profile, &state.report, &orders, &plan.learnable)?;
            trace.learning_rounds += 1;
            if learned.orders != orders {
                trace.order_updates += 1;
            }
            orders = learned.orders;
            scores = learned.scores;
        }
        let dist = DistanceTable::new(d, &orders, &plan.metrics)?;
        let (fresh, mut costs) = evaluate(d, state.partition, &dist, plan.theta);
        state = fresh;
        trace.points.push(TracePoint {
            epoch,
            inner: 0,
            objective: state.report.total,
            order_update: learning,
            accepted: true,
        });

        let mut passes = 0;
        loop {
            if passes == cfg.max_inner {
                trace.converged = false;
                log::warn!("inner loop hit the cap of {} passes", cfg.max_inner);
                break;
            }
            passes += 1;
            let q = Partition {
                assignment: assign_with_costs(d, &costs),
                k: cfg.k,
            };
            let (next, next_costs) = evaluate(d, q, &dist, plan.theta);
            let improved = next.report.total < state.report.total;
            trace.points.push(TracePoint {
                epoch,
                inner: passes,
                objective: next.report.total,
                order_update: false,
                accepted: improved,
            });
            if !improved {
                break;
            }
            state = next;
            costs = next_costs;
        }
        trace.inner_counts.push(passes);
        let reached = state.report.total;
        trace.epoch_objectives.push(reached);
        if reached < best.0 {
            best = (
                reached,
                state.partition.clone(),
                orders.clone(),
                scores.clone(),
            );
        }
        if !learning || reached >= previous_epoch {
            break;
        }
        previous_epoch = reached;
        if epoch == plan.max_epochs && plan.max_epochs == cfg.max_outer {
            trace.converged = false;
            log::warn!("outer loop hit the cap of {} epochs", cfg.max_outer);
        }
    }

    trace.best_objective = best.0;
    trace.wall_time = start.elapsed();
    Ok(FitOutcome {
        partition: best.1,
        orders: best.2,
        metrics: plan.metrics,
        scores: best.3,
        trace,
    })
}

/// Inner loop only, with `o` held fixed on every attribute.
pub fn fit_fixed_order(d: &Dataset, k: usize, o: &OrderSet, seed: u64) -> Result<FitOutcome> {
    let cfg = FitConfig::new(k)
        .with_seed(seed)
        .with_order_mode(OrderMode::Fixed(o.clone()));
    fit_ocl(d, &cfg)
}

const KMODES_MAX_ITER: usize = 100;

/// Mode-based k-modes with Hamming distance. Initial modes are `k` distinct
/// samples drawn from `seed`; empty clusters keep their previous mode.
pub fn fit_kmodes(d: &Dataset, k: usize, seed: u64) -> Result<(Partition, FitTrace)> {
    let n = d.n_samples();
    if k == 0 || k > n {
        return Err(Error::InvalidArgument(format!(
            "k = {k} must lie in 1..={n}"
        )));
    }
    let start = Instant::now();
    let s = d.n_categorical();
    let cards = d.cardinalities();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut modes: Vec<Vec<u32>> = index::sample(&mut rng, n, k)
        .into_iter()
        .map(|i| d.row(i).to_vec())
        .collect();

    let mut trace = FitTrace {
        converged: false,
        ..FitTrace::default()
    };
    let mut previous: Option<Vec<usize>> = None;
    let mut iterations = 0;
    while iterations < KMODES_MAX_ITER {
        iterations += 1;
        let (assignment, costs): (Vec<usize>, Vec<usize>) = (0..n)
            .into_par_iter()
            .map(|i| {
                let row = d.row(i);
                let mut best = (0, usize::MAX);
                for (m, mode) in modes.iter().enumerate() {
                    let c = row.iter().zip(mode).filter(|(a, b)| a != b).count();
                    if c < best.1 {
                        best = (m, c);
                    }
                }
                best
            })
            .unzip();
        let cost = costs.iter().sum::<usize>() as f64 / s.max(1) as f64;
        trace.points.push(TracePoint {
            epoch: 0,
            inner: iterations,
            objective: cost,
            order_update: false,
            accepted: true,
        });
        if previous.as_ref() == Some(&assignment) {
            trace.converged = true;
            break;
        }
        let q = Partition {
            assignment: assignment.clone(),
            k,
        };
        let prof = compute_profile(d, &q);
        for (m, mode) in modes.iter_mut().enumerate() {
            if prof.is_empty(m) {
                continue;
            }
            for (r, v) in mode.iter_mut().enumerate().take(cards.len()) {
                *v = prof.mode(m, r);
            }
        }
        previous = Some(assignment);
    }
    trace.inner_counts.push(iterations);
    let last = trace.points.last().map(|p| p.objective).unwrap_or(0.0);
    trace.initial_objective = trace.points.first().map(|p| p.objective).unwrap_or(0.0);
    trace.best_objective = last;
    trace.epoch_objectives.push(last);
    trace.wall_time = start.elapsed();
    let partition = Partition::new(previous.unwrap_or_default(), k)?;
    Ok((partition, trace))
}

/// Categorical cells encoded as `(rank - 1) / (l_r - 1)` under `orders`.
pub fn encode_ranks(d: &Dataset, orders: &OrderSet) -> Result<Vec<f64>> {
    orders.check_against(d)?;
    let s = d.n_categorical();
    let mut out = Vec::with_capacity(d.n_samples() * s);
    for i in 0..d.n_samples() {
        for (r, &x) in d.row(i).iter().enumerate() {
            let l = d.cardinality(r) as f64;
            out.push((orders.ranks(r)[x as usize] as f64 - 1.0) / (l - 1.0));
        }
    }
    Ok(out)
}

/// Learns categorical orders, then runs k-means on the rank-encoded
/// categorical columns joined with min-max scaled numerical columns.
pub fn fit_mixed(d: &Dataset, cfg: &FitConfig) -> Result<FitOutcome> {
    if d.n_numerical() == 0 {
        return Err(Error::NoNumericalAttributes);
    }
    let stage1 = fit_ocl(d, cfg)?;
    let features = mixed_features(d, &stage1.orders)?;
    let dim = d.n_categorical() + d.n_numerical();
    let assignment = kmeans(&features, dim, cfg.k, cfg.seed)?;
    Ok(FitOutcome {
        partition: Partition::new(assignment, cfg.k)?,
        ..stage1
    })
}

fn mixed_features(d: &Dataset, orders: &OrderSet) -> Result<Vec<f64>> {
    let cat = encode_ranks(d, orders)?;
    let normalized = d.normalize_numerical();
    let sc = d.n_categorical();
    let su = d.n_numerical();
    let mut features = Vec::with_capacity(d.n_samples() * (sc + su));
    for i in 0..d.n_samples() {
        features.extend_from_slice(&cat[i * sc..(i + 1) * sc]);
        features.extend_from_slice(normalized.numerical_row(i));
    }
    Ok(features)
}

const KMEANS_MAX_ITER: usize = 300;

fn squared(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum()
}

/// Lloyd's k-means with k-means++ seeding over row-major `points`.
pub fn kmeans(points: &[f64], dim: usize, k: usize, seed: u64) -> Result<Vec<usize>> {
    let n = points.len().checked_div(dim).unwrap_or(0);
    if k == 0 || k > n {
        return Err(Error::InvalidArgument(format!(
            "k = {k} must lie in 1..={n}"
        )));
    }
    let row = |i: usize| &points[i * dim..(i + 1) * dim];
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(2);

    let mut centers: Vec<Vec<f64>> = vec![row(rng.random_range(0..n)).to_vec()];
    let mut nearest: Vec<f64> = (0..n).map(|i| squared(row(i), &centers[0])).collect();
    while centers.len() < k {
        let total: f64 = nearest.iter().sum();
        let pick = if total > 0.0 {
            let mut target = rng.random::<f64>() * total;
            let mut chosen = n - 1;
            for (i, &w) in nearest.iter().enumerate() {
                if target < w {
                    chosen = i;
                    break;
                }
                target -= w;
            }
            chosen
        } else {
            rng.random_range(0..n)
        };
        centers.push(row(pick).to_vec());
        let c = centers.last().unwrap();
        for (i, v) in nearest.iter_mut().enumerate() {
            *v = v.min(squared(row(i), c));
        }
    }

    let mut assignment = vec![usize::MAX; n];
    for _ in 0..KMEANS_MAX_ITER {
        let next: Vec<usize> = (0..n)
            .into_par_iter()
            .map(|i| {
                let p = row(i);
                let mut best = (0, f64::INFINITY);
                for (m, c) in centers.iter().enumerate() {
                    let v = squared(p, c);
                    if v < best.1 {
                        best = (m, v);
                    }
                }
                best.0
            })
            .collect();
        if next == assignment {
            break;
        }
        assignment = next;
        let mut sums = vec![vec![0.0; dim]; k];
        let mut counts = vec![0usize; k];
        for (i, &m) in assignment.iter().enumerate() {
            counts[m] += 1;
            for (acc, v) in sums[m].iter_mut().zip(row(i)) {
                *acc += v;
            }
        }
        for m in 0..k {
            if counts[m] > 0 {
                centers[m] = sums[m].iter().map(|v| v / counts[m] as f64).collect();
            }
        }
    }
    Ok(assignment)
}

/// k-prototypes: squared Euclidean distance on min-max scaled numerical
/// columns plus `gamma` times the Hamming mismatch count. Without `gamma`,
/// half the mean numerical standard deviation is used.
pub fn fit_kprototypes(
    d: &Dataset,
    k: usize,
    gamma: Option<f64>,
    seed: u64,
) -> Result<(Partition, f64)> {
    let n = d.n_samples();
    if d.n_numerical() == 0 {
        return Err(Error::NoNumericalAttributes);
    }
    if k == 0 || k > n {
        return Err(Error::InvalidArgument(format!(
            "k = {k} must lie in 1..={n}"
        )));
    }
    let num = d.normalize_numerical();
    let su = d.n_numerical();
    let gamma = gamma.unwrap_or_else(|| 0.5 * mean_std(num.numerical(), su));

    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let picks = index::sample(&mut rng, n, k).into_vec();
    let mut means: Vec<Vec<f64>> = picks
        .iter()
        .map(|&i| num.numerical_row(i).to_vec())
        .collect();
    let mut modes: Vec<Vec<u32>> = picks.iter().map(|&i| d.row(i).to_vec()).collect();

    let mut assignment = vec![usize::MAX; n];
    for _ in 0..KMEANS_MAX_ITER {
        let next: Vec<usize> = (0..n)
            .into_par_iter()
            .map(|i| {
                let x = num.numerical_row(i);
                let c = d.row(i);
                let mut best = (0, f64::INFINITY);
                for m in 0..k {
                    let mismatch = c.iter().zip(&modes[m]).filter(|(a, b)| a != b).count();
                    let v = squared(x, &means[m]) + gamma * mismatch as f64;
                    if v < best.1 {
                        best = (m, v);
                    }
                }
                best.0
            })
            .collect();
        if next == assignment {
            break;
        }
        assignment = next;
        let q = Partition {
            assignment: assignment.clone(),
            k,
        };
        let prof = compute_profile(d, &q);
        let mut sums = vec![vec![0.0; su]; k];
        for (i, &m) in assignment.iter().enumerate() {
            for (acc, v) in sums[m].iter_mut().zip(num.numerical_row(i)) {
                *acc += v;
            }
        }
        for m in 0..k {
            let size = prof.sizes()[m];
            if size == 0 {
                continue;
            }
            means[m] = sums[m].iter().map(|v| v / size as f64).collect();
            for (r, v) in modes[m].iter_mut().enumerate() {
                *v = prof.mode(m, r);
            }
        }
    }
    Ok((Partition::new(assignment, k)?, gamma))
}

fn mean_std(values: &[f64], width: usize) -> f64 {
    let n = values.len() / width;
    if n < 2 {
        return 1.0;
    }
    let total: f64 = (0..width)
        .map(|c| {
            let col = (0..n).map(|i| values[i * width + c]);
            let mean = col.clone().sum::<f64>() / n as f64;
            let var = col.map(|v| (v - mean) * (v - mean)).sum::<f64>() / (n - 1) as f64;
            var.sqrt()
        })
        .sum();
    total / width as f64
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SweepAxis {
    N,
    S,
    K,
}

/// Synthetic timing sweep: one axis takes `values`, the others stay fixed.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepSpec {
    pub axis: SweepAxis,
    pub values: Vec<usize>,
    pub n: usize,
    pub s: usize,
    pub k: usize,
    #[serde(default = "default_values_per_attribute")]
    pub values_per_attribute: usize,
    #[serde(default)]
    pub seed: u64,
    /// Timed fits per configuration; the median is reported.
    #[serde(default = "default_repeats")]
    pub repeats: usize,
}

fn default_values_per_attribute() -> usize {
    5
}

fn default_repeats() -> usize {
    1
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct TimingRow {
    pub n: usize,
    pub s: usize,
    pub k: usize,
    pub seconds: f64,
    pub epochs: usize,
    pub inner_iterations: usize,
}

pub fn efficiency_bench(spec: &SweepSpec) -> Result<Vec<TimingRow>> {
    if spec.repeats == 0 {
        return Err(Error::InvalidArgument("repeats must be at least 1".into()));
    }
    let mut rows = Vec::with_capacity(spec.values.len());
    for &v in &spec.values {
        let (n, s, k) = match spec.axis {
            SweepAxis::N => (v, spec.s, spec.k),
            SweepAxis::S => (spec.n, v, spec.k),
            SweepAxis::K => (spec.n, spec.s, v),
        };
        let d = synthesize(n, s, k, spec.values_per_attribute, spec.seed)?;
        let cfg = FitConfig::new(k).with_seed(spec.seed);
        let mut times = Vec::with_capacity(spec.repeats);
        let mut last = None;
        for _ in 0..spec.repeats {
            let t = Instant::now();
            let fit = fit_ocl(&d, &cfg)?;
            times.push(t.elapsed().as_secs_f64());
            last = Some(fit.trace);
        }
        times.sort_by(f64::total_cmp);
        let trace = last.expect("repeats >= 1");
        log::info!("n={n} s={s} k={k}: {:.3}s", times[times.len() / 2]);
        rows.push(TimingRow {
            n,
            s,
            k,
            seconds: times[times.len() / 2],
            epochs: trace.inner_counts.len(),
            inner_iterations: trace.total_inner_iterations(),
        });
    }
    Ok(rows)
}

pub fn write_timing_csv<W: Write>(out: W, rows: &[TimingRow]) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    for row in rows {
        w.serialize(row)?;
    }
    w.flush().map_err(|e| Error::Csv(e.into()))?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::eval::clustering_accuracy;

    fn blocks() -> Dataset {
        let mut rows = Vec::new();
        for _ in 0..5 {
            rows.push(vec![0, 0, 1]);
            rows.push(vec![0, 1, 1]);
        }
        for _ in 0..5 {
            rows.push(vec![2, 2, 3]);
            rows.push(vec![2, 3, 3]);
        }
        Dataset::from_code_rows(&[3, 4, 4], &rows).unwrap()
    }

    #[test]
    fn argmin_with_lowest_tie() {
        let d = Dataset::from_code_rows(&[2], &[vec![0], vec![1], vec![0], vec![1]]).unwrap();
        let q = Partition::new(vec![0, 0, 1, 1], 2).unwrap();
        let prof = compute_profile(&d, &q);
        // Both clusters hold (1/2, 1/2): every sample ties at 0.5.
        let out = assign(&d, &prof, &DistanceTable::hamming(&d));
        assert_eq!(out.assignment(), &[0, 0, 0, 0]);
    }

    #[test]
    fn empty_clusters_receive_nothing() {
        let d = Dataset::from_code_rows(&[2], &[vec![0], vec![1]]).unwrap();
        let q = Partition::new(vec![1, 1], 3).unwrap();
        let prof = compute_profile(&d, &q);
        let out = assign(&d, &prof, &DistanceTable::hamming(&d));
        assert_eq!(out.assignment(), &[1, 1]);
    }

    #[test]
    fn separable_blocks_reach_zero_spread() {
        let d = blocks();
        let truth: Vec<usize> = (0..20).map(|i| i / 10).collect();
        for seed in 0..5 {
            let fit = fit_ocl(&d, &FitConfig::new(2).with_seed(seed)).unwrap();
            assert_eq!(
                clustering_accuracy(fit.partition.assignment(), &truth).unwrap(),
                1.0
            );
            assert!(fit.trace.is_monotone());
            assert!(fit.trace.converged);
        }
    }

    #[test]
    fn identical_samples_converge_in_one_epoch() {
        let d = Dataset::from_code_rows(&[3, 3], &[vec![0, 0], vec![1, 1], vec![2, 2]]).unwrap();
        let d = Dataset::new(4, d.attributes().to_vec(), vec![1, 2, 1, 2, 1, 2, 1, 2]).unwrap();
        let fit = fit_ocl(&d, &FitConfig::new(2)).unwrap();
        assert_eq!(fit.trace.best_objective, 0.0);
        assert!(fit.trace.epoch_objectives.len() <= 1);
        let (q, _) = fit_kmodes(&d, 2, 3).unwrap();
        assert_eq!(q.effective_k(), 1);
    }

    #[test]
    fn same_seed_same_fit() {
        let d = synthesize(120, 6, 3, 5, 11).unwrap();
        for init in [InitMode::KmodesOnce, InitMode::RandomPartition] {
            let cfg = FitConfig::new(3).with_seed(4).with_init(init);
            let a = fit_ocl(&d, &cfg).unwrap();
            let b = fit_ocl(&d, &cfg).unwrap();
            assert_eq!(a.partition, b.partition);
            assert_eq!(a.orders, b.orders);
            assert_eq!(a.trace.points, b.trace.points);
        }
    }

    #[test]
    fn traces_are_monotone_on_random_data() {
        for seed in 0..10 {
            let d = synthesize(80, 5, 3, 4, seed).unwrap();
            for ablation in [
                Ablation::Full,
                Ablation::NoProbWeight,
                Ablation::SingleOrderUpdate,
                Ablation::HammingOnly,
            ] {
                let cfg = FitConfig::new(3).with_seed(seed).with_ablation(ablation);
                let fit = fit_ocl(&d, &cfg).unwrap();
                assert!(fit.trace.is_monotone(), "{ablation:?} seed {seed}");
                assert!(fit.trace.converged);
                if ablation == Ablation::SingleOrderUpdate {
                    assert_eq!(fit.trace.learning_rounds, 1);
                    assert!(fit.trace.order_updates <= 1);
                }
                if ablation == Ablation::HammingOnly {
                    assert_eq!(fit.trace.learning_rounds, 0);
                    assert!(fit.metrics.iter().all(|&m| m == AttributeMetric::Hamming));
                }
            }
        }
    }

    #[test]
    fn semantic_mode_needs_ordinal_attributes() {
        let d = blocks();
        let cfg = FitConfig::new(2).with_order_mode(OrderMode::Semantic);
        assert!(matches!(fit_ocl(&d, &cfg), Err(Error::NoSemanticOrder)));
        let cfg = FitConfig::new(2).with_ordinal_policy(OrdinalPolicy::PreserveOrdinal);
        assert!(matches!(fit_ocl(&d, &cfg), Err(Error::NoSemanticOrder)));
    }

    #[test]
    fn fixed_order_keeps_orders() {
        let d = blocks();
        let o =
            OrderSet::from_ranks(vec![vec![3, 1, 2], vec![4, 3, 2, 1], vec![1, 2, 3, 4]]).unwrap();
        let fit = fit_fixed_order(&d, 2, &o, 1).unwrap();
        assert_eq!(fit.orders, o);
        assert_eq!(fit.trace.order_updates, 0);
    }

    #[test]
    fn binary_data_ignores_orders() {
        let d = synthesize(60, 6, 2, 2, 5).unwrap();
        let flipped = OrderSet::identity(&d.cardinalities()).mirror();
        for seed in 0..5 {
            let a = fit_ocl(&d, &FitConfig::new(2).with_seed(seed)).unwrap();
            let b = fit_fixed_order(&d, 2, &flipped, seed).unwrap();
            let c = fit_ocl(
                &d,
                &FitConfig::new(2)
                    .with_seed(seed)
                    .with_ablation(Ablation::HammingOnly),
            )
            .unwrap();
            assert_eq!(a.partition, b.partition);
            assert_eq!(a.partition, c.partition);
            assert_eq!(a.trace.order_updates, 0);
        }
    }

    #[test]
    fn kmodes_recovers_blocks() {
        let d = blocks();
        let truth: Vec<usize> = (0..20).map(|i| i / 10).collect();
        let (q, trace) = fit_kmodes(&d, 2, 0).unwrap();
        assert!(trace.converged);
        let ca = clustering_accuracy(q.assignment(), &truth).unwrap();
        assert!(ca >= 0.5);
        assert!(fit_kmodes(&d, 0, 0).is_err());
        assert!(fit_kmodes(&d, 21, 0).is_err());
    }

    #[test]
    fn kmeans_splits_two_blobs() {
        let pts = vec![0.0, 0.0, 0.1, 0.0, 0.0, 0.1, 5.0, 5.0, 5.1, 5.0, 5.0, 5.1];
        let a = kmeans(&pts, 2, 2, 3).unwrap();
        assert_eq!(a[0], a[1]);
        assert_eq!(a[1], a[2]);
        assert_eq!(a[3], a[4]);
        assert_ne!(a[0], a[3]);
    }

    #[test]
    fn mixed_needs_numbers_and_matches_categorical_when_numbers_are_flat() {
        let d = blocks();
        assert!(matches!(
            fit_mixed(&d, &FitConfig::new(2)),
            Err(Error::NoNumericalAttributes)
        ));
        let truth: Vec<usize> = (0..20).map(|i| i / 10).collect();
        let flat = d
            .clone()
            .with_numerical(vec!["c".into()], vec![3.0; 20])
            .unwrap();
        let fit = fit_mixed(&flat, &FitConfig::new(2)).unwrap();
        let ocl = fit_ocl(&d, &FitConfig::new(2)).unwrap();
        let a = clustering_accuracy(fit.partition.assignment(), &truth).unwrap();
        let b = clustering_accuracy(ocl.partition.assignment(), &truth).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn kprototypes_runs() {
        let d = blocks();
        let nums: Vec<f64> = (0..20).map(|i| if i < 10 { 0.0 } else { 1.0 }).collect();
        let d = d.with_numerical(vec!["x".into()], nums).unwrap();
        let truth: Vec<usize> = (0..20).map(|i| i / 10).collect();
        let (q, gamma) = fit_kprototypes(&d, 2, None, 1).unwrap();
        assert!(gamma > 0.0);
        assert_eq!(clustering_accuracy(q.assignment(), &truth).unwrap(), 1.0);
    }

    #[test]
    fn sweep_reports_each_point() {
        let spec = SweepSpec {
            axis: SweepAxis::K,
            values: vec![2, 3],
            n: 200,
            s: 4,
            k: 0,
            values_per_attribute: 5,
            seed: 1,
            repeats: 1,
        };
        let rows = efficiency_bench(&spec).unwrap();
        assert_eq!(rows.len(), 2);
        assert_eq!(rows[1].k, 3);
        let mut buf = Vec::new();
        write_timing_csv(&mut buf, &rows).unwrap();
        assert!(String::from_utf8(buf).unwrap().starts_with("n,s,k,seconds"));
    }

    #[test]
    fn relabel_and_random_partition() {
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        let q = Partition::random(10, 4, &mut rng).unwrap();
        assert_eq!(q.effective_k(), 4);
        let r = q.relabel(&[3, 2, 1, 0]).unwrap();
        assert_eq!(
            r.sizes().iter().rev().copied().collect::<Vec<_>>(),
            q.sizes()
        );
        assert!(Partition::new(vec![0, 2], 2).is_err());
    }
}
