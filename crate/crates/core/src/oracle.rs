//! Brute-force reference implementations and a randomized equivalence
//! harness checking the fast paths against them.
//!
//! Everything here is deliberately naive: permutations are enumerated,
//! sums are taken term by term, and sample pairs are visited one at a time.

use std::collections::HashMap;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::cluster::Partition;
use crate::data::{CategoricalAttribute, Dataset};
use crate::error::{Error, Result};
use crate::eval::{adjusted_rand_index, clustering_accuracy, normalized_mutual_info};
use crate::metric::{check_partition, objective, order_distance_vector};
use crate::order::{learn_orders, olo_place, rank_descending, OrderSet};

pub const MAX_SEARCH_CARDINALITY: usize = 7;
pub const MAX_PAIR_SAMPLES: usize = 2000;
pub const MAX_MATCHING_SIZE: usize = 8;

pub(crate) fn guard(what: &'static str, size: usize, limit: usize) -> Result<()> {
    if size > limit {
        return Err(Error::TooLarge { what, size, limit });
    }
    Ok(())
}

/// Steps `perm` to the next lexicographic permutation; false after the last.
fn next_permutation<T: Ord>(perm: &mut [T]) -> bool {
    if perm.len() < 2 {
        return false;
    }
    let mut i = perm.len() - 1;
    while i > 0 && perm[i - 1] >= perm[i] {
        i -= 1;
    }
    if i == 0 {
        return false;
    }
    let mut j = perm.len() - 1;
    while perm[j] <= perm[i - 1] {
        j -= 1;
    }
    perm.swap(i - 1, j);
    perm[i..].reverse();
    true
}

fn members(q: &Partition, m: usize) -> Vec<usize> {
    (0..q.len()).filter(|&i| q.assignment()[i] == m).collect()
}

/// `p_{m,r,g}` tallied directly from the member list.
fn tally(d: &Dataset, rows: &[usize], r: usize) -> Vec<f64> {
    let mut p = vec![0.0; d.cardinality(r)];
    for &i in rows {
        p[d.code(i, r) as usize] += 1.0;
    }
    for v in &mut p {
        *v /= rows.len() as f64;
    }
    p
}

/// `L_{m,r}` of attribute `r` in cluster `m` under positions `ranks`.
fn cluster_attribute_cost(d: &Dataset, rows: &[usize], r: usize, ranks: &[u32]) -> Result<f64> {
    let p = tally(d, rows, r);
    let mut total = 0.0;
    for &i in rows {
        let dv = order_distance_vector(d.code(i, r), ranks)?;
        total += dv.iter().zip(&p).map(|(a, b)| a * b).sum::<f64>();
    }
    Ok(total)
}

/// Best positions for attribute `r` in cluster `m` over all `l_r!`
/// bijections, with the lexicographically first one kept on ties.
pub fn exhaustive_order_search(
    d: &Dataset,
    q: &Partition,
    r: usize,
    m: usize,
) -> Result<(Vec<u32>, f64)> {
    check_partition(d, q)?;
    let l = d.cardinality(r);
    guard("attribute cardinality", l, MAX_SEARCH_CARDINALITY)?;
    let rows = members(q, m);
    if rows.is_empty() {
        return Err(Error::EmptyCluster(m));
    }
    let mut perm: Vec<u32> = (1..=l as u32).collect();
    let mut best = (perm.clone(), cluster_attribute_cost(d, &rows, r, &perm)?);
    while next_permutation(&mut perm) {
        let cost = cluster_attribute_cost(d, &rows, r, &perm)?;
        if cost < best.1 {
            best = (perm.clone(), cost);
        }
    }
    Ok(best)
}

/// `L_{m,r}` when attribute `r` of cluster `m` takes its single-cluster
/// placement from link densities under `current`.
pub fn placement_cost(
    d: &Dataset,
    q: &Partition,
    r: usize,
    m: usize,
    current: &OrderSet,
) -> Result<(Vec<u32>, f64)> {
    let rows = members(q, m);
    if rows.is_empty() {
        return Err(Error::EmptyCluster(m));
    }
    let p = tally(d, &rows, r);
    let mut per_value = vec![0.0; p.len()];
    for &i in &rows {
        let x = d.code(i, r);
        let dv = order_distance_vector(x, current.ranks(r))?;
        per_value[x as usize] += dv.iter().zip(&p).map(|(a, b)| a * b).sum::<f64>();
    }
    let omega: Vec<f64> = p
        .iter()
        .zip(&per_value)
        .map(|(&pv, &lv)| {
            if pv == 0.0 {
                0.0
            } else if lv == 0.0 {
                f64::INFINITY
            } else {
                pv / lv
            }
        })
        .collect();
    let positions = olo_place(&rank_descending(&omega))?;
    let cost = cluster_attribute_cost(d, &rows, r, &positions)?;
    Ok((positions, cost))
}

/// Objective summed term by term over (cluster, sample, attribute).
pub fn objective_direct(d: &Dataset, q: &Partition, o: &OrderSet) -> Result<f64> {
    check_partition(d, q)?;
    o.check_against(d)?;
    let s = d.n_categorical();
    if s == 0 {
        return Ok(0.0);
    }
    let mut total = 0.0;
    for m in 0..q.k() {
        let rows = members(q, m);
        if rows.is_empty() {
            continue;
        }
        for &i in &rows {
            let mut theta_sum = 0.0;
            for r in 0..s {
                let p = tally(d, &rows, r);
                let dv = order_distance_vector(d.code(i, r), o.ranks(r))?;
                let mut theta = 0.0;
                for g in 0..p.len() {
                    theta += dv[g] * p[g];
                }
                theta_sum += theta;
            }
            total += theta_sum / s as f64;
        }
    }
    Ok(total)
}

/// Pair agreement counts and indices derived from them.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct PairCounts {
    /// Pairs together in both partitions.
    pub same_same: u64,
    /// Together in `pred`, apart in `truth`.
    pub same_diff: u64,
    /// Apart in `pred`, together in `truth`.
    pub diff_same: u64,
    pub diff_diff: u64,
    pub rand: f64,
    pub ari: f64,
    pub nmi: f64,
}

pub fn pair_count_metrics(pred: &[usize], truth: &[usize]) -> Result<PairCounts> {
    if pred.len() != truth.len() {
        return Err(Error::LengthMismatch {
            left: pred.len(),
            right: truth.len(),
        });
    }
    let n = pred.len();
    if n == 0 {
        return Err(Error::EmptyDataset);
    }
    guard("sample count", n, MAX_PAIR_SAMPLES)?;
    let (mut ss, mut sd, mut ds, mut dd) = (0u64, 0u64, 0u64, 0u64);
    for i in 0..n {
        for j in i + 1..n {
            match (pred[i] == pred[j], truth[i] == truth[j]) {
                (true, true) => ss += 1,
                (true, false) => sd += 1,
                (false, true) => ds += 1,
                (false, false) => dd += 1,
            }
        }
    }
    let pairs = (ss + sd + ds + dd) as f64;
    let rand = if pairs > 0.0 {
        (ss + dd) as f64 / pairs
    } else {
        1.0
    };
    let (a, b, c, e) = (ss as f64, sd as f64, ds as f64, dd as f64);
    let denom = (a + b) * (b + e) + (a + c) * (c + e);
    let ari = if denom == 0.0 {
        1.0
    } else {
        2.0 * (a * e - b * c) / denom
    };

    let mut joint: HashMap<(usize, usize), u64> = HashMap::new();
    let mut left: HashMap<usize, u64> = HashMap::new();
    let mut right: HashMap<usize, u64> = HashMap::new();
    for (&p, &t) in pred.iter().zip(truth) {
        *joint.entry((p, t)).or_default() += 1;
        *left.entry(p).or_default() += 1;
        *right.entry(t).or_default() += 1;
    }
    let h = |counts: Vec<u64>| -> f64 {
        counts
            .into_iter()
            .map(|c| {
                let p = c as f64 / n as f64;
                -p * p.ln()
            })
            .sum()
    };
    let hl = h(left.values().copied().collect());
    let hr = h(right.values().copied().collect());
    let hj = h(joint.values().copied().collect());
    let nmi = match (left.len() <= 1, right.len() <= 1) {
        (true, true) => 1.0,
        (true, false) | (false, true) => 0.0,
        _ => ((hl + hr - hj) / ((hl + hr) / 2.0)).clamp(0.0, 1.0),
    };
    Ok(PairCounts {
        same_same: ss,
        same_diff: sd,
        diff_same: ds,
        diff_diff: dd,
        rand,
        ari,
        nmi,
    })
}

/// Accuracy maximized over every one-to-one cluster→class matching.
pub fn brute_force_accuracy(pred: &[usize], truth: &[usize]) -> Result<f64> {
    if pred.len() != truth.len() || pred.is_empty() {
        return Err(Error::LengthMismatch {
            left: pred.len(),
            right: truth.len(),
        });
    }
    let kp = pred.iter().max().unwrap() + 1;
    let kt = truth.iter().max().unwrap() + 1;
    let size = kp.max(kt);
    guard("matching size", size, MAX_MATCHING_SIZE)?;
    let mut perm: Vec<usize> = (0..size).collect();
    let mut best = 0usize;
    loop {
        let hits = pred
            .iter()
            .zip(truth)
            .filter(|(&p, &t)| perm[p] == t)
            .count();
        best = best.max(hits);
        if !next_permutation(&mut perm) {
            break;
        }
    }
    Ok(best as f64 / pred.len() as f64)
}

/// Random nominal dataset, partition and order set for equivalence checks.
pub fn random_instance<R: Rng>(
    rng: &mut R,
    max_n: usize,
    max_s: usize,
    max_l: usize,
    max_k: usize,
) -> (Dataset, Partition, OrderSet) {
    loop {
        let n = rng.random_range(2..=max_n.max(2));
        let s = rng.random_range(1..=max_s.max(1));
        let cards: Vec<usize> = (0..s).map(|_| rng.random_range(2..=max_l.max(2))).collect();
        let attributes = cards
            .iter()
            .enumerate()
            .map(|(r, &l)| {
                CategoricalAttribute::nominal(
                    format!("a{r}"),
                    (0..l).map(|g| g.to_string()).collect(),
                )
            })
            .collect();
        let codes = (0..n * s)
            .map(|j| rng.random_range(0..cards[j % s] as u32))
            .collect();
        let d = Dataset::new(n, attributes, codes).expect("valid by construction");
        let k = rng.random_range(1..=max_k.min(n).max(1));
        let q = Partition::new((0..n).map(|_| rng.random_range(0..k)).collect(), k)
            .expect("ids below k");
        let o = OrderSet::random(&d.cardinalities(), rng);
        if d.n_categorical() > 0 {
            return (d, q, o);
        }
    }
}

fn random_labels<R: Rng>(rng: &mut R, n: usize, k: usize) -> Vec<usize> {
    (0..n).map(|_| rng.random_range(0..k)).collect()
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PropertyOutcome {
    pub name: &'static str,
    pub checked: usize,
    pub passed: bool,
    /// Informational checks never fail the suite.
    pub gating: bool,
    pub counterexample: Option<String>,
}

fn relative_close(a: f64, b: f64, tol: f64) -> bool {
    (a - b).abs() <= tol * a.abs().max(b.abs()).max(1.0)
}

struct Check {
    name: &'static str,
    gating: bool,
    checked: usize,
    failure: Option<String>,
}

impl Check {
    fn new(name: &'static str, gating: bool) -> Self {
        Self {
            name,
            gating,
            checked: 0,
            failure: None,
        }
    }

    fn record(&mut self, ok: bool, describe: impl FnOnce() -> String) {
        self.checked += 1;
        if !ok && self.failure.is_none() {
            self.failure = Some(describe());
        }
    }

    fn finish(self) -> PropertyOutcome {
        PropertyOutcome {
            name: self.name,
            checked: self.checked,
            passed: self.failure.is_none(),
            gating: self.gating,
            counterexample: self.failure,
        }
    }
}

fn dump(d: &Dataset, q: &Partition, o: &OrderSet) -> String {
    let rows: Vec<Vec<u32>> = (0..d.n_samples()).map(|i| d.row(i).to_vec()).collect();
    format!(
        "cardinalities={:?} rows={rows:?} assignment={:?} k={} ranks={:?}",
        d.cardinalities(),
        q.assignment(),
        q.k(),
        o.all_ranks()
    )
}

/// Runs every equivalence property on `instances` random cases.
pub fn run_verification(instances: usize, seed: u64) -> Vec<PropertyOutcome> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut objective_check = Check::new("objective matches termwise evaluation", true);
    let mut decomposition = Check::new("objective decomposition identities", true);
    let mut mirror = Check::new("mirrored orders leave the objective unchanged", true);
    let mut ari = Check::new("ARI matches pair enumeration", true);
    let mut nmi = Check::new("NMI matches raw-count evaluation", true);
    let mut ca = Check::new("CA matches exhaustive matching", true);
    let mut placement = Check::new("placement is a bijection for every eta", true);
    let mut learned = Check::new("learned orders are bijections", true);
    let mut search = Check::new("exhaustive search is no worse than placement", false);

    for _ in 0..instances {
        let (d, q, o) = random_instance(&mut rng, 50, 4, 5, 4);
        let s = d.n_categorical();
        match (objective(&d, &q, &o), objective_direct(&d, &q, &o)) {
            (Ok(rep), Ok(direct)) => {
                objective_check.record(relative_close(rep.total, direct, 1e-9), || {
                    format!("fast={} direct={} {}", rep.total, direct, dump(&d, &q, &o))
                });
                let mut grand = 0.0;
                let mut ok = true;
                for m in 0..q.k() {
                    for r in 0..s {
                        let lmr = rep.cluster_attribute(m, r);
                        let parts: f64 = rep.per_value(m, r).iter().sum();
                        ok &= relative_close(lmr, parts, 1e-9);
                        grand += lmr;
                    }
                }
                ok &= relative_close(rep.total, grand / s as f64, 1e-9);
                decomposition.record(ok, || dump(&d, &q, &o));
                let mirrored = objective(&d, &q, &o.mirror()).map(|r| r.total);
                mirror.record(mirrored.as_ref().is_ok_and(|&v| v == rep.total), || {
                    format!("{mirrored:?} vs {} {}", rep.total, dump(&d, &q, &o))
                });
            }
            (a, b) => objective_check.record(false, || format!("{a:?} / {b:?}")),
        }

        match learn_orders(&d, &q, &o) {
            Ok(l) => learned.record(
                l.orders
                    .all_ranks()
                    .iter()
                    .all(|r| crate::data::check_permutation(r).is_ok()),
                || dump(&d, &q, &l.orders),
            ),
            Err(e) => learned.record(false, || e.to_string()),
        }

        let r = rng.random_range(0..s);
        let m = q.assignment()[0];
        if let (Ok((_, best)), Ok((pos, placed))) = (
            exhaustive_order_search(&d, &q, r, m),
            placement_cost(&d, &q, r, m, &o),
        ) {
            search.record(best <= placed + 1e-12, || {
                format!("search={best} placement={placed} at {pos:?}")
            });
        }

        let n = rng.random_range(1..=60);
        let kp = rng.random_range(1..=4);
        let kt = rng.random_range(1..=4);
        let pred = random_labels(&mut rng, n, kp);
        let truth = random_labels(&mut rng, n, kt);
        let pc = pair_count_metrics(&pred, &truth).expect("small instance");
        let fast_ari = adjusted_rand_index(&pred, &truth).expect("same lengths");
        let fast_nmi = normalized_mutual_info(&pred, &truth).expect("same lengths");
        ari.record(relative_close(fast_ari, pc.ari, 1e-9), || {
            format!(
                "fast={fast_ari} pairs={} pred={pred:?} truth={truth:?}",
                pc.ari
            )
        });
        nmi.record(relative_close(fast_nmi, pc.nmi, 1e-9), || {
            format!(
                "fast={fast_nmi} raw={} pred={pred:?} truth={truth:?}",
                pc.nmi
            )
        });
        let fast_ca = clustering_accuracy(&pred, &truth).expect("same lengths");
        let slow_ca = brute_force_accuracy(&pred, &truth).expect("small matching");
        ca.record(fast_ca == slow_ca, || {
            format!("hungarian={fast_ca} brute={slow_ca} pred={pred:?} truth={truth:?}")
        });

        let l = rng.random_range(1..=20usize);
        let mut eta: Vec<u32> = (1..=l as u32).collect();
        rand::seq::SliceRandom::shuffle(eta.as_mut_slice(), &mut rng);
        let ok = olo_place(&eta).is_ok_and(|p| crate::data::check_permutation(&p).is_ok());
        placement.record(ok, || format!("eta={eta:?}"));
    }

    [
        objective_check,
        decomposition,
        mirror,
        ari,
        nmi,
        ca,
        placement,
        learned,
        search,
    ]
    .into_iter()
    .map(Check::finish)
    .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn lexicographic_permutations() {
        let mut p = vec![1, 2, 3];
        let mut seen = vec![p.clone()];
        while next_permutation(&mut p) {
            seen.push(p.clone());
        }
        assert_eq!(seen.len(), 6);
        assert_eq!(seen[1], vec![1, 3, 2]);
        assert_eq!(seen[5], vec![3, 2, 1]);
    }

    #[test]
    fn search_examples() {
        let d = Dataset::from_code_rows(&[2, 3], &[vec![0, 1], vec![1, 1], vec![0, 1], vec![1, 0]])
            .unwrap();
        let q = Partition::new(vec![0, 0, 0, 1], 2).unwrap();
        // Binary: both orders tie, the lexicographic one wins.
        let (pos, _) = exhaustive_order_search(&d, &q, 0, 0).unwrap();
        assert_eq!(pos, vec![1, 2]);
        // Cluster 0 is pure on attribute 1: zero cost everywhere.
        let (pos, cost) = exhaustive_order_search(&d, &q, 1, 0).unwrap();
        assert_eq!((pos, cost), (vec![1, 2, 3], 0.0));
        let wide = Dataset::from_code_rows(&[8], &[vec![0], vec![7]]).unwrap();
        let q = Partition::new(vec![0, 0], 1).unwrap();
        assert!(matches!(
            exhaustive_order_search(&wide, &q, 0, 0),
            Err(Error::TooLarge { .. })
        ));
    }

    #[test]
    fn direct_objective_edge_cases() {
        let d = Dataset::from_code_rows(&[3, 2], &[vec![0, 1], vec![2, 0], vec![1, 1]]).unwrap();
        let o = OrderSet::identity(&[3, 2]);
        let singletons = Partition::new(vec![0, 1, 2], 3).unwrap();
        assert_eq!(objective_direct(&d, &singletons, &o).unwrap(), 0.0);
    }

    #[test]
    fn pair_counts_examples() {
        let pc = pair_count_metrics(&[0, 0, 1, 1], &[1, 1, 0, 0]).unwrap();
        assert_eq!(pc.ari, 1.0);
        assert_eq!(pc.same_same, 2);
        let pc = pair_count_metrics(&[0, 0, 0, 0], &[0, 0, 1, 1]).unwrap();
        assert_eq!(pc.ari, 0.0);
        assert!(pair_count_metrics(&vec![0; 2001], &vec![0; 2001]).is_err());
    }

    #[test]
    fn brute_force_examples() {
        let pred = [0, 0, 0, 0, 1, 1, 1, 1, 1, 1];
        let truth = [0, 0, 0, 1, 0, 0, 1, 1, 1, 1];
        assert_eq!(brute_force_accuracy(&pred, &truth).unwrap(), 0.7);
    }

    #[test]
    fn verification_passes() {
        for outcome in run_verification(40, 9) {
            assert!(
                outcome.passed || !outcome.gating,
                "{}: {:?}",
                outcome.name,
                outcome.counterexample
            );
        }
    }
}
