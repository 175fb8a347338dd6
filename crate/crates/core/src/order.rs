//! Learning value orders from a partition.
//!
//! Within each cluster, every value gets a link density: its probability
//! divided by its share of the objective. Values are placed around the
//! central rank by descending density, alternating right and left. The
//! per-cluster placements are averaged with cluster-size weights and the
//! averages sorted into integer ranks.

use rand::seq::SliceRandom;
use rand::Rng;

use crate::cluster::Partition;
use crate::data::{check_permutation, Dataset};
use crate::error::{Error, Result};
use crate::metric::{
    check_partition, compute_profile, objective_from_costs, ClusterProfile, CostTable,
    DistanceTable, ObjectiveReport, Theta,
};

/// Rank `o(v_{r,g})` of every value of every categorical attribute.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct OrderSet {
    ranks: Vec<Vec<u32>>,
}

impl OrderSet {
    pub fn from_ranks(ranks: Vec<Vec<u32>>) -> Result<Self> {
        for row in &ranks {
            check_permutation(row)?;
        }
        Ok(Self { ranks })
    }

    /// Dictionary order: value `g` gets rank `g + 1`.
    pub fn identity(cardinalities: &[usize]) -> Self {
        Self {
            ranks: cardinalities
                .iter()
                .map(|&l| (1..=l as u32).collect())
                .collect(),
        }
    }

    /// Declared order for ordinal attributes, dictionary order elsewhere.
    pub fn semantic(d: &Dataset) -> Result<Self> {
        if !d.has_ordinal() {
            return Err(Error::NoSemanticOrder);
        }
        Ok(Self {
            ranks: d
                .attributes()
                .iter()
                .map(|a| match &a.semantic_ranks {
                    Some(r) => r.clone(),
                    None => (1..=a.cardinality() as u32).collect(),
                })
                .collect(),
        })
    }

    /// Independent uniform permutation per attribute.
    pub fn random<R: Rng + ?Sized>(cardinalities: &[usize], rng: &mut R) -> Self {
        Self {
            ranks: cardinalities
                .iter()
                .map(|&l| {
                    let mut r: Vec<u32> = (1..=l as u32).collect();
                    r.shuffle(rng);
                    r
                })
                .collect(),
        }
    }

    pub fn len(&self) -> usize {
        self.ranks.len()
    }

    pub fn is_empty(&self) -> bool {
        self.ranks.is_empty()
    }

    pub fn ranks(&self, r: usize) -> &[u32] {
        &self.ranks[r]
    }

    pub fn all_ranks(&self) -> &[Vec<u32>] {
        &self.ranks
    }

    pub(crate) fn set_ranks(&mut self, r: usize, ranks: Vec<u32>) {
        self.ranks[r] = ranks;
    }

    /// Reversed order on every attribute (`ρ → l_r + 1 − ρ`).
    pub fn mirror(&self) -> Self {
        Self {
            ranks: self
                .ranks
                .iter()
                .map(|row| {
                    let l = row.len() as u32;
                    row.iter().map(|&p| l + 1 - p).collect()
                })
                .collect(),
        }
    }

    /// Value indices listed from rank 1 upward.
    pub fn values_by_rank(&self, r: usize) -> Vec<usize> {
        let mut idx: Vec<usize> = (0..self.ranks[r].len()).collect();
        idx.sort_by_key(|&g| self.ranks[r][g]);
        idx
    }

    pub fn check_against(&self, d: &Dataset) -> Result<()> {
        if self.ranks.len() != d.n_categorical() {
            return Err(Error::LengthMismatch {
                left: self.ranks.len(),
                right: d.n_categorical(),
            });
        }
        for (r, row) in self.ranks.iter().enumerate() {
            if row.len() != d.cardinality(r) {
                return Err(Error::LengthMismatch {
                    left: row.len(),
                    right: d.cardinality(r),
                });
            }
        }
        Ok(())
    }
}

/// Link densities `ω_{m,r,g}` and their descending ranks `η`.
#[derive(Debug, Clone, PartialEq)]
pub struct LinkDensityTable {
    k: usize,
    s: usize,
    omega: Vec<Vec<f64>>,
    eta: Vec<Vec<u32>>,
}

impl LinkDensityTable {
    pub fn omega(&self, m: usize, r: usize) -> &[f64] {
        &self.omega[m * self.s + r]
    }

    pub fn eta(&self, m: usize, r: usize) -> &[u32] {
        &self.eta[m * self.s + r]
    }

    pub fn k(&self) -> usize {
        self.k
    }

    pub fn n_attributes(&self) -> usize {
        self.s
    }
}

/// `ω = p / L_{m,r,g}`, with `ω = 0` when `p = 0` and `ω = +∞` when `p > 0`
/// and the value adds nothing to the objective.
pub fn link_density(prof: &ClusterProfile, obj: &ObjectiveReport) -> LinkDensityTable {
    let k = prof.k();
    let s = prof.n_attributes();
    let mut omega = Vec::with_capacity(k * s);
    let mut eta = Vec::with_capacity(k * s);
    for m in 0..k {
        for r in 0..s {
            let w: Vec<f64> = prof
                .probabilities(m, r)
                .iter()
                .zip(obj.per_value(m, r))
                .map(|(&p, &l)| density(p, l))
                .collect();
            eta.push(rank_descending(&w));
            omega.push(w);
        }
    }
    LinkDensityTable { k, s, omega, eta }
}

fn density(p: f64, l: f64) -> f64 {
    if p == 0.0 {
        0.0
    } else if l == 0.0 {
        f64::INFINITY
    } else {
        p / l
    }
}

/// 1-based descending ranks; ties go to the lower index.
pub fn rank_descending(omega: &[f64]) -> Vec<u32> {
    let mut idx: Vec<usize> = (0..omega.len()).collect();
    idx.sort_by(|&a, &b| omega[b].total_cmp(&omega[a]).then(a.cmp(&b)));
    let mut eta = vec![0u32; omega.len()];
    for (rank, g) in idx.into_iter().enumerate() {
        eta[g] = rank as u32 + 1;
    }
    eta
}

/// Unimodal placement: `η = 1` goes to `⌈l/2⌉`, then values alternate right
/// and left of it with growing offset.
pub fn olo_place(eta: &[u32]) -> Result<Vec<u32>> {
    check_permutation(eta)?;
    let center = eta.len().div_ceil(2) as i64;
    Ok(eta
        .iter()
        .map(|&e| {
            let offset = (e / 2) as i64;
            let pos = if e % 2 == 0 {
                center + offset
            } else {
                center - offset
            };
            pos as u32
        })
        .collect())
}

/// Placement `o*_m(v_{r,g})` per cluster and attribute.
#[derive(Debug, Clone, PartialEq)]
pub struct PerClusterOrder {
    s: usize,
    positions: Vec<Vec<u32>>,
}

impl PerClusterOrder {
    pub fn from_densities(table: &LinkDensityTable) -> Self {
        let positions = table
            .eta
            .iter()
            .map(|eta| olo_place(eta).expect("η is a permutation by construction"))
            .collect();
        Self {
            s: table.s,
            positions,
        }
    }

    pub fn positions(&self, m: usize, r: usize) -> &[u32] {
        &self.positions[m * self.s + r]
    }
}

/// Fractional consensus scores and the integer ranks sorted from them.
#[derive(Debug, Clone, PartialEq)]
pub struct Consensus {
    pub scores: Vec<f64>,
    pub ranks: Vec<u32>,
}

/// Cluster-size-weighted mean of per-cluster positions, sorted ascending into
/// ranks (ties to the lower index). Empty clusters get weight 0.
pub fn consensus_order(positions: &[&[u32]], sizes: &[usize], n: usize) -> Result<Consensus> {
    if positions.len() != sizes.len() {
        return Err(Error::LengthMismatch {
            left: positions.len(),
            right: sizes.len(),
        });
    }
    if n == 0 || sizes.iter().sum::<usize>() != n {
        return Err(Error::InvalidArgument(
            "cluster sizes must sum to a positive n".into(),
        ));
    }
    let l = positions
        .iter()
        .zip(sizes)
        .find(|(_, &size)| size > 0)
        .map(|(p, _)| p.len())
        .unwrap_or(0);
    // Integer numerators keep the sort exact whatever the cluster order.
    let mut numer = vec![0u64; l];
    for (pos, &size) in positions.iter().zip(sizes) {
        if size == 0 {
            continue;
        }
        if pos.len() != l {
            return Err(Error::LengthMismatch {
                left: pos.len(),
                right: l,
            });
        }
        for (acc, &p) in numer.iter_mut().zip(pos.iter()) {
            *acc += size as u64 * p as u64;
        }
    }
    let scores = numer.iter().map(|&v| v as f64 / n as f64).collect();
    let mut idx: Vec<usize> = (0..l).collect();
    idx.sort_by_key(|&g| (numer[g], g));
    let mut ranks = vec![0u32; l];
    for (rank, g) in idx.into_iter().enumerate() {
        ranks[g] = rank as u32 + 1;
    }
    Ok(Consensus { scores, ranks })
}

/// A learned OrderSet with the consensus scores behind each attribute.
/// Attributes that were not learned carry `None`.
#[derive(Debug, Clone, PartialEq)]
pub struct LearnedOrders {
    pub orders: OrderSet,
    pub scores: Vec<Option<Vec<f64>>>,
}

/// One round of order learning from `q` evaluated under `current`.
pub fn learn_orders(d: &Dataset, q: &Partition, current: &OrderSet) -> Result<LearnedOrders> {
    check_partition(d, q)?;
    let prof = compute_profile(d, q);
    let dist = DistanceTable::from_orders(d, current)?;
    let obj = objective_from_costs(&prof, &CostTable::new(&prof, &dist, Theta::Weighted));
    let learnable: Vec<bool> = d.cardinalities().iter().map(|&l| l > 2).collect();
    learn_orders_from(&prof, &obj, current, &learnable)
}

/// Order learning from a precomputed profile and objective. Only attributes
/// flagged in `learnable` are updated; binary attributes are always kept.
pub fn learn_orders_from(
    prof: &ClusterProfile,
    obj: &ObjectiveReport,
    current: &OrderSet,
    learnable: &[bool],
) -> Result<LearnedOrders> {
    let n: usize = prof.sizes().iter().sum();
    if prof.effective_k() == 0 {
        return Err(Error::EmptyDataset);
    }
    let table = link_density(prof, obj);
    let placed = PerClusterOrder::from_densities(&table);
    let mut orders = current.clone();
    let mut scores = vec![None; current.len()];
    for r in 0..current.len() {
        if !learnable[r] || current.ranks(r).len() <= 2 {
            continue;
        }
        let per: Vec<&[u32]> = (0..prof.k()).map(|m| placed.positions(m, r)).collect();
        let c = consensus_order(&per, prof.sizes(), n)?;
        orders.set_ranks(r, c.ranks);
        scores[r] = Some(c.scores);
    }
    Ok(LearnedOrders { orders, scores })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::metric::objective;
    use proptest::prelude::*;

    #[test]
    fn rank_descending_examples() {
        assert_eq!(rank_descending(&[0.1, 0.9, 0.5]), vec![3, 1, 2]);
        assert_eq!(rank_descending(&[0.4, 0.4]), vec![1, 2]);
        assert_eq!(rank_descending(&[f64::INFINITY, 2.0, 0.0]), vec![1, 2, 3]);
    }

    #[test]
    fn placement_examples() {
        assert_eq!(olo_place(&[1, 2, 3, 4, 5]).unwrap(), vec![3, 4, 2, 5, 1]);
        assert_eq!(olo_place(&[1, 2, 3, 4]).unwrap(), vec![2, 3, 1, 4]);
        assert_eq!(olo_place(&[1, 2]).unwrap(), vec![1, 2]);
        assert_eq!(olo_place(&[1]).unwrap(), vec![1]);
        assert!(olo_place(&[1, 1]).is_err());
        assert!(olo_place(&[0, 1]).is_err());
    }

    #[test]
    fn consensus_examples() {
        // Positions 2 and 4 under weights 3/4 and 1/4.
        let c = consensus_order(&[&[2, 1, 3, 4], &[4, 1, 2, 3]], &[3, 1], 4).unwrap();
        assert_eq!(c.scores[0], 2.5);

        let c = consensus_order(&[&[3, 1, 2]], &[5], 5).unwrap();
        assert_eq!(c.ranks, vec![3, 1, 2]);

        // Scores (2.5, 1.75, 1.75) sort to ranks (3, 1, 2).
        let c = consensus_order(&[&[3, 2, 1], &[1, 1, 4]], &[3, 1], 4).unwrap();
        assert_eq!(c.scores, vec![2.5, 1.75, 1.75]);
        assert_eq!(c.ranks, vec![3, 1, 2]);

        let c = consensus_order(&[&[1, 2, 3], &[3, 2, 1]], &[2, 0], 2).unwrap();
        assert_eq!(c.ranks, vec![1, 2, 3]);
        assert!(consensus_order(&[&[1, 2, 3], &[1, 2]], &[1, 1], 2).is_err());
    }

    #[test]
    fn density_cases() {
        let d = Dataset::from_code_rows(&[3], &[vec![0], vec![0], vec![1], vec![2]]).unwrap();
        let q = Partition::new(vec![0, 0, 0, 1], 2).unwrap();
        let o = OrderSet::identity(&[3]);
        let prof = compute_profile(&d, &q);
        let obj = objective(&d, &q, &o).unwrap();
        let t = link_density(&prof, &obj);
        // Pure cluster 1: its own value is infinitely dense, the rest zero.
        assert_eq!(t.omega(1, 0), &[0.0, 0.0, f64::INFINITY]);
        assert_eq!(t.eta(1, 0), &[2, 3, 1]);
        // Cluster 0: p = (2/3, 1/3, 0), θ(a) = 1/6, θ(b) = 1/3.
        let w = t.omega(0, 0);
        assert!((w[0] - (2.0 / 3.0) / (2.0 / 6.0)).abs() < 1e-12);
        assert!((w[1] - (1.0 / 3.0) / (1.0 / 3.0)).abs() < 1e-12);
        assert_eq!(w[2], 0.0);
    }

    #[test]
    fn pure_clusters_hand_trace() {
        // Sizes 3 and 1, l = 3: cluster 0 is all `a`, cluster 1 all `b`.
        let attr = crate::data::CategoricalAttribute::nominal(
            "x",
            vec!["a".into(), "b".into(), "c".into()],
        );
        let d = Dataset::new(4, vec![attr], vec![0, 0, 0, 1]).unwrap();
        let q = Partition::new(vec![0, 0, 0, 1], 2).unwrap();
        let learned = learn_orders(&d, &q, &OrderSet::identity(&[3])).unwrap();
        // η: cluster 0 = (1,2,3) → positions (2,3,1); cluster 1 = (2,1,3) → (3,2,1).
        assert_eq!(learned.scores[0], Some(vec![2.25, 2.75, 1.0]));
        assert_eq!(learned.orders.ranks(0), &[2, 3, 1]);
        // The dominant cluster's densest value sits in the center.
        assert_eq!(learned.orders.ranks(0)[0], 2);
    }

    #[test]
    fn binary_attributes_pass_through() {
        let d = Dataset::from_code_rows(&[2, 2], &[vec![0, 1], vec![1, 0], vec![1, 1]]).unwrap();
        let q = Partition::new(vec![0, 1, 1], 2).unwrap();
        let o = OrderSet::from_ranks(vec![vec![2, 1], vec![1, 2]]).unwrap();
        let learned = learn_orders(&d, &q, &o).unwrap();
        assert_eq!(learned.orders, o);
        assert!(learned.scores.iter().all(Option::is_none));
    }

    #[test]
    fn semantic_requires_ordinal() {
        let d = Dataset::from_code_rows(&[3], &[vec![0], vec![1], vec![2]]).unwrap();
        assert!(matches!(
            OrderSet::semantic(&d),
            Err(Error::NoSemanticOrder)
        ));
    }

    proptest! {
        #[test]
        fn placement_is_bijection(perm in (1usize..=20).prop_flat_map(|l| {
            Just((1..=l as u32).collect::<Vec<_>>()).prop_shuffle()
        })) {
            let pos = olo_place(&perm).unwrap();
            prop_assert!(check_permutation(&pos).is_ok());
            // Walking outward from the center visits η in increasing order.
            let l = perm.len();
            let mut by_pos = vec![0u32; l];
            for (g, &p) in pos.iter().enumerate() {
                by_pos[p as usize - 1] = perm[g];
            }
            let center = l.div_ceil(2);
            prop_assert_eq!(by_pos[center - 1], 1);
            for step in 1..l {
                let off = step.div_ceil(2);
                let p = if step % 2 == 1 { center + off } else { center - off };
                prop_assert_eq!(by_pos[p - 1] as usize, step + 1);
            }
        }

        #[test]
        fn learning_ignores_cluster_labels(
            rows in prop::collection::vec(prop::collection::vec(0u32..4, 3), 4..30),
            seed in any::<u64>(),
        ) {
            use rand::SeedableRng;
            let d = match Dataset::from_code_rows(&[4, 4, 4], &rows) {
                Ok(d) => d,
                Err(_) => return Ok(()),
            };
            let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
            let assignment: Vec<usize> = (0..rows.len()).map(|_| rand::Rng::random_range(&mut rng, 0..3)).collect();
            let q = Partition::new(assignment.clone(), 3).unwrap();
            let relabeled = Partition::new(assignment.iter().map(|&m| (m + 1) % 3).collect(), 3).unwrap();
            let o = OrderSet::random(&d.cardinalities(), &mut rng);
            let a = learn_orders(&d, &q, &o).unwrap();
            let b = learn_orders(&d, &relabeled, &o).unwrap();
            prop_assert_eq!(&a.orders, &b.orders);
            for r in 0..d.n_categorical() {
                prop_assert!(check_permutation(a.orders.ranks(r)).is_ok());
            }
        }
    }
}
