//! Shared inputs for the criterion benches.

use ocl_core::{fit_kmodes, synthesize, Dataset, OrderSet, Partition};

/// Synthetic dataset with five values per attribute, a k-modes partition and
/// identity orders.
pub fn case(n: usize, s: usize, k: usize) -> (Dataset, Partition, OrderSet) {
    let d = synthesize(n, s, k, 5, 42).expect("valid synthetic sizes");
    let (q, _) = fit_kmodes(&d, k, 42).expect("k within range");
    let o = OrderSet::identity(&d.cardinalities());
    (d, q, o)
}
