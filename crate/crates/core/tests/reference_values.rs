//! Small cases checked against values worked out by hand or taken from
//! scikit-learn's metric implementations.

use approx::assert_relative_eq;
use ocl_core::{
    adjusted_rand_index, clustering_accuracy, compute_profile, normalized_mutual_info, objective,
    olo_place, order_distance_vector, rank_descending, sample_cluster_distance, Dataset,
    DistanceTable, OrderSet, Partition,
};

#[test]
fn rand_and_mutual_information_match_scikit_learn() {
    // (truth, pred, adjusted_rand_score, normalized_mutual_info_score)
    let cases: [(&[usize], &[usize], f64, f64); 4] = [
        (
            &[0, 0, 1, 1],
            &[0, 0, 1, 2],
            0.5714285714285714,
            0.7999999999999999,
        ),
        (
            &[0, 0, 0, 1, 1, 1],
            &[0, 0, 1, 1, 2, 2],
            0.24242424242424243,
            0.5158037429793889,
        ),
        (
            &[0, 1, 2, 0, 1, 2, 0, 1],
            &[1, 1, 0, 0, 2, 2, 2, 0],
            -0.3333333333333333,
            0.0784973842893764,
        ),
        (&[0, 0, 0, 0], &[0, 1, 2, 3], 0.0, 0.0),
    ];
    for (truth, pred, ari, nmi) in cases {
        assert_relative_eq!(
            adjusted_rand_index(pred, truth).unwrap(),
            ari,
            epsilon = 1e-12
        );
        assert_relative_eq!(
            normalized_mutual_info(pred, truth).unwrap(),
            nmi,
            epsilon = 1e-12
        );
    }
}

#[test]
fn accuracy_uses_the_best_one_to_one_matching() {
    // Clusters {0,1} and {4,5} map onto classes 0 and 1; cluster 1 is left over.
    let truth = [0, 0, 0, 1, 1, 1];
    let pred = [0, 0, 1, 1, 2, 2];
    assert_relative_eq!(clustering_accuracy(&pred, &truth).unwrap(), 4.0 / 6.0);
    // Label names do not matter.
    assert_eq!(
        clustering_accuracy(&[2, 2, 0, 0], &[0, 0, 1, 1]).unwrap(),
        1.0
    );
}

#[test]
fn order_distance_is_normalized_rank_gap() {
    // Ranks b=1, c=2, a=3 on a three-value attribute.
    let v = order_distance_vector(1, &[3, 1, 2]).unwrap();
    assert_eq!(v, vec![1.0, 0.0, 0.5]);
    let v = order_distance_vector(2, &[3, 1, 2]).unwrap();
    assert_eq!(v, vec![0.5, 0.5, 0.0]);
    assert!(order_distance_vector(0, &[1]).is_err());
}

#[test]
fn weighted_distance_and_objective_by_hand() {
    // One attribute with values 0 < 1 < 2; a single cluster holding 0, 0, 1, 2.
    // p = (1/2, 1/4, 1/4); distance vectors are (0, .5, 1), (.5, 0, .5), (1, .5, 0).
    let d = Dataset::from_code_rows(&[3], &[vec![0], vec![0], vec![1], vec![2]]).unwrap();
    let q = Partition::new(vec![0; 4], 1).unwrap();
    let o = OrderSet::identity(&[3]);
    let prof = compute_profile(&d, &q);
    let dist = DistanceTable::from_orders(&d, &o).unwrap();
    let theta: Vec<f64> = (0..4)
        .map(|i| sample_cluster_distance(&d, i, 0, &dist, &prof).unwrap())
        .collect();
    assert_relative_eq!(theta[0], 0.375);
    assert_relative_eq!(theta[2], 0.375);
    assert_relative_eq!(theta[3], 0.625);
    // 2 × 0.375 + 0.375 + 0.625
    assert_relative_eq!(objective(&d, &q, &o).unwrap().total, 1.75);
}

#[test]
fn placement_alternates_around_the_centre() {
    assert_eq!(olo_place(&[1, 2, 3, 4, 5]).unwrap(), vec![3, 4, 2, 5, 1]);
    assert_eq!(olo_place(&[1, 2, 3, 4]).unwrap(), vec![2, 3, 1, 4]);
    assert_eq!(olo_place(&[2, 1]).unwrap(), vec![2, 1]);
    assert!(olo_place(&[1, 1]).is_err());
}

#[test]
fn ranking_breaks_ties_towards_the_lower_index() {
    assert_eq!(rank_descending(&[0.2, 0.7, 0.2, 0.9]), vec![3, 2, 4, 1]);
    assert_eq!(rank_descending(&[f64::INFINITY, 0.0, 1.0]), vec![1, 3, 2]);
}
