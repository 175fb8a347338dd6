//! Clustering of categorical and mixed data with learned value orders.
//!
//! Each categorical attribute gets an integer order over its values; the
//! normalized rank difference between two values is their distance. Orders
//! and the partition are learned jointly by alternating minimization of the
//! total sample-to-cluster distance.
//!
//! ```
//! use ocl_core::{fit_ocl, Dataset, FitConfig};
//!
//! let rows = vec![
//!     vec!["a", "x"], vec!["a", "x"], vec!["a", "y"],
//!     vec!["c", "z"], vec!["c", "z"], vec!["b", "z"],
//! ];
//! let data = Dataset::from_string_rows(&["colour", "shape"], &rows).unwrap();
//! let fit = fit_ocl(&data, &FitConfig::new(2)).unwrap();
//! assert_eq!(fit.partition.assignment()[0], fit.partition.assignment()[1]);
//! assert_ne!(fit.partition.assignment()[0], fit.partition.assignment()[3]);
//! ```

pub mod cluster;
pub mod data;
pub mod error;
pub mod eval;
pub mod metric;
pub mod oracle;
pub mod order;
pub mod report;

pub use cluster::{
    assign, efficiency_bench, fit_fixed_order, fit_kmodes, fit_kprototypes, fit_mixed, fit_ocl,
    Ablation, FitConfig, FitOutcome, FitTrace, InitMode, OrderMode, OrdinalPolicy, Partition,
    SweepAxis, SweepSpec, TimingRow, TracePoint,
};
pub use data::{
    load_csv, read_csv, synthesize, AttributeKind, AttributeSchema, CategoricalAttribute, Dataset,
    DatasetStats, DegenerateAttribute, Labels, MissingPolicy, Schema,
};
pub use error::{Error, ErrorClass, Result};
pub use eval::{
    adjusted_rand_index, aggregate, clustering_accuracy, compactness, evaluate,
    normalized_mutual_info, MetricReport, Metrics, Summary,
};
pub use metric::{
    compute_profile, objective, order_distance_vector, pairwise_distances, sample_cluster_distance,
    AttributeMetric, ClusterProfile, DistanceTable, ObjectiveReport, Theta,
};
pub use order::{
    consensus_order, learn_orders, link_density, olo_place, rank_descending, Consensus,
    LearnedOrders, LinkDensityTable, OrderSet, PerClusterOrder,
};
pub use report::{export_orders, to_toml, write_csv_rows, BenchRow, OrderEntry, OrdersExport};
