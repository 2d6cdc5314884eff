//! List-decodable mean estimation for sparse means.
//!
//! Given `m` samples of which only an `alpha < 1/2` fraction are drawn from a
//! distribution with bounded moments in sparse directions, output a short list
//! of `k`-sparse vectors, one of which is close to the true mean.
//!
//! The pipeline works on pairwise differences. A moment filter discards pairs
//! that carry too much mass along some sparse direction; the survivors form
//! a graph whose dense neighborhoods are rounded to candidate means.
//!
//! ```
//! use ldsparse::{estimate_list, Dataset, EstimatorConfig, MomentParams, SparseOracle};
//!
//! let data = Dataset::from_rows(&vec![vec![0.0, 2.0, 0.0]; 10]).unwrap();
//! let params = MomentParams::gaussian(2, 1, 0.3).unwrap();
//! let list = estimate_list(&data, &params, &SparseOracle::default(), &EstimatorConfig::default(), 4, 0).unwrap();
//! assert_eq!(list.candidates, vec![vec![0.0, 2.0, 0.0]]);
//! ```

pub mod dataset;
pub mod error;
pub mod estimator;
pub mod filter;
pub mod graph;
pub mod harness;
pub mod oracle;
pub mod pairs;
pub mod par;
pub mod params;
pub mod points;
pub mod rounding;
pub mod seed;
pub mod sparse;

pub use dataset::Dataset;
pub use error::{Error, Result};
pub use estimator::{
    estimate_list, ld_sparse_mean, min_list_error, run_pipeline, EstimateList, EstimatorConfig,
};
pub use filter::{dp_filter, filter_potential, FilterConfig, FilterOutcome, FilterStep};
pub use graph::{build_pair_graph, graph_moment, overlap_graph, prune, PairGraph};
pub use oracle::{
    certify_or_violate, sparse_moment_max_ascent, sparse_moment_max_exact_t2, CertificateKind,
    DirectionCertificate, DirectionOracle, SparseMax, SparseOracle,
};
pub use pairs::{difference_pairs, DifferenceSet, Pair};
pub use params::MomentParams;
pub use points::{PointSet, Points};
pub use rounding::{rounding, RoundingConfig, RoundingOutcome};
pub use sparse::{hk_truncate, two_k_norm, SparseDirection};
