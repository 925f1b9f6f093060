//! Bond percolation laboratory for the hypercube and related transitive
//! graphs.
//!
//! The crate simulates percolation with a keyed-hash edge law (so every
//! configuration is reproducible from `(graph, p, seed)` and configurations
//! at different `p` are coupled), explores clusters in the intrinsic metric,
//! takes whole-graph censuses, estimates cluster observables by Monte Carlo,
//! computes lazy and non-backtracking mixing quantities, and checks all of it
//! against exact enumeration on tiny graphs.

pub mod census;
pub mod cluster;
pub mod error;
pub mod estimators;
pub mod experiments;
pub mod graph;
pub mod oracle;
pub mod percolation;
pub mod rng;
pub mod stats;
mod unionfind;
pub mod walks;

pub use census::{census, CensusOptions, CensusSummary, Partition};
pub use cluster::ClusterGraph;
pub use error::{LabError, Result};
pub use estimators::{
    estimate_boundary_curve, estimate_boundary_volume, estimate_cluster_tail, estimate_onearm,
    anchor_pc, estimate_onearm_curve, estimate_susceptibility, find_pc, EstimatorResult,
    Observable, PSource, PcEstimate, PcOptions,
};
pub use experiments::{
    fit_ratios, onearm_profile_fit, run_sweep, FitLaw, FitReport, SweepCell, SweepPlan, SweepReport,
    SweepRow,
};
pub use graph::{EdgeId, GraphKind, GraphSpec, VertexId};
pub use oracle::{enumerate_exact, forced_assignment_bfs, ExactLaw};
pub use percolation::{
    cluster_diameter, explore_cluster, lane_census, AvoidSet, ClusterReport, EdgeStatus,
    ExploreOptions, Explorer, LaneCensus, PercolationSample,
};
pub use unionfind::UnionFind;
pub use walks::{
    assumption_sums, assumption_sums_at, lazy_tmix_bound, lazy_tmix_exact, nb_kernel, nb_tmix,
    triangle_sum, AssumptionSums, NbKernel, NbWalk, TriangleMode, TriangleValue,
};
