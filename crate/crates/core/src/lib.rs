//! Cluster-based multidimensional scaling (CB-MDS) for node localization in
//! wireless sensor networks.
//!
//! The crate is organized bottom-up:
//!
//! - [`topology`] generates ground-truth deployments (square, C, L and H
//!   shaped fields; grid or uniform random placement).
//! - [`network`] builds the unit-disk connectivity graph with measured edge
//!   lengths and completes distance matrices with shortest paths.
//! - [`mds`] is classical (metric) MDS.
//! - [`clustering`] partitions the network with k-means and extends clusters
//!   with gateway nodes.
//! - [`alignment`] fits rigid and similarity transforms between point sets.
//! - [`localization`] holds the two end-to-end pipelines, MDS-MAP and CB-MDS.
//! - [`harness`] runs Monte-Carlo sweeps and writes CSV and SVG output.
//!
//! All lengths are expressed in units of the grid spacing `r`.

pub mod alignment;
pub mod clustering;
pub mod harness;
pub mod localization;
pub mod mds;
pub mod network;
pub mod seed;
pub mod topology;

/// A 2-D position in units of `r`.
pub type Point = nalgebra::Point2<f64>;

/// Nodes are identified by their index in the deployment.
pub type NodeId = usize;

pub use alignment::{procrustes_rigid, procrustes_similarity, Fit, Transform2D};
pub use clustering::{extend_clusters, kmeans_clusters, ClusterSet};
pub use localization::{
    cb_mds, mds_map_baseline, mean_normalized_error, GlobalMap, LocalMap, PositionMap,
};
pub use mds::{classical_mds, RelativeMap};
pub use network::{build_network, DistanceMatrix, Network};
pub use topology::{generate_deployment, Deployment, FieldSpec, Placement, Shape};
