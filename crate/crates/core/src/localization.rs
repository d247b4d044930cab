//! End-to-end localization pipelines.
//!
//! [`mds_map_baseline`] runs classical MDS once over the whole network's
//! shortest-path matrix. [`cb_mds`] clusters the network, builds one local
//! map per extended cluster, stitches the local maps together through their
//! shared gateway nodes, and finally aligns the stitched map to the anchors.

use std::collections::BTreeMap;
use std::io::Write;

use rayon::prelude::*;
use thiserror::Error;

use crate::alignment::{procrustes_rigid, procrustes_similarity, AlignError};
use crate::clustering::{extend_clusters, kmeans_clusters, ClusterError, ClusterSet};
use crate::mds::{classical_mds, MdsError, RelativeMap};
use crate::network::{shortest_path_matrix, Network, NetworkError};
use crate::{NodeId, Point};

/// Absolute positions keyed by node id.
pub type PositionMap = BTreeMap<NodeId, Point>;

/// Clusters must share at least this many nodes to be merged.
pub const MIN_COMMON_NODES: usize = 3;

#[derive(Debug, Clone, Error, PartialEq)]
pub enum LocalizationError {
    #[error("cluster {cluster}: nodes {a} and {b} are not connected inside the cluster")]
    ClusterDisconnected {
        cluster: usize,
        a: NodeId,
        b: NodeId,
    },
    #[error("cluster {0} never shares {MIN_COMMON_NODES} nodes with the merged map")]
    OverlapTooSmall(usize),
    #[error("need at least 3 anchors, got {0}")]
    TooFewAnchors(usize),
    #[error("anchor {0} is not a node of the network")]
    UnknownAnchor(NodeId),
    #[error("estimated and true position maps cover different nodes")]
    MismatchedNodeSets,
    #[error("local map for cluster {0} is missing")]
    MissingLocalMap(usize),
    #[error(transparent)]
    Network(#[from] NetworkError),
    #[error(transparent)]
    Mds(#[from] MdsError),
    #[error(transparent)]
    Cluster(#[from] ClusterError),
    #[error(transparent)]
    Align(#[from] AlignError),
}

#[derive(Debug, Clone, PartialEq)]
pub struct LocalMap {
    pub cluster_id: usize,
    pub map: RelativeMap,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Provenance {
    MdsMap,
    CbMds,
}

/// One merge: `slave` was fitted onto the merged map. `master` is the
/// already-merged cluster sharing the most nodes with it.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct MergeStep {
    pub master: usize,
    pub slave: usize,
    pub common_nodes: usize,
    pub ill_conditioned: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct GlobalMap {
    pub map: RelativeMap,
    pub provenance: Provenance,
    /// Cluster whose local frame the global map is expressed in.
    pub seed_cluster: Option<usize>,
    pub merge_order: Vec<MergeStep>,
}

/// Everything produced by one CB-MDS run, for inspection and rendering.
#[derive(Debug, Clone)]
pub struct CbMdsRun {
    pub clusters: ClusterSet,
    pub local_maps: Vec<LocalMap>,
    pub global: GlobalMap,
    pub positions: PositionMap,
}

pub fn truth_map(net: &Network) -> PositionMap {
    net.positions().iter().copied().enumerate().collect()
}

/// One local map per extended cluster: shortest paths restricted to the
/// cluster's members, then classical MDS.
pub fn build_local_maps(
    clusters: &ClusterSet,
    net: &Network,
) -> Result<Vec<LocalMap>, LocalizationError> {
    clusters
        .extended
        .par_iter()
        .enumerate()
        .map(|(cluster_id, members)| {
            let d = shortest_path_matrix(net, members).map_err(|e| match e {
                NetworkError::SubsetDisconnected(a, b) => LocalizationError::ClusterDisconnected {
                    cluster: cluster_id,
                    a,
                    b,
                },
                other => other.into(),
            })?;
            Ok(LocalMap {
                cluster_id,
                map: classical_mds(&d, 2)?,
            })
        })
        .collect()
}

/// Greedy iterative merge of local maps.
///
/// The largest extended cluster seeds the merged map. Each step picks the
/// unmerged cluster sharing the most already-placed nodes (at least
/// [`MIN_COMMON_NODES`]), fits it rigidly onto the placed coordinates of
/// those shared nodes, and places its remaining nodes. Placed nodes never
/// move.
pub fn merge_local_maps(
    maps: &[LocalMap],
    clusters: &ClusterSet,
) -> Result<GlobalMap, LocalizationError> {
    let k = clusters.k();
    let n = clusters.node_count();
    let mut by_cluster: Vec<Option<&LocalMap>> = vec![None; k];
    for m in maps {
        if m.cluster_id < k {
            by_cluster[m.cluster_id] = Some(m);
        }
    }
    let by_cluster: Vec<&LocalMap> = by_cluster
        .into_iter()
        .enumerate()
        .map(|(c, m)| m.ok_or(LocalizationError::MissingLocalMap(c)))
        .collect::<Result<_, _>>()?;

    let seed = (0..k)
        .max_by(|&a, &b| {
            clusters.extended[a]
                .len()
                .cmp(&clusters.extended[b].len())
                .then(b.cmp(&a))
        })
        .expect("at least one cluster");

    let mut placed: Vec<Option<Point>> = vec![None; n];
    let mut merged = vec![false; k];
    merged[seed] = true;
    for (&id, &p) in by_cluster[seed]
        .map
        .node_ids
        .iter()
        .zip(&by_cluster[seed].map.coords)
    {
        placed[id] = Some(p);
    }

    let mut merge_order = Vec::new();
    while merged.iter().any(|m| !m) {
        let mut best: Option<(usize, usize)> = None;
        for c in (0..k).filter(|&c| !merged[c]) {
            let common = by_cluster[c]
                .map
                .node_ids
                .iter()
                .filter(|&&id| placed[id].is_some())
                .count();
            if best.is_none_or(|(_, b)| common > b) {
                best = Some((c, common));
            }
        }
        let (slave, common) = best.expect("an unmerged cluster exists");
        if common < MIN_COMMON_NODES {
            let lowest = (0..k).find(|&c| !merged[c]).expect("unmerged cluster");
            return Err(LocalizationError::OverlapTooSmall(lowest));
        }

        let local = &by_cluster[slave].map;
        let (src, dst): (Vec<Point>, Vec<Point>) = local
            .node_ids
            .iter()
            .zip(&local.coords)
            .filter_map(|(&id, &p)| placed[id].map(|q| (p, q)))
            .unzip();
        let fit = procrustes_rigid(&src, &dst)?;
        if fit.ill_conditioned {
            log::warn!("merging cluster {slave}: common nodes are collinear");
        }
        for (&id, p) in local.node_ids.iter().zip(&local.coords) {
            if placed[id].is_none() {
                placed[id] = Some(fit.transform.apply(p));
            }
        }

        let master = (0..k)
            .filter(|&c| merged[c])
            .max_by(|&a, &b| {
                shared(&clusters.extended[a], &clusters.extended[slave])
                    .cmp(&shared(&clusters.extended[b], &clusters.extended[slave]))
                    .then(b.cmp(&a))
            })
            .expect("seed is merged");
        merged[slave] = true;
        merge_order.push(MergeStep {
            master,
            slave,
            common_nodes: common,
            ill_conditioned: fit.ill_conditioned,
        });
    }

    let (node_ids, coords): (Vec<NodeId>, Vec<Point>) = placed
        .iter()
        .enumerate()
        .filter_map(|(id, p)| p.map(|p| (id, p)))
        .unzip();
    Ok(GlobalMap {
        map: RelativeMap { node_ids, coords },
        provenance: Provenance::CbMds,
        seed_cluster: Some(seed),
        merge_order,
    })
}

fn shared(a: &[NodeId], b: &[NodeId]) -> usize {
    // both sorted
    let (mut i, mut j, mut count) = (0, 0, 0);
    while i < a.len() && j < b.len() {
        match a[i].cmp(&b[j]) {
            std::cmp::Ordering::Less => i += 1,
            std::cmp::Ordering::Greater => j += 1,
            std::cmp::Ordering::Equal => {
                count += 1;
                i += 1;
                j += 1;
            }
        }
    }
    count
}

fn check_anchors(net: &Network, anchors: &PositionMap) -> Result<(), LocalizationError> {
    if anchors.len() < 3 {
        return Err(LocalizationError::TooFewAnchors(anchors.len()));
    }
    if let Some(&bad) = anchors.keys().find(|&&id| id >= net.len()) {
        return Err(LocalizationError::UnknownAnchor(bad));
    }
    Ok(())
}

/// Fits a similarity transform from the anchors' relative coordinates onto
/// their known positions and applies it to every node.
pub fn align_to_anchors(
    relative: &RelativeMap,
    anchors: &PositionMap,
) -> Result<PositionMap, LocalizationError> {
    let mut src = Vec::with_capacity(anchors.len());
    let mut dst = Vec::with_capacity(anchors.len());
    for (&id, &p) in anchors {
        src.push(
            relative
                .get(id)
                .ok_or(LocalizationError::UnknownAnchor(id))?,
        );
        dst.push(p);
    }
    let fit = procrustes_similarity(&src, &dst)?;
    Ok(relative
        .node_ids
        .iter()
        .zip(&relative.coords)
        .map(|(&id, p)| (id, fit.transform.apply(p)))
        .collect())
}

/// Relative map of the MDS-MAP baseline: classical MDS on the full-graph
/// shortest-path matrix.
pub fn mds_map_relative(net: &Network) -> Result<GlobalMap, LocalizationError> {
    let ids: Vec<NodeId> = (0..net.len()).collect();
    let d = shortest_path_matrix(net, &ids)?;
    Ok(GlobalMap {
        map: classical_mds(&d, 2)?,
        provenance: Provenance::MdsMap,
        seed_cluster: None,
        merge_order: Vec::new(),
    })
}

pub fn mds_map_baseline(
    net: &Network,
    anchors: &PositionMap,
) -> Result<PositionMap, LocalizationError> {
    check_anchors(net, anchors)?;
    align_to_anchors(&mds_map_relative(net)?.map, anchors)
}

pub fn cb_mds(
    net: &Network,
    k: usize,
    anchors: &PositionMap,
    seed: u64,
) -> Result<PositionMap, LocalizationError> {
    cb_mds_detailed(net, k, anchors, seed).map(|run| run.positions)
}

pub fn cb_mds_detailed(
    net: &Network,
    k: usize,
    anchors: &PositionMap,
    seed: u64,
) -> Result<CbMdsRun, LocalizationError> {
    check_anchors(net, anchors)?;
    let base = kmeans_clusters(net.positions(), k, seed)?;
    let clusters = extend_clusters(&base, net);
    let local_maps = build_local_maps(&clusters, net)?;
    let global = merge_local_maps(&local_maps, &clusters)?;
    let positions = align_to_anchors(&global.map, anchors)?;
    Ok(CbMdsRun {
        clusters,
        local_maps,
        global,
        positions,
    })
}

/// Mean distance between estimated and true positions, in units of `R`.
pub fn mean_normalized_error(
    estimated: &PositionMap,
    truth: &PositionMap,
    radio_range: f64,
) -> Result<f64, LocalizationError> {
    if estimated.len() != truth.len() || estimated.keys().ne(truth.keys()) {
        return Err(LocalizationError::MismatchedNodeSets);
    }
    if truth.is_empty() {
        return Ok(0.0);
    }
    let total: f64 = estimated
        .values()
        .zip(truth.values())
        .map(|(e, t)| (e - t).norm())
        .sum();
    Ok(total / truth.len() as f64 / radio_range)
}

/// Writes `node_id,true_x,true_y,est_x,est_y` rows.
pub fn write_positions_csv<W: Write>(
    out: W,
    truth: &PositionMap,
    estimated: &PositionMap,
) -> Result<(), csv::Error> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(["node_id", "true_x", "true_y", "est_x", "est_y"])?;
    for (id, t) in truth {
        let Some(e) = estimated.get(id) else { continue };
        w.write_record([
            id.to_string(),
            t.x.to_string(),
            t.y.to_string(),
            e.x.to_string(),
            e.y.to_string(),
        ])?;
    }
    w.flush()?;
    Ok(())
}
