//! Initial clustering (k-means on node positions) and cluster extension.
//!
//! Clustering runs on ground-truth positions: the network is treated as
//! already clustered, and k-means stands in for whatever clustering protocol
//! a deployment would actually use.

use std::collections::BTreeSet;

use rand::Rng;
use thiserror::Error;

use crate::network::Network;
use crate::{seed, NodeId, Point};

pub const MAX_ITERATIONS: usize = 300;

#[derive(Debug, Clone, Error, PartialEq)]
pub enum ClusterError {
    #[error("k = {k} exceeds the node count {nodes}")]
    KTooLarge { k: usize, nodes: usize },
    #[error("k must be at least 1")]
    ZeroK,
}

/// Partition of the nodes into `k` clusters, plus the gateway-extended
/// memberships.
#[derive(Debug, Clone, PartialEq)]
pub struct ClusterSet {
    /// Core members per cluster, sorted; the cores partition all nodes.
    pub cores: Vec<Vec<NodeId>>,
    pub heads: Vec<NodeId>,
    /// Core members plus adopted gateways, sorted.
    pub extended: Vec<Vec<NodeId>>,
    /// Core cluster of each node.
    pub assignment: Vec<usize>,
    /// Clusters each node takes part in, sorted; always contains its core.
    pub participation: Vec<Vec<usize>>,
}

impl ClusterSet {
    pub fn k(&self) -> usize {
        self.cores.len()
    }

    pub fn node_count(&self) -> usize {
        self.assignment.len()
    }

    pub fn is_gateway(&self, node: NodeId) -> bool {
        self.participation[node].len() >= 2
    }

    pub fn gateways(&self) -> impl Iterator<Item = NodeId> + '_ {
        (0..self.node_count()).filter(|&n| self.is_gateway(n))
    }

    /// Builds a cluster set (without extension) from an explicit assignment.
    /// Heads are the lowest-id member of each cluster.
    pub fn from_assignment(assignment: Vec<usize>, k: usize) -> Self {
        let mut cores = vec![Vec::new(); k];
        for (node, &c) in assignment.iter().enumerate() {
            cores[c].push(node);
        }
        let heads = cores
            .iter()
            .map(|c| c.first().copied().unwrap_or(0))
            .collect();
        Self::assemble(cores, heads, assignment)
    }

    fn assemble(cores: Vec<Vec<NodeId>>, heads: Vec<NodeId>, assignment: Vec<usize>) -> Self {
        let participation = assignment.iter().map(|&c| vec![c]).collect();
        Self {
            extended: cores.clone(),
            cores,
            heads,
            assignment,
            participation,
        }
    }
}

fn dist2(a: &Point, b: &Point) -> f64 {
    (a - b).norm_squared()
}

fn nearest(p: &Point, centroids: &[Point]) -> usize {
    let mut best = 0;
    let mut best_d = f64::INFINITY;
    for (idx, c) in centroids.iter().enumerate() {
        let d = dist2(p, c);
        if d < best_d {
            best = idx;
            best_d = d;
        }
    }
    best
}

fn kmeans_plus_plus<R: Rng>(points: &[Point], k: usize, rng: &mut R) -> Vec<Point> {
    let n = points.len();
    let mut chosen = vec![false; n];
    let first = rng.random_range(0..n);
    chosen[first] = true;
    let mut centroids = vec![points[first]];
    let mut d2: Vec<f64> = points.iter().map(|p| dist2(p, &points[first])).collect();
    while centroids.len() < k {
        let total: f64 = d2.iter().sum();
        let pick = if total > 0.0 {
            let target = rng.random_range(0.0..total);
            let mut acc = 0.0;
            let mut pick = None;
            for (idx, &w) in d2.iter().enumerate() {
                acc += w;
                if w > 0.0 && acc > target {
                    pick = Some(idx);
                    break;
                }
            }
            // rounding can leave `acc` just short of `target`
            pick.unwrap_or_else(|| (0..n).rev().find(|&i| d2[i] > 0.0).unwrap())
        } else {
            (0..n).find(|&i| !chosen[i]).expect("k <= n")
        };
        chosen[pick] = true;
        centroids.push(points[pick]);
        for (idx, p) in points.iter().enumerate() {
            d2[idx] = d2[idx].min(dist2(p, &points[pick]));
        }
    }
    centroids
}

fn update_centroids(points: &[Point], assignment: &[usize], centroids: &mut [Point]) -> Vec<usize> {
    let k = centroids.len();
    let mut sums = vec![nalgebra::Vector2::zeros(); k];
    let mut counts = vec![0usize; k];
    for (p, &c) in points.iter().zip(assignment) {
        sums[c] += p.coords;
        counts[c] += 1;
    }
    for c in 0..k {
        if counts[c] > 0 {
            centroids[c] = Point::from(sums[c] / counts[c] as f64);
        }
    }
    counts
}

/// Moves the point farthest from its centroid into each empty cluster.
fn repair_empty(points: &[Point], assignment: &mut [usize], centroids: &mut [Point]) {
    loop {
        let counts = update_centroids(points, assignment, centroids);
        let Some(empty) = counts.iter().position(|&c| c == 0) else {
            return;
        };
        let mut far = None;
        let mut far_d = -1.0;
        for (idx, p) in points.iter().enumerate() {
            let c = assignment[idx];
            if counts[c] > 1 {
                let d = dist2(p, &centroids[c]);
                if d > far_d {
                    far_d = d;
                    far = Some(idx);
                }
            }
        }
        let idx = far.expect("k <= n leaves a cluster with two members");
        assignment[idx] = empty;
        centroids[empty] = points[idx];
    }
}

/// Lloyd's algorithm with k-means++ seeding. Heads are the members nearest
/// their cluster centroid.
pub fn kmeans_clusters(points: &[Point], k: usize, seed: u64) -> Result<ClusterSet, ClusterError> {
    let n = points.len();
    if k == 0 {
        return Err(ClusterError::ZeroK);
    }
    if k > n {
        return Err(ClusterError::KTooLarge { k, nodes: n });
    }
    let mut rng = seed::rng(seed);
    let mut centroids = kmeans_plus_plus(points, k, &mut rng);
    let mut assignment: Vec<usize> = points.iter().map(|p| nearest(p, &centroids)).collect();
    repair_empty(points, &mut assignment, &mut centroids);
    for _ in 0..MAX_ITERATIONS {
        let next: Vec<usize> = points.iter().map(|p| nearest(p, &centroids)).collect();
        if next == assignment {
            break;
        }
        assignment = next;
        repair_empty(points, &mut assignment, &mut centroids);
    }

    let mut cores = vec![Vec::new(); k];
    for (node, &c) in assignment.iter().enumerate() {
        cores[c].push(node);
    }
    let heads = cores
        .iter()
        .map(|members| {
            let centroid = Point::from(
                members
                    .iter()
                    .fold(nalgebra::Vector2::zeros(), |acc, &m| acc + points[m].coords)
                    / members.len() as f64,
            );
            let mut head = members[0];
            for &m in members {
                if dist2(&points[m], &centroid) < dist2(&points[head], &centroid) {
                    head = m;
                }
            }
            head
        })
        .collect();
    Ok(ClusterSet::assemble(cores, heads, assignment))
}

/// Adds one-hop neighbors from foreign clusters: for every edge `(A, B)` with
/// `A` in core `a` and `B` in core `b ≠ a`, `B` joins `a` and `A` joins `b`.
pub fn extend_clusters(clusters: &ClusterSet, net: &Network) -> ClusterSet {
    let k = clusters.k();
    let mut extended: Vec<BTreeSet<NodeId>> = clusters
        .cores
        .iter()
        .map(|c| c.iter().copied().collect())
        .collect();
    let mut participation: Vec<BTreeSet<usize>> = clusters
        .assignment
        .iter()
        .map(|&c| BTreeSet::from([c]))
        .collect();
    for (a, b, _) in net.edges() {
        let (ca, cb) = (clusters.assignment[a], clusters.assignment[b]);
        if ca != cb {
            extended[ca].insert(b);
            extended[cb].insert(a);
            participation[a].insert(cb);
            participation[b].insert(ca);
        }
    }
    debug_assert_eq!(extended.len(), k);
    ClusterSet {
        cores: clusters.cores.clone(),
        heads: clusters.heads.clone(),
        extended: extended
            .into_iter()
            .map(|s| s.into_iter().collect())
            .collect(),
        assignment: clusters.assignment.clone(),
        participation: participation
            .into_iter()
            .map(|s| s.into_iter().collect())
            .collect(),
    }
}
