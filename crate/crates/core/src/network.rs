//! Unit-disk connectivity graph with measured edge lengths, and shortest-path
//! completion of distance matrices.

use std::cmp::Ordering;
use std::collections::{BinaryHeap, VecDeque};

use nalgebra::DMatrix;
use rand_distr::{Distribution, Normal};
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::topology::Deployment;
use crate::{seed, NodeId, Point};

/// Measured lengths are clamped to at least this fraction of the true length.
const MIN_MEASURED_FRACTION: f64 = 1e-3;

#[derive(Debug, Clone, Error, PartialEq)]
pub enum NetworkError {
    #[error("radio range must be positive, got {0}")]
    InvalidRange(f64),
    #[error("measurement noise must be nonnegative and finite, got {0}")]
    InvalidNoise(f64),
    #[error("network is disconnected ({components} components)")]
    Disconnected { components: usize },
    #[error("no path between nodes {0} and {1} inside the subset")]
    SubsetDisconnected(NodeId, NodeId),
    #[error("invalid node subset: {0}")]
    InvalidSubset(String),
    #[error("invalid edge ({0}, {1}): {2}")]
    InvalidEdge(NodeId, NodeId, String),
    #[error("invalid distance matrix: {0}")]
    InvalidMatrix(String),
}

/// Connectivity graph over a deployment.
///
/// Ground-truth positions are carried for evaluation only; the localization
/// pipelines read nothing but the measured edge lengths.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(into = "NetworkJson", try_from = "NetworkJson")]
pub struct Network {
    positions: Vec<Point>,
    radio_range: f64,
    measurement_noise_sigma: f64,
    /// Neighbor lists sorted by node id: `(neighbor, measured_distance)`.
    adjacency: Vec<Vec<(NodeId, f64)>>,
}

impl Network {
    /// Builds a network from an explicit edge list, e.g. for fixtures.
    pub fn from_edges(
        positions: Vec<Point>,
        radio_range: f64,
        edges: &[(NodeId, NodeId, f64)],
    ) -> Result<Self, NetworkError> {
        if !(radio_range > 0.0 && radio_range.is_finite()) {
            return Err(NetworkError::InvalidRange(radio_range));
        }
        let n = positions.len();
        let mut adjacency = vec![Vec::new(); n];
        for &(a, b, d) in edges {
            if a >= n || b >= n || a == b {
                return Err(NetworkError::InvalidEdge(a, b, "bad endpoints".into()));
            }
            if !(d > 0.0 && d.is_finite()) {
                return Err(NetworkError::InvalidEdge(a, b, format!("length {d}")));
            }
            if adjacency[a].iter().any(|&(x, _)| x == b) {
                return Err(NetworkError::InvalidEdge(a, b, "duplicate".into()));
            }
            adjacency[a].push((b, d));
            adjacency[b].push((a, d));
        }
        for list in &mut adjacency {
            list.sort_by_key(|&(j, _)| j);
        }
        let net = Self {
            positions,
            radio_range,
            measurement_noise_sigma: 0.0,
            adjacency,
        };
        net.check_connected()?;
        Ok(net)
    }

    pub fn len(&self) -> usize {
        self.positions.len()
    }

    pub fn is_empty(&self) -> bool {
        self.positions.is_empty()
    }

    pub fn positions(&self) -> &[Point] {
        &self.positions
    }

    pub fn position(&self, id: NodeId) -> Point {
        self.positions[id]
    }

    pub fn radio_range(&self) -> f64 {
        self.radio_range
    }

    pub fn measurement_noise_sigma(&self) -> f64 {
        self.measurement_noise_sigma
    }

    pub fn neighbors(&self, id: NodeId) -> &[(NodeId, f64)] {
        &self.adjacency[id]
    }

    pub fn measured(&self, a: NodeId, b: NodeId) -> Option<f64> {
        self.adjacency[a]
            .binary_search_by_key(&b, |&(j, _)| j)
            .ok()
            .map(|idx| self.adjacency[a][idx].1)
    }

    /// Edges as `(a, b, measured)` with `a < b`, in lexicographic order.
    pub fn edges(&self) -> impl Iterator<Item = (NodeId, NodeId, f64)> + '_ {
        self.adjacency.iter().enumerate().flat_map(|(a, list)| {
            list.iter()
                .filter(move |&&(b, _)| b > a)
                .map(move |&(b, d)| (a, b, d))
        })
    }

    pub fn edge_count(&self) -> usize {
        self.adjacency.iter().map(Vec::len).sum::<usize>() / 2
    }

    pub fn component_count(&self) -> usize {
        let n = self.len();
        let mut seen = vec![false; n];
        let mut components = 0;
        for start in 0..n {
            if seen[start] {
                continue;
            }
            components += 1;
            seen[start] = true;
            let mut queue = VecDeque::from([start]);
            while let Some(u) = queue.pop_front() {
                for &(v, _) in &self.adjacency[u] {
                    if !seen[v] {
                        seen[v] = true;
                        queue.push_back(v);
                    }
                }
            }
        }
        components
    }

    fn check_connected(&self) -> Result<(), NetworkError> {
        match self.component_count() {
            0 | 1 => Ok(()),
            components => Err(NetworkError::Disconnected { components }),
        }
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("network serializes")
    }

    pub fn from_json(s: &str) -> Result<Self, serde_json::Error> {
        serde_json::from_str(s)
    }
}

/// Connects every pair of nodes whose true distance is at most `radio_range`.
///
/// Each measured length is `true · (1 + ε)` with `ε ~ N(0, noise_sigma)`.
pub fn build_network(
    deployment: &Deployment,
    radio_range: f64,
    noise_sigma: f64,
    seed: u64,
) -> Result<Network, NetworkError> {
    if !(radio_range > 0.0 && radio_range.is_finite()) {
        return Err(NetworkError::InvalidRange(radio_range));
    }
    if !(noise_sigma >= 0.0 && noise_sigma.is_finite()) {
        return Err(NetworkError::InvalidNoise(noise_sigma));
    }
    let positions = deployment.positions.clone();
    let n = positions.len();
    let mut rng = seed::rng(seed);
    let noise = (noise_sigma > 0.0)
        .then(|| Normal::new(0.0, noise_sigma).map_err(|_| NetworkError::InvalidNoise(noise_sigma)))
        .transpose()?;
    let mut adjacency = vec![Vec::new(); n];
    for a in 0..n {
        for b in a + 1..n {
            let d = (positions[a] - positions[b]).norm();
            if d <= radio_range {
                let measured = match &noise {
                    Some(normal) => {
                        (d * (1.0 + normal.sample(&mut rng))).max(d * MIN_MEASURED_FRACTION)
                    }
                    None => d,
                };
                adjacency[a].push((b, measured));
                adjacency[b].push((a, measured));
            }
        }
    }
    for list in &mut adjacency {
        list.sort_by_key(|&(j, _)| j);
    }
    let net = Network {
        positions,
        radio_range,
        measurement_noise_sigma: noise_sigma,
        adjacency,
    };
    net.check_connected()?;
    Ok(net)
}

/// Mean number of one-hop neighbors.
pub fn average_connectivity(net: &Network) -> f64 {
    if net.is_empty() {
        return 0.0;
    }
    2.0 * net.edge_count() as f64 / net.len() as f64
}

/// Symmetric matrix of pairwise distances over an ordered node subset.
#[derive(Debug, Clone, PartialEq)]
pub struct DistanceMatrix {
    node_ids: Vec<NodeId>,
    d: DMatrix<f64>,
}

impl DistanceMatrix {
    pub fn new(node_ids: Vec<NodeId>, d: DMatrix<f64>) -> Result<Self, NetworkError> {
        let n = node_ids.len();
        if d.nrows() != n || d.ncols() != n {
            return Err(NetworkError::InvalidMatrix(format!(
                "{}x{} matrix for {n} nodes",
                d.nrows(),
                d.ncols()
            )));
        }
        for i in 0..n {
            if d[(i, i)] != 0.0 {
                return Err(NetworkError::InvalidMatrix(format!(
                    "nonzero diagonal at {i}"
                )));
            }
            for j in i + 1..n {
                let v = d[(i, j)];
                if !v.is_finite() || v < 0.0 || v != d[(j, i)] {
                    return Err(NetworkError::InvalidMatrix(format!(
                        "bad entry at ({i}, {j})"
                    )));
                }
            }
        }
        Ok(Self { node_ids, d })
    }

    /// Exact Euclidean distances between `points`, labelled `0..n`.
    pub fn euclidean(points: &[Point]) -> Self {
        let n = points.len();
        let d = DMatrix::from_fn(n, n, |i, j| (points[i] - points[j]).norm());
        Self {
            node_ids: (0..n).collect(),
            d,
        }
    }

    pub fn len(&self) -> usize {
        self.node_ids.len()
    }

    pub fn is_empty(&self) -> bool {
        self.node_ids.is_empty()
    }

    pub fn node_ids(&self) -> &[NodeId] {
        &self.node_ids
    }

    pub fn matrix(&self) -> &DMatrix<f64> {
        &self.d
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.d[(i, j)]
    }
}

#[derive(Copy, Clone, PartialEq)]
struct Frontier {
    dist: f64,
    node: usize,
}

impl Eq for Frontier {}

impl Ord for Frontier {
    fn cmp(&self, other: &Self) -> Ordering {
        // min-heap on distance, then node index
        other
            .dist
            .total_cmp(&self.dist)
            .then_with(|| other.node.cmp(&self.node))
    }
}

impl PartialOrd for Frontier {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

/// Distance matrix over `subset` where directly measured pairs keep their
/// measurement and all other pairs get the shortest path length. Paths may
/// only pass through members of `subset`.
pub fn shortest_path_matrix(
    net: &Network,
    subset: &[NodeId],
) -> Result<DistanceMatrix, NetworkError> {
    let n = subset.len();
    let mut local = vec![usize::MAX; net.len()];
    for (idx, &id) in subset.iter().enumerate() {
        if id >= net.len() {
            return Err(NetworkError::InvalidSubset(format!("unknown node {id}")));
        }
        if local[id] != usize::MAX {
            return Err(NetworkError::InvalidSubset(format!(
                "node {id} listed twice"
            )));
        }
        local[id] = idx;
    }
    // adjacency restricted to the subset, in local indices
    let adjacency: Vec<Vec<(usize, f64)>> = subset
        .iter()
        .map(|&id| {
            net.neighbors(id)
                .iter()
                .filter(|&&(j, _)| local[j] != usize::MAX)
                .map(|&(j, w)| (local[j], w))
                .collect()
        })
        .collect();

    let mut d = DMatrix::zeros(n, n);
    let mut dist = vec![f64::INFINITY; n];
    let mut heap = BinaryHeap::new();
    for source in 0..n {
        dist.fill(f64::INFINITY);
        dist[source] = 0.0;
        heap.push(Frontier {
            dist: 0.0,
            node: source,
        });
        while let Some(Frontier { dist: du, node: u }) = heap.pop() {
            if du > dist[u] {
                continue;
            }
            for &(v, w) in &adjacency[u] {
                let alt = du + w;
                if alt < dist[v] {
                    dist[v] = alt;
                    heap.push(Frontier { dist: alt, node: v });
                }
            }
        }
        for target in 0..n {
            if !dist[target].is_finite() {
                return Err(NetworkError::SubsetDisconnected(
                    subset[source],
                    subset[target],
                ));
            }
            d[(source, target)] = dist[target];
        }
    }
    // Dijkstra sums can differ in the last bit between directions.
    for i in 0..n {
        for j in i + 1..n {
            let v = d[(i, j)].min(d[(j, i)]);
            d[(i, j)] = v;
            d[(j, i)] = v;
        }
    }
    for (u, list) in adjacency.iter().enumerate() {
        for &(v, w) in list {
            d[(u, v)] = w;
        }
    }
    Ok(DistanceMatrix {
        node_ids: subset.to_vec(),
        d,
    })
}

#[derive(Serialize, Deserialize)]
struct NodeJson {
    id: NodeId,
    x: f64,
    y: f64,
}

#[derive(Serialize, Deserialize)]
struct EdgeJson {
    a: NodeId,
    b: NodeId,
    distance: f64,
}

/// Wire form: `{ "radio_range", "measurement_noise_sigma", "nodes": [{id,x,y}], "edges": [{a,b,distance}] }`.
#[derive(Serialize, Deserialize)]
struct NetworkJson {
    radio_range: f64,
    #[serde(default)]
    measurement_noise_sigma: f64,
    nodes: Vec<NodeJson>,
    edges: Vec<EdgeJson>,
}

impl From<Network> for NetworkJson {
    fn from(net: Network) -> Self {
        let edges = net
            .edges()
            .map(|(a, b, distance)| EdgeJson { a, b, distance })
            .collect();
        Self {
            radio_range: net.radio_range,
            measurement_noise_sigma: net.measurement_noise_sigma,
            nodes: net
                .positions
                .iter()
                .enumerate()
                .map(|(id, p)| NodeJson { id, x: p.x, y: p.y })
                .collect(),
            edges,
        }
    }
}

impl TryFrom<NetworkJson> for Network {
    type Error = NetworkError;

    fn try_from(json: NetworkJson) -> Result<Self, Self::Error> {
        let mut nodes = json.nodes;
        nodes.sort_by_key(|n| n.id);
        if nodes.iter().enumerate().any(|(idx, n)| n.id != idx) {
            return Err(NetworkError::InvalidSubset("node ids must be 0..n".into()));
        }
        let positions = nodes.iter().map(|n| Point::new(n.x, n.y)).collect();
        let edges: Vec<_> = json.edges.iter().map(|e| (e.a, e.b, e.distance)).collect();
        let mut net = Network::from_edges(positions, json.radio_range, &edges)?;
        net.measurement_noise_sigma = json.measurement_noise_sigma;
        Ok(net)
    }
}
