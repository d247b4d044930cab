//! Classical (Torgerson) multidimensional scaling.
//!
//! Squared distances are double-centered into a Gram matrix
//! `B = -1/2 · J · D² · J` with `J = I - 11ᵀ/n`. The coordinates are the two
//! leading eigenvectors of `B` scaled by the square roots of their
//! eigenvalues. Negative eigenvalues, which appear when the input is not
//! Euclidean (e.g. shortest-path distances), are clamped to zero.

use nalgebra::{DMatrix, SymmetricEigen};
use thiserror::Error;

use crate::network::DistanceMatrix;
use crate::{NodeId, Point};

/// Eigenvalues below this fraction of the leading one are treated as zero.
const RELATIVE_EIGEN_FLOOR: f64 = 1e-12;

#[derive(Debug, Clone, Error, PartialEq)]
pub enum MdsError {
    #[error("distance matrix is empty")]
    EmptyInput,
    #[error("distance matrix contains non-finite entries")]
    NonFinite,
    #[error("only 2-D embeddings are supported, got dim = {0}")]
    UnsupportedDimension(usize),
}

/// Coordinates in an arbitrary frame, one per node id.
#[derive(Debug, Clone, PartialEq)]
pub struct RelativeMap {
    pub node_ids: Vec<NodeId>,
    pub coords: Vec<Point>,
}

impl RelativeMap {
    pub fn len(&self) -> usize {
        self.node_ids.len()
    }

    pub fn is_empty(&self) -> bool {
        self.node_ids.is_empty()
    }

    pub fn get(&self, id: NodeId) -> Option<Point> {
        self.node_ids
            .iter()
            .position(|&n| n == id)
            .map(|idx| self.coords[idx])
    }

    pub fn centroid(&self) -> Point {
        let n = self.coords.len().max(1) as f64;
        let sum = self
            .coords
            .iter()
            .fold(nalgebra::Vector2::zeros(), |acc, p| acc + p.coords);
        Point::from(sum / n)
    }
}

/// Embedding plus the two eigenvalues used to scale it (before clamping).
#[derive(Debug, Clone, PartialEq)]
pub struct MdsOutput {
    pub map: RelativeMap,
    pub eigenvalues: [f64; 2],
}

pub fn classical_mds(d: &DistanceMatrix, dim: usize) -> Result<RelativeMap, MdsError> {
    classical_mds_with_spectrum(d, dim).map(|out| out.map)
}

pub fn classical_mds_with_spectrum(d: &DistanceMatrix, dim: usize) -> Result<MdsOutput, MdsError> {
    if dim != 2 {
        return Err(MdsError::UnsupportedDimension(dim));
    }
    let n = d.len();
    if n == 0 {
        return Err(MdsError::EmptyInput);
    }
    let m = d.matrix();
    if m.iter().any(|v| !v.is_finite()) {
        return Err(MdsError::NonFinite);
    }

    let b = double_center(m);
    let eigen = SymmetricEigen::new(b);

    let mut order: Vec<usize> = (0..n).collect();
    // stable: equal eigenvalues keep index order
    order.sort_by(|&i, &j| eigen.eigenvalues[j].total_cmp(&eigen.eigenvalues[i]));

    let mut eigenvalues = [0.0; 2];
    let mut axes = [vec![0.0; n], vec![0.0; n]];
    let leading = eigen.eigenvalues[order[0]].max(0.0);
    for (axis, &idx) in order.iter().take(2).enumerate() {
        let lambda = eigen.eigenvalues[idx];
        eigenvalues[axis] = lambda;
        // round-off level eigenvalues would otherwise leak ~sqrt(eps) offsets
        let scale = if lambda > leading * RELATIVE_EIGEN_FLOOR {
            lambda.sqrt()
        } else {
            0.0
        };
        for (row, out) in axes[axis].iter_mut().enumerate() {
            *out = eigen.eigenvectors[(row, idx)] * scale;
        }
    }

    let mean_x = axes[0].iter().sum::<f64>() / n as f64;
    let mean_y = axes[1].iter().sum::<f64>() / n as f64;
    let coords = (0..n)
        .map(|i| Point::new(axes[0][i] - mean_x, axes[1][i] - mean_y))
        .collect();

    Ok(MdsOutput {
        map: RelativeMap {
            node_ids: d.node_ids().to_vec(),
            coords,
        },
        eigenvalues,
    })
}

fn double_center(d: &DMatrix<f64>) -> DMatrix<f64> {
    let n = d.nrows();
    let sq = d.map(|v| v * v);
    let row_means: Vec<f64> = (0..n).map(|i| sq.row(i).sum() / n as f64).collect();
    let grand = row_means.iter().sum::<f64>() / n as f64;
    DMatrix::from_fn(n, n, |i, j| {
        -0.5 * (sq[(i, j)] - row_means[i] - row_means[j] + grand)
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn pairwise(points: &[Point]) -> Vec<f64> {
        let mut out = Vec::new();
        for i in 0..points.len() {
            for j in i + 1..points.len() {
                out.push((points[i] - points[j]).norm());
            }
        }
        out
    }

    #[test]
    fn recovers_3_4_5_triangle() {
        let pts = [
            Point::new(0.0, 0.0),
            Point::new(3.0, 0.0),
            Point::new(0.0, 4.0),
        ];
        let map = classical_mds(&DistanceMatrix::euclidean(&pts), 2).unwrap();
        let got = pairwise(&map.coords);
        for (g, e) in got.iter().zip([3.0, 4.0, 5.0]) {
            assert!((g - e).abs() < 1e-9, "{g} vs {e}");
        }
        assert!(map.centroid().coords.norm() < 1e-9);
    }

    #[test]
    fn single_node_maps_to_origin() {
        let d = DistanceMatrix::new(vec![7], DMatrix::zeros(1, 1)).unwrap();
        let map = classical_mds(&d, 2).unwrap();
        assert_eq!(map.node_ids, vec![7]);
        assert_eq!(map.coords, vec![Point::origin()]);
    }

    #[test]
    fn two_nodes_keep_their_distance() {
        let pts = [Point::new(1.0, 1.0), Point::new(1.0, 3.5)];
        let map = classical_mds(&DistanceMatrix::euclidean(&pts), 2).unwrap();
        assert!(((map.coords[0] - map.coords[1]).norm() - 2.5).abs() < 1e-12);
    }

    #[test]
    fn collinear_points_have_zero_second_eigenvalue() {
        let pts = [
            Point::new(0.0, 0.0),
            Point::new(1.0, 0.0),
            Point::new(2.0, 0.0),
        ];
        let out = classical_mds_with_spectrum(&DistanceMatrix::euclidean(&pts), 2).unwrap();
        assert!(out.eigenvalues[1].abs() < 1e-9);
        assert!(out.eigenvalues[0] > 1.0);
        // all points on one line through the origin
        let dir = out.map.coords[2].coords.normalize();
        for p in &out.map.coords {
            let cross = p.x * dir.y - p.y * dir.x;
            assert!(cross.abs() < 1e-9);
        }
    }

    #[test]
    fn rejects_bad_input() {
        let empty = DistanceMatrix::new(vec![], DMatrix::zeros(0, 0)).unwrap();
        assert_eq!(classical_mds(&empty, 2), Err(MdsError::EmptyInput));
        let pts = [Point::new(0.0, 0.0), Point::new(1.0, 0.0)];
        assert_eq!(
            classical_mds(&DistanceMatrix::euclidean(&pts), 3),
            Err(MdsError::UnsupportedDimension(3))
        );
    }

    #[test]
    fn non_euclidean_input_stays_finite() {
        // four points where one distance violates the triangle inequality badly
        let m = DMatrix::from_row_slice(
            4,
            4,
            &[
                0.0, 1.0, 1.0, 9.0, //
                1.0, 0.0, 1.0, 1.0, //
                1.0, 1.0, 0.0, 1.0, //
                9.0, 1.0, 1.0, 0.0,
            ],
        );
        let d = DistanceMatrix::new(vec![0, 1, 2, 3], m).unwrap();
        let out = classical_mds_with_spectrum(&d, 2).unwrap();
        assert!(out
            .map
            .coords
            .iter()
            .all(|p| p.x.is_finite() && p.y.is_finite()));
    }

    proptest! {
        #[test]
        fn exact_recovery(raw in prop::collection::vec((-20.0f64..20.0, -20.0f64..20.0), 3..60)) {
            let pts: Vec<Point> = raw.iter().map(|&(x, y)| Point::new(x, y)).collect();
            let map = classical_mds(&DistanceMatrix::euclidean(&pts), 2).unwrap();
            for (g, e) in pairwise(&map.coords).iter().zip(pairwise(&pts)) {
                prop_assert!((g - e).abs() < 1e-9, "{} vs {}", g, e);
            }
            prop_assert!(map.centroid().coords.norm() < 1e-9);
        }
    }
}
