//! Least-squares alignment of 2-D point sets.
//!
//! Map merging uses [`procrustes_rigid`] (translation plus an orthogonal
//! matrix, reflections admitted). Anchor alignment uses
//! [`procrustes_similarity`], which additionally fits a uniform scale.

use nalgebra::{Matrix2, Vector2, SVD};
use thiserror::Error;

use crate::Point;

/// Points closer than this to their centroid are treated as coincident.
const COINCIDENT_TOL: f64 = 1e-12;
/// Ratio of scatter eigenvalues below which a set is reported collinear.
const COLLINEAR_TOL: f64 = 1e-9;

#[derive(Debug, Clone, Error, PartialEq)]
pub enum AlignError {
    #[error("point sets differ in length ({0} vs {1})")]
    LengthMismatch(usize, usize),
    #[error("need at least {needed} correspondences, got {got}")]
    TooFewPoints { needed: usize, got: usize },
    #[error("point set is degenerate (all points coincide)")]
    DegenerateInput,
}

/// `p ↦ s·Q·p + t` with `Q` orthogonal and `s > 0`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Transform2D {
    pub q: Matrix2<f64>,
    pub t: Vector2<f64>,
    pub s: f64,
}

impl Default for Transform2D {
    fn default() -> Self {
        Self::identity()
    }
}

impl Transform2D {
    pub fn identity() -> Self {
        Self {
            q: Matrix2::identity(),
            t: Vector2::zeros(),
            s: 1.0,
        }
    }

    pub fn rotation(angle: f64) -> Self {
        Self {
            q: Matrix2::new(angle.cos(), -angle.sin(), angle.sin(), angle.cos()),
            ..Self::identity()
        }
    }

    pub fn translation(t: Vector2<f64>) -> Self {
        Self {
            t,
            ..Self::identity()
        }
    }

    pub fn apply(&self, p: &Point) -> Point {
        Point::from(self.s * (self.q * p.coords) + self.t)
    }

    pub fn apply_all(&self, points: &[Point]) -> Vec<Point> {
        points.iter().map(|p| self.apply(p)).collect()
    }

    pub fn inverse(&self) -> Self {
        let qt = self.q.transpose();
        Self {
            q: qt,
            t: -(qt * self.t) / self.s,
            s: 1.0 / self.s,
        }
    }

    /// `self ∘ other`, i.e. apply `other` first.
    pub fn compose(&self, other: &Self) -> Self {
        Self {
            q: self.q * other.q,
            t: self.s * (self.q * other.t) + self.t,
            s: self.s * other.s,
        }
    }

    pub fn is_reflection(&self) -> bool {
        self.q.determinant() < 0.0
    }

    pub fn is_orthogonal(&self, tol: f64) -> bool {
        (self.q.transpose() * self.q - Matrix2::identity())
            .iter()
            .all(|v| v.abs() <= tol)
    }
}

/// Sum of squared distances between `T(src)` and `dst`.
pub fn residual(t: &Transform2D, src: &[Point], dst: &[Point]) -> f64 {
    src.iter()
        .zip(dst)
        .map(|(a, b)| (t.apply(a) - b).norm_squared())
        .sum()
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Fit {
    pub transform: Transform2D,
    /// Sum of squared residuals after applying `transform`.
    pub residual: f64,
    /// True when either point set is (numerically) collinear, in which case
    /// the orthogonal part is not uniquely determined.
    pub ill_conditioned: bool,
}

struct Centered {
    centroid: Vector2<f64>,
    points: Vec<Vector2<f64>>,
}

fn center(points: &[Point]) -> Result<Centered, AlignError> {
    let n = points.len() as f64;
    let centroid = points
        .iter()
        .fold(Vector2::zeros(), |acc, p| acc + p.coords)
        / n;
    let centered: Vec<_> = points.iter().map(|p| p.coords - centroid).collect();
    if centered.iter().all(|v| v.norm() <= COINCIDENT_TOL) {
        return Err(AlignError::DegenerateInput);
    }
    Ok(Centered {
        centroid,
        points: centered,
    })
}

fn is_collinear(points: &[Vector2<f64>]) -> bool {
    let scatter = points
        .iter()
        .fold(Matrix2::zeros(), |acc: Matrix2<f64>, v| {
            acc + v * v.transpose()
        });
    let eig = scatter.symmetric_eigenvalues();
    let (lo, hi) = (eig.min(), eig.max());
    hi <= 0.0 || lo.max(0.0) / hi < COLLINEAR_TOL
}

fn check_lengths(src: &[Point], dst: &[Point], needed: usize) -> Result<(), AlignError> {
    if src.len() != dst.len() {
        return Err(AlignError::LengthMismatch(src.len(), dst.len()));
    }
    if src.len() < needed {
        return Err(AlignError::TooFewPoints {
            needed,
            got: src.len(),
        });
    }
    Ok(())
}

fn fit(src: &[Point], dst: &[Point], with_scale: bool) -> Result<Fit, AlignError> {
    let a = center(src)?;
    let b = center(dst)?;
    let h = a
        .points
        .iter()
        .zip(&b.points)
        .fold(Matrix2::zeros(), |acc: Matrix2<f64>, (x, y)| {
            acc + x * y.transpose()
        });
    let svd = SVD::new(h, true, true);
    let u = svd.u.expect("u requested");
    let v_t = svd.v_t.expect("v_t requested");
    // Reflections are admitted: no determinant correction.
    let q = v_t.transpose() * u.transpose();
    let s = if with_scale {
        let spread: f64 = a.points.iter().map(|v| v.norm_squared()).sum();
        svd.singular_values.sum() / spread
    } else {
        1.0
    };
    let t = b.centroid - s * (q * a.centroid);
    let transform = Transform2D { q, t, s };
    let ill_conditioned = is_collinear(&a.points) || is_collinear(&b.points);
    if ill_conditioned {
        log::warn!(
            "procrustes fit on collinear correspondences ({} points)",
            src.len()
        );
    }
    Ok(Fit {
        transform,
        residual: residual(&transform, src, dst),
        ill_conditioned,
    })
}

/// Best rigid motion (rotation or reflection plus translation) taking `src`
/// onto `dst` in the least-squares sense.
pub fn procrustes_rigid(src: &[Point], dst: &[Point]) -> Result<Fit, AlignError> {
    check_lengths(src, dst, 2)?;
    fit(src, dst, false)
}

/// Like [`procrustes_rigid`] but also fits a uniform scale.
pub fn procrustes_similarity(src: &[Point], dst: &[Point]) -> Result<Fit, AlignError> {
    check_lengths(src, dst, 3)?;
    fit(src, dst, true)
}
