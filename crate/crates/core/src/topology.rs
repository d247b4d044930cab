//! Ground-truth node deployments over square and irregular (C, L, H) fields.

use rand::Rng;
use rand_distr::{Distribution, Normal};
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::{seed, Point};

/// Consecutive rejected draws after which random placement gives up.
pub const MAX_REJECTIONS: usize = 1_000_000;

#[derive(Debug, Clone, Error, PartialEq)]
pub enum TopologyError {
    #[error("invalid field spec: {0}")]
    InvalidSpec(String),
    #[error("shape mask admits no nodes")]
    MaskEmpty,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Shape {
    Square,
    #[serde(alias = "c")]
    CShape,
    #[serde(alias = "l")]
    LShape,
    #[serde(alias = "h")]
    HShape,
}

impl Shape {
    pub fn name(self) -> &'static str {
        match self {
            Shape::Square => "square",
            Shape::CShape => "c",
            Shape::LShape => "l",
            Shape::HShape => "h",
        }
    }

    /// Rectangles removed from the square, in fractions of the side length.
    pub fn default_cutouts(self) -> Vec<Cutout> {
        match self {
            Shape::Square => vec![],
            Shape::CShape => vec![Cutout::new(0.4, 1.0, 0.3, 0.7)],
            Shape::LShape => vec![Cutout::new(0.4, 1.0, 0.4, 1.0)],
            Shape::HShape => vec![
                Cutout::new(0.3, 0.7, 0.0, 0.35),
                Cutout::new(0.3, 0.7, 0.65, 1.0),
            ],
        }
    }
}

impl std::str::FromStr for Shape {
    type Err = TopologyError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.to_ascii_lowercase().as_str() {
            "square" | "s" => Ok(Shape::Square),
            "c" | "cshape" | "c-shape" => Ok(Shape::CShape),
            "l" | "lshape" | "l-shape" => Ok(Shape::LShape),
            "h" | "hshape" | "h-shape" => Ok(Shape::HShape),
            other => Err(TopologyError::InvalidSpec(format!(
                "unknown shape `{other}`"
            ))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Placement {
    Grid,
    Random,
}

impl Placement {
    pub fn name(self) -> &'static str {
        match self {
            Placement::Grid => "grid",
            Placement::Random => "random",
        }
    }
}

impl std::str::FromStr for Placement {
    type Err = TopologyError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.to_ascii_lowercase().as_str() {
            "grid" => Ok(Placement::Grid),
            "random" => Ok(Placement::Random),
            other => Err(TopologyError::InvalidSpec(format!(
                "unknown placement `{other}`"
            ))),
        }
    }
}

/// Axis-aligned rectangle `[x0, x1] × [y0, y1]` in fractions of the side
/// length. Points on the rectangle boundary count as removed.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Cutout {
    pub x0: f64,
    pub x1: f64,
    pub y0: f64,
    pub y1: f64,
}

impl Cutout {
    pub const fn new(x0: f64, x1: f64, y0: f64, y1: f64) -> Self {
        Self { x0, x1, y0, y1 }
    }
}

/// Region predicate for a field: the `[0, L]²` square minus its cutouts.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ShapeMask {
    pub shape: Shape,
    pub side_length: f64,
    pub cutouts: Vec<Cutout>,
}

impl ShapeMask {
    pub fn contains(&self, p: &Point) -> bool {
        let l = self.side_length;
        if p.x < 0.0 || p.y < 0.0 || p.x > l || p.y > l {
            return false;
        }
        !self
            .cutouts
            .iter()
            .any(|c| p.x >= c.x0 * l && p.x <= c.x1 * l && p.y >= c.y0 * l && p.y <= c.y1 * l)
    }
}

/// Mask for `shape` over a square of side `side_length`, using the default
/// cutout table.
pub fn shape_mask(shape: Shape, side_length: f64) -> ShapeMask {
    ShapeMask {
        shape,
        side_length,
        cutouts: shape.default_cutouts(),
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct FieldSpec {
    pub shape: Shape,
    pub placement: Placement,
    pub side_length: f64,
    pub grid_spacing: f64,
    /// Only used in random placement.
    pub node_count: usize,
    /// Per-coordinate Gaussian standard deviation, grid placement only.
    pub placement_noise_sigma: f64,
    /// Overrides the shape's default cutout table.
    pub cutouts: Option<Vec<Cutout>>,
    pub seed: u64,
}

impl Default for FieldSpec {
    fn default() -> Self {
        Self {
            shape: Shape::Square,
            placement: Placement::Grid,
            side_length: 10.0,
            grid_spacing: 1.0,
            node_count: 100,
            placement_noise_sigma: 0.1,
            cutouts: None,
            seed: 0,
        }
    }
}

impl FieldSpec {
    pub fn grid(shape: Shape, seed: u64) -> Self {
        Self {
            shape,
            placement: Placement::Grid,
            seed,
            ..Self::default()
        }
    }

    pub fn random(shape: Shape, node_count: usize, seed: u64) -> Self {
        Self {
            shape,
            placement: Placement::Random,
            node_count,
            seed,
            ..Self::default()
        }
    }

    pub fn mask(&self) -> ShapeMask {
        ShapeMask {
            shape: self.shape,
            side_length: self.side_length,
            cutouts: self
                .cutouts
                .clone()
                .unwrap_or_else(|| self.shape.default_cutouts()),
        }
    }

    pub fn validate(&self) -> Result<(), TopologyError> {
        let bad = |m: &str| Err(TopologyError::InvalidSpec(m.to_string()));
        if !(self.side_length > 0.0 && self.side_length.is_finite()) {
            return bad("side_length must be positive");
        }
        if !(self.grid_spacing > 0.0 && self.grid_spacing.is_finite()) {
            return bad("grid_spacing must be positive");
        }
        if !(self.placement_noise_sigma >= 0.0 && self.placement_noise_sigma.is_finite()) {
            return bad("placement_noise_sigma must be nonnegative");
        }
        if self.placement == Placement::Random && self.node_count < 4 {
            return bad("random placement needs at least 4 nodes");
        }
        Ok(())
    }

    /// Lattice points `(i·spacing, j·spacing)` inside the mask, row by row.
    pub fn lattice_points(&self) -> Vec<Point> {
        let mask = self.mask();
        let steps = (self.side_length / self.grid_spacing + 1e-9).floor() as usize;
        let mut out = Vec::new();
        for j in 0..=steps {
            for i in 0..=steps {
                let p = Point::new(i as f64 * self.grid_spacing, j as f64 * self.grid_spacing);
                if mask.contains(&p) {
                    out.push(p);
                }
            }
        }
        out
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Deployment {
    pub positions: Vec<Point>,
    pub mask: ShapeMask,
}

impl Deployment {
    pub fn len(&self) -> usize {
        self.positions.len()
    }

    pub fn is_empty(&self) -> bool {
        self.positions.is_empty()
    }
}

pub fn generate_deployment(spec: &FieldSpec) -> Result<Deployment, TopologyError> {
    spec.validate()?;
    let mask = spec.mask();
    let mut rng = seed::rng(spec.seed);
    let positions = match spec.placement {
        Placement::Grid => {
            let lattice = spec.lattice_points();
            if lattice.is_empty() {
                return Err(TopologyError::MaskEmpty);
            }
            if spec.placement_noise_sigma == 0.0 {
                lattice
            } else {
                let noise = Normal::new(0.0, spec.placement_noise_sigma)
                    .map_err(|e| TopologyError::InvalidSpec(e.to_string()))?;
                lattice
                    .into_iter()
                    .map(|p| Point::new(p.x + noise.sample(&mut rng), p.y + noise.sample(&mut rng)))
                    .collect()
            }
        }
        Placement::Random => {
            let l = spec.side_length;
            let mut out = Vec::with_capacity(spec.node_count);
            while out.len() < spec.node_count {
                let mut rejected = 0;
                loop {
                    let p = Point::new(rng.random_range(0.0..=l), rng.random_range(0.0..=l));
                    if mask.contains(&p) {
                        out.push(p);
                        break;
                    }
                    rejected += 1;
                    if rejected >= MAX_REJECTIONS {
                        return Err(TopologyError::MaskEmpty);
                    }
                }
            }
            out
        }
    };
    Ok(Deployment { positions, mask })
}
