use std::path::Path;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::topology::{FieldSpec, Placement, Shape};

#[derive(Debug, Error)]
pub enum ConfigError {
    #[error("reading config: {0}")]
    Io(#[from] std::io::Error),
    #[error("parsing config: {0}")]
    Json(#[from] serde_json::Error),
    #[error("invalid config: {0}")]
    Invalid(String),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Algorithm {
    MdsMap,
    CbMds,
}

impl Algorithm {
    pub fn name(self) -> &'static str {
        match self {
            Algorithm::MdsMap => "MdsMap",
            Algorithm::CbMds => "CbMds",
        }
    }
}

/// Sweep definition. The JSON form mirrors the struct; every field is
/// optional and falls back to the defaults below.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct ExperimentConfig {
    /// Field specs; their `seed` is ignored and derived per trial.
    pub topologies: Vec<FieldSpec>,
    pub radio_ranges: Vec<f64>,
    pub cluster_counts: Vec<usize>,
    pub anchor_counts: Vec<usize>,
    pub trials: usize,
    pub base_seed: u64,
    pub algorithms: Vec<Algorithm>,
    /// Relative ranging noise; 0 means exact neighbor distances.
    pub measurement_noise_sigma: f64,
    /// Deployments regenerated at most this many times when disconnected.
    pub max_regenerations: usize,
    /// Retry CB-MDS with the next smaller k when merging fails.
    pub k_fallback: bool,
    /// Fill the `runtime_ms` column. Off by default so reruns are
    /// byte-identical.
    pub record_timing: bool,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        let random = |shape, nodes| FieldSpec::random(shape, nodes, 0);
        Self {
            topologies: vec![
                FieldSpec::grid(Shape::CShape, 0),
                random(Shape::CShape, 161),
                FieldSpec::grid(Shape::LShape, 0),
                random(Shape::LShape, 100),
                FieldSpec::grid(Shape::HShape, 0),
                random(Shape::HShape, 110),
            ],
            radio_ranges: vec![1.3, 1.5, 1.8, 2.0, 2.5],
            cluster_counts: vec![5, 7, 10, 15],
            anchor_counts: vec![3, 4, 6, 10],
            trials: 30,
            base_seed: 2008,
            algorithms: vec![Algorithm::MdsMap, Algorithm::CbMds],
            measurement_noise_sigma: 0.0,
            max_regenerations: 100,
            k_fallback: true,
            record_timing: false,
        }
    }
}

impl ExperimentConfig {
    pub fn from_json(s: &str) -> Result<Self, ConfigError> {
        let cfg: Self = serde_json::from_str(s)?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn from_file(path: &Path) -> Result<Self, ConfigError> {
        Self::from_json(&std::fs::read_to_string(path)?)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("config serializes")
    }

    pub fn validate(&self) -> Result<(), ConfigError> {
        let invalid = |m: &str| Err(ConfigError::Invalid(m.to_string()));
        if self.topologies.is_empty() {
            return invalid("topologies is empty");
        }
        if self.radio_ranges.is_empty() || self.radio_ranges.iter().any(|&r| !(r > 0.0)) {
            return invalid("radio_ranges must be non-empty and positive");
        }
        if self.algorithms.is_empty() {
            return invalid("algorithms is empty");
        }
        if self.algorithms.contains(&Algorithm::CbMds)
            && (self.cluster_counts.is_empty() || self.cluster_counts.contains(&0))
        {
            return invalid("cluster_counts must be non-empty and positive");
        }
        if self.anchor_counts.is_empty() || self.anchor_counts.iter().any(|&a| a < 3) {
            return invalid("anchor_counts must be non-empty and at least 3");
        }
        if self.trials == 0 {
            return invalid("trials must be at least 1");
        }
        if !(self.measurement_noise_sigma >= 0.0) {
            return invalid("measurement_noise_sigma must be nonnegative");
        }
        for t in &self.topologies {
            t.validate()
                .map_err(|e| ConfigError::Invalid(e.to_string()))?;
        }
        Ok(())
    }

    /// Number of CSV rows a sweep produces.
    pub fn row_count(&self) -> usize {
        let per_anchor = self
            .algorithms
            .iter()
            .map(|a| match a {
                Algorithm::MdsMap => 1,
                Algorithm::CbMds => self.cluster_counts.len(),
            })
            .sum::<usize>();
        self.topologies.len()
            * self.radio_ranges.len()
            * self.anchor_counts.len()
            * self.trials
            * per_anchor
    }
}

pub(crate) fn topology_label(spec: &FieldSpec) -> String {
    format!("{}-{}", spec.shape.name(), spec.placement.name())
}

pub(crate) fn nominal_nodes(spec: &FieldSpec) -> usize {
    match spec.placement {
        Placement::Random => spec.node_count,
        Placement::Grid => spec.lattice_points().len(),
    }
}
