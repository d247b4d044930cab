//! Single-trial run of both pipelines on one network, with a figure.

use rand::seq::index;

use super::config::Algorithm;
use super::svg::{render_figure, Estimate};
use crate::localization::{
    cb_mds_detailed, mds_map_baseline, mean_normalized_error, truth_map, CbMdsRun,
    LocalizationError, PositionMap,
};
use crate::network::{average_connectivity, build_network, Network, NetworkError};
use crate::seed;
use crate::topology::{generate_deployment, FieldSpec, Placement, Shape, TopologyError};

/// Cluster counts tried, largest first, when merging fails for the requested k.
pub const FALLBACK_K: [usize; 4] = [15, 10, 7, 5];

#[derive(Debug, Clone)]
pub struct DemoConfig {
    pub shape: Shape,
    pub placement: Placement,
    pub nodes: usize,
    pub radio_range: f64,
    pub k: usize,
    pub anchors: usize,
    pub seed: u64,
    pub measurement_noise_sigma: f64,
}

impl Default for DemoConfig {
    fn default() -> Self {
        Self {
            shape: Shape::CShape,
            placement: Placement::Random,
            nodes: 161,
            radio_range: 2.0,
            k: 15,
            anchors: 4,
            seed: 1,
            measurement_noise_sigma: 0.0,
        }
    }
}

#[derive(Debug, thiserror::Error)]
pub enum DemoError {
    #[error(transparent)]
    Topology(#[from] TopologyError),
    #[error("no connected deployment after {0} attempts")]
    Disconnected(usize),
    #[error(transparent)]
    Network(#[from] NetworkError),
    #[error(transparent)]
    Localization(#[from] LocalizationError),
    #[error("{0} anchors requested but the network has {1} nodes")]
    TooManyAnchors(usize, usize),
}

pub struct DemoOutcome {
    pub network: Network,
    pub truth: PositionMap,
    pub anchors: PositionMap,
    pub connectivity: f64,
    pub mds_map: PositionMap,
    pub mds_map_error: f64,
    pub cb: CbMdsRun,
    pub k_used: usize,
    pub cb_mds_error: f64,
    pub svg: String,
}

pub fn run_demo(cfg: &DemoConfig) -> Result<DemoOutcome, DemoError> {
    let base = FieldSpec {
        shape: cfg.shape,
        placement: cfg.placement,
        node_count: cfg.nodes,
        ..FieldSpec::default()
    };
    const ATTEMPTS: usize = 100;
    let mut network = None;
    for attempt in 0..ATTEMPTS {
        let spec = FieldSpec {
            seed: seed::derive(cfg.seed, &[attempt as u64]),
            ..base.clone()
        };
        let deployment = generate_deployment(&spec)?;
        match build_network(
            &deployment,
            cfg.radio_range,
            cfg.measurement_noise_sigma,
            spec.seed,
        ) {
            Ok(net) => {
                network = Some(net);
                break;
            }
            Err(NetworkError::Disconnected { .. }) => continue,
            Err(e) => return Err(e.into()),
        }
    }
    let network = network.ok_or(DemoError::Disconnected(ATTEMPTS))?;
    if cfg.anchors > network.len() {
        return Err(DemoError::TooManyAnchors(cfg.anchors, network.len()));
    }
    let truth = truth_map(&network);
    let mut rng = seed::rng(seed::derive(cfg.seed, &[0xA11C]));
    let anchors: PositionMap = index::sample(&mut rng, network.len(), cfg.anchors)
        .into_iter()
        .map(|id| (id, truth[&id]))
        .collect();

    let mds_map = mds_map_baseline(&network, &anchors)?;
    let mds_map_error = mean_normalized_error(&mds_map, &truth, cfg.radio_range)?;

    let candidates =
        std::iter::once(cfg.k).chain(FALLBACK_K.iter().copied().filter(|&k| k < cfg.k));
    let mut last_err = None;
    let mut cb = None;
    for k in candidates {
        match cb_mds_detailed(&network, k, &anchors, seed::derive(cfg.seed, &[k as u64])) {
            Ok(run) => {
                cb = Some((run, k));
                break;
            }
            Err(
                e @ (LocalizationError::OverlapTooSmall(_)
                | LocalizationError::ClusterDisconnected { .. }),
            ) => last_err = Some(e),
            Err(e) => return Err(e.into()),
        }
    }
    let (cb, k_used) = match cb {
        Some(v) => v,
        None => return Err(last_err.expect("at least one attempt").into()),
    };
    let cb_mds_error = mean_normalized_error(&cb.positions, &truth, cfg.radio_range)?;

    let svg = render_figure(
        &network,
        &truth,
        &[
            Estimate {
                algorithm: Algorithm::MdsMap,
                positions: &mds_map,
            },
            Estimate {
                algorithm: Algorithm::CbMds,
                positions: &cb.positions,
            },
        ],
        Some(&cb.clusters),
    );
    Ok(DemoOutcome {
        connectivity: average_connectivity(&network),
        network,
        truth,
        anchors,
        mds_map,
        mds_map_error,
        cb,
        k_used,
        cb_mds_error,
        svg,
    })
}
