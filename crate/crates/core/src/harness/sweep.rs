use std::fmt;
use std::io::Write;
use std::path::Path;
use std::time::Instant;

use rand::seq::index;
use rayon::prelude::*;

use super::config::{nominal_nodes, topology_label, Algorithm, ExperimentConfig};
use super::summary::{summarize, write_summary_csv};
use crate::localization::{
    align_to_anchors, build_local_maps, mds_map_relative, mean_normalized_error, merge_local_maps,
    truth_map, GlobalMap, LocalizationError, PositionMap,
};
use crate::network::{average_connectivity, build_network, Network, NetworkError};
use crate::topology::{generate_deployment, FieldSpec};
use crate::{clustering, seed};

pub const RAW_HEADER: [&str; 13] = [
    "topology",
    "placement",
    "nodes",
    "R_over_r",
    "k",
    "anchors",
    "algorithm",
    "trial",
    "seed",
    "connectivity",
    "mean_err_over_R",
    "runtime_ms",
    "status",
];

/// Env var capping the number of worker threads.
pub const THREADS_ENV: &str = "CBMDS_THREADS";

#[derive(Debug, Clone, PartialEq)]
pub enum TrialStatus {
    Ok {
        /// Extra deployments drawn because earlier ones were disconnected.
        regenerated: usize,
        /// k actually used when merging forced a fallback.
        fallback_k: Option<usize>,
    },
    Failed(String),
}

impl TrialStatus {
    pub fn is_ok(&self) -> bool {
        matches!(self, TrialStatus::Ok { .. })
    }
}

impl fmt::Display for TrialStatus {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            TrialStatus::Ok {
                regenerated,
                fallback_k,
            } => {
                f.write_str("ok")?;
                if *regenerated > 0 {
                    write!(f, ";regenerated={regenerated}")?;
                }
                if let Some(k) = fallback_k {
                    write!(f, ";k_used={k}")?;
                }
                Ok(())
            }
            TrialStatus::Failed(reason) => write!(f, "failed:{reason}"),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct TrialResult {
    pub topology: String,
    pub placement: String,
    pub nodes: usize,
    pub radio_range: f64,
    /// Requested cluster count; `None` for MDS-MAP.
    pub k: Option<usize>,
    pub anchors: usize,
    pub algorithm: Algorithm,
    pub trial: usize,
    /// Seed of the deployment actually used.
    pub seed: u64,
    pub connectivity: Option<f64>,
    pub error: Option<f64>,
    pub runtime_ms: Option<f64>,
    pub status: TrialStatus,
}

impl TrialResult {
    fn record(&self) -> [String; 13] {
        let opt = |v: Option<f64>| v.map(|x| x.to_string()).unwrap_or_default();
        [
            self.topology.clone(),
            self.placement.clone(),
            self.nodes.to_string(),
            self.radio_range.to_string(),
            self.k.map(|k| k.to_string()).unwrap_or_default(),
            self.anchors.to_string(),
            self.algorithm.name().to_string(),
            self.trial.to_string(),
            self.seed.to_string(),
            opt(self.connectivity),
            opt(self.error),
            opt(self.runtime_ms),
            self.status.to_string(),
        ]
    }
}

pub fn thread_count_from_env() -> Option<usize> {
    std::env::var(THREADS_ENV)
        .ok()
        .and_then(|v| v.trim().parse::<usize>().ok())
        .filter(|&n| n > 0)
}

struct Job<'a> {
    topology: &'a FieldSpec,
    topology_index: usize,
    radio_range: f64,
    trial: usize,
}

/// Runs every (topology, radio range, trial) cell and returns rows in a fixed
/// order: topology, radio range, trial, anchor count, then MDS-MAP before
/// CB-MDS by k. Per-trial failures become rows with a failed status.
pub fn run_sweep(cfg: &ExperimentConfig) -> Vec<TrialResult> {
    let mut jobs = Vec::new();
    for (topology_index, topology) in cfg.topologies.iter().enumerate() {
        for &radio_range in &cfg.radio_ranges {
            for trial in 0..cfg.trials {
                jobs.push(Job {
                    topology,
                    topology_index,
                    radio_range,
                    trial,
                });
            }
        }
    }
    let run = || -> Vec<TrialResult> {
        jobs.par_iter()
            .map(|job| run_job(cfg, job))
            .collect::<Vec<_>>()
            .into_iter()
            .flatten()
            .collect()
    };
    match thread_count_from_env() {
        Some(n) => rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build()
            .expect("thread pool")
            .install(run),
        None => run(),
    }
}

/// Seed for a deployment: depends on the topology and trial only, so every
/// radio range, anchor count and algorithm sees the same field.
fn deployment_seed(cfg: &ExperimentConfig, job: &Job<'_>, attempt: usize) -> u64 {
    seed::derive(
        cfg.base_seed,
        &[
            seed::label(&topology_label(job.topology)),
            job.topology_index as u64,
            job.trial as u64,
            attempt as u64,
        ],
    )
}

fn connected_network(
    cfg: &ExperimentConfig,
    job: &Job<'_>,
) -> Result<(Network, u64, usize), String> {
    let mut last = String::from("disconnected");
    for attempt in 0..=cfg.max_regenerations {
        let s = deployment_seed(cfg, job, attempt);
        let spec = FieldSpec {
            seed: s,
            ..job.topology.clone()
        };
        let deployment = generate_deployment(&spec).map_err(|e| format!("topology:{e}"))?;
        let noise_seed = seed::derive(s, &[job.radio_range.to_bits()]);
        match build_network(
            &deployment,
            job.radio_range,
            cfg.measurement_noise_sigma,
            noise_seed,
        ) {
            Ok(net) => return Ok((net, s, attempt)),
            Err(NetworkError::Disconnected { components }) => {
                last = format!("disconnected({components} components)");
            }
            Err(e) => return Err(format!("network:{e}")),
        }
    }
    Err(last)
}

fn failure_tag(e: &LocalizationError) -> String {
    match e {
        LocalizationError::OverlapTooSmall(c) => format!("overlap_too_small(cluster {c})"),
        LocalizationError::ClusterDisconnected { cluster, .. } => {
            format!("cluster_disconnected(cluster {cluster})")
        }
        other => other.to_string().replace(',', ";"),
    }
}

fn cb_relative(net: &Network, k: usize, seed: u64) -> Result<GlobalMap, LocalizationError> {
    let base = clustering::kmeans_clusters(net.positions(), k, seed)?;
    let clusters = clustering::extend_clusters(&base, net);
    let local = build_local_maps(&clusters, net)?;
    merge_local_maps(&local, &clusters)
}

fn is_retryable(e: &LocalizationError) -> bool {
    matches!(
        e,
        LocalizationError::OverlapTooSmall(_) | LocalizationError::ClusterDisconnected { .. }
    )
}

/// CB-MDS relative map for `k`, falling back through the smaller configured
/// cluster counts when merging fails.
fn cb_with_fallback(
    cfg: &ExperimentConfig,
    net: &Network,
    k: usize,
    net_seed: u64,
) -> Result<(GlobalMap, Option<usize>), LocalizationError> {
    let mut ladder: Vec<usize> = cfg
        .cluster_counts
        .iter()
        .copied()
        .filter(|&c| c < k)
        .collect();
    ladder.sort_unstable_by(|a, b| b.cmp(a));
    ladder.dedup();
    let mut candidates = std::iter::once(k).chain(if cfg.k_fallback { ladder } else { vec![] });
    let mut first_err = None;
    loop {
        let Some(kk) = candidates.next() else {
            return Err(first_err.expect("at least one attempt"));
        };
        match cb_relative(net, kk, seed::derive(net_seed, &[kk as u64])) {
            Ok(map) => return Ok((map, (kk != k).then_some(kk))),
            Err(e) if is_retryable(&e) => {
                log::debug!("k = {kk} failed ({e}), trying a smaller k");
                first_err.get_or_insert(e);
            }
            Err(e) => return Err(e),
        }
    }
}

fn run_job(cfg: &ExperimentConfig, job: &Job<'_>) -> Vec<TrialResult> {
    let topology = topology_label(job.topology);
    let placement = job.topology.placement.name().to_string();
    let row = |k: Option<usize>, anchors: usize, algorithm: Algorithm| TrialResult {
        topology: job.topology.shape.name().to_string(),
        placement: placement.clone(),
        nodes: nominal_nodes(job.topology),
        radio_range: job.radio_range,
        k,
        anchors,
        algorithm,
        trial: job.trial,
        seed: 0,
        connectivity: None,
        error: None,
        runtime_ms: None,
        status: TrialStatus::Failed(String::new()),
    };
    let cells = || {
        cfg.anchor_counts.iter().flat_map(move |&a| {
            cfg.algorithms.iter().flat_map(move |&alg| match alg {
                Algorithm::MdsMap => vec![(None, a, alg)],
                Algorithm::CbMds => cfg
                    .cluster_counts
                    .iter()
                    .map(|&k| (Some(k), a, alg))
                    .collect(),
            })
        })
    };

    let (net, net_seed, regenerated) = match connected_network(cfg, job) {
        Ok(v) => v,
        Err(reason) => {
            log::warn!(
                "{topology} R={} trial {}: {reason}",
                job.radio_range,
                job.trial
            );
            return cells()
                .map(|(k, a, alg)| TrialResult {
                    status: TrialStatus::Failed(reason.clone()),
                    ..row(k, a, alg)
                })
                .collect();
        }
    };
    let connectivity = average_connectivity(&net);
    let truth = truth_map(&net);

    // Relative maps do not depend on anchors; compute each once.
    let timed = |f: &dyn Fn() -> Result<(GlobalMap, Option<usize>), LocalizationError>| {
        let start = Instant::now();
        let out = f();
        (out, start.elapsed().as_secs_f64() * 1e3)
    };
    let baseline = cfg
        .algorithms
        .contains(&Algorithm::MdsMap)
        .then(|| timed(&|| mds_map_relative(&net).map(|m| (m, None))));
    let clustered: Vec<_> = if cfg.algorithms.contains(&Algorithm::CbMds) {
        cfg.cluster_counts
            .iter()
            .map(|&k| timed(&|| cb_with_fallback(cfg, &net, k, net_seed)))
            .collect()
    } else {
        Vec::new()
    };

    let mut out = Vec::new();
    for (k, anchor_count, alg) in cells() {
        let base_row = TrialResult {
            seed: net_seed,
            connectivity: Some(connectivity),
            ..row(k, anchor_count, alg)
        };
        let (relative, elapsed) = match (alg, k) {
            (Algorithm::MdsMap, _) => baseline.as_ref().expect("baseline computed"),
            (Algorithm::CbMds, Some(k)) => {
                let idx = cfg.cluster_counts.iter().position(|&c| c == k).unwrap();
                &clustered[idx]
            }
            (Algorithm::CbMds, None) => unreachable!(),
        };
        if anchor_count > net.len() {
            out.push(TrialResult {
                status: TrialStatus::Failed(format!("too_many_anchors({anchor_count})")),
                ..base_row
            });
            continue;
        }
        let mut rng = seed::rng(seed::derive(net_seed, &[0xA11C, anchor_count as u64]));
        let anchors: PositionMap = index::sample(&mut rng, net.len(), anchor_count)
            .into_iter()
            .map(|id| (id, truth[&id]))
            .collect();

        let start = Instant::now();
        let result = relative
            .as_ref()
            .map_err(Clone::clone)
            .and_then(|(global, fallback)| {
                let est = align_to_anchors(&global.map, &anchors)?;
                Ok((
                    mean_normalized_error(&est, &truth, net.radio_range())?,
                    *fallback,
                ))
            });
        let runtime = elapsed + start.elapsed().as_secs_f64() * 1e3;
        out.push(match result {
            Ok((error, fallback_k)) => TrialResult {
                error: Some(error),
                runtime_ms: cfg.record_timing.then_some(runtime),
                status: TrialStatus::Ok {
                    regenerated,
                    fallback_k,
                },
                ..base_row
            },
            Err(e) => TrialResult {
                status: TrialStatus::Failed(failure_tag(&e)),
                ..base_row
            },
        });
    }
    out
}

pub fn write_raw_csv<W: Write>(out: W, results: &[TrialResult]) -> Result<(), csv::Error> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(RAW_HEADER)?;
    for r in results {
        w.write_record(r.record())?;
    }
    w.flush()?;
    Ok(())
}

/// Runs the sweep and writes `raw.csv` and `summary.csv` into `dir`.
pub fn sweep_to_dir(cfg: &ExperimentConfig, dir: &Path) -> std::io::Result<Vec<TrialResult>> {
    std::fs::create_dir_all(dir)?;
    let results = run_sweep(cfg);
    let raw = std::fs::File::create(dir.join("raw.csv"))?;
    write_raw_csv(std::io::BufWriter::new(raw), &results).map_err(std::io::Error::other)?;
    let summary = std::fs::File::create(dir.join("summary.csv"))?;
    write_summary_csv(std::io::BufWriter::new(summary), &summarize(&results))
        .map_err(std::io::Error::other)?;
    Ok(results)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::topology::Shape;

    fn small() -> ExperimentConfig {
        ExperimentConfig {
            topologies: vec![FieldSpec::random(Shape::CShape, 60, 0)],
            radio_ranges: vec![2.0],
            cluster_counts: vec![3],
            anchor_counts: vec![4],
            trials: 1,
            ..ExperimentConfig::default()
        }
    }

    #[test]
    fn single_cell_rows() {
        let results = run_sweep(&small());
        assert_eq!(results.len(), 2);
        assert_eq!(results[0].algorithm, Algorithm::MdsMap);
        assert_eq!(results[0].k, None);
        assert_eq!(results[1].k, Some(3));
        assert!(results.iter().all(|r| r.status.is_ok()), "{results:?}");
        let only_cb = ExperimentConfig {
            algorithms: vec![Algorithm::CbMds],
            ..small()
        };
        assert_eq!(run_sweep(&only_cb).len(), 1);
    }

    #[test]
    fn row_count_matches_config() {
        let cfg = ExperimentConfig {
            radio_ranges: vec![1.8, 2.5],
            cluster_counts: vec![3, 5],
            anchor_counts: vec![3, 6],
            trials: 2,
            ..small()
        };
        assert_eq!(run_sweep(&cfg).len(), cfg.row_count());
        assert_eq!(cfg.row_count(), 2 * 2 * 2 * 3);
    }

    #[test]
    fn csv_is_reproducible() {
        let cfg = small();
        let mut a = Vec::new();
        let mut b = Vec::new();
        write_raw_csv(&mut a, &run_sweep(&cfg)).unwrap();
        write_raw_csv(&mut b, &run_sweep(&cfg)).unwrap();
        assert_eq!(a, b);
        let text = String::from_utf8(a).unwrap();
        assert!(text.starts_with(&RAW_HEADER.join(",")));
    }

    #[test]
    fn unrecoverable_topology_fails_rows_without_panicking() {
        let cfg = ExperimentConfig {
            radio_ranges: vec![0.05],
            max_regenerations: 2,
            ..small()
        };
        let results = run_sweep(&cfg);
        assert_eq!(results.len(), 2);
        for r in &results {
            assert!(matches!(&r.status, TrialStatus::Failed(s) if s.starts_with("disconnected")));
            assert_eq!(r.error, None);
        }
    }

    #[test]
    fn status_formatting() {
        assert_eq!(
            TrialStatus::Ok {
                regenerated: 0,
                fallback_k: None
            }
            .to_string(),
            "ok"
        );
        assert_eq!(
            TrialStatus::Ok {
                regenerated: 2,
                fallback_k: Some(5)
            }
            .to_string(),
            "ok;regenerated=2;k_used=5"
        );
        assert_eq!(TrialStatus::Failed("x".into()).to_string(), "failed:x");
    }
}
