use std::collections::HashMap;
use std::io::Write;

use super::config::Algorithm;
use super::sweep::TrialResult;

pub const SUMMARY_HEADER: [&str; 12] = [
    "topology",
    "placement",
    "nodes",
    "R_over_r",
    "k",
    "anchors",
    "algorithm",
    "trials",
    "failed",
    "connectivity_mean",
    "mean_err_over_R",
    "err_std",
];

/// Aggregate over the successful trials of one configuration cell.
#[derive(Debug, Clone, PartialEq)]
pub struct SummaryRow {
    pub topology: String,
    pub placement: String,
    pub nodes: usize,
    pub radio_range: f64,
    pub k: Option<usize>,
    pub anchors: usize,
    pub algorithm: Algorithm,
    /// Successful trials in the group.
    pub trials: usize,
    pub failed: usize,
    pub connectivity_mean: f64,
    pub error_mean: f64,
    /// Sample standard deviation (n - 1); 0 for a single trial.
    pub error_std: f64,
}

type GroupKey = (String, String, usize, u64, Option<usize>, usize, Algorithm);

/// Groups by (topology, radio range, k, anchors, algorithm) in order of first
/// appearance. Groups without a single successful trial are omitted.
pub fn summarize(results: &[TrialResult]) -> Vec<SummaryRow> {
    let mut order: Vec<GroupKey> = Vec::new();
    let mut groups: HashMap<GroupKey, Vec<&TrialResult>> = HashMap::new();
    for r in results {
        let key = (
            r.topology.clone(),
            r.placement.clone(),
            r.nodes,
            r.radio_range.to_bits(),
            r.k,
            r.anchors,
            r.algorithm,
        );
        groups
            .entry(key.clone())
            .or_insert_with(|| {
                order.push(key);
                Vec::new()
            })
            .push(r);
    }
    order
        .into_iter()
        .filter_map(|key| {
            let rows = &groups[&key];
            let ok: Vec<(f64, f64)> = rows
                .iter()
                .filter_map(|r| match (r.status.is_ok(), r.connectivity, r.error) {
                    (true, Some(c), Some(e)) => Some((c, e)),
                    _ => None,
                })
                .collect();
            if ok.is_empty() {
                return None;
            }
            let n = ok.len() as f64;
            let connectivity_mean = ok.iter().map(|p| p.0).sum::<f64>() / n;
            let error_mean = ok.iter().map(|p| p.1).sum::<f64>() / n;
            let error_std = if ok.len() > 1 {
                (ok.iter().map(|p| (p.1 - error_mean).powi(2)).sum::<f64>() / (n - 1.0)).sqrt()
            } else {
                0.0
            };
            let (topology, placement, nodes, r_bits, k, anchors, algorithm) = key;
            Some(SummaryRow {
                topology,
                placement,
                nodes,
                radio_range: f64::from_bits(r_bits),
                k,
                anchors,
                algorithm,
                trials: ok.len(),
                failed: rows.len() - ok.len(),
                connectivity_mean,
                error_mean,
                error_std,
            })
        })
        .collect()
}

pub fn write_summary_csv<W: Write>(out: W, rows: &[SummaryRow]) -> Result<(), csv::Error> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(SUMMARY_HEADER)?;
    for r in rows {
        w.write_record([
            r.topology.clone(),
            r.placement.clone(),
            r.nodes.to_string(),
            r.radio_range.to_string(),
            r.k.map(|k| k.to_string()).unwrap_or_default(),
            r.anchors.to_string(),
            r.algorithm.name().to_string(),
            r.trials.to_string(),
            r.failed.to_string(),
            r.connectivity_mean.to_string(),
            r.error_mean.to_string(),
            r.error_std.to_string(),
        ])?;
    }
    w.flush()?;
    Ok(())
}
