//! Deterministic fixture checks behind the `validate` subcommand.

use crate::alignment::{procrustes_rigid, procrustes_similarity};
use crate::localization::{
    cb_mds, mds_map_baseline, mean_normalized_error, truth_map, PositionMap,
};
use crate::mds::classical_mds;
use crate::network::{average_connectivity, build_network, shortest_path_matrix, DistanceMatrix};
use crate::topology::{generate_deployment, shape_mask, Deployment, FieldSpec, Shape};
use crate::Point;

use super::config::ExperimentConfig;
use super::sweep::{run_sweep, write_raw_csv};

#[derive(Debug, Clone)]
pub struct FixtureOutcome {
    pub name: &'static str,
    pub passed: bool,
    pub detail: String,
}

fn check(name: &'static str, f: impl FnOnce() -> Result<String, String>) -> FixtureOutcome {
    match f() {
        Ok(detail) => FixtureOutcome {
            name,
            passed: true,
            detail,
        },
        Err(detail) => FixtureOutcome {
            name,
            passed: false,
            detail,
        },
    }
}

fn chain() -> Deployment {
    Deployment {
        positions: vec![
            Point::new(0.0, 0.0),
            Point::new(1.0, 0.0),
            Point::new(2.0, 0.0),
        ],
        mask: shape_mask(Shape::Square, 10.0),
    }
}

pub fn run_fixtures() -> Vec<FixtureOutcome> {
    vec![
        check("c-shape mask excludes (7r, 5r)", || {
            let m = shape_mask(Shape::CShape, 10.0);
            (!m.contains(&Point::new(7.0, 5.0)) && m.contains(&Point::new(2.0, 5.0)))
                .then(|| "ok".into())
                .ok_or_else(|| "mask table mismatch".into())
        }),
        check("square grid has 121 nodes", || {
            let spec = FieldSpec {
                placement_noise_sigma: 0.0,
                ..FieldSpec::grid(Shape::Square, 0)
            };
            let n = generate_deployment(&spec).map_err(|e| e.to_string())?.len();
            (n == 121)
                .then(|| format!("{n}"))
                .ok_or_else(|| format!("{n} nodes"))
        }),
        check("chain connectivity and shortest path", || {
            let net = build_network(&chain(), 1.5, 0.0, 0).map_err(|e| e.to_string())?;
            let d = shortest_path_matrix(&net, &[0, 1, 2]).map_err(|e| e.to_string())?;
            let c = average_connectivity(&net);
            ((d.get(0, 2) - 2.0).abs() < 1e-12 && (c - 4.0 / 3.0).abs() < 1e-12)
                .then(|| format!("d(0,2) = {}, connectivity = {c:.4}", d.get(0, 2)))
                .ok_or_else(|| format!("d(0,2) = {}, connectivity = {c}", d.get(0, 2)))
        }),
        check("classical MDS recovers a 3-4-5 triangle", || {
            let pts = [
                Point::new(0.0, 0.0),
                Point::new(3.0, 0.0),
                Point::new(0.0, 4.0),
            ];
            let map =
                classical_mds(&DistanceMatrix::euclidean(&pts), 2).map_err(|e| e.to_string())?;
            let got = [
                (map.coords[0] - map.coords[1]).norm(),
                (map.coords[0] - map.coords[2]).norm(),
                (map.coords[1] - map.coords[2]).norm(),
            ];
            let worst = got
                .iter()
                .zip([3.0, 4.0, 5.0])
                .map(|(g, e)| (g - e).abs())
                .fold(0.0, f64::max);
            (worst < 1e-9)
                .then(|| format!("max deviation {worst:.1e}"))
                .ok_or_else(|| format!("max deviation {worst:.1e}"))
        }),
        check("procrustes recovers rotation and scale", || {
            let src = [
                Point::new(0.0, 0.0),
                Point::new(2.0, 0.5),
                Point::new(0.3, 1.7),
            ];
            let rot: Vec<_> = src.iter().map(|p| Point::new(-p.y, p.x)).collect();
            let rigid = procrustes_rigid(&src, &rot).map_err(|e| e.to_string())?;
            let scaled: Vec<_> = src.iter().map(|p| Point::from(p.coords * 2.0)).collect();
            let sim = procrustes_similarity(&src, &scaled).map_err(|e| e.to_string())?;
            (rigid.residual < 1e-18 && (sim.transform.s - 2.0).abs() < 1e-9)
                .then(|| format!("scale {:.12}", sim.transform.s))
                .ok_or_else(|| format!("residual {} scale {}", rigid.residual, sim.transform.s))
        }),
        check("cb-mds with k = 1 equals mds-map", || {
            let d = generate_deployment(&FieldSpec::random(Shape::CShape, 120, 5))
                .map_err(|e| e.to_string())?;
            let net = build_network(&d, 2.5, 0.0, 0).map_err(|e| e.to_string())?;
            let anchors: PositionMap = [0, 20, 40, 60]
                .iter()
                .map(|&i| (i, net.position(i)))
                .collect();
            let a = cb_mds(&net, 1, &anchors, 0).map_err(|e| e.to_string())?;
            let b = mds_map_baseline(&net, &anchors).map_err(|e| e.to_string())?;
            let e = mean_normalized_error(&a, &truth_map(&net), 2.5).map_err(|e| e.to_string())?;
            (a == b)
                .then(|| format!("error {e:.4}"))
                .ok_or_else(|| "outputs differ".into())
        }),
        check("sweep output is reproducible", || {
            let cfg = ExperimentConfig {
                topologies: vec![FieldSpec::random(Shape::HShape, 60, 0)],
                radio_ranges: vec![2.0],
                cluster_counts: vec![3],
                anchor_counts: vec![4],
                trials: 2,
                ..ExperimentConfig::default()
            };
            let mut a = Vec::new();
            let mut b = Vec::new();
            write_raw_csv(&mut a, &run_sweep(&cfg)).map_err(|e| e.to_string())?;
            write_raw_csv(&mut b, &run_sweep(&cfg)).map_err(|e| e.to_string())?;
            (a == b)
                .then(|| format!("{} bytes", a.len()))
                .ok_or_else(|| "raw.csv differs between runs".into())
        }),
    ]
}
