//! SVG figures: nodes colored by cluster, neighbor edges, and one displacement
//! segment per node and algorithm from the true to the estimated position.

use std::fmt::Write;

use super::config::Algorithm;
use crate::clustering::ClusterSet;
use crate::localization::PositionMap;
use crate::network::Network;
use crate::Point;

const PX_PER_R: f64 = 40.0;
const MARGIN: f64 = 30.0;
const LEGEND_H: f64 = 70.0;
const EDGE_COLOR: &str = "#e8c100";
const MDS_MAP_COLOR: &str = "#1f4fd8";
const CB_MDS_COLOR: &str = "#d62728";
const PALETTE: [&str; 16] = [
    "#1b9e77", "#7570b3", "#e7298a", "#66a61e", "#e6ab02", "#a6761d", "#666666", "#17becf",
    "#9467bd", "#8c564b", "#bcbd22", "#ff7f0e", "#2ca02c", "#aec7e8", "#f7b6d2", "#c49c94",
];

pub struct Estimate<'a> {
    pub algorithm: Algorithm,
    pub positions: &'a PositionMap,
}

fn algorithm_style(alg: Algorithm) -> (&'static str, &'static str) {
    match alg {
        Algorithm::MdsMap => (MDS_MAP_COLOR, "MDS-MAP error"),
        Algorithm::CbMds => (CB_MDS_COLOR, "CB-MDS error"),
    }
}

/// Renders an SVG document. Segments shorter than 1e-9 r are omitted.
pub fn render_figure(
    net: &Network,
    truth: &PositionMap,
    estimates: &[Estimate<'_>],
    clusters: Option<&ClusterSet>,
) -> String {
    let all = truth
        .values()
        .chain(estimates.iter().flat_map(|e| e.positions.values()));
    let (mut min_x, mut min_y, mut max_x, mut max_y) = (0.0f64, 0.0f64, 1.0f64, 1.0f64);
    for (i, p) in all.enumerate() {
        if i == 0 {
            (min_x, min_y, max_x, max_y) = (p.x, p.y, p.x, p.y);
        }
        min_x = min_x.min(p.x);
        min_y = min_y.min(p.y);
        max_x = max_x.max(p.x);
        max_y = max_y.max(p.y);
    }
    let width = (max_x - min_x) * PX_PER_R + 2.0 * MARGIN;
    let plot_h = (max_y - min_y) * PX_PER_R + 2.0 * MARGIN;
    let height = plot_h + LEGEND_H;
    // y axis points up in the field, down in SVG
    let tx = |p: &Point| {
        (
            MARGIN + (p.x - min_x) * PX_PER_R,
            MARGIN + (max_y - p.y) * PX_PER_R,
        )
    };

    let mut s = String::new();
    let _ = writeln!(s, r#"<?xml version="1.0" encoding="UTF-8"?>"#);
    let _ = writeln!(
        s,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{width:.1}" height="{height:.1}" viewBox="0 0 {width:.1} {height:.1}">"#
    );
    let _ = writeln!(s, r#"<rect width="100%" height="100%" fill="white"/>"#);

    let _ = writeln!(
        s,
        r#"<g id="edges" stroke="{EDGE_COLOR}" stroke-width="1">"#
    );
    for (a, b, _) in net.edges() {
        let (x1, y1) = tx(&net.position(a));
        let (x2, y2) = tx(&net.position(b));
        let _ = writeln!(
            s,
            r#"<line x1="{x1:.2}" y1="{y1:.2}" x2="{x2:.2}" y2="{y2:.2}"/>"#
        );
    }
    let _ = writeln!(s, "</g>");

    for est in estimates {
        let (color, _) = algorithm_style(est.algorithm);
        let _ = writeln!(
            s,
            r#"<g id="{}" class="displacement" stroke="{color}" stroke-width="1.5">"#,
            est.algorithm.name()
        );
        for (id, t) in truth {
            let Some(e) = est.positions.get(id) else {
                continue;
            };
            if (e - t).norm() < 1e-9 {
                continue;
            }
            let (x1, y1) = tx(t);
            let (x2, y2) = tx(e);
            let _ = writeln!(
                s,
                r#"<line x1="{x1:.2}" y1="{y1:.2}" x2="{x2:.2}" y2="{y2:.2}"/>"#
            );
        }
        let _ = writeln!(s, "</g>");
    }

    let _ = writeln!(s, r#"<g id="nodes" stroke="black" stroke-width="0.5">"#);
    for (id, t) in truth {
        let color = clusters
            .and_then(|c| c.assignment.get(*id))
            .map(|&c| PALETTE[c % PALETTE.len()])
            .unwrap_or("#444444");
        let (cx, cy) = tx(t);
        let _ = writeln!(
            s,
            r#"<circle cx="{cx:.2}" cy="{cy:.2}" r="4" fill="{color}"/>"#
        );
    }
    let _ = writeln!(s, "</g>");

    // legend and a 1 r scale bar
    let ly = plot_h + 15.0;
    let _ = writeln!(
        s,
        r#"<g id="legend" font-family="sans-serif" font-size="12">"#
    );
    let mut entries = vec![(EDGE_COLOR, "neighbor link")];
    entries.extend(estimates.iter().map(|e| algorithm_style(e.algorithm)));
    for (i, (color, label)) in entries.iter().enumerate() {
        let x = MARGIN + i as f64 * 130.0;
        let _ = writeln!(
            s,
            r#"<line x1="{x:.1}" y1="{ly:.1}" x2="{:.1}" y2="{ly:.1}" stroke="{color}" stroke-width="3"/>"#,
            x + 20.0
        );
        let _ = writeln!(
            s,
            r#"<text x="{:.1}" y="{:.1}">{label}</text>"#,
            x + 26.0,
            ly + 4.0
        );
    }
    let sy = ly + 30.0;
    let _ = writeln!(
        s,
        r#"<line x1="{MARGIN:.1}" y1="{sy:.1}" x2="{:.1}" y2="{sy:.1}" stroke="black" stroke-width="2"/>"#,
        MARGIN + PX_PER_R
    );
    let _ = writeln!(
        s,
        r#"<text x="{:.1}" y="{:.1}">1 r (R = {} r)</text>"#,
        MARGIN + PX_PER_R + 6.0,
        sy + 4.0,
        net.radio_range()
    );
    let _ = writeln!(s, "</g>");
    let _ = writeln!(s, "</svg>");
    s
}
