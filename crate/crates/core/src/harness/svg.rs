//! Minimal self-contained SVG plots of aggregated sweep results.

use std::fmt::Write as _;

use super::{AggregateRow, Method, Metric};
use crate::noise::Snr;

const CELL_W: f64 = 90.0;
const CELL_H: f64 = 40.0;
const MARGIN_L: f64 = 80.0;
const MARGIN_T: f64 = 50.0;

/// Linear interpolation through a short viridis-like ramp, `x` in `[0, 1]`.
fn color(x: f64) -> String {
    const STOPS: [(f64, f64, f64); 5] = [
        (68.0, 1.0, 84.0),
        (59.0, 82.0, 139.0),
        (33.0, 145.0, 140.0),
        (94.0, 201.0, 98.0),
        (253.0, 231.0, 37.0),
    ];
    let x = if x.is_finite() { x.clamp(0.0, 1.0) } else { 0.0 };
    let pos = x * (STOPS.len() - 1) as f64;
    let i = (pos.floor() as usize).min(STOPS.len() - 2);
    let f = pos - i as f64;
    let (a, b) = (STOPS[i], STOPS[i + 1]);
    let mix = |p: f64, q: f64| (p + (q - p) * f).round() as u8;
    format!("#{:02x}{:02x}{:02x}", mix(a.0, b.0), mix(a.1, b.1), mix(a.2, b.2))
}

fn escape(s: &str) -> String {
    s.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;")
}

fn lookup<'a>(rows: &'a [AggregateRow], function: &str, fs: f64, snr: &str, method: Method) -> Option<&'a AggregateRow> {
    rows.iter()
        .find(|r| r.function == function && r.fs_hz == fs && r.snr_db == snr && r.method == method)
}

/// Heatmap with SNR across and sampling rate down; each cell is labelled with
/// its value. Colours are scaled to the largest value on the map.
pub fn heatmap_svg(rows: &[AggregateRow], function: u32, method: Method, metric: Metric, fs: &[f64], snr: &[Snr]) -> String {
    let name = format!("x{function}");
    let value = |r: &AggregateRow| match metric {
        Metric::RelErr => r.mean_rel_err,
        Metric::WallTime => r.mean_wall_time_s,
    };
    let grid: Vec<Vec<Option<f64>>> = fs
        .iter()
        .map(|&f| {
            snr.iter()
                .map(|s| lookup(rows, &name, f, &s.to_string(), method).map(value))
                .collect()
        })
        .collect();
    let max = grid.iter().flatten().flatten().copied().fold(0.0, f64::max);
    let (title, fmt): (&str, fn(f64) -> String) = match metric {
        Metric::RelErr => ("mean relative error", |v| format!("{:.2}%", 100.0 * v)),
        Metric::WallTime => ("mean wall time", |v| format!("{:.3} ms", 1e3 * v)),
    };

    let width = MARGIN_L + CELL_W * snr.len() as f64 + 20.0;
    let height = MARGIN_T + CELL_H * fs.len() as f64 + 40.0;
    let mut s = String::new();
    let _ = writeln!(
        s,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{width}" height="{height}" font-family="sans-serif" font-size="12">"#
    );
    let _ = writeln!(
        s,
        r#"<text x="{}" y="20" text-anchor="middle" font-size="14">{} ({}, {})</text>"#,
        width / 2.0,
        escape(title),
        escape(&name),
        method.name()
    );
    for (j, sn) in snr.iter().enumerate() {
        let x = MARGIN_L + CELL_W * (j as f64 + 0.5);
        let label = match sn {
            Snr::Clean => "clean".to_string(),
            Snr::Db(db) => format!("{db} dB"),
        };
        let _ = writeln!(s, r#"<text x="{x}" y="{}" text-anchor="middle">{label}</text>"#, MARGIN_T - 8.0);
    }
    for (i, f) in fs.iter().enumerate() {
        let y = MARGIN_T + CELL_H * i as f64;
        let _ = writeln!(
            s,
            r#"<text x="{}" y="{}" text-anchor="end">{f} Hz</text>"#,
            MARGIN_L - 8.0,
            y + CELL_H / 2.0 + 4.0
        );
        for (j, v) in grid[i].iter().enumerate() {
            let x = MARGIN_L + CELL_W * j as f64;
            let (fill, text) = match v {
                Some(v) => (color(if max > 0.0 { v / max } else { 0.0 }), fmt(*v)),
                None => ("#dddddd".to_string(), "n/a".to_string()),
            };
            let ink = if v.is_some_and(|v| max > 0.0 && v / max > 0.6) { "black" } else { "white" };
            let _ = writeln!(
                s,
                r#"<rect x="{x}" y="{y}" width="{CELL_W}" height="{CELL_H}" fill="{fill}" stroke="white"/><text x="{}" y="{}" text-anchor="middle" fill="{ink}">{text}</text>"#,
                x + CELL_W / 2.0,
                y + CELL_H / 2.0 + 4.0
            );
        }
    }
    s.push_str("</svg>\n");
    s
}

/// Grouped bars of median relative error per function for both methods at one
/// (fs, SNR).
pub fn bar_chart_svg(rows: &[AggregateRow], fs: f64, snr: Snr, functions: &[u32]) -> String {
    const BAR_W: f64 = 14.0;
    const PLOT_H: f64 = 220.0;
    let snr_s = snr.to_string();
    let pairs: Vec<(u32, [Option<f64>; 2])> = functions
        .iter()
        .map(|&id| {
            let name = format!("x{id}");
            let get = |m| lookup(rows, &name, fs, &snr_s, m).map(|r| r.median_rel_err);
            (id, [get(Method::Persistence), get(Method::Molinaro)])
        })
        .collect();
    let max = pairs
        .iter()
        .flat_map(|(_, v)| v.iter().flatten().copied())
        .fold(0.0, f64::max);
    let group_w = 3.0 * BAR_W + 10.0;
    let width = MARGIN_L + group_w * functions.len() as f64 + 20.0;
    let height = MARGIN_T + PLOT_H + 60.0;
    let base = MARGIN_T + PLOT_H;
    let mut s = String::new();
    let _ = writeln!(
        s,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{width}" height="{height}" font-family="sans-serif" font-size="12">"#
    );
    let _ = writeln!(
        s,
        r#"<text x="{}" y="20" text-anchor="middle" font-size="14">median relative error at {fs} Hz, SNR {}</text>"#,
        width / 2.0,
        escape(&snr_s)
    );
    let _ = writeln!(
        s,
        r#"<line x1="{MARGIN_L}" y1="{base}" x2="{}" y2="{base}" stroke="black"/>"#,
        width - 20.0
    );
    let _ = writeln!(
        s,
        r#"<text x="{}" y="{}" text-anchor="end">{:.2}%</text><text x="{}" y="{}" text-anchor="end">0</text>"#,
        MARGIN_L - 6.0,
        MARGIN_T + 4.0,
        100.0 * max,
        MARGIN_L - 6.0,
        base + 4.0
    );
    let colors = ["#3b528b", "#fde725"];
    for (k, (id, vals)) in pairs.iter().enumerate() {
        let x0 = MARGIN_L + group_w * k as f64 + 5.0;
        for (m, v) in vals.iter().enumerate() {
            let h = match v {
                Some(v) if max > 0.0 => PLOT_H * v / max,
                _ => 0.0,
            };
            let _ = writeln!(
                s,
                r#"<rect x="{}" y="{}" width="{BAR_W}" height="{h}" fill="{}"/>"#,
                x0 + BAR_W * m as f64,
                base - h,
                colors[m]
            );
        }
        let _ = writeln!(
            s,
            r#"<text x="{}" y="{}" text-anchor="middle">x{id}</text>"#,
            x0 + BAR_W,
            base + 16.0
        );
    }
    let ly = base + 40.0;
    for (m, method) in [Method::Persistence, Method::Molinaro].iter().enumerate() {
        let lx = MARGIN_L + 140.0 * m as f64;
        let _ = writeln!(
            s,
            r#"<rect x="{lx}" y="{}" width="12" height="12" fill="{}"/><text x="{}" y="{ly}">{}</text>"#,
            ly - 10.0,
            colors[m],
            lx + 16.0,
            method.name()
        );
    }
    s.push_str("</svg>\n");
    s
}
