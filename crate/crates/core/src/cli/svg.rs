//! Self-rendered SVG charts on a fixed 800×600 canvas.

use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use crate::error::{QbattError, Result};
use crate::scenarios::{Row, SweepResult};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum PlotKind {
    Lines,
    Heatmap,
}

/// What a line chart plots per row.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Quantity {
    /// `s_acc` when present, else `s_max`.
    Value,
    Gap,
}

const W: f64 = 800.0;
const H: f64 = 600.0;
const LEFT: f64 = 80.0;
const RIGHT: f64 = 610.0;
const TOP: f64 = 60.0;
const BOTTOM: f64 = 530.0;

const PALETTE: [&str; 8] = [
    "#1f77b4", "#ff7f0e", "#2ca02c", "#d62728", "#9467bd", "#8c564b", "#e377c2", "#17becf",
];

fn escape(s: &str) -> String {
    s.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;")
}

/// Roughly five round tick positions covering `[lo, hi]`.
fn ticks(lo: f64, hi: f64) -> Vec<f64> {
    let span = (hi - lo).max(1e-300);
    let raw = span / 5.0;
    let mag = 10f64.powf(raw.log10().floor());
    let step = [1.0, 2.0, 2.5, 5.0, 10.0]
        .iter()
        .map(|m| m * mag)
        .find(|s| span / s <= 6.0)
        .unwrap_or(10.0 * mag);
    let mut v = Vec::new();
    let mut x = (lo / step).ceil() * step;
    while x <= hi + step * 1e-9 {
        v.push(if x.abs() < step * 1e-9 { 0.0 } else { x });
        x += step;
    }
    v
}

fn tick_label(x: f64) -> String {
    let s = format!("{x:.4}");
    let s = s.trim_end_matches('0').trim_end_matches('.');
    if s == "-0" {
        "0".into()
    } else {
        s.into()
    }
}

fn range(vals: impl Iterator<Item = f64>) -> Option<(f64, f64)> {
    let (lo, hi) = vals
        .filter(|v| v.is_finite())
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), v| (a.min(v), b.max(v)));
    if lo > hi {
        return None;
    }
    if hi - lo < 1e-12 {
        let pad = if lo.abs() > 0.0 { lo.abs() * 0.05 } else { 1.0 };
        Some((lo - pad, hi + pad))
    } else {
        Some((lo, hi))
    }
}

fn title(result: &SweepResult) -> String {
    let mut t = result.name.clone();
    if let Some((_, p)) = result.metadata.iter().find(|(k, _)| k == "params") {
        if let Ok(v) = serde_json::from_str::<serde_json::Value>(p) {
            let get = |k: &str| v.get(k).and_then(|x| x.as_f64()).map(tick_label).unwrap_or_default();
            t.push_str(&format!(
                " (t={}, J_BA={}, h_B={})",
                get("t"),
                get("j_ba"),
                get("h_b")
            ));
        }
    }
    if let Some((_, n)) = result.metadata.iter().find(|(k, _)| k == "noise") {
        t.push_str(&format!(" noise {n}"));
    }
    t
}

fn frame(out: &mut String, result: &SweepResult, xlab: &str, ylab: &str, xr: (f64, f64), yr: (f64, f64)) {
    let _ = writeln!(
        out,
        r#"<svg xmlns="http://www.w3.org/2000/svg" viewBox="0 0 {W} {H}" width="{W}" height="{H}" font-family="sans-serif" font-size="12">"#
    );
    let _ = writeln!(out, r##"<rect width="{W}" height="{H}" fill="#ffffff"/>"##);
    let _ = writeln!(
        out,
        r#"<text class="title" x="{}" y="30" text-anchor="middle" font-size="15">{}</text>"#,
        W / 2.0,
        escape(&title(result))
    );
    let _ = writeln!(
        out,
        r##"<g class="axes" stroke="#000000"><line x1="{LEFT}" y1="{BOTTOM}" x2="{RIGHT}" y2="{BOTTOM}"/><line x1="{LEFT}" y1="{TOP}" x2="{LEFT}" y2="{BOTTOM}"/></g>"##
    );
    for x in ticks(xr.0, xr.1) {
        let px = LEFT + (x - xr.0) / (xr.1 - xr.0) * (RIGHT - LEFT);
        let _ = writeln!(
            out,
            r##"<g class="xtick"><line x1="{px:.2}" y1="{BOTTOM}" x2="{px:.2}" y2="{}" stroke="#000000"/><text x="{px:.2}" y="{}" text-anchor="middle">{}</text></g>"##,
            BOTTOM + 5.0,
            BOTTOM + 20.0,
            tick_label(x)
        );
    }
    for y in ticks(yr.0, yr.1) {
        let py = BOTTOM - (y - yr.0) / (yr.1 - yr.0) * (BOTTOM - TOP);
        let _ = writeln!(
            out,
            r##"<g class="ytick"><line x1="{}" y1="{py:.2}" x2="{LEFT}" y2="{py:.2}" stroke="#000000"/><text x="{}" y="{:.2}" text-anchor="end">{}</text></g>"##,
            LEFT - 5.0,
            LEFT - 8.0,
            py + 4.0,
            tick_label(y)
        );
    }
    let _ = writeln!(
        out,
        r#"<text class="xlabel" x="{}" y="{}" text-anchor="middle">{}</text>"#,
        (LEFT + RIGHT) / 2.0,
        BOTTOM + 45.0,
        escape(xlab)
    );
    let _ = writeln!(
        out,
        r#"<text class="ylabel" x="20" y="{}" text-anchor="middle" transform="rotate(-90 20 {})">{}</text>"#,
        (TOP + BOTTOM) / 2.0,
        (TOP + BOTTOM) / 2.0,
        escape(ylab)
    );
}

fn row_quantity(r: &Row, q: Quantity) -> f64 {
    match q {
        Quantity::Value => r.value(),
        Quantity::Gap => r.gap.unwrap_or(f64::NAN),
    }
}

/// One polyline per series against the single swept axis.
pub fn render_lines(result: &SweepResult, quantity: Quantity) -> Result<String> {
    if result.axes.len() != 1 {
        return Err(QbattError::Plot(format!(
            "a line chart needs one swept axis, got {}",
            result.axes.len()
        )));
    }
    let axis = result.axes[0].axis;
    let series: Vec<(&String, Vec<(f64, f64)>)> = result
        .series
        .iter()
        .map(|s| {
            let pts = result
                .rows_for(s)
                .filter_map(|r| Some((r.axis(axis)?, row_quantity(r, quantity))))
                .collect::<Vec<_>>();
            (s, pts)
        })
        .filter(|(_, p)| p.iter().any(|(_, y)| y.is_finite()))
        .collect();
    if series.is_empty() {
        return Err(QbattError::Plot("nothing to plot".into()));
    }
    let xr = range(series.iter().flat_map(|(_, p)| p.iter().map(|q| q.0)))
        .ok_or_else(|| QbattError::Plot("no finite x values".into()))?;
    let yr = range(series.iter().flat_map(|(_, p)| p.iter().map(|q| q.1)))
        .ok_or_else(|| QbattError::Plot("no finite y values".into()))?;
    let ylab = match quantity {
        Quantity::Value => "stochastic energy",
        Quantity::Gap => "gap",
    };
    let mut out = String::new();
    frame(&mut out, result, &axis.to_string(), ylab, xr, yr);
    let sx = |x: f64| LEFT + (x - xr.0) / (xr.1 - xr.0) * (RIGHT - LEFT);
    let sy = |y: f64| BOTTOM - (y - yr.0) / (yr.1 - yr.0) * (BOTTOM - TOP);
    for (i, (name, pts)) in series.iter().enumerate() {
        let colour = PALETTE[i % PALETTE.len()];
        let coords: Vec<String> = pts
            .iter()
            .filter(|(_, y)| y.is_finite())
            .map(|&(x, y)| format!("{:.2},{:.2}", sx(x), sy(y)))
            .collect();
        let _ = writeln!(
            out,
            r#"<polyline class="series" data-family="{}" fill="none" stroke="{colour}" stroke-width="2" points="{}"/>"#,
            escape(name),
            coords.join(" ")
        );
    }
    let _ = writeln!(out, r#"<g class="legend">"#);
    for (i, (name, _)) in series.iter().enumerate() {
        let y = TOP + 10.0 + 20.0 * i as f64;
        let colour = PALETTE[i % PALETTE.len()];
        let _ = writeln!(
            out,
            r#"<g class="legend-entry"><line x1="625" y1="{y}" x2="650" y2="{y}" stroke="{colour}" stroke-width="3"/><text x="656" y="{}">{}</text></g>"#,
            y + 4.0,
            escape(name)
        );
    }
    out.push_str("</g>\n</svg>\n");
    Ok(out)
}

/// White at zero, red for positive, blue for negative.
fn diverging(v: f64, max_abs: f64) -> String {
    if !v.is_finite() {
        return "#cccccc".into();
    }
    let s = if max_abs > 0.0 { (v / max_abs).clamp(-1.0, 1.0) } else { 0.0 };
    let fade = |t: f64| (255.0 * (1.0 - t)).round() as u8;
    let (r, g, b) = if s >= 0.0 {
        (255, fade(s), fade(s))
    } else {
        (fade(-s), fade(-s), 255)
    };
    format!("#{r:02x}{g:02x}{b:02x}")
}

/// Gap of `family` over the two swept axes, coloured on a scale centred at 0.
pub fn render_heatmap(result: &SweepResult, family: &str) -> Result<String> {
    if result.axes.len() != 2 {
        return Err(QbattError::Plot(format!(
            "a heatmap needs two swept axes, got {}",
            result.axes.len()
        )));
    }
    let (ax, ay) = (&result.axes[0], &result.axes[1]);
    let cells: Vec<&Row> = result.rows_for(family).filter(|r| r.gap.is_some()).collect();
    if cells.is_empty() {
        return Err(QbattError::Plot(format!("no gap values for {family}")));
    }
    if cells.len() != ax.values.len() * ay.values.len() {
        return Err(QbattError::Plot("gap rows do not fill the grid".into()));
    }
    let max_abs = cells
        .iter()
        .filter_map(|r| r.gap)
        .filter(|g| g.is_finite())
        .fold(0.0, |m: f64, g| m.max(g.abs()));
    let bounds = |v: &[f64]| -> (f64, f64) {
        let lo = v[0];
        let hi = *v.last().unwrap_or(&lo);
        if hi > lo {
            (lo, hi)
        } else {
            (lo - 0.5, lo + 0.5)
        }
    };
    let (xr, yr) = (bounds(&ax.values), bounds(&ay.values));
    let mut out = String::new();
    frame(&mut out, result, &ax.axis.to_string(), &ay.axis.to_string(), xr, yr);
    let (nx, ny) = (ax.values.len() as f64, ay.values.len() as f64);
    let cw = (RIGHT - LEFT) / nx;
    let ch = (BOTTOM - TOP) / ny;
    let _ = writeln!(out, r#"<g class="heatmap" shape-rendering="crispEdges">"#);
    for (i, r) in cells.iter().enumerate() {
        let (ix, iy) = ((i / ay.values.len()) as f64, (i % ay.values.len()) as f64);
        let _ = writeln!(
            out,
            r#"<rect x="{:.2}" y="{:.2}" width="{:.2}" height="{:.2}" fill="{}"/>"#,
            LEFT + ix * cw,
            BOTTOM - (iy + 1.0) * ch,
            cw + 0.05,
            ch + 0.05,
            diverging(r.gap.unwrap_or(f64::NAN), max_abs)
        );
    }
    out.push_str("</g>\n");
    let _ = writeln!(out, r#"<g class="legend">"#);
    let _ = writeln!(
        out,
        r#"<text x="625" y="{}">gap of {}</text>"#,
        TOP - 8.0,
        escape(family)
    );
    let steps = 20;
    for s in 0..steps {
        let v = max_abs * (1.0 - 2.0 * s as f64 / (steps - 1) as f64);
        let _ = writeln!(
            out,
            r#"<rect class="colorbar" x="640" y="{:.2}" width="24" height="{:.2}" fill="{}"/>"#,
            TOP + s as f64 * 20.0,
            20.5,
            diverging(v, max_abs)
        );
    }
    for (v, y) in [(max_abs, TOP + 10.0), (0.0, TOP + 200.0), (-max_abs, TOP + 390.0)] {
        let _ = writeln!(out, r#"<text x="670" y="{:.2}">{}</text>"#, y + 4.0, format_args!("{v:.3e}"));
    }
    out.push_str("</g>\n</svg>\n");
    Ok(out)
}

/// Renders and writes a chart. Nothing is written when rendering fails.
pub fn emit_svg(result: &SweepResult, path: &Path, kind: PlotKind) -> Result<()> {
    let text = match kind {
        PlotKind::Lines => {
            let q = if result.rows.iter().all(|r| !r.s_max.is_finite()) {
                Quantity::Gap
            } else {
                Quantity::Value
            };
            render_lines(result, q)?
        }
        PlotKind::Heatmap => {
            let family = result
                .series
                .iter()
                .find(|s| result.rows_for(s).any(|r| r.gap.is_some()))
                .ok_or_else(|| QbattError::Plot("no series carries a gap".into()))?;
            render_heatmap(result, family)?
        }
    };
    fs::write(path, text).map_err(|source| QbattError::Io {
        path: path.to_path_buf(),
        source,
    })
}
