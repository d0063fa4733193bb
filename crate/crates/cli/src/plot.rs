//! Minimal static SVG 1.1 charts: framed panels with tick labels, point
//! scatters and polylines.

use std::fmt::Write as _;

const PANEL_W: f64 = 420.0;
const PANEL_H: f64 = 320.0;
const MARGIN: f64 = 48.0;
/// Scatter points drawn per panel; denser data is strided down.
const MAX_POINTS: usize = 20_000;
const COLORS: [&str; 6] = ["#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#17becf"];

#[derive(Debug, Clone, Default)]
pub struct Panel {
    pub title: String,
    pub x_label: String,
    pub y_label: String,
    pub points: Vec<(f64, f64)>,
    pub lines: Vec<Vec<(f64, f64)>>,
}

fn bounds(panel: &Panel) -> (f64, f64, f64, f64) {
    let mut b = (f64::INFINITY, f64::NEG_INFINITY, f64::INFINITY, f64::NEG_INFINITY);
    let all = panel.points.iter().chain(panel.lines.iter().flatten());
    for &(x, y) in all.filter(|(x, y)| x.is_finite() && y.is_finite()) {
        b = (b.0.min(x), b.1.max(x), b.2.min(y), b.3.max(y));
    }
    if !b.0.is_finite() {
        return (0.0, 1.0, 0.0, 1.0);
    }
    let pad = |lo: f64, hi: f64| {
        if hi - lo > 0.0 {
            (lo, hi)
        } else {
            (lo - 0.5, hi + 0.5)
        }
    };
    let (x0, x1) = pad(b.0, b.1);
    let (y0, y1) = pad(b.2, b.3);
    (x0, x1, y0, y1)
}

fn render_panel(out: &mut String, panel: &Panel, ox: f64) {
    let (x0, x1, y0, y1) = bounds(panel);
    let w = PANEL_W - 2.0 * MARGIN;
    let h = PANEL_H - 2.0 * MARGIN;
    let sx = |x: f64| ox + MARGIN + (x - x0) / (x1 - x0) * w;
    let sy = |y: f64| MARGIN + (1.0 - (y - y0) / (y1 - y0)) * h;

    writeln!(
        out,
        r#"<rect x="{:.2}" y="{MARGIN}" width="{w}" height="{h}" fill="none" stroke="black"/>"#,
        ox + MARGIN
    )
    .unwrap();
    writeln!(
        out,
        r#"<text x="{:.2}" y="{:.2}" text-anchor="middle" font-size="13">{}</text>"#,
        ox + PANEL_W / 2.0,
        MARGIN - 16.0,
        panel.title
    )
    .unwrap();
    writeln!(
        out,
        r#"<text x="{:.2}" y="{:.2}" text-anchor="middle" font-size="11">{}</text>"#,
        ox + PANEL_W / 2.0,
        PANEL_H - 8.0,
        panel.x_label
    )
    .unwrap();
    writeln!(
        out,
        r#"<text x="{:.2}" y="{:.2}" text-anchor="middle" font-size="11" transform="rotate(-90 {:.2} {:.2})">{}</text>"#,
        ox + 12.0,
        PANEL_H / 2.0,
        ox + 12.0,
        PANEL_H / 2.0,
        panel.y_label
    )
    .unwrap();
    for (v, x, y, anchor) in [
        (x0, sx(x0), MARGIN + h + 14.0, "start"),
        (x1, sx(x1), MARGIN + h + 14.0, "end"),
    ] {
        writeln!(out, r#"<text x="{x:.2}" y="{y:.2}" text-anchor="{anchor}" font-size="9">{v:.4}</text>"#).unwrap();
    }
    for (v, y) in [(y0, sy(y0)), (y1, sy(y1) + 8.0)] {
        writeln!(
            out,
            r#"<text x="{:.2}" y="{y:.2}" text-anchor="end" font-size="9">{v:.4}</text>"#,
            ox + MARGIN - 3.0
        )
        .unwrap();
    }
    if y0 < 0.0 && y1 > 0.0 {
        writeln!(
            out,
            r##"<line x1="{:.2}" y1="{:.2}" x2="{:.2}" y2="{:.2}" stroke="#999" stroke-dasharray="3,3"/>"##,
            sx(x0),
            sy(0.0),
            sx(x1),
            sy(0.0)
        )
        .unwrap();
    }

    for (i, line) in panel.lines.iter().enumerate() {
        let pts: Vec<String> = line
            .iter()
            .filter(|(x, y)| x.is_finite() && y.is_finite())
            .map(|&(x, y)| format!("{:.2},{:.2}", sx(x), sy(y)))
            .collect();
        if !pts.is_empty() {
            writeln!(
                out,
                r#"<polyline fill="none" stroke="{}" stroke-width="1.2" points="{}"/>"#,
                COLORS[i % COLORS.len()],
                pts.join(" ")
            )
            .unwrap();
        }
    }
    let stride = panel.points.len().div_ceil(MAX_POINTS).max(1);
    for &(x, y) in panel.points.iter().step_by(stride) {
        if x.is_finite() && y.is_finite() {
            writeln!(out, r#"<circle cx="{:.2}" cy="{:.2}" r="0.7" fill="black"/>"#, sx(x), sy(y)).unwrap();
        }
    }
}

/// Panels laid out left to right in one document.
pub fn render(panels: &[Panel]) -> String {
    let width = PANEL_W * panels.len().max(1) as f64;
    let mut out = String::new();
    writeln!(out, r#"<?xml version="1.0" encoding="UTF-8"?>"#).unwrap();
    writeln!(
        out,
        r#"<svg xmlns="http://www.w3.org/2000/svg" version="1.1" width="{width}" height="{PANEL_H}" viewBox="0 0 {width} {PANEL_H}">"#
    )
    .unwrap();
    writeln!(out, r#"<rect width="100%" height="100%" fill="white"/>"#).unwrap();
    for (i, p) in panels.iter().enumerate() {
        render_panel(&mut out, p, i as f64 * PANEL_W);
    }
    out.push_str("</svg>\n");
    out
}
