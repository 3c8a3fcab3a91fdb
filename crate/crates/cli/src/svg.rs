//! Minimal SVG line charts: fixed canvas, numeric axes, a legend, and no
//! configuration that could make the bytes depend on the environment.
//! Coordinates are rounded to two decimals so output is reproducible.

use std::fmt::Write as _;

const WIDTH: f64 = 860.0;
const HEIGHT: f64 = 480.0;
const LEFT: f64 = 72.0;
const RIGHT: f64 = 24.0;
const TOP: f64 = 42.0;
const BOTTOM: f64 = 52.0;
const PALETTE: [&str; 5] = ["#2563eb", "#dc2626", "#16a34a", "#9333ea", "#b45309"];

pub struct Line<'a> {
    pub label: &'a str,
    pub points: Vec<(f64, f64)>,
}

fn escape(text: &str) -> String {
    text.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;")
}

/// Tick label precision adapts to the span so small probability ranges do
/// not collapse to identical labels.
fn tick_label(v: f64, span: f64) -> String {
    if span >= 50.0 {
        format!("{v:.0}")
    } else if span >= 0.5 {
        format!("{v:.2}")
    } else {
        format!("{v:.4}")
    }
}

/// Renders one chart with shared x/y scales across all lines. `x_ticks`
/// pins the labelled positions on the x axis (e.g. every sixth month);
/// y ticks are five evenly spaced values over the data range.
pub fn line_chart(title: &str, x_ticks: &[(f64, String)], lines: &[Line]) -> String {
    let finite = |v: &(f64, f64)| v.0.is_finite() && v.1.is_finite();
    let xs = lines
        .iter()
        .flat_map(|l| l.points.iter().filter(|p| finite(p)).map(|p| p.0))
        .chain(x_ticks.iter().map(|t| t.0));
    let (mut x_min, mut x_max) = (f64::INFINITY, f64::NEG_INFINITY);
    for x in xs {
        x_min = x_min.min(x);
        x_max = x_max.max(x);
    }
    let (mut y_min, mut y_max) = (f64::INFINITY, f64::NEG_INFINITY);
    for l in lines {
        for p in l.points.iter().filter(|p| finite(p)) {
            y_min = y_min.min(p.1);
            y_max = y_max.max(p.1);
        }
    }
    if !(x_min.is_finite() && x_max.is_finite()) {
        (x_min, x_max) = (0.0, 1.0);
    }
    if !(y_min.is_finite() && y_max.is_finite()) {
        (y_min, y_max) = (0.0, 1.0);
    }
    if x_max - x_min < 1e-12 {
        x_min -= 0.5;
        x_max += 0.5;
    }
    if y_max - y_min < 1e-12 {
        y_min -= 0.5;
        y_max += 0.5;
    }
    // headroom so lines do not sit on the frame
    let pad = (y_max - y_min) * 0.05;
    y_min -= pad;
    y_max += pad;

    let plot_w = WIDTH - LEFT - RIGHT;
    let plot_h = HEIGHT - TOP - BOTTOM;
    let sx = |x: f64| LEFT + (x - x_min) / (x_max - x_min) * plot_w;
    let sy = |y: f64| TOP + plot_h - (y - y_min) / (y_max - y_min) * plot_h;

    let mut out = String::new();
    let _ = writeln!(
        out,
        "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"{WIDTH:.0}\" height=\"{HEIGHT:.0}\" \
         viewBox=\"0 0 {WIDTH:.0} {HEIGHT:.0}\" font-family=\"monospace\" font-size=\"12\">"
    );
    let _ = writeln!(out, "<rect width=\"{WIDTH:.0}\" height=\"{HEIGHT:.0}\" fill=\"#ffffff\"/>");
    let _ = writeln!(
        out,
        "<text x=\"{:.2}\" y=\"24\" text-anchor=\"middle\" font-size=\"14\">{}</text>",
        LEFT + plot_w / 2.0,
        escape(title)
    );
    // frame
    let _ = writeln!(
        out,
        "<rect x=\"{LEFT:.2}\" y=\"{TOP:.2}\" width=\"{plot_w:.2}\" height=\"{plot_h:.2}\" \
         fill=\"none\" stroke=\"#444444\"/>"
    );

    let y_span = y_max - y_min;
    for i in 0..5 {
        let v = y_min + y_span * f64::from(i) / 4.0;
        let y = sy(v);
        let _ = writeln!(
            out,
            "<line x1=\"{LEFT:.2}\" y1=\"{y:.2}\" x2=\"{:.2}\" y2=\"{y:.2}\" \
             stroke=\"#dddddd\"/>",
            LEFT + plot_w
        );
        let _ = writeln!(
            out,
            "<text x=\"{:.2}\" y=\"{:.2}\" text-anchor=\"end\">{}</text>",
            LEFT - 6.0,
            y + 4.0,
            tick_label(v, y_span)
        );
    }
    for (x, label) in x_ticks {
        let px = sx(*x);
        let _ = writeln!(
            out,
            "<line x1=\"{px:.2}\" y1=\"{:.2}\" x2=\"{px:.2}\" y2=\"{:.2}\" stroke=\"#dddddd\"/>",
            TOP,
            TOP + plot_h
        );
        let _ = writeln!(
            out,
            "<text x=\"{px:.2}\" y=\"{:.2}\" text-anchor=\"middle\">{}</text>",
            TOP + plot_h + 18.0,
            escape(label)
        );
    }

    for (i, line) in lines.iter().enumerate() {
        let color = PALETTE[i % PALETTE.len()];
        let mut points = String::new();
        for p in line.points.iter().filter(|p| finite(p)) {
            let _ = write!(points, "{:.2},{:.2} ", sx(p.0), sy(p.1));
        }
        let _ = writeln!(
            out,
            "<polyline fill=\"none\" stroke=\"{color}\" stroke-width=\"1.5\" points=\"{}\"/>",
            points.trim_end()
        );
        // legend row, top-right inside the frame
        let ly = TOP + 16.0 + 16.0 * i as f64;
        let lx = LEFT + plot_w - 150.0;
        let _ = writeln!(
            out,
            "<line x1=\"{lx:.2}\" y1=\"{:.2}\" x2=\"{:.2}\" y2=\"{:.2}\" \
             stroke=\"{color}\" stroke-width=\"2\"/>",
            ly - 4.0,
            lx + 18.0,
            ly - 4.0
        );
        let _ = writeln!(
            out,
            "<text x=\"{:.2}\" y=\"{ly:.2}\">{}</text>",
            lx + 24.0,
            escape(line.label)
        );
    }
    out.push_str("</svg>\n");
    out
}
