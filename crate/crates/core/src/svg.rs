//! Minimal SVG output: categorical heat maps and multi-series line plots.

use std::fmt::Write as _;

const WIDTH: f64 = 640.0;
const HEIGHT: f64 = 420.0;
const MARGIN: f64 = 56.0;

const PALETTE: [&str; 10] = [
    "#4c72b0", "#dd8452", "#55a868", "#c44e52", "#8172b3", "#937860", "#da8bc3", "#8c8c8c", "#ccb974", "#64b5cd",
];

pub fn palette(i: usize) -> &'static str {
    PALETTE[i % PALETTE.len()]
}

fn escape(s: &str) -> String {
    s.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;")
}

fn header(out: &mut String, title: &str) {
    let _ = writeln!(
        out,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{WIDTH}" height="{HEIGHT}" viewBox="0 0 {WIDTH} {HEIGHT}" font-family="sans-serif" font-size="12">"#
    );
    let _ = writeln!(out, r#"<rect width="100%" height="100%" fill="white"/>"#);
    let _ = writeln!(out, r#"<text x="{}" y="20" text-anchor="middle" font-size="14">{}</text>"#, WIDTH / 2.0, escape(title));
}

fn axes(out: &mut String, x: (f64, f64), y: (f64, f64), x_label: &str, y_label: &str) {
    let (x0, x1, y0, y1) = (MARGIN, WIDTH - MARGIN, HEIGHT - MARGIN, MARGIN);
    let _ = writeln!(out, r#"<path d="M{x0},{y1} L{x0},{y0} L{x1},{y0}" stroke="black" fill="none"/>"#);
    for i in 0..=4 {
        let f = i as f64 / 4.0;
        let px = x0 + f * (x1 - x0);
        let py = y0 + f * (y1 - y0);
        let _ = writeln!(
            out,
            r#"<text x="{px:.1}" y="{:.1}" text-anchor="middle">{}</text>"#,
            y0 + 16.0,
            tick(x.0 + f * (x.1 - x.0))
        );
        let _ = writeln!(
            out,
            r#"<text x="{:.1}" y="{:.1}" text-anchor="end">{}</text>"#,
            x0 - 6.0,
            py + 4.0,
            tick(y.0 + f * (y.1 - y.0))
        );
    }
    let _ = writeln!(
        out,
        r#"<text x="{:.1}" y="{:.1}" text-anchor="middle">{}</text>"#,
        (x0 + x1) / 2.0,
        HEIGHT - 14.0,
        escape(x_label)
    );
    let _ = writeln!(
        out,
        r#"<text x="14" y="{:.1}" text-anchor="middle" transform="rotate(-90 14 {:.1})">{}</text>"#,
        (y0 + y1) / 2.0,
        (y0 + y1) / 2.0,
        escape(y_label)
    );
}

fn tick(v: f64) -> String {
    if v != 0.0 && (v.abs() >= 1e4 || v.abs() < 1e-2) {
        format!("{v:.1e}")
    } else {
        format!("{v:.2}")
    }
}

fn finite_range(values: impl Iterator<Item = f64>) -> (f64, f64) {
    let (lo, hi) = values
        .filter(|v| v.is_finite())
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), v| (a.min(v), b.max(v)));
    if !lo.is_finite() {
        (0.0, 1.0)
    } else if lo == hi {
        (lo - 0.5, hi + 0.5)
    } else {
        (lo, hi)
    }
}

/// One named polyline.
#[derive(Debug, Clone)]
pub struct Series {
    pub name: String,
    pub points: Vec<(f64, f64)>,
}

/// Axis labels and optional fixed ranges of a line plot. Without a range
/// the axis spans the finite data; with one, points outside it are dropped
/// and break the polyline.
#[derive(Debug, Clone, Default)]
pub struct Frame {
    pub title: String,
    pub x_label: String,
    pub y_label: String,
    pub x_range: Option<(f64, f64)>,
    pub y_range: Option<(f64, f64)>,
}

impl Frame {
    pub fn new(title: &str, x_label: &str, y_label: &str) -> Self {
        Frame {
            title: title.into(),
            x_label: x_label.into(),
            y_label: y_label.into(),
            ..Default::default()
        }
    }

    pub fn with_ranges(mut self, x: (f64, f64), y: (f64, f64)) -> Self {
        self.x_range = Some(x);
        self.y_range = Some(y);
        self
    }
}

/// Line plot of several series sharing axes.
pub fn line_plot(frame: &Frame, series: &[Series]) -> String {
    let xr = frame
        .x_range
        .unwrap_or_else(|| finite_range(series.iter().flat_map(|s| s.points.iter().map(|p| p.0))));
    let yr = frame
        .y_range
        .unwrap_or_else(|| finite_range(series.iter().flat_map(|s| s.points.iter().map(|p| p.1))));
    let mut out = String::new();
    header(&mut out, &frame.title);
    axes(&mut out, xr, yr, &frame.x_label, &frame.y_label);
    let sx = |x: f64| MARGIN + (x - xr.0) / (xr.1 - xr.0) * (WIDTH - 2.0 * MARGIN);
    let sy = |y: f64| HEIGHT - MARGIN - (y - yr.0) / (yr.1 - yr.0) * (HEIGHT - 2.0 * MARGIN);
    let inside = |x: f64, y: f64| x >= xr.0 && x <= xr.1 && y >= yr.0 && y <= yr.1;
    for (i, s) in series.iter().enumerate() {
        let mut d = String::new();
        let mut pen_down = false;
        for &(x, y) in &s.points {
            if !(x.is_finite() && y.is_finite() && inside(x, y)) {
                pen_down = false;
                continue;
            }
            let _ = write!(d, "{}{:.2},{:.2} ", if pen_down { "L" } else { "M" }, sx(x), sy(y));
            pen_down = true;
        }
        let _ = writeln!(out, r#"<path d="{}" stroke="{}" fill="none" stroke-width="1.2"/>"#, d.trim_end(), palette(i));
        let _ = writeln!(
            out,
            r#"<text x="{:.1}" y="{:.1}" fill="{}">{}</text>"#,
            WIDTH - MARGIN - 100.0,
            MARGIN + 14.0 * i as f64,
            palette(i),
            escape(&s.name)
        );
    }
    out.push_str("</svg>\n");
    out
}

/// Categorical heat map. `cells[i][j]` is the category index at x-cell `i`,
/// y-cell `j`; `legend[k]` names category `k`.
pub fn heat_map(
    title: &str,
    x: (&str, f64, f64),
    y: (&str, f64, f64),
    cells: &[Vec<usize>],
    legend: &[&str],
) -> String {
    let mut out = String::new();
    header(&mut out, title);
    let nx = cells.len().max(1);
    let ny = cells.first().map_or(1, |c| c.len().max(1));
    let cw = (WIDTH - 2.0 * MARGIN) / nx as f64;
    let ch = (HEIGHT - 2.0 * MARGIN) / ny as f64;
    for (i, col) in cells.iter().enumerate() {
        for (j, &k) in col.iter().enumerate() {
            let _ = writeln!(
                out,
                r#"<rect x="{:.2}" y="{:.2}" width="{:.2}" height="{:.2}" fill="{}"/>"#,
                MARGIN + i as f64 * cw,
                HEIGHT - MARGIN - (j + 1) as f64 * ch,
                cw + 0.3,
                ch + 0.3,
                palette(k)
            );
        }
    }
    axes(&mut out, (x.1, x.2), (y.1, y.2), x.0, y.0);
    for (k, name) in legend.iter().enumerate() {
        let yy = MARGIN + 14.0 * k as f64;
        let _ = writeln!(
            out,
            r#"<rect x="{:.1}" y="{:.1}" width="10" height="10" fill="{}"/><text x="{:.1}" y="{:.1}">{}</text>"#,
            WIDTH - MARGIN + 4.0,
            yy - 9.0,
            palette(k),
            WIDTH - MARGIN + 18.0,
            yy,
            escape(name)
        );
    }
    out.push_str("</svg>\n");
    out
}
