//! Minimal SVG writers: multi-series line plots and a rasterized heatmap.

use std::fmt::Write as _;

const WIDTH: f64 = 640.0;
const HEIGHT: f64 = 400.0;
const MARGIN_L: f64 = 70.0;
const MARGIN_R: f64 = 20.0;
const MARGIN_T: f64 = 30.0;
const MARGIN_B: f64 = 50.0;
const COLORS: &[&str] = &["#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#8c564b"];

pub struct Series<'a> {
    pub label: String,
    pub x: &'a [f64],
    pub y: &'a [f64],
}

pub struct Plot<'a> {
    pub title: &'a str,
    pub x_label: &'a str,
    pub y_label: &'a str,
    pub series: Vec<Series<'a>>,
    /// Clamps the y axis from below, e.g. to keep deep dB notches readable.
    pub y_floor: Option<f64>,
}

fn range(values: impl Iterator<Item = f64>) -> (f64, f64) {
    let (lo, hi) = values
        .filter(|v| v.is_finite())
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), v| (a.min(v), b.max(v)));
    if !lo.is_finite() {
        return (0.0, 1.0);
    }
    if hi - lo < 1e-300 {
        return (lo - 0.5, hi + 0.5);
    }
    (lo, hi)
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
    let _ = writeln!(
        out,
        r#"<text x="{}" y="18" text-anchor="middle" font-size="14">{}</text>"#,
        WIDTH / 2.0,
        escape(title)
    );
}

fn axes(out: &mut String, x: (f64, f64), y: (f64, f64), x_label: &str, y_label: &str) {
    let (x0, x1) = (MARGIN_L, WIDTH - MARGIN_R);
    let (y0, y1) = (HEIGHT - MARGIN_B, MARGIN_T);
    let _ = writeln!(
        out,
        r#"<rect x="{x0}" y="{y1}" width="{}" height="{}" fill="none" stroke="black"/>"#,
        x1 - x0,
        y0 - y1
    );
    for k in 0..=4 {
        let s = k as f64 / 4.0;
        let px = x0 + s * (x1 - x0);
        let py = y0 - s * (y0 - y1);
        let _ = writeln!(
            out,
            r#"<text x="{px:.1}" y="{:.1}" text-anchor="middle">{}</text>"#,
            y0 + 16.0,
            tick(x.0 + s * (x.1 - x.0))
        );
        let _ = writeln!(
            out,
            r#"<text x="{:.1}" y="{:.1}" text-anchor="end">{}</text>"#,
            x0 - 6.0,
            py + 4.0,
            tick(y.0 + s * (y.1 - y.0))
        );
    }
    let _ = writeln!(
        out,
        r#"<text x="{:.1}" y="{:.1}" text-anchor="middle">{}</text>"#,
        (x0 + x1) / 2.0,
        HEIGHT - 12.0,
        escape(x_label)
    );
    let _ = writeln!(
        out,
        r#"<text x="16" y="{:.1}" text-anchor="middle" transform="rotate(-90 16 {:.1})">{}</text>"#,
        (y0 + y1) / 2.0,
        (y0 + y1) / 2.0,
        escape(y_label)
    );
}

fn tick(v: f64) -> String {
    if v != 0.0 && (v.abs() >= 1e4 || v.abs() < 1e-2) {
        format!("{v:.2e}")
    } else {
        format!("{v:.2}")
    }
}

pub fn line_plot(plot: &Plot) -> String {
    let xr = range(plot.series.iter().flat_map(|s| s.x.iter().copied()));
    let mut yr = range(plot.series.iter().flat_map(|s| s.y.iter().copied()));
    if let Some(floor) = plot.y_floor {
        yr.0 = yr.0.max(floor);
        if yr.1 <= yr.0 {
            yr.1 = yr.0 + 1.0;
        }
    }
    let mut out = String::new();
    header(&mut out, plot.title);
    axes(&mut out, xr, yr, plot.x_label, plot.y_label);
    let sx = |x: f64| MARGIN_L + (x - xr.0) / (xr.1 - xr.0) * (WIDTH - MARGIN_L - MARGIN_R);
    let sy = |y: f64| {
        let y = y.clamp(yr.0, yr.1);
        HEIGHT - MARGIN_B - (y - yr.0) / (yr.1 - yr.0) * (HEIGHT - MARGIN_B - MARGIN_T)
    };
    for (n, s) in plot.series.iter().enumerate() {
        let color = COLORS[n % COLORS.len()];
        let mut points = String::new();
        for (x, y) in s.x.iter().zip(s.y) {
            if x.is_finite() && y.is_finite() {
                let _ = write!(points, "{:.2},{:.2} ", sx(*x), sy(*y));
            }
        }
        let _ = writeln!(
            out,
            r#"<polyline fill="none" stroke="{color}" stroke-width="1.5" points="{}"/>"#,
            points.trim_end()
        );
        let ly = MARGIN_T + 14.0 + 16.0 * n as f64;
        let lx = WIDTH - MARGIN_R - 150.0;
        let _ = writeln!(
            out,
            r#"<line x1="{lx}" y1="{:.1}" x2="{}" y2="{:.1}" stroke="{color}" stroke-width="2"/><text x="{}" y="{ly:.1}">{}</text>"#,
            ly - 4.0,
            lx + 20.0,
            ly - 4.0,
            lx + 26.0,
            escape(&s.label)
        );
    }
    out.push_str("</svg>\n");
    out
}

/// `values[row][col]` drawn with rows along x (e.g. time) and columns along y
/// (e.g. lattice site), in a white-to-blue scale normalized to the maximum.
pub fn heatmap(title: &str, x: &[f64], y: &[f64], values: &[Vec<f64>], x_label: &str, y_label: &str) -> String {
    let mut out = String::new();
    header(&mut out, title);
    let xr = range(x.iter().copied());
    let yr = range(y.iter().copied());
    let max = values.iter().flatten().copied().filter(|v| v.is_finite()).fold(0.0, f64::max);
    let (pw, ph) = (WIDTH - MARGIN_L - MARGIN_R, HEIGHT - MARGIN_T - MARGIN_B);
    let cw = pw / x.len().max(1) as f64;
    let ch = ph / y.len().max(1) as f64;
    for (i, row) in values.iter().enumerate() {
        for (j, v) in row.iter().enumerate() {
            let s = if max > 0.0 { (v / max).clamp(0.0, 1.0) } else { 0.0 };
            if s < 1e-3 {
                continue;
            }
            let shade = |full: f64| (255.0 - s * (255.0 - full)).round() as u8;
            let _ = writeln!(
                out,
                r##"<rect x="{:.2}" y="{:.2}" width="{:.2}" height="{:.2}" fill="#{:02x}{:02x}{:02x}"/>"##,
                MARGIN_L + i as f64 * cw,
                HEIGHT - MARGIN_B - (j + 1) as f64 * ch,
                cw + 0.05,
                ch + 0.05,
                shade(8.0),
                shade(48.0),
                shade(107.0)
            );
        }
    }
    axes(&mut out, xr, yr, x_label, y_label);
    out.push_str("</svg>\n");
    out
}
