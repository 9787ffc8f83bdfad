//! Deterministic CSV and SVG emission.
//!
//! CSV contract: fixed column order, one header row, LF line endings, '.'
//! decimal separator, 12 significant digits. Provenance lines are '#'
//! comments above the header.

use crate::geom::Vec2;
use std::fmt::Write as _;

/// 12 significant digits, scientific, locale-independent.
pub fn fmt_sig(x: f64) -> String {
    if x == 0.0 {
        return "0.00000000000e0".to_string();
    }
    if x.is_nan() {
        return "nan".to_string();
    }
    if x.is_infinite() {
        return if x > 0.0 { "inf" } else { "-inf" }.to_string();
    }
    format!("{:.11e}", x)
}

/// Row-oriented CSV builder.
#[derive(Debug, Default)]
pub struct Csv {
    buf: String,
}

impl Csv {
    pub fn new() -> Self {
        Csv { buf: String::new() }
    }

    pub fn comment(&mut self, text: &str) {
        let _ = writeln!(self.buf, "# {text}");
    }

    pub fn header(&mut self, cols: &[&str]) {
        let _ = writeln!(self.buf, "{}", cols.join(","));
    }

    pub fn row(&mut self, cells: &[String]) {
        let _ = writeln!(self.buf, "{}", cells.join(","));
    }

    pub fn finish(self) -> String {
        self.buf
    }
}

/// Minimal self-contained SVG canvas for the experiment plots.
pub struct Svg {
    width: f64,
    height: f64,
    body: String,
}

impl Svg {
    pub fn new(width: f64, height: f64) -> Self {
        Svg {
            width,
            height,
            body: String::new(),
        }
    }

    pub fn line(&mut self, a: (f64, f64), b: (f64, f64), stroke: &str, width: f64) {
        let _ = writeln!(
            self.body,
            r#"<line x1="{:.2}" y1="{:.2}" x2="{:.2}" y2="{:.2}" stroke="{}" stroke-width="{}"/>"#,
            a.0, a.1, b.0, b.1, stroke, width
        );
    }

    pub fn circle(&mut self, c: (f64, f64), r: f64, fill: &str) {
        let _ = writeln!(
            self.body,
            r#"<circle cx="{:.2}" cy="{:.2}" r="{:.2}" fill="{}"/>"#,
            c.0, c.1, r, fill
        );
    }

    pub fn circle_outline(&mut self, c: (f64, f64), r: f64, stroke: &str, width: f64) {
        let _ = writeln!(
            self.body,
            r#"<circle cx="{:.2}" cy="{:.2}" r="{:.2}" fill="none" stroke="{}" stroke-width="{}"/>"#,
            c.0, c.1, r, stroke, width
        );
    }

    pub fn polyline(&mut self, pts: &[(f64, f64)], stroke: &str, width: f64) {
        let mut d = String::new();
        for (x, y) in pts {
            let _ = write!(d, "{:.2},{:.2} ", x, y);
        }
        let _ = writeln!(
            self.body,
            r#"<polyline points="{}" fill="none" stroke="{}" stroke-width="{}"/>"#,
            d.trim_end(),
            stroke,
            width
        );
    }

    pub fn text(&mut self, at: (f64, f64), size: f64, content: &str) {
        let _ = writeln!(
            self.body,
            r#"<text x="{:.2}" y="{:.2}" font-size="{}" font-family="monospace">{}</text>"#,
            at.0, at.1, size, content
        );
    }

    pub fn finish(self) -> String {
        format!(
            "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"{}\" height=\"{}\" viewBox=\"0 0 {} {}\">\n<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n{}</svg>\n",
            self.width, self.height, self.width, self.height, self.body
        )
    }
}

/// Log-log scatter with overlaid reference curves for the growth run.
pub fn growth_svg(points: &[(f64, f64)], upper_ref: &[(f64, f64)], lower_ref: &[(f64, f64)]) -> String {
    let (w, h) = (640.0, 480.0);
    let margin = 60.0;
    let all: Vec<(f64, f64)> = points
        .iter()
        .chain(upper_ref.iter())
        .chain(lower_ref.iter())
        .copied()
        .collect();
    let (mut x0, mut x1, mut y0, mut y1) = (f64::MAX, f64::MIN, f64::MAX, f64::MIN);
    for &(x, y) in &all {
        x0 = x0.min(x.ln());
        x1 = x1.max(x.ln());
        y0 = y0.min(y.ln());
        y1 = y1.max(y.ln());
    }
    let to_px = |x: f64, y: f64| {
        (
            margin + (x.ln() - x0) / (x1 - x0) * (w - 2.0 * margin),
            h - margin - (y.ln() - y0) / (y1 - y0) * (h - 2.0 * margin),
        )
    };
    let mut svg = Svg::new(w, h);
    svg.line((margin, h - margin), (w - margin, h - margin), "black", 1.0);
    svg.line((margin, margin), (margin, h - margin), "black", 1.0);
    svg.text((w / 2.0 - 20.0, h - 18.0), 12.0, "log s");
    svg.text((10.0, 24.0), 12.0, "log L");
    let upper: Vec<(f64, f64)> = upper_ref.iter().map(|&(x, y)| to_px(x, y)).collect();
    svg.polyline(&upper, "#c03030", 1.5);
    let lower: Vec<(f64, f64)> = lower_ref.iter().map(|&(x, y)| to_px(x, y)).collect();
    svg.polyline(&lower, "#3060c0", 1.5);
    for &(x, y) in points {
        svg.circle(to_px(x, y), 3.0, "#202020");
    }
    svg.text(
        (w - margin - 220.0, margin),
        11.0,
        "red: sqrt((s+1)ln(s+2)), blue: sqrt(s)/ln(s+2)",
    );
    svg.finish()
}

/// Strip picture: domain circles, strip edges, punctures, Voronoi-colored
/// grid nodes and the selected parallel curve.
pub struct StripPicture {
    pub outer: (Vec2, f64),
    pub inner: Vec<(Vec2, f64)>,
    pub strip_edges: Vec<Vec<Vec2>>,
    pub selected: Vec<Vec2>,
    pub punctures: Vec<Vec2>,
    pub nodes: Vec<(Vec2, Option<usize>)>,
}

pub fn strip_svg(picture: &StripPicture) -> String {
    let (w, h) = (640.0f64, 640.0f64);
    let c = picture.outer.0;
    let r = picture.outer.1 * 1.05;
    let scale = (w.min(h) - 20.0) / (2.0 * r);
    let to_px = |p: Vec2| ((p.x - c.x + r) * scale + 10.0, (c.y + r - p.y) * scale + 10.0);
    let mut svg = Svg::new(w, h);
    svg.circle_outline(to_px(c), picture.outer.1 * scale, "black", 1.5);
    for &(ic, ir) in &picture.inner {
        svg.circle_outline(to_px(ic), ir * scale, "black", 1.0);
    }
    let palette = [
        "#e41a1c", "#377eb8", "#4daf4a", "#984ea3", "#ff7f00", "#a65628", "#f781bf", "#999999",
    ];
    for &(p, cell) in &picture.nodes {
        let color = match cell {
            Some(i) => palette[i % palette.len()],
            None => "#bbbbbb",
        };
        svg.circle(to_px(p), 1.2, color);
    }
    for edge in &picture.strip_edges {
        let pts: Vec<(f64, f64)> = edge.iter().map(|&p| to_px(p)).collect();
        svg.polyline(&pts, "#888888", 0.8);
    }
    let sel: Vec<(f64, f64)> = picture.selected.iter().map(|&p| to_px(p)).collect();
    svg.polyline(&sel, "#000000", 1.6);
    for &p in &picture.punctures {
        let (x, y) = to_px(p);
        svg.line((x - 3.0, y - 3.0), (x + 3.0, y + 3.0), "#d02020", 1.2);
        svg.line((x - 3.0, y + 3.0), (x + 3.0, y - 3.0), "#d02020", 1.2);
    }
    svg.finish()
}
