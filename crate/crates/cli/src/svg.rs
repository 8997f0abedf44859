//! Minimal SVG writer and a plotting panel with linear axes.

use std::fmt::Write;

pub const GRAY: &str = "#bdbdbd";
pub const DARK: &str = "#222222";
pub const RED: &str = "#d62728";
pub const GREEN: &str = "#2ca02c";
pub const PALETTE: [&str; 6] = ["#1f77b4", "#d62728", "#2ca02c", "#ff7f0e", "#9467bd", "#8c564b"];

fn esc(s: &str) -> String {
    s.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;").replace('"', "&quot;")
}

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

    pub fn line(&mut self, x1: f64, y1: f64, x2: f64, y2: f64, stroke: &str, width: f64) {
        let _ = writeln!(
            self.body,
            r#"<line x1="{x1:.2}" y1="{y1:.2}" x2="{x2:.2}" y2="{y2:.2}" stroke="{stroke}" stroke-width="{width:.2}"/>"#
        );
    }

    pub fn dashed(&mut self, x1: f64, y1: f64, x2: f64, y2: f64, stroke: &str) {
        let _ = writeln!(
            self.body,
            r#"<line x1="{x1:.2}" y1="{y1:.2}" x2="{x2:.2}" y2="{y2:.2}" stroke="{stroke}" stroke-width="1" stroke-dasharray="5,4"/>"#
        );
    }

    pub fn rect(&mut self, x: f64, y: f64, w: f64, h: f64, fill: &str, stroke: Option<&str>) {
        let stroke = stroke.map_or(String::new(), |s| format!(r#" stroke="{s}""#));
        let _ = writeln!(
            self.body,
            r#"<rect x="{x:.2}" y="{y:.2}" width="{w:.2}" height="{h:.2}" fill="{fill}"{stroke}/>"#
        );
    }

    pub fn circle(&mut self, cx: f64, cy: f64, r: f64, fill: &str, stroke: &str) {
        let _ = writeln!(
            self.body,
            r#"<circle cx="{cx:.2}" cy="{cy:.2}" r="{r:.2}" fill="{fill}" stroke="{stroke}"/>"#
        );
    }

    pub fn polyline(&mut self, pts: &[(f64, f64)], stroke: &str, width: f64) {
        if pts.len() < 2 {
            return;
        }
        let _ = writeln!(
            self.body,
            r#"<polyline points="{}" fill="none" stroke="{stroke}" stroke-width="{width:.2}"/>"#,
            points(pts)
        );
    }

    pub fn polygon(&mut self, pts: &[(f64, f64)], fill: &str, opacity: f64) {
        if pts.len() < 3 {
            return;
        }
        let _ = writeln!(
            self.body,
            r#"<polygon points="{}" fill="{fill}" fill-opacity="{opacity:.2}" stroke="none"/>"#,
            points(pts)
        );
    }

    /// `anchor` is start, middle or end.
    pub fn text(&mut self, x: f64, y: f64, s: &str, size: f64, anchor: &str) {
        let _ = writeln!(
            self.body,
            r#"<text x="{x:.2}" y="{y:.2}" font-family="sans-serif" font-size="{size:.1}" text-anchor="{anchor}">{}</text>"#,
            esc(s)
        );
    }

    pub fn text_rotated(&mut self, x: f64, y: f64, s: &str, size: f64) {
        let _ = writeln!(
            self.body,
            r#"<text x="{x:.2}" y="{y:.2}" font-family="sans-serif" font-size="{size:.1}" text-anchor="middle" transform="rotate(-90 {x:.2} {y:.2})">{}</text>"#,
            esc(s)
        );
    }

    pub fn finish(self) -> String {
        format!(
            "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"{w}\" height=\"{h}\" viewBox=\"0 0 {w} {h}\">\n\
             <rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n{body}</svg>\n",
            w = self.width,
            h = self.height,
            body = self.body
        )
    }
}

fn points(pts: &[(f64, f64)]) -> String {
    pts.iter()
        .map(|(x, y)| format!("{x:.2},{y:.2}"))
        .collect::<Vec<_>>()
        .join(" ")
}

/// Rectangle of the canvas mapped to a data range.
#[derive(Debug, Clone, Copy)]
pub struct Panel {
    pub left: f64,
    pub top: f64,
    pub width: f64,
    pub height: f64,
    pub x_range: (f64, f64),
    pub y_range: (f64, f64),
}

impl Panel {
    pub fn x(&self, v: f64) -> f64 {
        let (a, b) = self.x_range;
        self.left + (v - a) / (b - a) * self.width
    }

    pub fn y(&self, v: f64) -> f64 {
        let (a, b) = self.y_range;
        self.top + self.height - (v - a) / (b - a) * self.height
    }

    pub fn frame(&self, svg: &mut Svg) {
        svg.rect(self.left, self.top, self.width, self.height, "none", Some(DARK));
    }

    pub fn y_ticks(&self, svg: &mut Svg, n: usize) {
        for v in ticks(self.y_range, n) {
            let y = self.y(v);
            svg.line(self.left - 4.0, y, self.left, y, DARK, 1.0);
            svg.text(self.left - 6.0, y + 4.0, &tick_label(v), 10.0, "end");
        }
    }

    pub fn x_ticks(&self, svg: &mut Svg, n: usize) {
        for v in ticks(self.x_range, n) {
            let x = self.x(v);
            let bottom = self.top + self.height;
            svg.line(x, bottom, x, bottom + 4.0, DARK, 1.0);
            svg.text(x, bottom + 16.0, &tick_label(v), 10.0, "middle");
        }
    }

    /// Ticks at category positions `0..labels.len()`.
    pub fn x_categories(&self, svg: &mut Svg, labels: &[String]) {
        let bottom = self.top + self.height;
        for (k, l) in labels.iter().enumerate() {
            let x = self.x(k as f64);
            svg.line(x, bottom, x, bottom + 4.0, DARK, 1.0);
            svg.text(x, bottom + 16.0, l, 10.0, "middle");
        }
    }

    pub fn hline(&self, svg: &mut Svg, v: f64, stroke: &str, dashed: bool) {
        let y = self.y(v);
        if dashed {
            svg.dashed(self.left, y, self.left + self.width, y, stroke);
        } else {
            svg.line(self.left, y, self.left + self.width, y, stroke, 1.0);
        }
    }

    pub fn vline(&self, svg: &mut Svg, v: f64, stroke: &str) {
        let x = self.x(v);
        svg.line(x, self.top, x, self.top + self.height, stroke, 1.0);
    }
}

/// Roughly `n` round tick values inside `range`.
pub fn ticks(range: (f64, f64), n: usize) -> Vec<f64> {
    let (a, b) = if range.0 <= range.1 { range } else { (range.1, range.0) };
    if !(b > a) || n == 0 {
        return vec![a];
    }
    let raw = (b - a) / n as f64;
    let mag = 10f64.powf(raw.log10().floor());
    let step = [1.0, 2.0, 2.5, 5.0, 10.0]
        .iter()
        .map(|m| m * mag)
        .find(|s| *s >= raw)
        .unwrap_or(10.0 * mag);
    let first = (a / step - 1e-9).ceil() as i64;
    let last = (b / step + 1e-9).floor() as i64;
    (first..=last).map(|k| k as f64 * step).collect()
}

fn tick_label(v: f64) -> String {
    let s = format!("{v:.3}");
    let s = s.trim_end_matches('0').trim_end_matches('.');
    if s == "-0" {
        "0".into()
    } else {
        s.into()
    }
}

/// Padded `(min, max)` of finite values; `(0, 1)` when there are none.
pub fn extent(values: impl IntoIterator<Item = f64>) -> (f64, f64) {
    let (mut lo, mut hi) = (f64::INFINITY, f64::NEG_INFINITY);
    for v in values.into_iter().filter(|v| v.is_finite()) {
        lo = lo.min(v);
        hi = hi.max(v);
    }
    if !lo.is_finite() {
        return (0.0, 1.0);
    }
    if hi - lo < 1e-12 {
        return (lo - 0.5, hi + 0.5);
    }
    let pad = 0.05 * (hi - lo);
    (lo - pad, hi + pad)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn tick_values_are_round() {
        let labels = |r, n| ticks(r, n).into_iter().map(tick_label).collect::<Vec<_>>();
        assert_eq!(labels((0.0, 1.0), 5), ["0", "0.2", "0.4", "0.6", "0.8", "1"]);
        assert_eq!(labels((-0.3, 0.3), 3), ["-0.2", "0", "0.2"]);
        assert_eq!(labels((1.0, 0.0), 5), labels((0.0, 1.0), 5));
    }

    #[test]
    fn escapes_text() {
        let mut s = Svg::new(10.0, 10.0);
        s.text(0.0, 0.0, "a<b&c", 10.0, "start");
        assert!(s.finish().contains("a&lt;b&amp;c"));
    }
}
