//! Minimal SVG 1.1 writer for scatter and line plots.

use std::fmt::Write as _;

#[derive(Clone, Copy, Debug, PartialEq)]
pub enum Style {
    Dots { radius: f64 },
    Line { dashed: bool },
    Cross { size: f64 },
}

#[derive(Clone, Debug, PartialEq)]
pub struct Series {
    pub label: String,
    pub color: String,
    pub style: Style,
    pub points: Vec<(f64, f64)>,
}

impl Series {
    pub fn dots(label: &str, color: &str, points: Vec<(f64, f64)>) -> Self {
        Self { label: label.into(), color: color.into(), style: Style::Dots { radius: 1.6 }, points }
    }

    pub fn line(label: &str, color: &str, dashed: bool, points: Vec<(f64, f64)>) -> Self {
        Self { label: label.into(), color: color.into(), style: Style::Line { dashed }, points }
    }

    pub fn cross(label: &str, color: &str, at: (f64, f64)) -> Self {
        Self { label: label.into(), color: color.into(), style: Style::Cross { size: 6.0 }, points: vec![at] }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct Plot {
    pub title: String,
    pub x_label: String,
    pub y_label: String,
    pub log_x: bool,
    pub log_y: bool,
    pub width: f64,
    pub height: f64,
    pub series: Vec<Series>,
}

const MARGIN_L: f64 = 60.0;
const MARGIN_R: f64 = 20.0;
const MARGIN_T: f64 = 30.0;
const MARGIN_B: f64 = 45.0;

fn fmt_num(v: f64) -> String {
    if v == 0.0 {
        "0".into()
    } else if v.abs() >= 1e4 || v.abs() < 1e-2 {
        format!("{v:.1e}")
    } else {
        let s = format!("{v:.3}");
        s.trim_end_matches('0').trim_end_matches('.').to_string()
    }
}

fn escape(s: &str) -> String {
    s.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;")
}

impl Plot {
    pub fn new(title: &str, x_label: &str, y_label: &str) -> Self {
        Self {
            title: title.into(),
            x_label: x_label.into(),
            y_label: y_label.into(),
            log_x: false,
            log_y: false,
            width: 420.0,
            height: 360.0,
            series: Vec::new(),
        }
    }

    pub fn log_log(mut self) -> Self {
        self.log_x = true;
        self.log_y = true;
        self
    }

    pub fn with(mut self, s: Series) -> Self {
        self.series.push(s);
        self
    }

    fn tx(&self, v: f64, log: bool) -> Option<f64> {
        if log {
            (v > 0.0).then(|| v.log10())
        } else {
            v.is_finite().then_some(v)
        }
    }

    fn range(&self, axis: usize, log: bool) -> (f64, f64) {
        let vals = self
            .series
            .iter()
            .flat_map(|s| s.points.iter())
            .filter_map(|p| self.tx(if axis == 0 { p.0 } else { p.1 }, log));
        let (lo, hi) = vals.fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), v| (a.min(v), b.max(v)));
        if !lo.is_finite() {
            return (0.0, 1.0);
        }
        if hi - lo < 1e-12 {
            return (lo - 0.5, hi + 0.5);
        }
        let pad = 0.04 * (hi - lo);
        (lo - pad, hi + pad)
    }

    /// Renders the plot as a `<g>` group translated to (`ox`, `oy`).
    fn render_group(&self, out: &mut String, ox: f64, oy: f64) {
        let (x0, x1) = self.range(0, self.log_x);
        let (y0, y1) = self.range(1, self.log_y);
        let pw = self.width - MARGIN_L - MARGIN_R;
        let ph = self.height - MARGIN_T - MARGIN_B;
        let sx = |v: f64| MARGIN_L + (v - x0) / (x1 - x0) * pw;
        let sy = |v: f64| MARGIN_T + ph - (v - y0) / (y1 - y0) * ph;
        let _ = writeln!(out, r#"<g transform="translate({ox},{oy})" font-family="sans-serif" font-size="11">"#);
        let _ = writeln!(
            out,
            r##"<rect x="{MARGIN_L}" y="{MARGIN_T}" width="{pw}" height="{ph}" fill="none" stroke="#333"/>"##
        );
        let _ = writeln!(
            out,
            r#"<text x="{}" y="18" text-anchor="middle" font-size="13">{}</text>"#,
            MARGIN_L + pw / 2.0,
            escape(&self.title)
        );
        for i in 0..=4 {
            let f = i as f64 / 4.0;
            let (vx, vy) = (x0 + f * (x1 - x0), y0 + f * (y1 - y0));
            let lx = if self.log_x { 10f64.powf(vx) } else { vx };
            let ly = if self.log_y { 10f64.powf(vy) } else { vy };
            let _ = writeln!(
                out,
                r#"<text x="{:.2}" y="{:.2}" text-anchor="middle">{}</text>"#,
                sx(vx),
                MARGIN_T + ph + 15.0,
                fmt_num(lx)
            );
            let _ = writeln!(out, r#"<text x="{:.2}" y="{:.2}" text-anchor="end">{}</text>"#, MARGIN_L - 4.0, sy(vy) + 4.0, fmt_num(ly));
        }
        let _ = writeln!(
            out,
            r#"<text x="{:.2}" y="{:.2}" text-anchor="middle">{}</text>"#,
            MARGIN_L + pw / 2.0,
            self.height - 8.0,
            escape(&self.x_label)
        );
        let _ = writeln!(
            out,
            r#"<text x="14" y="{:.2}" text-anchor="middle" transform="rotate(-90 14 {:.2})">{}</text>"#,
            MARGIN_T + ph / 2.0,
            MARGIN_T + ph / 2.0,
            escape(&self.y_label)
        );
        for s in &self.series {
            let pts: Vec<(f64, f64)> = s
                .points
                .iter()
                .filter_map(|p| Some((sx(self.tx(p.0, self.log_x)?), sy(self.tx(p.1, self.log_y)?))))
                .collect();
            match s.style {
                Style::Dots { radius } => {
                    let _ = writeln!(out, r#"<g fill="{}">"#, s.color);
                    for (x, y) in pts {
                        let _ = writeln!(out, r#"<circle cx="{x:.2}" cy="{y:.2}" r="{radius}"/>"#);
                    }
                    out.push_str("</g>\n");
                }
                Style::Line { dashed } => {
                    let d: Vec<String> = pts.iter().map(|(x, y)| format!("{x:.2},{y:.2}")).collect();
                    let dash = if dashed { r#" stroke-dasharray="5,4""# } else { "" };
                    let _ = writeln!(
                        out,
                        r#"<polyline points="{}" fill="none" stroke="{}" stroke-width="1.5"{dash}/>"#,
                        d.join(" "),
                        s.color
                    );
                }
                Style::Cross { size } => {
                    for (x, y) in pts {
                        let _ = writeln!(
                            out,
                            r#"<path d="M{:.2},{:.2}L{:.2},{:.2}M{:.2},{:.2}L{:.2},{:.2}" stroke="{}" stroke-width="2.5"/>"#,
                            x - size,
                            y - size,
                            x + size,
                            y + size,
                            x - size,
                            y + size,
                            x + size,
                            y - size,
                            s.color
                        );
                    }
                }
            }
        }
        let mut ly = MARGIN_T + 12.0;
        for s in self.series.iter().filter(|s| !s.label.is_empty()) {
            let _ = writeln!(
                out,
                r#"<rect x="{:.2}" y="{:.2}" width="10" height="10" fill="{}"/><text x="{:.2}" y="{:.2}">{}</text>"#,
                MARGIN_L + pw - 110.0,
                ly - 9.0,
                s.color,
                MARGIN_L + pw - 96.0,
                ly,
                escape(&s.label)
            );
            ly += 14.0;
        }
        out.push_str("</g>\n");
    }

    pub fn to_svg(&self) -> String {
        panels(std::slice::from_ref(self), 1)
    }
}

/// Lays out plots on a grid with `cols` columns.
pub fn panels(plots: &[Plot], cols: usize) -> String {
    let cols = cols.max(1);
    let rows = plots.len().div_ceil(cols).max(1);
    let w = plots.iter().map(|p| p.width).fold(0.0, f64::max);
    let h = plots.iter().map(|p| p.height).fold(0.0, f64::max);
    let mut out = String::new();
    let _ = writeln!(out, r#"<?xml version="1.0" encoding="UTF-8"?>"#);
    let _ = writeln!(
        out,
        r#"<svg xmlns="http://www.w3.org/2000/svg" version="1.1" width="{}" height="{}" viewBox="0 0 {} {}">"#,
        w * cols as f64,
        h * rows as f64,
        w * cols as f64,
        h * rows as f64
    );
    let _ = writeln!(out, r#"<rect width="100%" height="100%" fill="white"/>"#);
    for (i, p) in plots.iter().enumerate() {
        p.render_group(&mut out, (i % cols) as f64 * w, (i / cols) as f64 * h);
    }
    out.push_str("</svg>\n");
    out
}
