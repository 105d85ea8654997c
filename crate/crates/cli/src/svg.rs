//! Minimal SVG line and scatter plots.

use std::fmt::Write as _;

const WIDTH: f64 = 640.0;
const HEIGHT: f64 = 440.0;
const MARGIN: (f64, f64, f64, f64) = (70.0, 20.0, 40.0, 50.0); // left, right, top, bottom
const COLORS: [&str; 4] = ["#1f77b4", "#d62728", "#2ca02c", "#7f7f7f"];

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Scale {
    Linear,
    Log,
}

impl Scale {
    fn map(self, v: f64) -> f64 {
        match self {
            Scale::Linear => v,
            Scale::Log => v.log10(),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Style {
    Line,
    Dashed,
    Points,
}

#[derive(Clone, Debug)]
struct Series {
    label: String,
    style: Style,
    points: Vec<(f64, f64)>,
}

#[derive(Clone, Debug)]
pub struct Plot {
    title: String,
    x_label: String,
    y_label: String,
    x_scale: Scale,
    y_scale: Scale,
    series: Vec<Series>,
}

impl Plot {
    pub fn new(title: &str, x_label: &str, y_label: &str, x_scale: Scale, y_scale: Scale) -> Self {
        Plot {
            title: title.into(),
            x_label: x_label.into(),
            y_label: y_label.into(),
            x_scale,
            y_scale,
            series: Vec::new(),
        }
    }

    /// Points that cannot be drawn on the axes (non-finite, or `≤ 0` on a
    /// log axis) are dropped.
    pub fn series(mut self, label: &str, style: Style, points: impl IntoIterator<Item = (f64, f64)>) -> Self {
        let ok = |v: f64, s: Scale| v.is_finite() && (s == Scale::Linear || v > 0.0);
        let points = points
            .into_iter()
            .filter(|(x, y)| ok(*x, self.x_scale) && ok(*y, self.y_scale))
            .collect();
        self.series.push(Series {
            label: label.into(),
            style,
            points,
        });
        self
    }

    fn bounds(&self) -> Option<(f64, f64, f64, f64)> {
        let mut it = self
            .series
            .iter()
            .flat_map(|s| &s.points)
            .map(|(x, y)| (self.x_scale.map(*x), self.y_scale.map(*y)));
        let first = it.next()?;
        let (mut x0, mut x1, mut y0, mut y1) = (first.0, first.0, first.1, first.1);
        for (x, y) in it {
            x0 = x0.min(x);
            x1 = x1.max(x);
            y0 = y0.min(y);
            y1 = y1.max(y);
        }
        let pad = |a: f64, b: f64| if b > a { (b - a) * 0.03 } else { 0.5 };
        let (px, py) = (pad(x0, x1), pad(y0, y1));
        Some((x0 - px, x1 + px, y0 - py, y1 + py))
    }

    pub fn render(&self) -> String {
        let (l, r, t, b) = MARGIN;
        let (pw, ph) = (WIDTH - l - r, HEIGHT - t - b);
        let mut s = String::new();
        let _ = writeln!(
            s,
            r#"<svg xmlns="http://www.w3.org/2000/svg" width="{WIDTH}" height="{HEIGHT}" viewBox="0 0 {WIDTH} {HEIGHT}" font-family="sans-serif" font-size="12">"#
        );
        let _ = writeln!(s, r#"<rect width="100%" height="100%" fill="white"/>"#);
        let _ = writeln!(
            s,
            r#"<text x="{}" y="20" text-anchor="middle" font-size="14">{}</text>"#,
            WIDTH / 2.0,
            escape(&self.title)
        );
        let _ = writeln!(
            s,
            r#"<rect x="{l}" y="{t}" width="{pw}" height="{ph}" fill="none" stroke="black"/>"#
        );
        let Some((x0, x1, y0, y1)) = self.bounds() else {
            let _ = writeln!(
                s,
                r#"<text x="{}" y="{}" text-anchor="middle">no data</text></svg>"#,
                WIDTH / 2.0,
                HEIGHT / 2.0
            );
            return s;
        };
        let px = |x: f64| l + (self.x_scale.map(x) - x0) / (x1 - x0) * pw;
        let py = |y: f64| t + ph - (self.y_scale.map(y) - y0) / (y1 - y0) * ph;

        for tick in ticks(x0, x1) {
            let x = l + (tick - x0) / (x1 - x0) * pw;
            let _ = writeln!(
                s,
                r#"<line x1="{x:.2}" y1="{}" x2="{x:.2}" y2="{}" stroke="black"/>"#,
                t + ph,
                t + ph + 5.0
            );
            let _ = writeln!(
                s,
                r#"<text x="{x:.2}" y="{}" text-anchor="middle">{}</text>"#,
                t + ph + 18.0,
                label(tick, self.x_scale)
            );
        }
        for tick in ticks(y0, y1) {
            let y = t + ph - (tick - y0) / (y1 - y0) * ph;
            let _ = writeln!(
                s,
                r#"<line x1="{}" y1="{y:.2}" x2="{l}" y2="{y:.2}" stroke="black"/>"#,
                l - 5.0
            );
            let _ = writeln!(
                s,
                r#"<text x="{}" y="{:.2}" text-anchor="end">{}</text>"#,
                l - 8.0,
                y + 4.0,
                label(tick, self.y_scale)
            );
        }
        let _ = writeln!(
            s,
            r#"<text x="{}" y="{}" text-anchor="middle">{}</text>"#,
            l + pw / 2.0,
            HEIGHT - 10.0,
            escape(&self.x_label)
        );
        let _ = writeln!(
            s,
            r#"<text x="15" y="{}" text-anchor="middle" transform="rotate(-90 15 {})">{}</text>"#,
            t + ph / 2.0,
            t + ph / 2.0,
            escape(&self.y_label)
        );

        for (k, series) in self.series.iter().enumerate() {
            let color = COLORS[k % COLORS.len()];
            match series.style {
                Style::Points => {
                    for (x, y) in &series.points {
                        let _ = writeln!(
                            s,
                            r#"<circle cx="{:.2}" cy="{:.2}" r="2" fill="{color}"/>"#,
                            px(*x),
                            py(*y)
                        );
                    }
                }
                Style::Line | Style::Dashed if series.points.len() > 1 => {
                    let pts: Vec<String> = series
                        .points
                        .iter()
                        .map(|(x, y)| format!("{:.2},{:.2}", px(*x), py(*y)))
                        .collect();
                    let dash = if series.style == Style::Dashed {
                        r#" stroke-dasharray="6 4""#
                    } else {
                        ""
                    };
                    let _ = writeln!(
                        s,
                        r#"<polyline points="{}" fill="none" stroke="{color}" stroke-width="1.5"{dash}/>"#,
                        pts.join(" ")
                    );
                }
                _ => {}
            }
            let ly = t + 16.0 + 16.0 * k as f64;
            let _ = writeln!(
                s,
                r#"<rect x="{}" y="{}" width="10" height="10" fill="{color}"/>"#,
                l + pw - 170.0,
                ly - 9.0
            );
            let _ = writeln!(
                s,
                r#"<text x="{}" y="{ly}">{}</text>"#,
                l + pw - 155.0,
                escape(&series.label)
            );
        }
        s.push_str("</svg>\n");
        s
    }
}

fn escape(s: &str) -> String {
    s.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;")
}

/// About five round ticks in `[a, b]` (mapped coordinates).
fn ticks(a: f64, b: f64) -> Vec<f64> {
    let span = b - a;
    if !(span > 0.0) {
        return vec![a];
    }
    let raw = span / 5.0;
    let mag = 10f64.powf(raw.log10().floor());
    let step = [1.0, 2.0, 5.0, 10.0]
        .into_iter()
        .map(|m| m * mag)
        .find(|s| *s >= raw)
        .unwrap_or(10.0 * mag);
    let mut out = Vec::new();
    let mut v = (a / step).ceil() * step;
    while v <= b + 1e-9 * step {
        out.push(if v.abs() < 1e-12 * step { 0.0 } else { v });
        v += step;
    }
    out
}

fn label(v: f64, scale: Scale) -> String {
    match scale {
        Scale::Linear => format!("{}", (v * 1e6).round() / 1e6),
        Scale::Log if v.fract() == 0.0 => format!("1e{}", v as i64),
        Scale::Log => format!("{:.3}", 10f64.powf(v)),
    }
}
