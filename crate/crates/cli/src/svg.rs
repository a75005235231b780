//! Minimal SVG line/point/histogram charts.

use std::fmt::Write;

const WIDTH: f64 = 720.0;
const PANEL_HEIGHT: f64 = 300.0;
const MARGIN_LEFT: f64 = 80.0;
const MARGIN_RIGHT: f64 = 20.0;
const MARGIN_TOP: f64 = 36.0;
const MARGIN_BOTTOM: f64 = 48.0;
const PALETTE: [&str; 6] = ["#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#17becf"];

pub enum Style {
    Line,
    /// Markers with vertical error bars.
    Points,
    /// Step outline over bin edges; `x` holds the n+1 edges.
    Steps,
}

pub struct Series {
    pub label: String,
    pub style: Style,
    pub x: Vec<f64>,
    pub y: Vec<f64>,
    pub err: Option<Vec<f64>>,
}

pub struct Panel {
    pub y_label: String,
    pub series: Vec<Series>,
}

pub struct Figure {
    pub title: String,
    pub x_label: String,
    pub panels: Vec<Panel>,
}

fn escape(s: &str) -> String {
    s.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;").replace('"', "&quot;")
}

/// Tick positions at 1, 2 or 5 times a power of ten.
fn ticks(lo: f64, hi: f64) -> Vec<f64> {
    let span = hi - lo;
    let raw = span / 6.0;
    let mag = 10f64.powf(raw.log10().floor());
    let step = [1.0, 2.0, 5.0, 10.0].iter().map(|m| m * mag).find(|s| span / s <= 7.0).unwrap_or(10.0 * mag);
    let first = (lo / step).ceil() as i64;
    let last = (hi / step).floor() as i64;
    (first..=last).map(|k| k as f64 * step).collect()
}

fn fmt_tick(v: f64) -> String {
    if v == 0.0 {
        "0".into()
    } else if v.abs() >= 1e4 || v.abs() < 1e-3 {
        format!("{v:.1e}")
    } else {
        let s = format!("{v:.4}");
        s.trim_end_matches('0').trim_end_matches('.').to_string()
    }
}

fn padded(lo: f64, hi: f64) -> (f64, f64) {
    if !(hi > lo) {
        let d = if lo == 0.0 { 1.0 } else { 0.1 * lo.abs() };
        return (lo - d, hi + d);
    }
    let pad = 0.05 * (hi - lo);
    (lo - pad, hi + pad)
}

fn extent(values: impl Iterator<Item = f64>) -> Option<(f64, f64)> {
    values
        .filter(|v| v.is_finite())
        .fold(None, |acc, v| Some(acc.map_or((v, v), |(a, b): (f64, f64)| (a.min(v), b.max(v)))))
}

impl Figure {
    pub fn render(&self) -> String {
        let height = MARGIN_TOP + self.panels.len() as f64 * (PANEL_HEIGHT + MARGIN_BOTTOM);
        let mut out = String::new();
        let _ = writeln!(
            out,
            r#"<svg xmlns="http://www.w3.org/2000/svg" width="{WIDTH}" height="{height}" viewBox="0 0 {WIDTH} {height}" font-family="sans-serif" font-size="12">"#
        );
        let _ = writeln!(out, r#"<rect width="100%" height="100%" fill="white"/>"#);
        let _ = writeln!(
            out,
            r#"<text x="{}" y="22" text-anchor="middle" font-size="15">{}</text>"#,
            WIDTH / 2.0,
            escape(&self.title)
        );
        let all_x = self.panels.iter().flat_map(|p| p.series.iter().flat_map(|s| s.x.iter().copied()));
        let (x0, x1) = extent(all_x).map_or((0.0, 1.0), |(a, b)| padded(a, b));
        for (k, panel) in self.panels.iter().enumerate() {
            let top = MARGIN_TOP + k as f64 * (PANEL_HEIGHT + MARGIN_BOTTOM);
            self.panel(&mut out, panel, top, (x0, x1));
        }
        out.push_str("</svg>\n");
        out
    }

    fn panel(&self, out: &mut String, panel: &Panel, top: f64, (x0, x1): (f64, f64)) {
        let ys = panel.series.iter().flat_map(|s| {
            let e = s.err.clone().unwrap_or_else(|| vec![0.0; s.y.len()]);
            s.y.iter().zip(e).flat_map(|(y, e)| [y - e, y + e]).collect::<Vec<_>>()
        });
        let with_zero = panel.series.iter().any(|s| matches!(s.style, Style::Steps));
        let (mut y0, mut y1) = extent(ys).map_or((0.0, 1.0), |(a, b)| padded(a, b));
        if with_zero {
            y0 = y0.min(0.0);
            y1 = y1.max(0.0);
        }
        let (left, right) = (MARGIN_LEFT, WIDTH - MARGIN_RIGHT);
        let bottom = top + PANEL_HEIGHT;
        let sx = |x: f64| left + (x - x0) / (x1 - x0) * (right - left);
        let sy = |y: f64| bottom - (y - y0) / (y1 - y0) * (bottom - top);

        let _ = writeln!(
            out,
            r##"<rect x="{left}" y="{top}" width="{}" height="{}" fill="none" stroke="#333"/>"##,
            right - left,
            PANEL_HEIGHT
        );
        for t in ticks(x0, x1) {
            let x = sx(t);
            let _ = writeln!(out, r##"<line x1="{x:.2}" y1="{bottom}" x2="{x:.2}" y2="{:.2}" stroke="#333"/>"##, bottom + 5.0);
            let _ = writeln!(out, r#"<text x="{x:.2}" y="{:.2}" text-anchor="middle">{}</text>"#, bottom + 18.0, fmt_tick(t));
        }
        for t in ticks(y0, y1) {
            let y = sy(t);
            let _ = writeln!(out, r##"<line x1="{:.2}" y1="{y:.2}" x2="{left}" y2="{y:.2}" stroke="#333"/>"##, left - 5.0);
            let _ = writeln!(out, r##"<line x1="{left}" y1="{y:.2}" x2="{right}" y2="{y:.2}" stroke="#eee"/>"##);
            let _ = writeln!(out, r#"<text x="{:.2}" y="{:.2}" text-anchor="end">{}</text>"#, left - 8.0, y + 4.0, fmt_tick(t));
        }
        let _ = writeln!(
            out,
            r#"<text x="{}" y="{:.2}" text-anchor="middle">{}</text>"#,
            (left + right) / 2.0,
            bottom + 36.0,
            escape(&self.x_label)
        );
        let _ = writeln!(
            out,
            r#"<text x="18" y="{:.2}" text-anchor="middle" transform="rotate(-90 18 {:.2})">{}</text>"#,
            (top + bottom) / 2.0,
            (top + bottom) / 2.0,
            escape(&panel.y_label)
        );

        for (i, s) in panel.series.iter().enumerate() {
            let color = PALETTE[i % PALETTE.len()];
            match s.style {
                Style::Line => {
                    let pts: Vec<String> = s.x.iter().zip(&s.y).map(|(x, y)| format!("{:.2},{:.2}", sx(*x), sy(*y))).collect();
                    let _ = writeln!(out, r#"<polyline fill="none" stroke="{color}" stroke-width="2" points="{}"/>"#, pts.join(" "));
                }
                Style::Points => {
                    for (j, (x, y)) in s.x.iter().zip(&s.y).enumerate() {
                        let (px, py) = (sx(*x), sy(*y));
                        if let Some(e) = s.err.as_ref().map(|e| e[j]) {
                            let _ = writeln!(
                                out,
                                r#"<line x1="{px:.2}" y1="{:.2}" x2="{px:.2}" y2="{:.2}" stroke="{color}"/>"#,
                                sy(y - e),
                                sy(y + e)
                            );
                        }
                        let _ = writeln!(out, r#"<circle cx="{px:.2}" cy="{py:.2}" r="3" fill="{color}"/>"#);
                    }
                }
                Style::Steps => {
                    let mut d = format!("M{:.2},{:.2}", sx(s.x[0]), sy(0.0));
                    for (j, y) in s.y.iter().enumerate() {
                        let _ = write!(d, " L{:.2},{:.2} L{:.2},{:.2}", sx(s.x[j]), sy(*y), sx(s.x[j + 1]), sy(*y));
                    }
                    let _ = write!(d, " L{:.2},{:.2}", sx(s.x[s.y.len()]), sy(0.0));
                    let _ = writeln!(out, r#"<path d="{d}" fill="{color}" fill-opacity="0.25" stroke="{color}"/>"#);
                }
            }
            let ly = top + 16.0 + 16.0 * i as f64;
            let _ = writeln!(out, r#"<rect x="{:.2}" y="{:.2}" width="12" height="4" fill="{color}"/>"#, right - 170.0, ly - 6.0);
            let _ = writeln!(out, r#"<text x="{:.2}" y="{ly:.2}">{}</text>"#, right - 152.0, escape(&s.label));
        }
    }
}
