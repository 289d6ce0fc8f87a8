//! Minimal deterministic SVG line charts.

use std::fmt::Write;

pub const WIDTH: f64 = 800.0;
pub const HEIGHT: f64 = 600.0;
const LEFT: f64 = 80.0;
const RIGHT: f64 = 150.0;
const TOP: f64 = 40.0;
const BOTTOM: f64 = 60.0;

/// Data-to-pixel mapping for the plot frame.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Frame {
    pub xmin: f64,
    pub xmax: f64,
    pub ymin: f64,
    pub ymax: f64,
}

impl Frame {
    /// Bounds of `points` padded by 5% on each side.
    pub fn around(points: impl IntoIterator<Item = (f64, f64)>) -> Frame {
        let mut f = Frame {
            xmin: f64::INFINITY,
            xmax: f64::NEG_INFINITY,
            ymin: f64::INFINITY,
            ymax: f64::NEG_INFINITY,
        };
        for (x, y) in points {
            if x.is_finite() && y.is_finite() {
                f.xmin = f.xmin.min(x);
                f.xmax = f.xmax.max(x);
                f.ymin = f.ymin.min(y);
                f.ymax = f.ymax.max(y);
            }
        }
        if !f.xmin.is_finite() {
            return Frame {
                xmin: 0.0,
                xmax: 1.0,
                ymin: 0.0,
                ymax: 1.0,
            };
        }
        let pad = |lo: f64, hi: f64| {
            let span = hi - lo;
            let p = if span > 0.0 { 0.05 * span } else { 0.5 * lo.abs().max(1.0) };
            (lo - p, hi + p)
        };
        (f.xmin, f.xmax) = pad(f.xmin, f.xmax);
        (f.ymin, f.ymax) = pad(f.ymin, f.ymax);
        f
    }

    /// Widens one axis so a data unit is the same length on both.
    pub fn equal_aspect(mut self) -> Frame {
        let (pw, ph) = plot_size();
        let sx = (self.xmax - self.xmin) / pw;
        let sy = (self.ymax - self.ymin) / ph;
        if sx > sy {
            let mid = 0.5 * (self.ymin + self.ymax);
            let half = 0.5 * sx * ph;
            (self.ymin, self.ymax) = (mid - half, mid + half);
        } else {
            let mid = 0.5 * (self.xmin + self.xmax);
            let half = 0.5 * sy * pw;
            (self.xmin, self.xmax) = (mid - half, mid + half);
        }
        self
    }

    pub fn px(&self, x: f64) -> f64 {
        LEFT + (x - self.xmin) / (self.xmax - self.xmin) * plot_size().0
    }

    pub fn py(&self, y: f64) -> f64 {
        TOP + (self.ymax - y) / (self.ymax - self.ymin) * plot_size().1
    }
}

fn plot_size() -> (f64, f64) {
    (WIDTH - LEFT - RIGHT, HEIGHT - TOP - BOTTOM)
}

/// Tick positions at a 1, 2 or 5 times power-of-ten spacing.
pub fn ticks(lo: f64, hi: f64) -> Vec<f64> {
    let span = hi - lo;
    if !(span > 0.0) || !span.is_finite() {
        return vec![];
    }
    let raw = span / 6.0;
    let mag = 10f64.powf(raw.log10().floor());
    let step = [1.0, 2.0, 5.0, 10.0].iter().map(|m| m * mag).find(|s| *s >= raw).unwrap_or(10.0 * mag);
    let first = (lo / step).ceil() as i64;
    let last = (hi / step).floor() as i64;
    (first..=last).map(|i| i as f64 * step).collect()
}

fn num(v: f64) -> String {
    let s = format!("{v:.2}");
    if s == "-0.00" {
        "0.00".into()
    } else {
        s
    }
}

fn label(v: f64) -> String {
    let s = format!("{v:.6}");
    let s = s.trim_end_matches('0').trim_end_matches('.');
    if s == "-0" {
        "0".into()
    } else {
        s.into()
    }
}

fn escape(s: &str) -> String {
    s.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;").replace('"', "&quot;")
}

pub struct Chart {
    frame: Frame,
    body: String,
    legend: Vec<(String, String)>,
}

impl Chart {
    pub fn new(frame: Frame, title: &str, xlabel: &str, ylabel: &str) -> Chart {
        let mut c = Chart {
            frame,
            body: String::new(),
            legend: vec![],
        };
        let (pw, ph) = plot_size();
        let _ = writeln!(
            c.body,
            r#"<rect class="frame" x="{}" y="{}" width="{}" height="{}" fill="none" stroke="black" data-xmin="{}" data-xmax="{}" data-ymin="{}" data-ymax="{}"/>"#,
            num(LEFT),
            num(TOP),
            num(pw),
            num(ph),
            frame.xmin,
            frame.xmax,
            frame.ymin,
            frame.ymax
        );
        for t in ticks(frame.xmin, frame.xmax) {
            let x = num(frame.px(t));
            let _ = writeln!(
                c.body,
                r##"<line x1="{x}" y1="{}" x2="{x}" y2="{}" stroke="#ddd"/><text x="{x}" y="{}" font-size="12" text-anchor="middle">{}</text>"##,
                num(TOP),
                num(TOP + ph),
                num(TOP + ph + 18.0),
                label(t)
            );
        }
        for t in ticks(frame.ymin, frame.ymax) {
            let y = num(frame.py(t));
            let _ = writeln!(
                c.body,
                r##"<line x1="{}" y1="{y}" x2="{}" y2="{y}" stroke="#ddd"/><text x="{}" y="{y}" font-size="12" text-anchor="end" dominant-baseline="middle">{}</text>"##,
                num(LEFT),
                num(LEFT + pw),
                num(LEFT - 6.0),
                label(t)
            );
        }
        let _ = writeln!(
            c.body,
            r#"<text x="{}" y="24" font-size="16" text-anchor="middle">{}</text>"#,
            num(LEFT + pw / 2.0),
            escape(title)
        );
        let _ = writeln!(
            c.body,
            r#"<text x="{}" y="{}" font-size="13" text-anchor="middle">{}</text>"#,
            num(LEFT + pw / 2.0),
            num(HEIGHT - 16.0),
            escape(xlabel)
        );
        let _ = writeln!(
            c.body,
            r#"<text x="20" y="{y}" font-size="13" text-anchor="middle" transform="rotate(-90 20 {y})">{}</text>"#,
            escape(ylabel),
            y = num(TOP + ph / 2.0)
        );
        c
    }

    fn points(&self, pts: &[(f64, f64)]) -> String {
        pts.iter()
            .filter(|(x, y)| x.is_finite() && y.is_finite())
            .map(|&(x, y)| format!("{},{}", num(self.frame.px(x)), num(self.frame.py(y))))
            .collect::<Vec<_>>()
            .join(" ")
    }

    /// Adds a data series; `extra` is appended verbatim to the element.
    pub fn polyline(&mut self, name: &str, colour: &str, width: f64, pts: &[(f64, f64)], extra: &str) {
        let _ = writeln!(
            self.body,
            r#"<polyline data-series="{}" fill="none" stroke="{colour}" stroke-width="{}"{extra} points="{}"/>"#,
            escape(name),
            num(width),
            self.points(pts)
        );
        self.legend.push((name.to_string(), colour.to_string()));
    }

    pub fn marker(&mut self, name: &str, colour: &str, at: (f64, f64), square: bool) {
        let (x, y) = (self.frame.px(at.0), self.frame.py(at.1));
        if square {
            let _ = writeln!(
                self.body,
                r#"<rect data-marker="{name}" x="{}" y="{}" width="10" height="10" fill="{colour}"/>"#,
                num(x - 5.0),
                num(y - 5.0)
            );
        } else {
            let _ = writeln!(
                self.body,
                r#"<circle data-marker="{name}" cx="{}" cy="{}" r="5" fill="{colour}"/>"#,
                num(x),
                num(y)
            );
        }
        self.legend.push((name.to_string(), colour.to_string()));
    }

    pub fn finish(self) -> String {
        let mut s = String::new();
        let _ = writeln!(
            s,
            r#"<svg xmlns="http://www.w3.org/2000/svg" width="{w}" height="{h}" viewBox="0 0 {w} {h}" font-family="sans-serif">"#,
            w = WIDTH,
            h = HEIGHT
        );
        s.push_str(r#"<rect width="100%" height="100%" fill="white"/>"#);
        s.push('\n');
        s.push_str(&self.body);
        let x = WIDTH - RIGHT + 15.0;
        for (i, (name, colour)) in self.legend.iter().enumerate() {
            let y = TOP + 10.0 + 20.0 * i as f64;
            let _ = writeln!(
                s,
                r#"<line x1="{}" y1="{y}" x2="{}" y2="{y}" stroke="{colour}" stroke-width="3"/><text x="{}" y="{y}" font-size="12" dominant-baseline="middle">{}</text>"#,
                num(x),
                num(x + 20.0),
                num(x + 26.0),
                escape(name),
                y = num(y)
            );
        }
        s.push_str("</svg>\n");
        s
    }
}
