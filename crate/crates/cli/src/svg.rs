//! Minimal deterministic SVG line charts: FDR against the FMR exponent, and
//! DET curves on standard normal deviate axes.

use std::fmt::Write;

use statrs::distribution::{ContinuousCDF, Normal};

#[derive(Debug, Clone, PartialEq)]
pub struct Series {
    pub name: String,
    pub points: Vec<(f64, f64)>,
}

const WIDTH: f64 = 640.0;
const HEIGHT: f64 = 480.0;
const LEFT: f64 = 70.0;
const RIGHT: f64 = 150.0;
const TOP: f64 = 30.0;
const BOTTOM: f64 = 55.0;
const PALETTE: [&str; 8] = [
    "#1f77b4", "#d62728", "#2ca02c", "#ff7f0e", "#9467bd", "#8c564b", "#e377c2", "#7f7f7f",
];

fn escape(s: &str) -> String {
    s.replace('&', "&amp;")
        .replace('<', "&lt;")
        .replace('>', "&gt;")
        .replace('"', "&quot;")
}

struct Frame {
    x: (f64, f64),
    y: (f64, f64),
}

impl Frame {
    fn px(&self, x: f64) -> f64 {
        LEFT + (x - self.x.0) / (self.x.1 - self.x.0) * (WIDTH - LEFT - RIGHT)
    }

    fn py(&self, y: f64) -> f64 {
        HEIGHT - BOTTOM - (y - self.y.0) / (self.y.1 - self.y.0) * (HEIGHT - TOP - BOTTOM)
    }
}

fn open(out: &mut String, frame: &Frame, x_label: &str, y_label: &str) {
    let _ = writeln!(
        out,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{WIDTH}" height="{HEIGHT}" viewBox="0 0 {WIDTH} {HEIGHT}" font-family="sans-serif" font-size="12">"#
    );
    let _ = writeln!(out, r#"<rect width="{WIDTH}" height="{HEIGHT}" fill="white"/>"#);
    let (x0, x1) = (frame.px(frame.x.0), frame.px(frame.x.1));
    let (y0, y1) = (frame.py(frame.y.0), frame.py(frame.y.1));
    let _ = writeln!(
        out,
        r#"<rect x="{x0:.2}" y="{y1:.2}" width="{:.2}" height="{:.2}" fill="none" stroke="black"/>"#,
        x1 - x0,
        y0 - y1
    );
    let _ = writeln!(
        out,
        r#"<text x="{:.2}" y="{:.2}" text-anchor="middle">{}</text>"#,
        (x0 + x1) / 2.0,
        HEIGHT - 12.0,
        escape(x_label)
    );
    let _ = writeln!(
        out,
        r#"<text x="16" y="{:.2}" text-anchor="middle" transform="rotate(-90 16 {:.2})">{}</text>"#,
        (y0 + y1) / 2.0,
        (y0 + y1) / 2.0,
        escape(y_label)
    );
}

fn x_tick(out: &mut String, frame: &Frame, x: f64, label: &str) {
    let px = frame.px(x);
    let y0 = frame.py(frame.y.0);
    let _ = writeln!(
        out,
        r##"<line x1="{px:.2}" y1="{:.2}" x2="{px:.2}" y2="{y0:.2}" stroke="#dddddd"/>"##,
        frame.py(frame.y.1)
    );
    let _ = writeln!(
        out,
        r#"<text x="{px:.2}" y="{:.2}" text-anchor="middle">{}</text>"#,
        y0 + 16.0,
        escape(label)
    );
}

fn y_tick(out: &mut String, frame: &Frame, y: f64, label: &str) {
    let py = frame.py(y);
    let x0 = frame.px(frame.x.0);
    let _ = writeln!(
        out,
        r##"<line x1="{x0:.2}" y1="{py:.2}" x2="{:.2}" y2="{py:.2}" stroke="#dddddd"/>"##,
        frame.px(frame.x.1)
    );
    let _ = writeln!(
        out,
        r#"<text x="{:.2}" y="{:.2}" text-anchor="end">{}</text>"#,
        x0 - 6.0,
        py + 4.0,
        escape(label)
    );
}

/// Draws each series as a polyline; consecutive points closer than half a
/// pixel are merged so large DET sweeps stay small.
fn polylines(out: &mut String, frame: &Frame, series: &[(String, Vec<(f64, f64)>)], markers: bool) {
    for (i, (name, pts)) in series.iter().enumerate() {
        let color = PALETTE[i % PALETTE.len()];
        let mut path = String::new();
        let mut last: Option<(f64, f64)> = None;
        let n = pts.len();
        for (k, &(x, y)) in pts.iter().enumerate() {
            let p = (frame.px(x), frame.py(y));
            let keep = match last {
                None => true,
                Some(l) => k + 1 == n || (p.0 - l.0).abs() >= 0.5 || (p.1 - l.1).abs() >= 0.5,
            };
            if keep {
                let _ = write!(path, "{:.2},{:.2} ", p.0, p.1);
                last = Some(p);
            }
        }
        let _ = writeln!(
            out,
            r#"<polyline fill="none" stroke="{color}" stroke-width="2" points="{}"/>"#,
            path.trim_end()
        );
        if markers {
            for &(x, y) in pts {
                let _ = writeln!(
                    out,
                    r#"<circle cx="{:.2}" cy="{:.2}" r="3" fill="{color}"/>"#,
                    frame.px(x),
                    frame.py(y)
                );
            }
        }
        let ly = TOP + 20.0 + 18.0 * i as f64;
        let lx = WIDTH - RIGHT + 15.0;
        let _ = writeln!(
            out,
            r#"<line x1="{lx:.2}" y1="{ly:.2}" x2="{:.2}" y2="{ly:.2}" stroke="{color}" stroke-width="2"/>"#,
            lx + 20.0
        );
        let _ = writeln!(
            out,
            r#"<text x="{:.2}" y="{:.2}">{}</text>"#,
            lx + 26.0,
            ly + 4.0,
            escape(name)
        );
    }
}

/// FDR against x, where the operating point is FMR = 10^-x.
pub fn fdr_chart(series: &[Series]) -> String {
    let xs = series.iter().flat_map(|s| s.points.iter().map(|p| p.0));
    let (mut x0, mut x1) = xs.fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), x| {
        (a.min(x), b.max(x))
    });
    if !(x0.is_finite() && x1.is_finite()) {
        (x0, x1) = (0.0, 1.0);
    }
    if x1 <= x0 {
        x0 -= 0.5;
        x1 += 0.5;
    }
    let min_fdr = series
        .iter()
        .flat_map(|s| s.points.iter().map(|p| p.1))
        .fold(1.0_f64, f64::min);
    let y0 = ((min_fdr * 10.0).floor() / 10.0).clamp(0.0, 0.9);
    let frame = Frame {
        x: (x0, x1),
        y: (y0, 1.0),
    };
    let mut out = String::new();
    open(&mut out, &frame, "x  (FMR = 10^-x)", "FDR");
    let mut seen = Vec::new();
    for s in series {
        for p in &s.points {
            if !seen.contains(&p.0) {
                seen.push(p.0);
            }
        }
    }
    seen.sort_by(f64::total_cmp);
    for x in seen {
        x_tick(&mut out, &frame, x, &format!("{x}"));
    }
    let steps = ((1.0 - y0) / 0.1).round() as usize;
    for k in 0..=steps {
        let y = y0 + k as f64 * 0.1;
        y_tick(&mut out, &frame, y, &format!("{y:.1}"));
    }
    let data: Vec<(String, Vec<(f64, f64)>)> = series
        .iter()
        .map(|s| (s.name.clone(), s.points.clone()))
        .collect();
    polylines(&mut out, &frame, &data, true);
    out.push_str("</svg>\n");
    out
}

const DET_TICKS: [f64; 14] = [
    1e-6, 1e-5, 1e-4, 1e-3, 0.002, 0.005, 0.01, 0.02, 0.05, 0.1, 0.2, 0.4, 0.6, 0.8,
];

/// DET curves: each series holds (FMR, FNMR) pairs. Both axes are probit
/// scaled; zero rates are pinned to the lowest plotted rate.
pub fn det_chart(series: &[Series]) -> String {
    let normal = Normal::new(0.0, 1.0).expect("standard normal");
    let min_rate = series
        .iter()
        .flat_map(|s| s.points.iter().flat_map(|&(a, b)| [a, b]))
        .filter(|&r| r > 0.0)
        .fold(0.5_f64, f64::min)
        .max(1e-6);
    let lo = 10f64.powf(min_rate.log10().floor());
    let hi = 0.8;
    let probit = |r: f64| normal.inverse_cdf(r.clamp(lo, hi));
    let frame = Frame {
        x: (probit(lo), probit(hi)),
        y: (probit(lo), probit(hi)),
    };
    let mut out = String::new();
    open(&mut out, &frame, "FMR (normal deviate scale)", "FNMR (normal deviate scale)");
    for &t in DET_TICKS.iter().filter(|&&t| t >= lo && t <= hi) {
        let label = if t < 0.01 { format!("{t:e}") } else { format!("{t}") };
        x_tick(&mut out, &frame, probit(t), &label);
        y_tick(&mut out, &frame, probit(t), &label);
    }
    let data: Vec<(String, Vec<(f64, f64)>)> = series
        .iter()
        .map(|s| {
            (
                s.name.clone(),
                s.points.iter().map(|&(a, b)| (probit(a), probit(b))).collect(),
            )
        })
        .collect();
    polylines(&mut out, &frame, &data, false);
    out.push_str("</svg>\n");
    out
}
