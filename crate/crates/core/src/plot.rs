//! Minimal SVG line plots: score frequency curves, QQ plots and ECDFs.

use std::fmt::Write;

const W: f64 = 480.0;
const H: f64 = 320.0;
const PAD: f64 = 48.0;
const COLORS: [&str; 4] = ["#1f77b4", "#d62728", "#2ca02c", "#9467bd"];

struct Frame {
    x: (f64, f64),
    y: (f64, f64),
}

impl Frame {
    fn fit(xs: impl Iterator<Item = f64> + Clone, ys: impl Iterator<Item = f64> + Clone) -> Self {
        let range = |v: &mut dyn Iterator<Item = f64>| {
            let (lo, hi) = v
                .filter(|x| x.is_finite())
                .fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), x| (a.min(x), b.max(x)));
            if !lo.is_finite() {
                (0.0, 1.0)
            } else if hi > lo {
                (lo, hi)
            } else {
                (lo - 0.5, hi + 0.5)
            }
        };
        Self {
            x: range(&mut xs.clone()),
            y: range(&mut ys.clone()),
        }
    }

    fn px(&self, x: f64) -> f64 {
        PAD + (x - self.x.0) / (self.x.1 - self.x.0) * (W - 2.0 * PAD)
    }

    fn py(&self, y: f64) -> f64 {
        H - PAD - (y - self.y.0) / (self.y.1 - self.y.0) * (H - 2.0 * PAD)
    }
}

fn header(out: &mut String, title: &str, frame: &Frame, xlabel: &str, ylabel: &str) {
    let _ = writeln!(
        out,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{W}" height="{H}" viewBox="0 0 {W} {H}" font-family="sans-serif" font-size="11">"#
    );
    let _ = writeln!(out, r#"<rect width="{W}" height="{H}" fill="white"/>"#);
    let _ = writeln!(
        out,
        r#"<text x="{}" y="20" text-anchor="middle" font-size="13">{}</text>"#,
        W / 2.0,
        escape(title)
    );
    let (x0, x1, y0, y1) = (PAD, W - PAD, H - PAD, PAD);
    let _ = writeln!(
        out,
        r#"<path d="M{x0},{y1} L{x0},{y0} L{x1},{y0}" fill="none" stroke="black"/>"#
    );
    for (v, anchor, x) in [(frame.x.0, "start", x0), (frame.x.1, "end", x1)] {
        let _ = writeln!(
            out,
            r#"<text x="{x}" y="{}" text-anchor="{anchor}">{}</text>"#,
            y0 + 14.0,
            tick(v)
        );
    }
    for (v, y) in [(frame.y.0, y0), (frame.y.1, y1 + 4.0)] {
        let _ = writeln!(
            out,
            r#"<text x="{}" y="{y}" text-anchor="end">{}</text>"#,
            x0 - 4.0,
            tick(v)
        );
    }
    let _ = writeln!(
        out,
        r#"<text x="{}" y="{}" text-anchor="middle">{}</text>"#,
        W / 2.0,
        H - 12.0,
        escape(xlabel)
    );
    let _ = writeln!(
        out,
        r#"<text x="14" y="{}" text-anchor="middle" transform="rotate(-90 14 {})">{}</text>"#,
        H / 2.0,
        H / 2.0,
        escape(ylabel)
    );
}

fn tick(v: f64) -> String {
    format!("{v:.3}")
}

fn escape(s: &str) -> String {
    s.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;")
}

fn polyline(out: &mut String, frame: &Frame, pts: &[(f64, f64)], color: &str, dots: bool) {
    let pts: Vec<(f64, f64)> = pts
        .iter()
        .copied()
        .filter(|p| p.0.is_finite() && p.1.is_finite())
        .collect();
    if dots {
        for (x, y) in pts {
            let _ = writeln!(
                out,
                r#"<circle cx="{:.2}" cy="{:.2}" r="2" fill="{color}"/>"#,
                frame.px(x),
                frame.py(y)
            );
        }
        return;
    }
    let d: Vec<String> = pts
        .iter()
        .map(|&(x, y)| format!("{:.2},{:.2}", frame.px(x), frame.py(y)))
        .collect();
    let _ = writeln!(
        out,
        r#"<polyline points="{}" fill="none" stroke="{color}" stroke-width="1.5"/>"#,
        d.join(" ")
    );
}

fn legend(out: &mut String, names: &[&str]) {
    for (i, name) in names.iter().enumerate() {
        let y = PAD + 14.0 * i as f64;
        let c = COLORS[i % COLORS.len()];
        let _ = writeln!(
            out,
            r#"<rect x="{}" y="{}" width="10" height="3" fill="{c}"/>"#,
            W - PAD - 90.0,
            y - 4.0
        );
        let _ = writeln!(out, r#"<text x="{}" y="{y}">{}</text>"#, W - PAD - 76.0, escape(name));
    }
}

/// Histogram frequency curve of `sims` with a vertical marker at `data`.
pub fn score_plot(sims: &[f64], data: f64, bins: usize) -> String {
    let finite: Vec<f64> = sims.iter().copied().filter(|v| v.is_finite()).collect();
    let bins = bins.max(1);
    let lo = finite.iter().copied().fold(data, f64::min);
    let hi = finite.iter().copied().fold(data, f64::max);
    let width = if hi > lo { (hi - lo) / bins as f64 } else { 1.0 };
    let mut counts = vec![0usize; bins];
    for v in &finite {
        counts[(((v - lo) / width) as usize).min(bins - 1)] += 1;
    }
    let curve: Vec<(f64, f64)> = counts
        .iter()
        .enumerate()
        .map(|(i, &c)| (lo + (i as f64 + 0.5) * width, c as f64))
        .collect();
    let frame = Frame::fit(
        curve.iter().map(|p| p.0).chain([lo, hi]),
        curve.iter().map(|p| p.1).chain([0.0]),
    );
    let mut out = String::new();
    header(
        &mut out,
        "Simulated maximum scores",
        &frame,
        "standardized score",
        "frequency",
    );
    polyline(&mut out, &frame, &curve, COLORS[0], false);
    let x = frame.px(data);
    let _ = writeln!(
        out,
        r#"<line x1="{x:.2}" y1="{PAD}" x2="{x:.2}" y2="{}" stroke="{}" stroke-width="2" stroke-dasharray="4 3"/>"#,
        H - PAD,
        COLORS[1]
    );
    legend(&mut out, &["simulations", "data"]);
    out.push_str("</svg>\n");
    out
}

/// Scatter of (empirical, reference) quantile pairs per series, with the identity line.
pub fn qq_plot(title: &str, series: &[(&str, &[(f64, f64)])]) -> String {
    let all = || series.iter().flat_map(|s| s.1.iter());
    let frame = Frame::fit(all().map(|p| p.1), all().map(|p| p.0));
    let mut out = String::new();
    header(&mut out, title, &frame, "Cauchy quantile", "empirical quantile");
    let lo = frame.x.0.max(frame.y.0);
    let hi = frame.x.1.min(frame.y.1);
    if hi > lo {
        polyline(&mut out, &frame, &[(lo, lo), (hi, hi)], "#999999", false);
    }
    for (i, (_, pts)) in series.iter().enumerate() {
        let swapped: Vec<(f64, f64)> = pts.iter().map(|&(e, t)| (t, e)).collect();
        polyline(&mut out, &frame, &swapped, COLORS[i % COLORS.len()], true);
    }
    legend(&mut out, &series.iter().map(|s| s.0).collect::<Vec<_>>());
    out.push_str("</svg>\n");
    out
}

/// Step curves of the empirical CDF of each sample.
pub fn ecdf_plot(title: &str, series: &[(&str, &[f64])]) -> String {
    let sorted: Vec<Vec<f64>> = series
        .iter()
        .map(|s| {
            let mut v: Vec<f64> = s.1.iter().copied().filter(|x| x.is_finite()).collect();
            v.sort_by(f64::total_cmp);
            v
        })
        .collect();
    let frame = Frame::fit(sorted.iter().flatten().copied(), [0.0, 1.0].into_iter());
    let mut out = String::new();
    header(&mut out, title, &frame, "value", "ECDF");
    for (i, v) in sorted.iter().enumerate() {
        let n = v.len() as f64;
        let mut pts = Vec::with_capacity(2 * v.len());
        for (k, &x) in v.iter().enumerate() {
            pts.push((x, k as f64 / n));
            pts.push((x, (k + 1) as f64 / n));
        }
        polyline(&mut out, &frame, &pts, COLORS[i % COLORS.len()], false);
    }
    legend(&mut out, &series.iter().map(|s| s.0).collect::<Vec<_>>());
    out.push_str("</svg>\n");
    out
}
