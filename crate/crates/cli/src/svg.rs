//! Minimal static SVG figures: bar charts and line plots.

use std::fmt::Write;

const W: f64 = 640.0;
const H: f64 = 400.0;
const LEFT: f64 = 70.0;
const RIGHT: f64 = 20.0;
const TOP: f64 = 40.0;
const BOTTOM: f64 = 90.0;
const COLORS: [&str; 8] = ["#1f77b4", "#ff7f0e", "#2ca02c", "#d62728", "#9467bd", "#8c564b", "#e377c2", "#7f7f7f"];

fn escape(s: &str) -> String {
    s.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;")
}

fn header(title: &str) -> String {
    let mut s = String::new();
    let _ = writeln!(
        s,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{W}" height="{H}" viewBox="0 0 {W} {H}" font-family="sans-serif" font-size="11">"#
    );
    let _ = writeln!(s, r#"<rect width="{W}" height="{H}" fill="white"/>"#);
    let _ = writeln!(
        s,
        r#"<text x="{:.1}" y="22" text-anchor="middle" font-size="14">{}</text>"#,
        W / 2.0,
        escape(title)
    );
    s
}

/// Data range padded so that flat data still spans the axis.
fn range(values: impl Iterator<Item = f64>) -> (f64, f64) {
    let (lo, hi) = values
        .filter(|v| v.is_finite())
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), v| (a.min(v), b.max(v)));
    if !lo.is_finite() {
        return (0.0, 1.0);
    }
    let pad = if hi > lo { 0.05 * (hi - lo) } else { lo.abs().max(1.0) * 0.05 };
    (lo - pad, hi + pad)
}

struct Frame {
    x: (f64, f64),
    y: (f64, f64),
}

impl Frame {
    fn px(&self, x: f64) -> f64 {
        LEFT + (x - self.x.0) / (self.x.1 - self.x.0) * (W - LEFT - RIGHT)
    }

    fn py(&self, y: f64) -> f64 {
        H - BOTTOM - (y - self.y.0) / (self.y.1 - self.y.0) * (H - TOP - BOTTOM)
    }

    fn axes(&self, s: &mut String, xlabel: &str, ylabel: &str, xticks: bool) {
        let (x0, x1) = (LEFT, W - RIGHT);
        let (y0, y1) = (H - BOTTOM, TOP);
        let _ = writeln!(s, r##"<path d="M{x0:.1} {y1:.1} V{y0:.1} H{x1:.1}" stroke="#333" fill="none"/>"##);
        for k in 0..=4 {
            let v = self.y.0 + (self.y.1 - self.y.0) * k as f64 / 4.0;
            let py = self.py(v);
            let _ = writeln!(
                s,
                r##"<path d="M{:.1} {py:.1} H{x1:.1}" stroke="#ddd"/><text x="{:.1}" y="{:.1}" text-anchor="end">{}</text>"##,
                x0,
                x0 - 4.0,
                py + 4.0,
                tick(v)
            );
            if xticks {
                let u = self.x.0 + (self.x.1 - self.x.0) * k as f64 / 4.0;
                let _ = writeln!(
                    s,
                    r#"<text x="{:.1}" y="{:.1}" text-anchor="middle">{}</text>"#,
                    self.px(u),
                    y0 + 16.0,
                    tick(u)
                );
            }
        }
        let _ = writeln!(
            s,
            r#"<text x="{:.1}" y="{:.1}" text-anchor="middle">{}</text>"#,
            (x0 + x1) / 2.0,
            H - 10.0,
            escape(xlabel)
        );
        let _ = writeln!(
            s,
            r#"<text transform="translate(16 {:.1}) rotate(-90)" text-anchor="middle">{}</text>"#,
            (y0 + y1) / 2.0,
            escape(ylabel)
        );
    }
}

fn tick(v: f64) -> String {
    if v != 0.0 && (v.abs() >= 1e4 || v.abs() < 1e-2) {
        format!("{v:.2e}")
    } else {
        format!("{v:.3}")
    }
}

/// Vertical bars with an optional dashed reference level.
pub fn bar_chart(title: &str, ylabel: &str, bars: &[(String, f64)], reference: Option<(&str, f64)>) -> String {
    let mut s = header(title);
    let frame = Frame {
        x: (0.0, bars.len().max(1) as f64),
        y: range(
            bars.iter()
                .map(|b| b.1)
                .chain(reference.map(|r| r.1))
                .chain(std::iter::once(0.0)),
        ),
    };
    frame.axes(&mut s, "", ylabel, false);
    let zero = frame.py(0.0);
    for (i, (label, v)) in bars.iter().enumerate() {
        let x = frame.px(i as f64 + 0.15);
        let w = frame.px(i as f64 + 0.85) - x;
        if v.is_finite() {
            let y = frame.py(*v);
            let color = if *v >= reference.map_or(f64::NEG_INFINITY, |r| r.1) { COLORS[0] } else { COLORS[3] };
            let _ = writeln!(
                s,
                r#"<rect x="{x:.1}" y="{:.1}" width="{w:.1}" height="{:.1}" fill="{color}"/>"#,
                y.min(zero),
                (y - zero).abs()
            );
        }
        let cx = x + w / 2.0;
        let _ = writeln!(
            s,
            r#"<text transform="translate({cx:.1} {:.1}) rotate(40)" text-anchor="start">{}</text>"#,
            H - BOTTOM + 12.0,
            escape(label)
        );
    }
    if let Some((label, v)) = reference {
        let y = frame.py(v);
        let _ = writeln!(
            s,
            r##"<path d="M{LEFT:.1} {y:.1} H{:.1}" stroke="#d62728" stroke-dasharray="4 3"/><text x="{:.1}" y="{:.1}" text-anchor="end" fill="#d62728">{}</text>"##,
            W - RIGHT,
            W - RIGHT,
            y - 4.0,
            escape(label)
        );
    }
    s.push_str("</svg>\n");
    s
}

/// Polylines with a legend and an optional horizontal reference line.
pub fn line_plot(
    title: &str,
    xlabel: &str,
    ylabel: &str,
    series: &[(String, Vec<(f64, f64)>)],
    reference: Option<(&str, f64)>,
) -> String {
    let mut s = header(title);
    let frame = Frame {
        x: range(series.iter().flat_map(|(_, pts)| pts.iter().map(|p| p.0))),
        y: range(
            series
                .iter()
                .flat_map(|(_, pts)| pts.iter().map(|p| p.1))
                .chain(reference.map(|r| r.1)),
        ),
    };
    frame.axes(&mut s, xlabel, ylabel, true);
    for (k, (name, pts)) in series.iter().enumerate() {
        let color = COLORS[k % COLORS.len()];
        let d: Vec<String> = pts
            .iter()
            .filter(|p| p.0.is_finite() && p.1.is_finite())
            .enumerate()
            .map(|(i, p)| format!("{}{:.1} {:.1}", if i == 0 { 'M' } else { 'L' }, frame.px(p.0), frame.py(p.1)))
            .collect();
        let _ = writeln!(s, r#"<path d="{}" stroke="{color}" stroke-width="1.5" fill="none"/>"#, d.join(" "));
        for p in pts.iter().filter(|p| p.0.is_finite() && p.1.is_finite()) {
            let _ = writeln!(
                s,
                r#"<circle cx="{:.1}" cy="{:.1}" r="2" fill="{color}"/>"#,
                frame.px(p.0),
                frame.py(p.1)
            );
        }
        let ly = TOP + 14.0 * k as f64 + 4.0;
        let _ = writeln!(
            s,
            r#"<rect x="{:.1}" y="{:.1}" width="10" height="3" fill="{color}"/><text x="{:.1}" y="{:.1}">{}</text>"#,
            W - RIGHT - 150.0,
            ly,
            W - RIGHT - 136.0,
            ly + 4.0,
            escape(name)
        );
    }
    if let Some((label, v)) = reference {
        let y = frame.py(v);
        let _ = writeln!(
            s,
            r##"<path d="M{LEFT:.1} {y:.1} H{:.1}" stroke="#555" stroke-dasharray="4 3"/><text x="{:.1}" y="{:.1}" fill="#555">{}</text>"##,
            W - RIGHT,
            LEFT + 4.0,
            y - 4.0,
            escape(label)
        );
    }
    s.push_str("</svg>\n");
    s
}
