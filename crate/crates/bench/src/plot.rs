//! Minimal side-by-side SVG line charts.

use std::fmt::Write;

pub struct Series {
    pub name: String,
    pub points: Vec<(f64, f64)>,
}

pub struct Panel {
    pub title: String,
    pub x_label: String,
    pub log_x: bool,
    pub log_y: bool,
    pub series: Vec<Series>,
}

const W: f64 = 360.0;
const H: f64 = 280.0;
const MARGIN: f64 = 50.0;
const COLORS: [&str; 6] = ["#1f77b4", "#d62728", "#2ca02c", "#ff7f0e", "#9467bd", "#8c564b"];

fn transform(v: f64, log: bool) -> Option<f64> {
    if log {
        (v > 0.0 && v.is_finite()).then(|| v.log10())
    } else {
        v.is_finite().then_some(v)
    }
}

fn range(values: impl Iterator<Item = f64>) -> (f64, f64) {
    let (lo, hi) = values.fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), v| (a.min(v), b.max(v)));
    if !lo.is_finite() {
        return (0.0, 1.0);
    }
    if hi - lo < 1e-12 {
        (lo - 0.5, hi + 0.5)
    } else {
        (lo, hi)
    }
}

pub fn render(panels: &[Panel]) -> String {
    let total_w = W * panels.len().max(1) as f64;
    let mut s = String::new();
    let _ = writeln!(
        s,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{total_w}" height="{H}" font-family="sans-serif" font-size="11">"#
    );
    for (p, panel) in panels.iter().enumerate() {
        let x0 = p as f64 * W;
        let pts: Vec<Vec<(f64, f64)>> = panel
            .series
            .iter()
            .map(|se| {
                se.points
                    .iter()
                    .filter_map(|&(x, y)| Some((transform(x, panel.log_x)?, transform(y, panel.log_y)?)))
                    .collect()
            })
            .collect();
        let (xl, xh) = range(pts.iter().flatten().map(|p| p.0));
        let (yl, yh) = range(pts.iter().flatten().map(|p| p.1));
        let sx = |x: f64| x0 + MARGIN + (x - xl) / (xh - xl) * (W - 1.5 * MARGIN);
        let sy = |y: f64| H - MARGIN - (y - yl) / (yh - yl) * (H - 1.7 * MARGIN);
        let _ = writeln!(s, r#"<text x="{}" y="20" text-anchor="middle">{}</text>"#, x0 + W / 2.0, panel.title);
        let _ = writeln!(
            s,
            r#"<rect x="{}" y="{}" width="{}" height="{}" fill="none" stroke="black"/>"#,
            x0 + MARGIN,
            0.7 * MARGIN,
            W - 1.5 * MARGIN,
            H - 1.7 * MARGIN
        );
        let fmt_tick = |v: f64, log: bool| if log { format!("1e{v:.1}") } else { format!("{v:.3}") };
        for (v, anchor_y) in [(yl, H - MARGIN), (yh, 0.7 * MARGIN + 10.0)] {
            let _ = writeln!(s, r#"<text x="{}" y="{anchor_y}" text-anchor="end">{}</text>"#, x0 + MARGIN - 4.0, fmt_tick(v, panel.log_y));
        }
        for (v, x) in [(xl, sx(xl)), (xh, sx(xh))] {
            let _ = writeln!(s, r#"<text x="{x}" y="{}" text-anchor="middle">{}</text>"#, H - MARGIN + 14.0, fmt_tick(v, panel.log_x));
        }
        let _ = writeln!(s, r#"<text x="{}" y="{}" text-anchor="middle">{}</text>"#, x0 + W / 2.0, H - 10.0, panel.x_label);
        for (i, (se, line)) in panel.series.iter().zip(&pts).enumerate() {
            let color = COLORS[i % COLORS.len()];
            let path: Vec<String> = line.iter().map(|&(x, y)| format!("{:.2},{:.2}", sx(x), sy(y))).collect();
            let _ = writeln!(s, r#"<polyline fill="none" stroke="{color}" stroke-width="1.5" points="{}"/>"#, path.join(" "));
            for &(x, y) in line {
                let _ = writeln!(s, r#"<circle cx="{:.2}" cy="{:.2}" r="2.5" fill="{color}"/>"#, sx(x), sy(y));
            }
            let _ = writeln!(
                s,
                r#"<text x="{}" y="{}" fill="{color}">{}</text>"#,
                x0 + MARGIN + 6.0,
                0.7 * MARGIN + 14.0 * (i as f64 + 1.0),
                se.name
            );
        }
    }
    s.push_str("</svg>\n");
    s
}
