//! Plain SVG plots. They are a viewing aid; the CSV files carry the data.

use std::fmt::Write as _;

const W: f64 = 640.0;
const H: f64 = 420.0;
const PAD: f64 = 56.0;
const COLORS: [&str; 8] = ["#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#8c564b", "#e377c2", "#17becf"];

fn range(values: impl Iterator<Item = f64>) -> (f64, f64) {
    let (lo, hi) = values.filter(|v| v.is_finite()).fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), v| (a.min(v), b.max(v)));
    if !lo.is_finite() {
        return (0.0, 1.0);
    }
    if hi - lo < 1e-300 {
        return (lo - 0.5, hi + 0.5);
    }
    (lo, hi)
}

fn escape(s: &str) -> String {
    s.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;")
}

fn frame(out: &mut String, title: &str, xlabel: &str, ylabel: &str, x: (f64, f64), y: (f64, f64)) {
    writeln!(out, r#"<svg xmlns="http://www.w3.org/2000/svg" width="{W}" height="{H}" font-family="sans-serif" font-size="12">"#).unwrap();
    writeln!(out, r#"<rect width="{W}" height="{H}" fill="white"/>"#).unwrap();
    writeln!(out, r#"<text x="{}" y="20" text-anchor="middle" font-size="14">{}</text>"#, W / 2.0, escape(title)).unwrap();
    writeln!(out, r#"<rect x="{PAD}" y="{PAD}" width="{}" height="{}" fill="none" stroke="black"/>"#, W - 2.0 * PAD, H - 2.0 * PAD).unwrap();
    writeln!(out, r#"<text x="{}" y="{}" text-anchor="middle">{}</text>"#, W / 2.0, H - 12.0, escape(xlabel)).unwrap();
    writeln!(out, r#"<text x="14" y="{}" transform="rotate(-90 14 {})" text-anchor="middle">{}</text>"#, H / 2.0, H / 2.0, escape(ylabel)).unwrap();
    writeln!(out, r#"<text x="{PAD}" y="{}" text-anchor="middle">{:.4}</text>"#, H - PAD + 16.0, x.0).unwrap();
    writeln!(out, r#"<text x="{}" y="{}" text-anchor="middle">{:.4}</text>"#, W - PAD, H - PAD + 16.0, x.1).unwrap();
    writeln!(out, r#"<text x="{}" y="{}" text-anchor="end">{:.4}</text>"#, PAD - 4.0, H - PAD, y.0).unwrap();
    writeln!(out, r#"<text x="{}" y="{}" text-anchor="end">{:.4}</text>"#, PAD - 4.0, PAD + 4.0, y.1).unwrap();
}

pub fn line_plot(title: &str, xlabel: &str, ylabel: &str, series: &[(String, Vec<(f64, f64)>)]) -> String {
    let xr = range(series.iter().flat_map(|s| s.1.iter().map(|p| p.0)));
    let yr = range(series.iter().flat_map(|s| s.1.iter().map(|p| p.1)));
    let sx = |x: f64| PAD + (x - xr.0) / (xr.1 - xr.0) * (W - 2.0 * PAD);
    let sy = |y: f64| H - PAD - (y - yr.0) / (yr.1 - yr.0) * (H - 2.0 * PAD);
    let mut out = String::new();
    frame(&mut out, title, xlabel, ylabel, xr, yr);
    for (i, (name, pts)) in series.iter().enumerate() {
        let color = COLORS[i % COLORS.len()];
        let path: Vec<String> = pts.iter().filter(|p| p.1.is_finite()).map(|&(x, y)| format!("{:.2},{:.2}", sx(x), sy(y))).collect();
        writeln!(out, r#"<polyline fill="none" stroke="{color}" stroke-width="1.5" points="{}"><title>{}</title></polyline>"#, path.join(" "), escape(name)).unwrap();
    }
    out.push_str("</svg>\n");
    out
}

/// Grey-scale map with row 1 at the top; darker is larger.
pub fn heatmap(title: &str, rows: usize, cols: usize, at: impl Fn(usize, usize) -> f64) -> String {
    let (lo, hi) = range((0..rows).flat_map(|r| (0..cols).map(move |c| (r, c))).map(|(r, c)| at(r, c)));
    let cw = (W - 2.0 * PAD) / cols.max(1) as f64;
    let ch = (H - 2.0 * PAD) / rows.max(1) as f64;
    let mut out = String::new();
    frame(&mut out, title, "right mode m", "left mode n", (1.0, cols as f64), (rows as f64, 1.0));
    for r in 0..rows {
        for c in 0..cols {
            let v = at(r, c);
            let shade = if v.is_finite() { (255.0 * (1.0 - (v - lo) / (hi - lo))).round() as u8 } else { 255 };
            writeln!(
                out,
                r#"<rect x="{:.2}" y="{:.2}" width="{cw:.2}" height="{ch:.2}" fill="rgb({shade},{shade},{shade})"><title>({}, {}) {v}</title></rect>"#,
                PAD + c as f64 * cw,
                PAD + r as f64 * ch,
                r + 1,
                c + 1
            )
            .unwrap();
        }
    }
    out.push_str("</svg>\n");
    out
}
