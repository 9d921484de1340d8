//! Minimal static SVG plots.

use std::fmt::Write;

const PANEL: f64 = 360.0;
const MARGIN: f64 = 48.0;
const PALETTE: [&str; 6] = ["#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#17becf"];

pub struct Panel<'a> {
    pub title: &'a str,
    pub x_label: &'a str,
    pub y_label: &'a str,
    pub series: Vec<Vec<(f64, f64)>>,
}

fn bounds(points: impl Iterator<Item = (f64, f64)>) -> ([f64; 2], [f64; 2]) {
    let (mut x, mut y) = ([f64::INFINITY, f64::NEG_INFINITY], [f64::INFINITY, f64::NEG_INFINITY]);
    for (a, b) in points.filter(|p| p.0.is_finite() && p.1.is_finite()) {
        x = [x[0].min(a), x[1].max(a)];
        y = [y[0].min(b), y[1].max(b)];
    }
    let pad = |r: [f64; 2]| {
        if !r[0].is_finite() {
            [0.0, 1.0]
        } else if r[1] - r[0] < 1e-12 {
            [r[0] - 0.5, r[1] + 0.5]
        } else {
            r
        }
    };
    (pad(x), pad(y))
}

fn header(out: &mut String, width: f64, height: f64) {
    writeln!(out, r#"<svg xmlns="http://www.w3.org/2000/svg" width="{width:.0}" height="{height:.0}" viewBox="0 0 {width:.0} {height:.0}">"#).unwrap();
    writeln!(out, r#"<rect width="100%" height="100%" fill="white"/>"#).unwrap();
}

fn panel(out: &mut String, p: &Panel, x0: f64) {
    let (xr, yr) = bounds(p.series.iter().flatten().copied());
    let sx = |x: f64| x0 + MARGIN + (x - xr[0]) / (xr[1] - xr[0]) * (PANEL - 2.0 * MARGIN);
    let sy = |y: f64| PANEL - MARGIN - (y - yr[0]) / (yr[1] - yr[0]) * (PANEL - 2.0 * MARGIN);
    let (l, r, t, b) = (x0 + MARGIN, x0 + PANEL - MARGIN, MARGIN, PANEL - MARGIN);
    writeln!(
        out,
        r#"<rect x="{l:.2}" y="{t:.2}" width="{:.2}" height="{:.2}" fill="none" stroke="black"/>"#,
        r - l,
        b - t
    )
    .unwrap();
    writeln!(out, r#"<text x="{:.2}" y="24" text-anchor="middle" font-size="14">{}</text>"#, x0 + PANEL / 2.0, p.title)
        .unwrap();
    writeln!(
        out,
        r#"<text x="{:.2}" y="{:.2}" text-anchor="middle" font-size="12">{}</text>"#,
        x0 + PANEL / 2.0,
        PANEL - 12.0,
        p.x_label
    )
    .unwrap();
    writeln!(out, r#"<text x="{:.2}" y="{:.2}" font-size="12" transform="rotate(-90 {:.2} {:.2})" text-anchor="middle">{}</text>"#, x0 + 14.0, PANEL / 2.0, x0 + 14.0, PANEL / 2.0, p.y_label).unwrap();
    for (v, x) in [(xr[0], l), (xr[1], r)] {
        writeln!(out, r#"<text x="{x:.2}" y="{:.2}" text-anchor="middle" font-size="10">{v:.4}</text>"#, b + 14.0)
            .unwrap();
    }
    for (v, y) in [(yr[0], b), (yr[1], t)] {
        writeln!(out, r#"<text x="{:.2}" y="{y:.2}" text-anchor="end" font-size="10">{v:.4}</text>"#, l - 4.0).unwrap();
    }
    for (k, s) in p.series.iter().enumerate() {
        let pts: Vec<String> = s
            .iter()
            .filter(|q| q.0.is_finite() && q.1.is_finite())
            .map(|q| format!("{:.2},{:.2}", sx(q.0), sy(q.1)))
            .collect();
        writeln!(
            out,
            r#"<polyline fill="none" stroke="{}" stroke-width="1.5" points="{}"/>"#,
            PALETTE[k % PALETTE.len()],
            pts.join(" ")
        )
        .unwrap();
    }
}

/// Panels side by side.
pub fn panels(ps: &[Panel]) -> String {
    let mut out = String::new();
    header(&mut out, PANEL * ps.len() as f64, PANEL);
    for (k, p) in ps.iter().enumerate() {
        panel(&mut out, p, PANEL * k as f64);
    }
    out.push_str("</svg>\n");
    out
}

/// Line segments in groups, one colour per group, in a square frame.
pub fn segments(title: &str, groups: &[Vec<[[f64; 2]; 2]>]) -> String {
    let (xr, yr) = bounds(groups.iter().flatten().flat_map(|s| [(s[0][0], s[0][1]), (s[1][0], s[1][1])]));
    let span = (xr[1] - xr[0]).max(yr[1] - yr[0]);
    let scale = (PANEL - 2.0 * MARGIN) / span;
    let mut out = String::new();
    header(&mut out, PANEL, PANEL);
    writeln!(out, r#"<text x="{:.2}" y="24" text-anchor="middle" font-size="14">{title}</text>"#, PANEL / 2.0).unwrap();
    for (k, g) in groups.iter().enumerate() {
        let mut d = String::new();
        for s in g {
            let p = |q: [f64; 2]| (MARGIN + (q[0] - xr[0]) * scale, PANEL - MARGIN - (q[1] - yr[0]) * scale);
            let (a, b) = (p(s[0]), p(s[1]));
            write!(d, "M{:.2} {:.2}L{:.2} {:.2}", a.0, a.1, b.0, b.1).unwrap();
        }
        writeln!(
            out,
            r#"<path fill="none" stroke="{}" stroke-width="1" d="{d}"/>"#,
            if k == 0 { "black" } else { PALETTE[(k - 1) % PALETTE.len()] }
        )
        .unwrap();
    }
    out.push_str("</svg>\n");
    out
}
