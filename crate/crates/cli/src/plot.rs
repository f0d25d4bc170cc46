//! SVG rendering of curve CSVs.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use anyhow::{bail, ensure, Context, Result};

pub const CURVE_HEADER: [&str; 4] = ["n", "d", "lower", "upper"];

const WIDTH: f64 = 640.0;
const HEIGHT: f64 = 480.0;
const LEFT: f64 = 60.0;
const RIGHT: f64 = 110.0;
const TOP: f64 = 20.0;
const BOTTOM: f64 = 50.0;
const PALETTE: [&str; 10] = [
    "#1f77b4", "#ff7f0e", "#2ca02c", "#d62728", "#9467bd", "#8c564b", "#e377c2", "#7f7f7f", "#bcbd22", "#17becf",
];

/// Curve points grouped by `n`: `(d, bracket midpoint)` sorted by `d`.
pub type Curves = BTreeMap<usize, Vec<(f64, f64)>>;

pub fn read_curves(path: &Path) -> Result<Curves> {
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(true)
        .from_path(path)
        .with_context(|| format!("cannot read {}", path.display()))?;
    let header = reader.headers().context("missing CSV header")?.clone();
    ensure!(
        header.iter().eq(CURVE_HEADER.iter().copied()),
        "expected header {:?}, found {:?}",
        CURVE_HEADER.join(","),
        header.iter().collect::<Vec<_>>().join(",")
    );
    let mut curves = Curves::new();
    for (line, record) in reader.records().enumerate() {
        let record = record.with_context(|| format!("malformed CSV row {}", line + 2))?;
        let field = |i: usize| record.get(i).map(str::trim).unwrap_or("");
        let n: usize = field(0).parse().with_context(|| format!("bad n on row {}", line + 2))?;
        let num = |i: usize| -> Result<f64> {
            let v: f64 = field(i).parse().with_context(|| format!("bad {} on row {}", CURVE_HEADER[i], line + 2))?;
            ensure!(v.is_finite(), "non-finite {} on row {}", CURVE_HEADER[i], line + 2);
            Ok(v)
        };
        let (d, lower, upper) = (num(1)?, num(2)?, num(3)?);
        ensure!((0.0..=1.0).contains(&d), "d = {d} outside [0, 1] on row {}", line + 2);
        ensure!(lower <= upper, "lower exceeds upper on row {}", line + 2);
        curves.entry(n).or_default().push((d, 0.5 * (lower + upper)));
    }
    if curves.is_empty() {
        bail!("{} has no data rows", path.display());
    }
    for points in curves.values_mut() {
        points.sort_by(|a, b| a.0.total_cmp(&b.0));
    }
    Ok(curves)
}

fn x_of(d: f64) -> f64 {
    LEFT + d * (WIDTH - LEFT - RIGHT)
}

fn y_of(bits: f64) -> f64 {
    TOP + (1.0 - bits.clamp(0.0, 1.0)) * (HEIGHT - TOP - BOTTOM)
}

pub fn render_svg(curves: &Curves) -> String {
    let mut s = String::new();
    let (x0, x1, y0, y1) = (x_of(0.0), x_of(1.0), y_of(0.0), y_of(1.0));
    writeln!(
        s,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{WIDTH}" height="{HEIGHT}" viewBox="0 0 {WIDTH} {HEIGHT}" font-family="sans-serif" font-size="11">"#
    )
    .unwrap();
    writeln!(s, r#"<rect x="0" y="0" width="{WIDTH}" height="{HEIGHT}" fill="white"/>"#).unwrap();
    writeln!(s, r##"<g stroke="#dddddd" stroke-width="0.5">"##).unwrap();
    for i in 0..=10 {
        let t = i as f64 / 10.0;
        let (x, y) = (x_of(t), y_of(t));
        writeln!(s, r#"<line x1="{x:.2}" y1="{y0:.2}" x2="{x:.2}" y2="{y1:.2}"/>"#).unwrap();
        writeln!(s, r#"<line x1="{x0:.2}" y1="{y:.2}" x2="{x1:.2}" y2="{y:.2}"/>"#).unwrap();
    }
    s.push_str("</g>\n");
    writeln!(s, r#"<g stroke="black" stroke-width="1">"#).unwrap();
    writeln!(s, r#"<line x1="{x0:.2}" y1="{y0:.2}" x2="{x1:.2}" y2="{y0:.2}"/>"#).unwrap();
    writeln!(s, r#"<line x1="{x0:.2}" y1="{y0:.2}" x2="{x0:.2}" y2="{y1:.2}"/>"#).unwrap();
    for i in 0..=10 {
        let t = i as f64 / 10.0;
        let (x, y) = (x_of(t), y_of(t));
        writeln!(s, r#"<line x1="{x:.2}" y1="{y0:.2}" x2="{x:.2}" y2="{:.2}"/>"#, y0 + 5.0).unwrap();
        writeln!(s, r#"<line x1="{:.2}" y1="{y:.2}" x2="{x0:.2}" y2="{y:.2}"/>"#, x0 - 5.0).unwrap();
    }
    s.push_str("</g>\n");
    writeln!(s, r#"<g fill="black">"#).unwrap();
    for i in 0..=10 {
        let t = i as f64 / 10.0;
        writeln!(s, r#"<text x="{:.2}" y="{:.2}" text-anchor="middle">{t:.1}</text>"#, x_of(t), y0 + 18.0).unwrap();
        writeln!(s, r#"<text x="{:.2}" y="{:.2}" text-anchor="end">{t:.1}</text>"#, x0 - 8.0, y_of(t) + 4.0).unwrap();
    }
    writeln!(s, r#"<text x="{:.2}" y="{:.2}" text-anchor="middle">deletion probability d</text>"#, 0.5 * (x0 + x1), HEIGHT - 10.0)
        .unwrap();
    writeln!(
        s,
        r#"<text x="15" y="{:.2}" text-anchor="middle" transform="rotate(-90 15 {:.2})">C_n(d) (bits)</text>"#,
        0.5 * (y0 + y1),
        0.5 * (y0 + y1)
    )
    .unwrap();
    s.push_str("</g>\n");
    for (i, (n, points)) in curves.iter().enumerate() {
        let color = PALETTE[i % PALETTE.len()];
        let coords: Vec<String> = points.iter().map(|&(d, c)| format!("{:.2},{:.2}", x_of(d), y_of(c))).collect();
        writeln!(
            s,
            r#"<polyline data-n="{n}" fill="none" stroke="{color}" stroke-width="1.5" points="{}"/>"#,
            coords.join(" ")
        )
        .unwrap();
        let ly = TOP + 10.0 + 16.0 * i as f64;
        let lx = x1 + 15.0;
        writeln!(
            s,
            r#"<line x1="{lx:.2}" y1="{ly:.2}" x2="{:.2}" y2="{ly:.2}" stroke="{color}" stroke-width="1.5"/>"#,
            lx + 20.0
        )
        .unwrap();
        writeln!(s, r#"<text x="{:.2}" y="{:.2}">n = {n}</text>"#, lx + 26.0, ly + 4.0).unwrap();
    }
    s.push_str("</svg>\n");
    s
}

pub fn run(csv: &Path, out: &Path) -> Result<()> {
    let curves = read_curves(csv)?;
    fs::write(out, render_svg(&curves)).with_context(|| format!("cannot write {}", out.display()))?;
    Ok(())
}
