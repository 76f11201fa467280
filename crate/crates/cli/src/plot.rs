//! Minimal static SVG scatter plots of two-column CSV data.

use std::fmt::Write;

#[derive(Debug, Clone, Copy, PartialEq, Eq, clap::ValueEnum)]
pub enum PlotKind {
    Ratios,
    Qls,
    Tv,
}

impl PlotKind {
    fn title(self) -> &'static str {
        match self {
            PlotKind::Ratios => "coefficient ratios",
            PlotKind::Qls => "q_l sequence",
            PlotKind::Tv => "total variation vs n",
        }
    }

    fn connect(self) -> bool {
        self == PlotKind::Tv
    }
}

/// Reads (x, y) pairs from the first two columns; blank y cells are skipped.
pub fn read_points(csv_text: &[u8]) -> Result<Vec<(f64, f64)>, String> {
    let mut reader = csv::Reader::from_reader(csv_text);
    let mut points = Vec::new();
    for (i, record) in reader.records().enumerate() {
        let record = record.map_err(|e| e.to_string())?;
        let cell = |k: usize| record.get(k).map(str::trim).unwrap_or("");
        let (xs, ys) = (cell(0), cell(1));
        if ys.is_empty() {
            continue;
        }
        let x = xs.parse::<f64>().map_err(|_| format!("row {}: bad x value {xs:?}", i + 2))?;
        let y = ys.parse::<f64>().map_err(|_| format!("row {}: bad y value {ys:?}", i + 2))?;
        if x.is_finite() && y.is_finite() {
            points.push((x, y));
        }
    }
    if points.is_empty() {
        return Err("no data points in CSV".into());
    }
    Ok(points)
}

fn span(lo: f64, hi: f64) -> (f64, f64) {
    if hi > lo {
        let pad = 0.05 * (hi - lo);
        (lo - pad, hi + pad)
    } else {
        let pad = if lo == 0.0 { 1.0 } else { 0.1 * lo.abs() };
        (lo - pad, hi + pad)
    }
}

/// Renders points with optional horizontal reference lines.
pub fn render(kind: PlotKind, points: &[(f64, f64)], bands: &[f64]) -> String {
    const W: f64 = 640.0;
    const H: f64 = 400.0;
    const M: f64 = 50.0;
    let xmin = points.iter().map(|p| p.0).fold(f64::INFINITY, f64::min);
    let xmax = points.iter().map(|p| p.0).fold(f64::NEG_INFINITY, f64::max);
    let ymin = points.iter().map(|p| p.1).chain(bands.iter().copied()).fold(f64::INFINITY, f64::min);
    let ymax = points.iter().map(|p| p.1).chain(bands.iter().copied()).fold(f64::NEG_INFINITY, f64::max);
    let (x0, x1) = span(xmin, xmax);
    let (y0, y1) = span(ymin, ymax);
    let sx = |x: f64| M + (x - x0) / (x1 - x0) * (W - 2.0 * M);
    let sy = |y: f64| H - M - (y - y0) / (y1 - y0) * (H - 2.0 * M);

    let mut svg = String::new();
    let _ = writeln!(svg, r#"<svg xmlns="http://www.w3.org/2000/svg" width="{W}" height="{H}" viewBox="0 0 {W} {H}">"#);
    let _ = writeln!(svg, r#"<rect width="{W}" height="{H}" fill="white"/>"#);
    let _ = writeln!(svg, r#"<text x="{}" y="24" font-size="16" text-anchor="middle">{}</text>"#, W / 2.0, kind.title());
    let _ = writeln!(
        svg,
        r#"<polyline points="{M},{M} {M},{b} {r},{b}" fill="none" stroke="black"/>"#,
        b = H - M,
        r = W - M
    );
    for (v, anchor, x, y) in [
        (y0, "end", M - 4.0, H - M),
        (y1, "end", M - 4.0, M + 4.0),
        (x0, "start", M, H - M + 16.0),
        (x1, "end", W - M, H - M + 16.0),
    ] {
        let _ = writeln!(svg, r#"<text x="{x}" y="{y}" font-size="10" text-anchor="{anchor}">{v:.4}</text>"#);
    }
    for b in bands {
        let _ = writeln!(
            svg,
            r#"<line x1="{M}" x2="{}" y1="{y:.2}" y2="{y:.2}" stroke="tomato" stroke-dasharray="4 3"/>"#,
            W - M,
            y = sy(*b)
        );
    }
    if kind.connect() && points.len() > 1 {
        let path: Vec<String> = points.iter().map(|(x, y)| format!("{:.2},{:.2}", sx(*x), sy(*y))).collect();
        let _ = writeln!(svg, r#"<polyline points="{}" fill="none" stroke="steelblue"/>"#, path.join(" "));
    }
    for (x, y) in points {
        let _ = writeln!(svg, r#"<circle cx="{:.2}" cy="{:.2}" r="2" fill="steelblue"/>"#, sx(*x), sy(*y));
    }
    svg.push_str("</svg>\n");
    svg
}
