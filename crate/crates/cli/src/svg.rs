//! SVG figures: raster heatmaps (embedded PNG) and bar charts.

use crate::CliError;
use base64::Engine;
use std::fmt::Write as _;
use std::path::Path;

/// Row-major 2D data with axis extents in grid units.
pub struct Heatmap<'a> {
    pub values: &'a [f64],
    pub shape: &'a [usize],
    /// (min, max) of the horizontal and vertical axes.
    pub x_range: (f64, f64),
    pub y_range: (f64, f64),
    pub x_label: &'a str,
    pub y_label: &'a str,
    pub title: &'a str,
}

// viridis anchors at 0, 1/4, …, 1
const PALETTE: [[f64; 3]; 5] = [[68.0, 1.0, 84.0], [59.0, 82.0, 139.0], [33.0, 145.0, 140.0], [94.0, 201.0, 98.0], [253.0, 231.0, 37.0]];

fn colour(t: f64) -> [u8; 3] {
    let t = t.clamp(0.0, 1.0) * 4.0;
    let i = (t.floor() as usize).min(3);
    let f = t - i as f64;
    let mut out = [0u8; 3];
    for c in 0..3 {
        out[c] = (PALETTE[i][c] * (1.0 - f) + PALETTE[i + 1][c] * f).round() as u8;
    }
    out
}

fn png_bytes(values: &[f64], rows: usize, cols: usize) -> Result<Vec<u8>, CliError> {
    let (lo, hi) = values.iter().fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), &v| (a.min(v), b.max(v)));
    let span = hi - lo;
    let mut pixels = Vec::with_capacity(rows * cols * 3);
    // first data row is the lowest y: flip so y grows upwards
    for r in (0..rows).rev() {
        for c in 0..cols {
            let t = if span > 0.0 { (values[r * cols + c] - lo) / span } else { 0.0 };
            pixels.extend_from_slice(&colour(t));
        }
    }
    let mut out = Vec::new();
    {
        let mut enc = png::Encoder::new(&mut out, cols as u32, rows as u32);
        enc.set_color(png::ColorType::Rgb);
        enc.set_depth(png::BitDepth::Eight);
        let mut w = enc.write_header().map_err(|e| CliError::Runtime(format!("png: {e}")))?;
        w.write_image_data(&pixels).map_err(|e| CliError::Runtime(format!("png: {e}")))?;
    }
    Ok(out)
}

fn tick(v: f64) -> String {
    let s = format!("{v:.2}");
    if s == "-0.00" { "0.00".into() } else { s }
}

/// SVG text of a heatmap; identical data gives identical bytes.
pub fn heatmap_svg(map: &Heatmap) -> Result<String, CliError> {
    if map.shape.len() != 2 {
        return Err(CliError::Runtime(format!("heatmap needs 2D data, got shape {:?}", map.shape)));
    }
    let (rows, cols) = (map.shape[0], map.shape[1]);
    if rows * cols != map.values.len() || rows == 0 || cols == 0 {
        return Err(CliError::Runtime(format!("heatmap shape {:?} does not match {} values", map.shape, map.values.len())));
    }
    if let Some(i) = map.values.iter().position(|v| !v.is_finite()) {
        return Err(CliError::Runtime(format!("heatmap value {i} is not finite")));
    }
    let png = base64::engine::general_purpose::STANDARD.encode(png_bytes(map.values, rows, cols)?);
    let (lo, hi) = map.values.iter().fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), &v| (a.min(v), b.max(v)));
    let (left, top, size) = (70.0, 40.0, 400.0);
    let mut s = String::new();
    let _ = writeln!(s, r#"<svg xmlns="http://www.w3.org/2000/svg" width="{}" height="{}" viewBox="0 0 {} {}">"#, 560, 500, 560, 500);
    let _ = writeln!(s, r#"<rect width="560" height="500" fill="white"/>"#);
    let _ = writeln!(s, r#"<text x="{}" y="24" font-family="sans-serif" font-size="14" text-anchor="middle">{}</text>"#, left + size / 2.0, escape(map.title));
    let _ = writeln!(
        s,
        r#"<image x="{left}" y="{top}" width="{size}" height="{size}" preserveAspectRatio="none" style="image-rendering:pixelated" href="data:image/png;base64,{png}"/>"#
    );
    let _ = writeln!(s, r#"<rect x="{left}" y="{top}" width="{size}" height="{size}" fill="none" stroke="black"/>"#);
    for k in 0..=4 {
        let f = k as f64 / 4.0;
        let xv = map.x_range.0 + f * (map.x_range.1 - map.x_range.0);
        let yv = map.y_range.0 + f * (map.y_range.1 - map.y_range.0);
        let px = left + f * size;
        let py = top + size - f * size;
        let _ = writeln!(s, r#"<line x1="{px}" y1="{}" x2="{px}" y2="{}" stroke="black"/>"#, top + size, top + size + 5.0);
        let _ = writeln!(s, r#"<text x="{px}" y="{}" font-family="sans-serif" font-size="11" text-anchor="middle">{}</text>"#, top + size + 18.0, tick(xv));
        let _ = writeln!(s, r#"<line x1="{}" y1="{py}" x2="{left}" y2="{py}" stroke="black"/>"#, left - 5.0);
        let _ = writeln!(s, r#"<text x="{}" y="{}" font-family="sans-serif" font-size="11" text-anchor="end">{}</text>"#, left - 8.0, py + 4.0, tick(yv));
    }
    let _ = writeln!(s, r#"<text x="{}" y="{}" font-family="sans-serif" font-size="12" text-anchor="middle">{}</text>"#, left + size / 2.0, top + size + 36.0, escape(map.x_label));
    let _ = writeln!(
        s,
        r#"<text x="20" y="{}" font-family="sans-serif" font-size="12" text-anchor="middle" transform="rotate(-90 20 {})">{}</text>"#,
        top + size / 2.0,
        top + size / 2.0,
        escape(map.y_label)
    );
    // colour bar
    let bx = left + size + 20.0;
    for k in 0..50 {
        let t = 1.0 - k as f64 / 49.0;
        let [r, g, b] = colour(t);
        let _ = writeln!(s, r#"<rect x="{bx}" y="{}" width="16" height="{}" fill="rgb({r},{g},{b})"/>"#, top + k as f64 * size / 50.0, size / 50.0 + 0.5);
    }
    let _ = writeln!(s, r#"<text x="{}" y="{}" font-family="sans-serif" font-size="10">{}</text>"#, bx + 20.0, top + 8.0, format_value(hi));
    let _ = writeln!(s, r#"<text x="{}" y="{}" font-family="sans-serif" font-size="10">{}</text>"#, bx + 20.0, top + size, format_value(lo));
    s.push_str("</svg>\n");
    Ok(s)
}

fn format_value(v: f64) -> String {
    format!("{v:.3e}")
}

fn escape(s: &str) -> String {
    s.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;")
}

pub fn export_heatmap(map: &Heatmap, path: &Path) -> Result<(), CliError> {
    std::fs::write(path, heatmap_svg(map)?).map_err(|e| CliError::Io(format!("{}: {e}", path.display())))
}

/// Vertical bars with a dashed reference line (e.g. the ratio bound K).
pub fn bar_chart_svg(title: &str, labels: &[String], values: &[f64], reference: Option<(f64, &str)>) -> Result<String, CliError> {
    if labels.len() != values.len() || values.is_empty() {
        return Err(CliError::Runtime("bar chart needs one label per value".into()));
    }
    if values.iter().any(|v| !v.is_finite()) {
        return Err(CliError::Runtime("bar chart values must be finite".into()));
    }
    let top_value = values.iter().cloned().fold(reference.map_or(0.0, |r| r.0), f64::max).max(1e-300);
    let (left, top, w, h) = (60.0, 40.0, 440.0, 300.0);
    let bw = w / values.len() as f64;
    let mut s = String::new();
    let _ = writeln!(s, r#"<svg xmlns="http://www.w3.org/2000/svg" width="540" height="400" viewBox="0 0 540 400">"#);
    let _ = writeln!(s, r#"<rect width="540" height="400" fill="white"/>"#);
    let _ = writeln!(s, r#"<text x="{}" y="24" font-family="sans-serif" font-size="14" text-anchor="middle">{}</text>"#, left + w / 2.0, escape(title));
    for (i, (l, v)) in labels.iter().zip(values).enumerate() {
        let bh = v.max(0.0) / top_value * h;
        let x = left + i as f64 * bw + 0.15 * bw;
        let _ = writeln!(s, r#"<rect x="{x:.2}" y="{:.2}" width="{:.2}" height="{bh:.2}" fill="rgb(59,82,139)"/>"#, top + h - bh, 0.7 * bw);
        let _ = writeln!(s, r#"<text x="{:.2}" y="{:.2}" font-family="sans-serif" font-size="10" text-anchor="middle">{:.3}</text>"#, x + 0.35 * bw, top + h - bh - 4.0, v);
        let _ = writeln!(s, r#"<text x="{:.2}" y="{}" font-family="sans-serif" font-size="10" text-anchor="middle">{}</text>"#, x + 0.35 * bw, top + h + 16.0, escape(l));
    }
    if let Some((r, name)) = reference {
        let y = top + h - r / top_value * h;
        let _ = writeln!(s, r#"<line x1="{left}" y1="{y:.2}" x2="{}" y2="{y:.2}" stroke="red" stroke-dasharray="6 4"/>"#, left + w);
        let _ = writeln!(s, r#"<text x="{}" y="{:.2}" font-family="sans-serif" font-size="10" fill="red" text-anchor="end">{}</text>"#, left + w, y - 4.0, escape(name));
    }
    let _ = writeln!(s, r#"<line x1="{left}" y1="{}" x2="{}" y2="{}" stroke="black"/>"#, top + h, left + w, top + h);
    let _ = writeln!(s, r#"<line x1="{left}" y1="{top}" x2="{left}" y2="{}" stroke="black"/>"#, top + h);
    let _ = writeln!(s, r#"<text x="{}" y="{}" font-family="sans-serif" font-size="10" text-anchor="end">0</text>"#, left - 6.0, top + h + 4.0);
    let _ = writeln!(s, r#"<text x="{}" y="{}" font-family="sans-serif" font-size="10" text-anchor="end">{:.3}</text>"#, left - 6.0, top + 4.0, top_value);
    s.push_str("</svg>\n");
    Ok(s)
}
