//! CSV and SVG output for sweeps and cylinder counts.

use std::fmt::Write as _;
use std::path::Path;

use crate::cylinder::{entropy_estimate, RefinementTree};
use crate::error::{Error, Result};
use crate::regularity::SweepResult;
use crate::scalar::format_rational;

/// Shortest decimal that round-trips the value rounded to 15 significant
/// digits.
pub fn fmt_float(x: f64) -> String {
    if x == 0.0 {
        return "0".into();
    }
    if !x.is_finite() {
        return x.to_string();
    }
    let rounded: f64 = format!("{x:.14e}").parse().expect("formatted float parses");
    rounded.to_string()
}

fn csv_err(e: csv::Error) -> Error {
    Error::Format(e.to_string())
}

fn finish(w: csv::Writer<Vec<u8>>) -> Result<String> {
    let bytes = w.into_inner().map_err(|e| Error::Format(e.to_string()))?;
    String::from_utf8(bytes).map_err(|e| Error::Format(e.to_string()))
}

/// `s,entropy,p,engine,error_bound,status`, plus `s_exact` when requested.
pub fn sweep_csv(result: &SweepResult, exact_column: bool) -> Result<String> {
    if result.rows.is_empty() {
        return Err(Error::Format("empty sweep".into()));
    }
    let mut w = csv::Writer::from_writer(Vec::new());
    let mut header = vec!["s", "entropy", "p", "engine", "error_bound", "status"];
    if exact_column {
        header.push("s_exact");
    }
    w.write_record(&header).map_err(csv_err)?;
    for r in &result.rows {
        let mut rec = vec![
            fmt_float(r.s_f64()),
            r.entropy.map(fmt_float).unwrap_or_default(),
            r.p.map(|p| p.to_string()).unwrap_or_default(),
            r.engine.clone(),
            r.error_bound.map(fmt_float).unwrap_or_default(),
            r.status.clone(),
        ];
        if exact_column {
            rec.push(format_rational(&r.s));
        }
        w.write_record(&rec).map_err(csv_err)?;
    }
    finish(w)
}

/// `level,count,entropy_estimate` for every refined level.
pub fn counts_csv(tree: &RefinementTree) -> Result<String> {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(["level", "count", "entropy_estimate"]).map_err(csv_err)?;
    for n in 1..=tree.depth {
        w.write_record([n.to_string(), tree.count(n).to_string(), fmt_float(entropy_estimate(tree, n))])
            .map_err(csv_err)?;
    }
    finish(w)
}

#[derive(Clone, Debug)]
pub struct PlotStyle {
    pub title: String,
    pub x_label: String,
    pub y_label: String,
    pub stroke: String,
}

impl Default for PlotStyle {
    fn default() -> PlotStyle {
        PlotStyle {
            title: "Topological entropy".into(),
            x_label: "s".into(),
            y_label: "entropy".into(),
            stroke: "#1f4e9c".into(),
        }
    }
}

fn escape(s: &str) -> String {
    s.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;").replace('"', "&quot;")
}

/// Line plot of the successful rows on an 800×600 canvas.
pub fn sweep_svg(result: &SweepResult, style: &PlotStyle) -> Result<String> {
    let pts: Vec<(f64, f64)> = result.rows.iter().filter_map(|r| r.entropy.map(|h| (r.s_f64(), h))).collect();
    if pts.is_empty() {
        return Err(Error::Format("nothing to plot".into()));
    }
    let (w, h) = (800.0, 600.0);
    let (left, right, top, bottom) = (80.0, 30.0, 50.0, 70.0);
    let (pw, ph) = (w - left - right, h - top - bottom);
    let xmin = pts.iter().map(|p| p.0).fold(f64::INFINITY, f64::min);
    let xmax = pts.iter().map(|p| p.0).fold(f64::NEG_INFINITY, f64::max);
    let ymin = 0f64.min(pts.iter().map(|p| p.1).fold(f64::INFINITY, f64::min));
    let mut ymax = pts.iter().map(|p| p.1).fold(f64::NEG_INFINITY, f64::max);
    if ymax <= ymin {
        ymax = ymin + 1.0;
    }
    let xspan = if xmax > xmin { xmax - xmin } else { 1.0 };
    let sx = |x: f64| left + (x - xmin) / xspan * pw;
    let sy = |y: f64| top + ph - (y - ymin) / (ymax - ymin) * ph;

    let mut out = String::new();
    let _ = writeln!(out, r#"<svg xmlns="http://www.w3.org/2000/svg" viewBox="0 0 800 600" width="800" height="600">"#);
    let _ = writeln!(out, r#"<rect width="800" height="600" fill="white"/>"#);
    let _ = writeln!(
        out,
        r#"<text x="400" y="30" text-anchor="middle" font-family="sans-serif" font-size="18">{}</text>"#,
        escape(&style.title)
    );
    let (x0, y0, x1, y1) = (left, top + ph, left + pw, top);
    let _ = writeln!(out, r#"<line x1="{x0}" y1="{y0}" x2="{x1}" y2="{y0}" stroke="black"/>"#);
    let _ = writeln!(out, r#"<line x1="{x0}" y1="{y0}" x2="{x0}" y2="{y1}" stroke="black"/>"#);
    for i in 0..=4 {
        let fx = xmin + xspan * f64::from(i) / 4.0;
        let fy = ymin + (ymax - ymin) * f64::from(i) / 4.0;
        let (px, py) = (sx(fx), sy(fy));
        let _ = writeln!(out, r#"<line x1="{px:.2}" y1="{y0}" x2="{px:.2}" y2="{:.2}" stroke="black"/>"#, y0 + 5.0);
        let _ = writeln!(
            out,
            r#"<text x="{px:.2}" y="{:.2}" text-anchor="middle" font-family="sans-serif" font-size="12">{:.4}</text>"#,
            y0 + 20.0,
            fx
        );
        let _ = writeln!(out, r#"<line x1="{:.2}" y1="{py:.2}" x2="{x0}" y2="{py:.2}" stroke="black"/>"#, x0 - 5.0);
        let _ = writeln!(
            out,
            r#"<text x="{:.2}" y="{:.2}" text-anchor="end" font-family="sans-serif" font-size="12">{:.4}</text>"#,
            x0 - 8.0,
            py + 4.0,
            fy
        );
    }
    let _ = writeln!(
        out,
        r#"<text x="{:.2}" y="{:.2}" text-anchor="middle" font-family="sans-serif" font-size="14">{}</text>"#,
        left + pw / 2.0,
        h - 20.0,
        escape(&style.x_label)
    );
    let _ = writeln!(
        out,
        r#"<text x="20" y="{:.2}" text-anchor="middle" font-family="sans-serif" font-size="14" transform="rotate(-90 20 {:.2})">{}</text>"#,
        top + ph / 2.0,
        top + ph / 2.0,
        escape(&style.y_label)
    );
    let poly: Vec<String> = pts.iter().map(|&(x, y)| format!("{:.2},{:.2}", sx(x), sy(y))).collect();
    let _ = writeln!(
        out,
        r#"<polyline fill="none" stroke="{}" stroke-width="1.5" points="{}"/>"#,
        escape(&style.stroke),
        poly.join(" ")
    );
    out.push_str("</svg>\n");
    Ok(out)
}

/// Write a text artifact, attaching the path to any I/O failure.
pub fn write_text(path: &Path, contents: &str) -> Result<()> {
    std::fs::write(path, contents).map_err(|source| Error::Io { path: path.to_path_buf(), source })
}
