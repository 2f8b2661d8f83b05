use std::fmt::Write as _;
use std::path::Path;

use super::config::ExportFormat;
use super::experiment::{AggregateResult, ResultRow};
use crate::error::{Error, Result};
use crate::policy::PolicyKind;

fn csv_err(e: csv::Error) -> Error {
    Error::Io(e.to_string())
}

/// CSV text with header `sweep_param,policy,checkpoint,mean,min,max,stderr,seed`.
pub fn to_csv(result: &AggregateResult) -> Result<String> {
    if result.is_empty() {
        return Err(Error::InsufficientData("no result rows to export".into()));
    }
    let mut w = csv::Writer::from_writer(Vec::new());
    for r in &result.rows {
        w.serialize(r).map_err(csv_err)?;
    }
    let bytes = w.into_inner().map_err(|e| Error::Io(e.to_string()))?;
    String::from_utf8(bytes).map_err(|e| Error::Io(e.to_string()))
}

pub fn parse_csv(text: &str) -> Result<Vec<ResultRow>> {
    csv::Reader::from_reader(text.as_bytes())
        .deserialize()
        .collect::<std::result::Result<Vec<ResultRow>, _>>()
        .map_err(|e| Error::Parse(e.to_string()))
}

pub fn to_json(result: &AggregateResult) -> Result<String> {
    if result.is_empty() {
        return Err(Error::InsufficientData("no result rows to export".into()));
    }
    serde_json::to_string_pretty(result).map_err(|e| Error::Io(e.to_string()))
}

const COLORS: [&str; 4] = ["#1f77b4", "#d62728", "#2ca02c", "#9467bd"];

/// Mean regret per policy with the min/max range shaded.
///
/// The x axis is the checkpoint horizon, or the swept value when every row
/// shares one horizon. It switches to log scale when x spans more than a
/// factor of ten.
pub fn to_svg(result: &AggregateResult) -> Result<String> {
    if result.is_empty() {
        return Err(Error::InsufficientData("no result rows to export".into()));
    }
    let first = result.rows[0].checkpoint;
    let by_horizon = result.rows.iter().any(|r| r.checkpoint != first);
    let xval = |r: &ResultRow| if by_horizon { r.checkpoint as f64 } else { r.sweep_param };

    let xs: Vec<f64> = result.rows.iter().map(xval).collect();
    let (x0, x1) = bounds(&xs);
    let log_x = x0 > 0.0 && x1 / x0 > 10.0;
    let tx = |x: f64| if log_x { x.ln() } else { x };
    let (tx0, tx1) = (tx(x0), tx(x1));
    let ys: Vec<f64> = result.rows.iter().flat_map(|r| [r.min, r.max]).collect();
    let (y0, y1) = bounds(&ys);

    let (w, h, m) = (640.0, 400.0, 60.0);
    let px = |x: f64| m + (tx(x) - tx0) / span(tx0, tx1) * (w - 2.0 * m);
    let py = |y: f64| h - m - (y - y0) / span(y0, y1) * (h - 2.0 * m);

    let mut s = String::new();
    let _ = writeln!(
        s,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{w}" height="{h}" viewBox="0 0 {w} {h}" font-family="sans-serif" font-size="12">"#
    );
    let _ = writeln!(s, r#"<rect width="{w}" height="{h}" fill="white"/>"#);
    let _ = writeln!(
        s,
        r#"<path d="M{m} {m} V{} H{}" fill="none" stroke="black"/>"#,
        h - m,
        w - m
    );
    let xlabel = if by_horizon {
        "horizon T".to_string()
    } else {
        result.config.get("sweep").cloned().unwrap_or_else(|| "parameter".into())
    };
    let _ = writeln!(
        s,
        r#"<text x="{}" y="{}" text-anchor="middle">{}{}</text>"#,
        w / 2.0,
        h - 15.0,
        xlabel,
        if log_x { " (log scale)" } else { "" }
    );
    let _ = writeln!(
        s,
        r#"<text x="15" y="{}" transform="rotate(-90 15 {})" text-anchor="middle">regret</text>"#,
        h / 2.0,
        h / 2.0
    );
    for (x, anchor) in [(x0, "start"), (x1, "end")] {
        let _ = writeln!(
            s,
            r#"<text x="{:.2}" y="{}" text-anchor="{anchor}">{}</text>"#,
            px(x),
            h - m + 16.0,
            fmt_num(x)
        );
    }
    for y in [y0, y1] {
        let _ = writeln!(
            s,
            r#"<text x="{}" y="{:.2}" text-anchor="end">{}</text>"#,
            m - 4.0,
            py(y) + 4.0,
            fmt_num(y)
        );
    }

    let mut legend_y = m;
    for (pi, policy) in PolicyKind::ALL.iter().enumerate() {
        let mut rows = result.series(*policy);
        if rows.is_empty() {
            continue;
        }
        rows.sort_by(|a, b| xval(a).total_cmp(&xval(b)));
        let color = COLORS[pi % COLORS.len()];
        let upper: Vec<String> = rows.iter().map(|r| format!("{:.2},{:.2}", px(xval(r)), py(r.max))).collect();
        let lower: Vec<String> = rows
            .iter()
            .rev()
            .map(|r| format!("{:.2},{:.2}", px(xval(r)), py(r.min)))
            .collect();
        let _ = writeln!(
            s,
            r#"<polygon points="{} {}" fill="{color}" fill-opacity="0.2" stroke="none"/>"#,
            upper.join(" "),
            lower.join(" ")
        );
        let mean: Vec<String> = rows.iter().map(|r| format!("{:.2},{:.2}", px(xval(r)), py(r.mean))).collect();
        let _ = writeln!(
            s,
            r#"<polyline points="{}" fill="none" stroke="{color}" stroke-width="2"/>"#,
            mean.join(" ")
        );
        for r in &rows {
            let _ = writeln!(
                s,
                r#"<circle cx="{:.2}" cy="{:.2}" r="3" fill="{color}"/>"#,
                px(xval(r)),
                py(r.mean)
            );
        }
        let _ = writeln!(
            s,
            r#"<text x="{}" y="{legend_y}" fill="{color}">{}</text>"#,
            w - m - 70.0,
            policy.token()
        );
        legend_y += 16.0;
    }
    s.push_str("</svg>\n");
    Ok(s)
}

fn bounds(v: &[f64]) -> (f64, f64) {
    let lo = v.iter().copied().fold(f64::INFINITY, f64::min);
    let hi = v.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    (lo, hi)
}

fn span(a: f64, b: f64) -> f64 {
    if b > a {
        b - a
    } else {
        1.0
    }
}

fn fmt_num(x: f64) -> String {
    if x != 0.0 && (x.abs() >= 1e4 || x.abs() < 1e-3) {
        format!("{x:.2e}")
    } else {
        format!("{x:.4}")
    }
}

/// Renders `result` and writes it to `path`. Nothing is written when the
/// result is empty.
pub fn export(result: &AggregateResult, format: ExportFormat, path: &Path) -> Result<()> {
    let text = match format {
        ExportFormat::Csv => to_csv(result)?,
        ExportFormat::Json => to_json(result)?,
        ExportFormat::Svg => to_svg(result)?,
    };
    std::fs::write(path, text)?;
    Ok(())
}
