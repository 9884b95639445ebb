//! Minimal deterministic SVG output: metric-versus-`n` curves from a report
//! and scatter plots of a cloud colored by a binary function.

use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use gtv_core::LabeledCloud;

use crate::error::{CliError, Result};
use crate::report::{RegimeReport, RegimeRow};

const WIDTH: f64 = 480.0;
const HEIGHT: f64 = 360.0;
const MARGIN: f64 = 56.0;
const PALETTE: [&str; 6] = ["#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#8c564b"];

/// A report column plotted against `n`.
#[derive(Debug, Clone, Copy)]
pub struct Metric {
    pub file: &'static str,
    pub label: &'static str,
    pub value: fn(&RegimeRow) -> f64,
}

pub const METRICS: [Metric; 3] = [
    Metric { file: "excess_risk.svg", label: "excess risk", value: |r| r.excess_risk },
    Metric { file: "bayes_disagreement.svg", label: "1 - Bayes agreement", value: |r| 1.0 - r.bayes_agreement },
    Metric { file: "empirical_risk.svg", label: "empirical risk", value: |r| r.empirical_risk },
];

fn median(mut v: Vec<f64>) -> f64 {
    v.sort_by(f64::total_cmp);
    let k = v.len();
    if k % 2 == 1 {
        v[k / 2]
    } else {
        0.5 * (v[k / 2 - 1] + v[k / 2])
    }
}

/// Median over seeds of `metric` for each `n`, per regime.
pub fn curves(report: &RegimeReport, regimes: &[String], metric: &Metric) -> Vec<(String, Vec<(usize, f64)>)> {
    regimes
        .iter()
        .map(|regime| {
            let mut ns: Vec<usize> = report.rows.iter().filter(|r| &r.regime == regime).map(|r| r.n).collect();
            ns.sort_unstable();
            ns.dedup();
            let points = ns
                .into_iter()
                .map(|n| {
                    let vals = report.rows.iter().filter(|r| &r.regime == regime && r.n == n).map(metric.value).collect();
                    (n, median(vals))
                })
                .collect();
            (regime.clone(), points)
        })
        .collect()
}

fn header(out: &mut String, title: &str) {
    let _ = writeln!(
        out,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{WIDTH}" height="{HEIGHT}" viewBox="0 0 {WIDTH} {HEIGHT}" font-family="sans-serif" font-size="11">"#
    );
    let _ = writeln!(out, r#"<rect width="{WIDTH}" height="{HEIGHT}" fill="white"/>"#);
    let _ = writeln!(out, r#"<text x="{}" y="20" text-anchor="middle" font-size="13">{}</text>"#, WIDTH / 2.0, escape(title));
}

fn escape(s: &str) -> String {
    s.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;")
}

/// Expands a degenerate range so a single value still gets a visible axis.
fn padded(lo: f64, hi: f64) -> (f64, f64) {
    if hi - lo > 1e-12 {
        let pad = 0.05 * (hi - lo);
        (lo - pad, hi + pad)
    } else {
        let pad = lo.abs().max(1.0) * 0.1;
        (lo - pad, hi + pad)
    }
}

/// Line chart of the seed-median of `metric` against `log10 n`.
pub fn curve_svg(series: &[(String, Vec<(usize, f64)>)], metric: &Metric) -> String {
    let xs: Vec<f64> = series.iter().flat_map(|(_, p)| p.iter().map(|&(n, _)| (n as f64).log10())).collect();
    let ys: Vec<f64> = series.iter().flat_map(|(_, p)| p.iter().map(|&(_, v)| v)).collect();
    let fold = |v: &[f64]| v.iter().fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), &x| (a.min(x), b.max(x)));
    let (x0, x1) = padded(fold(&xs).0, fold(&xs).1);
    let (y0, y1) = padded(fold(&ys).0, fold(&ys).1);
    let px = |x: f64| MARGIN + (x - x0) / (x1 - x0) * (WIDTH - 2.0 * MARGIN);
    let py = |y: f64| HEIGHT - MARGIN - (y - y0) / (y1 - y0) * (HEIGHT - 2.0 * MARGIN);

    let mut out = String::new();
    header(&mut out, &format!("{} (median over seeds)", metric.label));
    let _ = writeln!(
        out,
        r#"<path d="M{m} {t} V{b} H{r}" fill="none" stroke="black"/>"#,
        m = MARGIN,
        t = MARGIN,
        b = HEIGHT - MARGIN,
        r = WIDTH - MARGIN
    );
    for k in 0..=4 {
        let y = y0 + (y1 - y0) * k as f64 / 4.0;
        let _ = writeln!(out, r#"<text x="{:.1}" y="{:.1}" text-anchor="end">{:.4}</text>"#, MARGIN - 4.0, py(y) + 4.0, y);
    }
    let mut ticks: Vec<usize> = series.iter().flat_map(|(_, p)| p.iter().map(|&(n, _)| n)).collect();
    ticks.sort_unstable();
    ticks.dedup();
    for n in ticks {
        let x = px((n as f64).log10());
        let _ = writeln!(out, r#"<text x="{x:.1}" y="{:.1}" text-anchor="middle">{n}</text>"#, HEIGHT - MARGIN + 16.0);
    }
    let _ = writeln!(out, r#"<text x="{:.1}" y="{:.1}" text-anchor="middle">n (log scale)</text>"#, WIDTH / 2.0, HEIGHT - 12.0);
    for (k, (name, points)) in series.iter().enumerate() {
        let color = PALETTE[k % PALETTE.len()];
        let path: Vec<String> = points
            .iter()
            .enumerate()
            .map(|(i, &(n, v))| format!("{}{:.2} {:.2}", if i == 0 { 'M' } else { 'L' }, px((n as f64).log10()), py(v)))
            .collect();
        let _ = writeln!(out, r#"<path d="{}" fill="none" stroke="{color}" stroke-width="2"/>"#, path.join(" "));
        for &(n, v) in points {
            let _ = writeln!(out, r#"<circle cx="{:.2}" cy="{:.2}" r="3.5" fill="{color}"/>"#, px((n as f64).log10()), py(v));
        }
        let ly = MARGIN + 14.0 * k as f64;
        let _ = writeln!(out, r#"<rect x="{:.1}" y="{:.1}" width="10" height="10" fill="{color}"/>"#, WIDTH - MARGIN - 90.0, ly - 9.0);
        let _ = writeln!(out, r#"<text x="{:.1}" y="{ly:.1}">{}</text>"#, WIDTH - MARGIN - 75.0, escape(name));
    }
    out.push_str("</svg>\n");
    out
}

/// Points colored by a binary function (red for 1, blue for 0). One-dimensional
/// clouds are drawn on a horizontal line.
pub fn scatter_svg(cloud: &LabeledCloud, values: &[f64], title: &str) -> Result<String> {
    if values.len() != cloud.len() {
        return Err(CliError::config("scatter values do not match the cloud"));
    }
    let d = cloud.dim();
    let side = HEIGHT - 2.0 * MARGIN;
    let coord = |k: usize| -> (f64, f64) {
        let v: Vec<f64> = (0..cloud.len()).map(|i| cloud.point(i)[k]).collect();
        let lo = v.iter().cloned().fold(f64::INFINITY, f64::min);
        let hi = v.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
        padded(lo.min(0.0), hi.max(1.0))
    };
    let (ax, bx) = coord(0);
    let (ay, by) = if d >= 2 { coord(1) } else { (0.0, 1.0) };
    let left = (WIDTH - side) / 2.0;
    let mut out = String::new();
    header(&mut out, title);
    let _ = writeln!(out, r#"<rect x="{left:.1}" y="{MARGIN}" width="{side}" height="{side}" fill="none" stroke="black"/>"#);
    let radius = (side / (cloud.len() as f64).sqrt() * 0.35).clamp(0.6, 4.0);
    for i in 0..cloud.len() {
        let p = cloud.point(i);
        let x = left + (p[0] - ax) / (bx - ax) * side;
        let y = if d >= 2 { MARGIN + side - (p[1] - ay) / (by - ay) * side } else { MARGIN + side / 2.0 };
        let color = if values[i] >= 0.5 { "#d62728" } else { "#1f77b4" };
        let _ = writeln!(out, r#"<circle cx="{x:.2}" cy="{y:.2}" r="{radius:.2}" fill="{color}"/>"#);
    }
    out.push_str("</svg>\n");
    Ok(out)
}

/// Writes one curve file per metric for the selected regimes (all when
/// `regime` is `None`) into `out_dir`.
pub fn emit_plots(report: &RegimeReport, regime: Option<&str>, out_dir: &Path) -> Result<Vec<PathBuf>> {
    let available = report.regimes();
    if available.is_empty() {
        return Err(CliError::Report("report has no rows".into()));
    }
    let selected: Vec<String> = match regime {
        None => available,
        Some(tag) if available.iter().any(|r| r == tag) => vec![tag.to_string()],
        Some(tag) => {
            return Err(CliError::config(format!(
                "no rows for regime `{tag}`; available regimes: {}",
                available.join(", ")
            )))
        }
    };
    std::fs::create_dir_all(out_dir).map_err(|e| CliError::io(out_dir, e))?;
    let mut written = Vec::new();
    for metric in &METRICS {
        let svg = curve_svg(&curves(report, &selected, metric), metric);
        let path = out_dir.join(metric.file);
        std::fs::write(&path, svg).map_err(|e| CliError::io(&path, e))?;
        written.push(path);
    }
    Ok(written)
}
