//! Self-contained SVG semi-log plots of relative cost error, drawn from the
//! trace CSVs alone.

use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use crate::error::Result;

use super::metrics::{read_trace_csv, TraceRow};

/// Values below this are drawn at the floor of the log axis.
pub const LOG_FLOOR: f64 = 1e-16;

pub const TRANSMISSIONS_PLOT: &str = "error_vs_transmissions.svg";
pub const COMPUTATION_PLOT: &str = "error_vs_computation.svg";

const WIDTH: f64 = 720.0;
const HEIGHT: f64 = 480.0;
const LEFT: f64 = 80.0;
const RIGHT: f64 = 200.0;
const TOP: f64 = 40.0;
const BOTTOM: f64 = 60.0;
const PALETTE: [&str; 8] = [
    "#1f77b4", "#d62728", "#2ca02c", "#ff7f0e", "#9467bd", "#8c564b", "#e377c2", "#17becf",
];

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum XAxis {
    Transmissions,
    GradientEvaluations,
}

impl XAxis {
    fn label(self) -> &'static str {
        match self {
            XAxis::Transmissions => "total transmissions",
            XAxis::GradientEvaluations => "total gradient evaluations",
        }
    }

    fn value(self, r: &TraceRow) -> f64 {
        match self {
            XAxis::Transmissions => r.transmissions_total as f64,
            XAxis::GradientEvaluations => r.grad_evals_total as f64,
        }
    }
}

fn escape(s: &str) -> String {
    s.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;")
}

/// Render relative cost error against `axis` for each named trace.
pub fn render_semilog_svg(title: &str, axis: XAxis, series: &[(String, Vec<TraceRow>)]) -> String {
    let pts: Vec<Vec<(f64, f64)>> = series
        .iter()
        .map(|(_, rows)| {
            rows.iter()
                .map(|r| (axis.value(r), r.rel_cost_error.max(LOG_FLOOR).log10()))
                .collect()
        })
        .collect();
    let all = pts.iter().flatten();
    let (mut x_lo, mut x_hi, mut y_lo, mut y_hi) = (f64::INFINITY, f64::NEG_INFINITY, f64::INFINITY, f64::NEG_INFINITY);
    for &(x, y) in all {
        x_lo = x_lo.min(x);
        x_hi = x_hi.max(x);
        y_lo = y_lo.min(y);
        y_hi = y_hi.max(y);
    }
    if !x_lo.is_finite() {
        (x_lo, x_hi, y_lo, y_hi) = (0.0, 1.0, -1.0, 0.0);
    }
    if x_hi <= x_lo {
        x_hi = x_lo + 1.0;
    }
    let y_lo = y_lo.floor();
    let y_hi = y_hi.ceil().max(y_lo + 1.0);
    let pw = WIDTH - LEFT - RIGHT;
    let ph = HEIGHT - TOP - BOTTOM;
    let sx = |x: f64| LEFT + (x - x_lo) / (x_hi - x_lo) * pw;
    let sy = |y: f64| TOP + (y_hi - y) / (y_hi - y_lo) * ph;

    let mut s = String::new();
    let _ = writeln!(
        s,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{WIDTH}" height="{HEIGHT}" viewBox="0 0 {WIDTH} {HEIGHT}" font-family="sans-serif" font-size="12">"#
    );
    let _ = writeln!(s, r#"<rect width="100%" height="100%" fill="white"/>"#);
    let _ = writeln!(s, r#"<text x="{}" y="22" text-anchor="middle" font-size="14">{}</text>"#, LEFT + pw / 2.0, escape(title));
    let _ = writeln!(s, r#"<rect x="{LEFT}" y="{TOP}" width="{pw}" height="{ph}" fill="none" stroke="black"/>"#);

    let decade_step = ((y_hi - y_lo) / 8.0).ceil().max(1.0);
    let mut e = y_lo;
    while e <= y_hi + 1e-9 {
        let y = sy(e);
        let _ = writeln!(s, r##"<line x1="{LEFT}" y1="{y:.2}" x2="{:.2}" y2="{y:.2}" stroke="#dddddd"/>"##, LEFT + pw);
        let _ = writeln!(s, r#"<text x="{:.2}" y="{:.2}" text-anchor="end">1e{}</text>"#, LEFT - 6.0, y + 4.0, e as i64);
        e += decade_step;
    }
    for t in 0..=5 {
        let xv = x_lo + (x_hi - x_lo) * t as f64 / 5.0;
        let x = sx(xv);
        let _ = writeln!(s, r##"<line x1="{x:.2}" y1="{TOP}" x2="{x:.2}" y2="{:.2}" stroke="#dddddd"/>"##, TOP + ph);
        let _ = writeln!(s, r#"<text x="{x:.2}" y="{:.2}" text-anchor="middle">{xv:.3e}</text>"#, TOP + ph + 18.0);
    }
    let _ = writeln!(s, r#"<text x="{:.2}" y="{:.2}" text-anchor="middle">{}</text>"#, LEFT + pw / 2.0, HEIGHT - 16.0, axis.label());
    let _ = writeln!(
        s,
        r#"<text x="18" y="{:.2}" text-anchor="middle" transform="rotate(-90 18 {:.2})">relative cost error</text>"#,
        TOP + ph / 2.0,
        TOP + ph / 2.0
    );

    for (idx, ((name, _), p)) in series.iter().zip(&pts).enumerate() {
        let color = PALETTE[idx % PALETTE.len()];
        let mut path = String::new();
        for (j, &(x, y)) in p.iter().enumerate() {
            let _ = write!(path, "{}{:.2},{:.2}", if j == 0 { "M" } else { " L" }, sx(x), sy(y));
        }
        let _ = writeln!(s, r#"<path d="{path}" fill="none" stroke="{color}" stroke-width="1.5"/>"#);
        let ly = TOP + 10.0 + 18.0 * idx as f64;
        let lx = LEFT + pw + 12.0;
        let _ = writeln!(s, r#"<line x1="{lx}" y1="{ly}" x2="{}" y2="{ly}" stroke="{color}" stroke-width="2"/>"#, lx + 20.0);
        let _ = writeln!(s, r#"<text x="{}" y="{}">{}</text>"#, lx + 26.0, ly + 4.0, escape(name));
    }
    s.push_str("</svg>\n");
    s
}

/// Trace CSVs directly inside `dir`, sorted by file name.
pub fn trace_files(dir: &Path) -> Result<Vec<PathBuf>> {
    let mut files: Vec<PathBuf> = std::fs::read_dir(dir)?
        .filter_map(|e| e.ok().map(|e| e.path()))
        .filter(|p| p.is_file() && p.extension().is_some_and(|e| e == "csv"))
        .collect();
    files.sort();
    Ok(files)
}

/// Redraw both plots in `dir` from its trace CSVs; returns the written paths.
pub fn regenerate_plots(dir: &Path) -> Result<Vec<PathBuf>> {
    let series = trace_files(dir)?
        .into_iter()
        .map(|p| {
            let name = p.file_stem().map(|s| s.to_string_lossy().into_owned()).unwrap_or_default();
            Ok((name, read_trace_csv(&p)?))
        })
        .collect::<Result<Vec<_>>>()?;
    let mut out = Vec::new();
    for (file, axis, title) in [
        (TRANSMISSIONS_PLOT, XAxis::Transmissions, "Relative cost error vs communication"),
        (COMPUTATION_PLOT, XAxis::GradientEvaluations, "Relative cost error vs computation"),
    ] {
        let path = dir.join(file);
        std::fs::write(&path, render_semilog_svg(title, axis, &series))?;
        out.push(path);
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn row(k: usize, e: f64) -> TraceRow {
        TraceRow {
            k,
            transmissions_total: 10 * k as u64,
            grad_evals_total: 3 * k as u64,
            rel_cost_error: e,
            primal_error_norm: 0.0,
            dual_sum_norm: 0.0,
            lyapunov_value: 0.0,
        }
    }

    #[test]
    fn svg_contains_one_path_per_series() {
        let series = vec![
            ("a<b".to_string(), vec![row(0, 1.0), row(1, 1e-3)]),
            ("c".to_string(), vec![row(0, 1.0), row(1, 0.0)]),
        ];
        let svg = render_semilog_svg("t", XAxis::Transmissions, &series);
        assert_eq!(svg.matches("<path").count(), 2);
        assert!(svg.contains("a&lt;b"));
        assert!(svg.ends_with("</svg>\n"));
    }

    #[test]
    fn empty_input_still_renders() {
        let svg = render_semilog_svg("t", XAxis::GradientEvaluations, &[]);
        assert!(svg.starts_with("<svg"));
    }
}
