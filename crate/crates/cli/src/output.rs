//! Files written after a run: `series*.csv`, `summary.json`, `config.toml`
//! and the SVG plots.

use crate::error::{CliError, Result};
use serde::Serialize;
use std::fmt::Write as _;
use std::path::{Path, PathBuf};
use wklab::experiments::{ExperimentReport, Series};
use wklab::virial::DiagnosticsRecord;

/// 17 significant digits, enough to recover every `f64` exactly.
pub fn format_number(v: f64) -> String {
    format!("{v:.16e}")
}

pub fn write_series_csv(path: &Path, radii: &[f64], records: &[DiagnosticsRecord]) -> Result<()> {
    let err = |e: csv::Error| CliError::write(path, e);
    let mut w = csv::Writer::from_path(path).map_err(err)?;
    w.write_record(DiagnosticsRecord::header(radii)).map_err(err)?;
    for r in records {
        w.write_record(r.row().into_iter().map(format_number)).map_err(err)?;
    }
    w.flush().map_err(|e| CliError::write(path, e))
}

/// Header and rows of a series file.
pub fn read_series_csv(path: &Path) -> Result<(Vec<String>, Vec<Vec<f64>>)> {
    let err = |e: csv::Error| CliError::Invalid(format!("{}: {e}", path.display()));
    let mut r = csv::Reader::from_path(path).map_err(err)?;
    let header = r.headers().map_err(err)?.iter().map(String::from).collect();
    let mut rows = Vec::new();
    for rec in r.records() {
        let rec = rec.map_err(err)?;
        let row = rec
            .iter()
            .map(|s| s.parse::<f64>())
            .collect::<std::result::Result<Vec<f64>, _>>()
            .map_err(|e| CliError::Invalid(format!("{}: {e}", path.display())))?;
        rows.push(row);
    }
    Ok((header, rows))
}

#[derive(Debug, Serialize)]
pub struct SummaryDocument<'a> {
    pub command: &'a str,
    pub passed: bool,
    pub reports: &'a [ExperimentReport],
}

pub fn summary_json(command: &str, reports: &[ExperimentReport]) -> String {
    let doc = SummaryDocument {
        command,
        passed: reports.iter().all(|r| r.passed),
        reports,
    };
    let mut s = serde_json::to_string_pretty(&doc).expect("summary serializes");
    s.push('\n');
    s
}

/// Line plot of the named columns against `t`, one polyline per column.
pub fn series_svg(series: &Series, columns: &[String], log_y: bool) -> String {
    const W: f64 = 720.0;
    const H: f64 = 420.0;
    const PAD: f64 = 50.0;
    const COLORS: [&str; 6] = ["#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#17becf"];

    let header = DiagnosticsRecord::header(&series.radii);
    let rows: Vec<Vec<f64>> = series.records.iter().map(DiagnosticsRecord::row).collect();
    let transform = |v: f64| if log_y { v.abs().log10() } else { v };
    let lines: Vec<(&String, Vec<(f64, f64)>)> = columns
        .iter()
        .filter_map(|c| header.iter().position(|h| h == c).map(|k| (c, k)))
        .map(|(c, k)| {
            let pts = rows
                .iter()
                .map(|row| (row[0], transform(row[k])))
                .filter(|(_, y)| y.is_finite())
                .collect();
            (c, pts)
        })
        .collect();

    let all = lines.iter().flat_map(|(_, p)| p.iter());
    let (mut x0, mut x1, mut y0, mut y1) = (f64::MAX, f64::MIN, f64::MAX, f64::MIN);
    for &(x, y) in all {
        x0 = x0.min(x);
        x1 = x1.max(x);
        y0 = y0.min(y);
        y1 = y1.max(y);
    }
    if x0 > x1 {
        (x0, x1, y0, y1) = (0.0, 1.0, 0.0, 1.0);
    }
    if x1 == x0 {
        x1 = x0 + 1.0;
    }
    if y1 == y0 {
        y1 = y0 + 1.0;
    }
    let sx = |x: f64| PAD + (x - x0) / (x1 - x0) * (W - 2.0 * PAD);
    let sy = |y: f64| H - PAD - (y - y0) / (y1 - y0) * (H - 2.0 * PAD);

    let mut s = String::new();
    let _ = writeln!(
        s,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{W}" height="{H}" viewBox="0 0 {W} {H}">"#
    );
    let _ = writeln!(s, r#"<rect width="{W}" height="{H}" fill="white"/>"#);
    let _ = writeln!(
        s,
        r#"<rect x="{PAD}" y="{PAD}" width="{}" height="{}" fill="none" stroke="black"/>"#,
        W - 2.0 * PAD,
        H - 2.0 * PAD
    );
    let _ = writeln!(
        s,
        r#"<text x="{PAD}" y="30" font-family="sans-serif" font-size="14">{}</text>"#,
        series.label
    );
    let ylabel = if log_y { "log10 |y|" } else { "y" };
    let _ = writeln!(
        s,
        r#"<text x="5" y="{}" font-family="sans-serif" font-size="11">{ylabel} [{:.3}, {:.3}]</text>"#,
        H - 10.0,
        y0,
        y1
    );
    let _ = writeln!(
        s,
        r#"<text x="{}" y="{}" font-family="sans-serif" font-size="11" text-anchor="end">t [{x0}, {x1}]</text>"#,
        W - PAD,
        H - 10.0
    );
    for (i, (name, pts)) in lines.iter().enumerate() {
        let color = COLORS[i % COLORS.len()];
        let points: Vec<String> =
            pts.iter().map(|&(x, y)| format!("{:.2},{:.2}", sx(x), sy(y))).collect();
        let _ = writeln!(
            s,
            r#"<polyline data-series="{name}" fill="none" stroke="{color}" stroke-width="1.5" points="{}"/>"#,
            points.join(" ")
        );
        let _ = writeln!(
            s,
            r#"<text x="{}" y="{}" font-family="sans-serif" font-size="12" fill="{color}">{name}</text>"#,
            W - PAD - 100.0,
            PAD + 16.0 * (i as f64 + 1.0)
        );
    }
    s.push_str("</svg>\n");
    s
}

/// Options for [`emit_outputs`].
#[derive(Debug, Clone)]
pub struct OutputSpec<'a> {
    pub directory: &'a Path,
    pub radii: &'a [f64],
    pub svg: bool,
    pub log_y: bool,
    pub plot: &'a [String],
    pub config_echo: &'a str,
}

fn write_file(path: &Path, text: &str) -> Result<()> {
    std::fs::write(path, text).map_err(|e| CliError::write(path, e))
}

fn file_label(report: &str, series: &str, many_reports: bool) -> String {
    let label = if many_reports {
        format!("{report}_{series}")
    } else {
        series.to_string()
    };
    label
        .chars()
        .map(|c| if c.is_ascii_alphanumeric() || c == '.' || c == '-' { c } else { '_' })
        .collect()
}

/// Writes every output of a finished command and returns the paths.
///
/// `series.csv` holds the first series, or only the header when there is
/// none. With more than one series each also gets `series_<label>.csv`.
pub fn emit_outputs(command: &str, reports: &[ExperimentReport], spec: &OutputSpec) -> Result<Vec<PathBuf>> {
    let dir = spec.directory;
    std::fs::create_dir_all(dir).map_err(|e| CliError::write(dir, e))?;
    let mut written = Vec::new();

    let many_reports = reports.iter().filter(|r| !r.series.is_empty()).count() > 1;
    let all: Vec<(&ExperimentReport, &Series)> =
        reports.iter().flat_map(|r| r.series.iter().map(move |s| (r, s))).collect();

    let main = dir.join("series.csv");
    match all.first() {
        Some((_, s)) => write_series_csv(&main, &s.radii, &s.records)?,
        None => write_series_csv(&main, spec.radii, &[])?,
    }
    written.push(main);
    if all.len() > 1 {
        for (r, s) in &all {
            let p = dir.join(format!("series_{}.csv", file_label(&r.experiment, &s.label, many_reports)));
            write_series_csv(&p, &s.radii, &s.records)?;
            written.push(p);
        }
    }
    if spec.svg {
        for (r, s) in &all {
            let p = dir.join(format!("plot_{}.svg", file_label(&r.experiment, &s.label, many_reports)));
            write_file(&p, &series_svg(s, spec.plot, spec.log_y))?;
            written.push(p);
        }
    }
    let p = dir.join("summary.json");
    write_file(&p, &summary_json(command, reports))?;
    written.push(p);
    let p = dir.join("config.toml");
    write_file(&p, spec.config_echo)?;
    written.push(p);
    Ok(written)
}
