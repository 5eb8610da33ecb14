use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use super::config::Format;
use super::report::{ExperimentReport, PlotHint};
use super::svg;
use crate::error::Result;

/// Writes the report as CSV: one row per cell, axis columns first, failed
/// cells as empty fields.
pub fn write_csv<W: Write>(report: &ExperimentReport, out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    let mut header: Vec<&str> = report.axes.iter().map(|a| a.name.as_str()).collect();
    header.extend(report.series.iter().map(|s| s.name.as_str()));
    if !header.is_empty() {
        w.write_record(&header)?;
    }
    for cell in 0..report.cells() {
        let idx = report.unravel(cell);
        let mut row: Vec<String> = idx.iter().zip(&report.axes).map(|(&i, a)| a.values[i].to_string()).collect();
        for s in &report.series {
            row.push(s.values[cell].map(|v| v.to_string()).unwrap_or_default());
        }
        w.write_record(&row)?;
    }
    w.flush()?;
    Ok(())
}

pub fn csv_string(report: &ExperimentReport) -> Result<String> {
    let mut buf = Vec::new();
    write_csv(report, &mut buf)?;
    Ok(String::from_utf8(buf).expect("csv output is utf-8"))
}

pub fn json_string(report: &ExperimentReport) -> Result<String> {
    let mut s = serde_json::to_string_pretty(report)?;
    s.push('\n');
    Ok(s)
}

pub fn from_json(text: &str) -> Result<ExperimentReport> {
    let r: ExperimentReport = serde_json::from_str(text)?;
    r.validate()?;
    Ok(r)
}

pub fn svg_string(report: &ExperimentReport) -> String {
    match &report.plot {
        PlotHint::Heatmap { series, log_color } if report.axes.len() == 2 => {
            let name = series.first().map(String::as_str).unwrap_or("");
            svg::heatmap(report, name, *log_color)
        }
        PlotHint::Line { series, log_x, log_y } => svg::line_plot(report, series, *log_x, *log_y),
        _ => svg::line_plot(report, &report.series.iter().map(|s| s.name.clone()).collect::<Vec<_>>(), false, false),
    }
}

/// Writes `<dir>/<name>.<ext>` for every requested format and returns the
/// paths written.
pub fn emit(report: &ExperimentReport, dir: &Path, formats: &[Format]) -> Result<Vec<PathBuf>> {
    fs::create_dir_all(dir)?;
    let mut written = Vec::new();
    for f in formats {
        let (ext, body) = match f {
            Format::Csv => ("csv", csv_string(report)?),
            Format::Json => ("json", json_string(report)?),
            Format::Svg => ("svg", svg_string(report)),
        };
        let path = dir.join(format!("{}.{ext}", report.name));
        fs::write(&path, body)?;
        written.push(path);
    }
    // heatmaps of every grid series, so each protocol gets its own figure
    if formats.contains(&Format::Svg) {
        if let PlotHint::Heatmap { series, log_color } = &report.plot {
            for name in series.iter().skip(1) {
                let path = dir.join(format!("{}_{name}.svg", report.name));
                fs::write(&path, svg::heatmap(report, name, *log_color))?;
                written.push(path);
            }
        }
    }
    Ok(written)
}
