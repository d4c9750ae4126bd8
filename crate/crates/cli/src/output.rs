//! Result files: one CSV (or JSON) per curve family plus a JSON manifest.

use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use serde::Serialize;
use uwauth_core::curve::{ErrorRateCurve, Rate};
use uwauth_core::detect::DecisionRecord;
use uwauth_core::sim::ComparisonReport;

use crate::config::OutputFormat;
use crate::CliError;

pub const CURVE_HEADER: [&str; 13] = [
    "scenario_id",
    "source",
    "test",
    "fusion",
    "snr_db",
    "p_fa",
    "p_fa_ci",
    "p_md",
    "p_md_ci",
    "p_mc",
    "p_mc_ci",
    "n_trials",
    "flags",
];

fn opt<T: ToString>(v: Option<T>) -> String {
    v.map(|x| x.to_string()).unwrap_or_default()
}

fn rate_fields(r: Option<Rate>) -> [String; 2] {
    [opt(r.map(|r| r.value)), opt(r.and_then(|r| r.ci))]
}

/// CSV rows of a curve, header excluded.
pub fn curve_rows(c: &ErrorRateCurve) -> Vec<Vec<String>> {
    c.points
        .iter()
        .map(|p| {
            let mut row = vec![
                c.scenario_id.clone(),
                c.source.label().to_string(),
                c.test.clone(),
                c.fusion.clone(),
                p.snr_db.to_string(),
            ];
            for r in [p.p_fa, p.p_md, p.p_mc] {
                row.extend(rate_fields(r));
            }
            row.push(opt(p.n_trials));
            row.push(p.flags.to_string());
            row
        })
        .collect()
}

fn io(path: &Path) -> impl Fn(std::io::Error) -> CliError + '_ {
    move |e| CliError::Io(format!("{}: {e}", path.display()))
}

fn csv_err(path: &Path) -> impl Fn(csv::Error) -> CliError + '_ {
    move |e| CliError::Io(format!("{}: {e}", path.display()))
}

/// Creates `dir` and proves it writable before any computation starts.
pub fn prepare_dir(dir: &Path) -> Result<(), CliError> {
    fs::create_dir_all(dir).map_err(io(dir))?;
    let probe = dir.join(".uwauth-write-probe");
    fs::File::create(&probe).and_then(|mut f| f.write_all(b"ok")).map_err(io(dir))?;
    fs::remove_file(&probe).map_err(io(&probe))
}

pub fn write_csv(path: &Path, header: &[&str], rows: &[Vec<String>]) -> Result<(), CliError> {
    let mut w = csv::Writer::from_path(path).map_err(csv_err(path))?;
    w.write_record(header).map_err(csv_err(path))?;
    for r in rows {
        w.write_record(r).map_err(csv_err(path))?;
    }
    w.flush().map_err(io(path))
}

pub fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<(), CliError> {
    let text = serde_json::to_string_pretty(value).map_err(|e| CliError::Io(format!("{}: {e}", path.display())))?;
    fs::write(path, text + "\n").map_err(io(path))
}

/// Writes `<prefix>_<family>.<ext>` for every curve; returns the paths.
pub fn write_curves(
    dir: &Path,
    prefix: &str,
    curves: &[ErrorRateCurve],
    format: OutputFormat,
) -> Result<Vec<PathBuf>, CliError> {
    let mut out = Vec::new();
    for c in curves {
        let stem = format!("{prefix}_{}", c.family());
        let path = match format {
            OutputFormat::Csv => {
                let p = dir.join(format!("{stem}.csv"));
                write_csv(&p, &CURVE_HEADER, &curve_rows(c))?;
                p
            }
            OutputFormat::Json => {
                let p = dir.join(format!("{stem}.json"));
                write_json(&p, c)?;
                p
            }
        };
        out.push(path);
    }
    Ok(out)
}

pub const RECORD_PREFIX: [&str; 2] = ["snr_db", "trial"];

pub fn write_records(path: &Path, snr_db: &[f64], records: &[Vec<DecisionRecord>]) -> Result<(), CliError> {
    let mut header: Vec<&str> = RECORD_PREFIX.to_vec();
    header.extend(DecisionRecord::CSV_HEADER);
    let mut rows = Vec::new();
    for (s, recs) in snr_db.iter().zip(records) {
        for (t, r) in recs.iter().enumerate() {
            let mut row = vec![s.to_string(), t.to_string()];
            row.extend(r.csv_fields());
            rows.push(row);
        }
    }
    write_csv(path, &header, &rows)
}

pub const VALIDATION_HEADER: [&str; 11] =
    ["scenario_id", "test", "fusion", "snr_db", "rate", "montecarlo", "analytic", "n", "se", "gating", "result"];

pub fn write_validation(path: &Path, report: &ComparisonReport) -> Result<(), CliError> {
    let rows: Vec<Vec<String>> = report
        .rows
        .iter()
        .map(|r| {
            vec![
                r.scenario_id.clone(),
                r.test.clone(),
                r.fusion.clone(),
                r.snr_db.to_string(),
                r.rate.to_string(),
                r.montecarlo.to_string(),
                r.analytic.to_string(),
                r.n.to_string(),
                r.se.to_string(),
                r.gating.to_string(),
                if r.flagged { "flag" } else { "pass" }.to_string(),
            ]
        })
        .collect();
    write_csv(path, &VALIDATION_HEADER, &rows)
}
