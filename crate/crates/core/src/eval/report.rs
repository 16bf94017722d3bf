//! Report files: one CSV per curve plus `summary.json`.

use std::fs::File;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use super::{Counts, EvalReport};
use crate::error::{Error, Result};

pub const SUMMARY_FILE: &str = "summary.json";

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Summary {
    pub method: String,
    pub q: usize,
    pub rank1: f64,
    pub counts: Counts,
    pub config_digest: String,
}

fn write_csv(path: &Path, header: &[&str], rows: impl IntoIterator<Item = Vec<String>>) -> Result<()> {
    let file = File::create(path).map_err(|e| Error::io(path, e))?;
    let mut w = csv::WriterBuilder::new().terminator(csv::Terminator::Any(b'\n')).from_writer(file);
    let fail = |e: csv::Error| Error::Format(format!("{}: {e}", path.display()));
    w.write_record(header).map_err(fail)?;
    for r in rows {
        w.write_record(&r).map_err(fail)?;
    }
    w.flush().map_err(|e| Error::io(path, e))
}

/// Writes `cmc.csv`, `rate_vs_q.csv`, `openset.csv`, `roc.csv` and `summary.json`
/// into `dir`, returning the paths written. Floats use the shortest representation
/// that parses back to the same value.
pub fn emit_report(report: &EvalReport, dir: &Path) -> Result<Vec<PathBuf>> {
    std::fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    let mut written = Vec::new();
    let mut file = |name: &str| {
        let p = dir.join(name);
        written.push(p.clone());
        p
    };
    write_csv(
        &file("cmc.csv"),
        &["rank", "rate"],
        report.cmc.iter().enumerate().map(|(k, r)| vec![(k + 1).to_string(), r.to_string()]),
    )?;
    write_csv(
        &file("rate_vs_q.csv"),
        &["q", "rate"],
        report.rate_vs_q.iter().map(|(q, r)| vec![q.to_string(), r.to_string()]),
    )?;
    write_csv(
        &file("openset.csv"),
        &["theta", "tau", "gir", "irr"],
        report
            .open_set
            .iter()
            .map(|p| vec![p.theta.to_string(), p.tau.to_string(), p.gir.to_string(), p.irr.to_string()]),
    )?;
    write_csv(
        &file("roc.csv"),
        &["far", "vr"],
        report.roc.iter().map(|p| vec![p.far_target.to_string(), p.vr.to_string()]),
    )?;
    let summary = Summary {
        method: report.method.clone(),
        q: report.q,
        rank1: report.cmc.first().copied().unwrap_or(0.0),
        counts: report.counts.clone(),
        config_digest: report.config_digest.clone(),
    };
    let path = file(SUMMARY_FILE);
    let mut text = serde_json::to_string_pretty(&summary).map_err(|e| Error::Format(e.to_string()))?;
    text.push('\n');
    std::fs::write(&path, text).map_err(|e| Error::io(&path, e))?;
    Ok(written)
}

/// Reads a report CSV back as rows of numbers.
pub fn read_curve(path: &Path) -> Result<(Vec<String>, Vec<Vec<f64>>)> {
    let mut r = csv::Reader::from_path(path).map_err(|e| Error::BadFile {
        path: path.to_owned(),
        message: e.to_string(),
    })?;
    let header = r
        .headers()
        .map_err(|e| Error::Format(e.to_string()))?
        .iter()
        .map(String::from)
        .collect();
    let mut rows = Vec::new();
    for (i, rec) in r.records().enumerate() {
        let rec = rec.map_err(|e| Error::Format(e.to_string()))?;
        let row = rec
            .iter()
            .map(|f| {
                f.parse::<f64>().map_err(|e| Error::MalformedRow {
                    path: path.to_owned(),
                    row: i + 1,
                    message: e.to_string(),
                })
            })
            .collect::<Result<Vec<_>>>()?;
        rows.push(row);
    }
    Ok((header, rows))
}
