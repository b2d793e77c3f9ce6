//! Report serialization: pretty JSON and a flat per-record CSV.

use std::io::Write;
use std::path::Path;

use crate::error::{Error, Result};
use crate::harness::{SweepEntry, SweepReport};
use crate::scalar::Scalar;
use crate::vsc::CHECKLIST_FLAGS;

pub const CSV_SCALAR_COLUMNS: [&str; 13] = [
    "delta",
    "alpha",
    "residual_norm",
    "J_reg",
    "J_true",
    "jdiff",
    "bregman_fwd",
    "bregman_rev",
    "bregman_sym",
    "total_error",
    "hm_lower",
    "new_lower",
    "alpha_max",
];

/// Header row: scalar columns followed by one 0/1 column per checklist flag.
pub fn csv_header() -> Vec<&'static str> {
    CSV_SCALAR_COLUMNS.iter().chain(CHECKLIST_FLAGS.iter()).copied().collect()
}

pub fn write_records_csv<T: Scalar, W: Write>(report: &SweepReport<T>, out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    let header = csv_header();
    w.write_record(&header).map_err(csv_err)?;
    let variant = report.config.alpha_max_variant;
    for entry in &report.records {
        let row: Vec<String> = match entry {
            SweepEntry::Failed { delta, .. } => {
                let mut row = vec![String::new(); header.len()];
                row[0] = delta.to_string();
                row
            }
            SweepEntry::Ok(r) => {
                let scalars = [
                    r.delta,
                    r.alpha,
                    r.residual_norm,
                    r.j_reg,
                    r.j_true,
                    r.jdiff,
                    r.bregman_fwd,
                    r.bregman_rev,
                    r.bregman_sym,
                    r.total_error,
                    r.bounds.hm_lower,
                    r.bounds.new_lower,
                    r.bounds.alpha_max_for(variant),
                ];
                scalars
                    .iter()
                    .map(|v| v.to_string())
                    .chain(r.checklist.checks().iter().map(|(_, c)| if c.holds { "1" } else { "0" }.to_string()))
                    .collect()
            }
        };
        w.write_record(&row).map_err(csv_err)?;
    }
    w.flush()?;
    Ok(())
}

pub fn write_report_json<T: Scalar, W: Write>(report: &SweepReport<T>, mut out: W) -> Result<()> {
    serde_json::to_writer_pretty(&mut out, report).map_err(|e| Error::Io(e.to_string()))?;
    out.write_all(b"\n")?;
    Ok(())
}

/// Writes `report.json` and `records.csv` into `dir`, creating it if needed.
pub fn write_report_dir<T: Scalar>(report: &SweepReport<T>, dir: &Path) -> Result<()> {
    std::fs::create_dir_all(dir)?;
    let json = std::fs::File::create(dir.join("report.json"))?;
    write_report_json(report, std::io::BufWriter::new(json))?;
    let csv = std::fs::File::create(dir.join("records.csv"))?;
    write_records_csv(report, std::io::BufWriter::new(csv))
}

pub fn read_report_json<T: Scalar>(path: &Path) -> Result<SweepReport<T>> {
    let text = std::fs::read_to_string(path)?;
    serde_json::from_str(&text).map_err(|e| Error::Config(format!("{}: {e}", path.display())))
}

fn csv_err(e: csv::Error) -> Error {
    Error::Io(e.to_string())
}
