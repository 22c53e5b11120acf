//! File formats: input CSVs for observed data, the sweep result CSV, and
//! the JSON test report.

use std::io::{Read, Write};

use serde::{Deserialize, Serialize};

use rpst_core::{ClassicTestResult, PrivateTestResult};

use crate::sim::CellOutcome;

/// Schema tag stamped on every JSON report.
pub const SCHEMA: &str = "rpst/1";

/// Fixed header of the sweep result CSV.
pub const RESULT_CSV_HEADER: &str =
    "family,theta,n,n1,q,psi,eps,split,delta,alpha,reps,reject_rate,mc_se,seconds";

#[derive(Debug, Deserialize)]
struct TwoSampleRow {
    value: f64,
    group: u8,
}

#[derive(Debug, Deserialize)]
struct PairedRow {
    x: f64,
    y: f64,
}

/// Read a two-sample CSV with header `value,group`, group coded 1 or 2.
pub fn read_two_sample_csv<R: Read>(reader: R) -> Result<(Vec<f64>, Vec<f64>), String> {
    let mut rdr = csv::Reader::from_reader(reader);
    let mut g1 = Vec::new();
    let mut g2 = Vec::new();
    for (i, row) in rdr.deserialize::<TwoSampleRow>().enumerate() {
        let row = row.map_err(|e| format!("row {}: {e}", i + 2))?;
        match row.group {
            1 => g1.push(row.value),
            2 => g2.push(row.value),
            g => return Err(format!("row {}: group must be 1 or 2, got {g}", i + 2)),
        }
    }
    if g1.is_empty() || g2.is_empty() {
        return Err("both groups must contain at least one observation".to_string());
    }
    Ok((g1, g2))
}

/// Read a paired CSV with header `x,y`.
pub fn read_paired_csv<R: Read>(reader: R) -> Result<Vec<(f64, f64)>, String> {
    let mut rdr = csv::Reader::from_reader(reader);
    let mut pairs = Vec::new();
    for (i, row) in rdr.deserialize::<PairedRow>().enumerate() {
        let row = row.map_err(|e| format!("row {}: {e}", i + 2))?;
        pairs.push((row.x, row.y));
    }
    if pairs.is_empty() {
        return Err("at least one pair is required".to_string());
    }
    Ok(pairs)
}

/// Write sweep outcomes as CSV. Failed cells are skipped here and reported
/// by the caller. Timing is emitted only when `with_timing` is set; the
/// default zero keeps repeated runs byte-identical.
pub fn write_results_csv<W: Write>(
    out: &mut W,
    outcomes: &[CellOutcome],
    with_timing: bool,
) -> std::io::Result<()> {
    writeln!(out, "{RESULT_CSV_HEADER}")?;
    for outcome in outcomes {
        let Ok(r) = outcome else { continue };
        let c = &r.config;
        let seconds = if with_timing { r.seconds } else { 0.0 };
        writeln!(
            out,
            "{},{},{},{},{},{},{},{},{},{},{},{},{},{:.3}",
            c.family,
            c.theta,
            c.n,
            c.n1,
            c.q,
            c.psi,
            c.eps,
            c.split,
            c.delta,
            c.alpha,
            c.reps,
            r.rejection_rate,
            r.mc_standard_error,
            seconds,
        )?;
    }
    Ok(())
}

/// JSON report for `rpst test rpst|rpsr`.
#[derive(Debug, Serialize)]
pub struct PrivateTestReport<'a> {
    pub schema: &'static str,
    pub test: &'a str,
    pub seed: u64,
    pub alpha: f64,
    #[serde(flatten)]
    pub result: &'a PrivateTestResult,
}

/// JSON report for `rpst test classic`.
#[derive(Debug, Serialize)]
pub struct ClassicTestReport<'a> {
    pub schema: &'static str,
    pub test: &'a str,
    #[serde(flatten)]
    pub result: &'a ClassicTestResult,
}
