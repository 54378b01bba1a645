use std::fs::File;
use std::io::{BufWriter, Read, Write};
use std::path::Path;

use super::summary::SummaryRow;
use super::TrialRecord;
use crate::error::{Error, Result};

const RECORD_HEADER: [&str; 9] = ["method", "family", "n", "p", "delta", "epsilon", "trial_index", "loss", "failed"];
const SUMMARY_HEADER: [&str; 8] = ["method", "n", "p", "delta", "q_delta", "mean_loss", "failure_rate", "trials"];

/// 17 significant digits.
fn real(x: f64) -> String {
    if x.is_finite() {
        format!("{x:.16e}")
    } else {
        x.to_string()
    }
}

pub fn write_records<W: Write>(records: &[TrialRecord], out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(RECORD_HEADER)?;
    for r in records {
        w.write_record([
            r.method.clone(),
            r.family.clone(),
            r.n.to_string(),
            r.p.to_string(),
            real(r.delta),
            real(r.epsilon),
            r.trial_index.to_string(),
            real(r.loss),
            u8::from(r.failed()).to_string(),
        ])?;
    }
    w.flush()?;
    Ok(())
}

pub fn emit_csv(records: &[TrialRecord], path: &Path) -> Result<()> {
    write_records(records, BufWriter::new(File::create(path)?))
}

fn field<T: std::str::FromStr>(row: &csv::StringRecord, i: usize, line: u64) -> Result<T> {
    let raw = row.get(i).ok_or_else(|| Error::arg(format!("line {line}: missing column {}", RECORD_HEADER[i])))?;
    raw.trim().parse().map_err(|_| Error::arg(format!("line {line}: bad {} value {raw:?}", RECORD_HEADER[i])))
}

/// Parses a record CSV. Rows flagged `failed=1` read back as `+∞` loss.
pub fn read_csv<R: Read>(input: R) -> Result<Vec<TrialRecord>> {
    let mut rdr = csv::Reader::from_reader(input);
    let header = rdr.headers()?.clone();
    if header.iter().map(str::trim).ne(RECORD_HEADER) {
        return Err(Error::arg(format!("unexpected header {:?}", header.iter().collect::<Vec<_>>())));
    }
    let mut out = Vec::new();
    for row in rdr.records() {
        let row = row?;
        let line = row.position().map_or(0, |p| p.line());
        let failed: u8 = field(&row, 8, line)?;
        let loss: f64 = field(&row, 7, line)?;
        if failed == 0 && !(loss >= 0.0 && loss.is_finite()) {
            return Err(Error::arg(format!("line {line}: loss must be finite and ≥ 0")));
        }
        out.push(TrialRecord {
            method: field(&row, 0, line)?,
            family: field(&row, 1, line)?,
            n: field(&row, 2, line)?,
            p: field(&row, 3, line)?,
            delta: field(&row, 4, line)?,
            epsilon: field(&row, 5, line)?,
            trial_index: field(&row, 6, line)?,
            loss: if failed != 0 { f64::INFINITY } else { loss },
        });
    }
    Ok(out)
}

pub fn write_summary<W: Write>(rows: &[SummaryRow], out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(SUMMARY_HEADER)?;
    for r in rows {
        w.write_record([
            r.method.clone(),
            r.n.to_string(),
            r.p.to_string(),
            real(r.delta),
            real(r.q_delta),
            real(r.mean_loss),
            real(r.failure_rate),
            r.trials.to_string(),
        ])?;
    }
    w.flush()?;
    Ok(())
}

pub fn emit_summary_csv(rows: &[SummaryRow], path: &Path) -> Result<()> {
    write_summary(rows, BufWriter::new(File::create(path)?))
}
