//! Plain-text and CSV signal files.
//!
//! The text format holds one sample per line. Blank lines and lines starting
//! with `#` are ignored, except a `# sample_rate=<Hz>` header which sets the
//! sampling rate.

use std::fs::File;
use std::io::{BufRead, BufReader, Read, Write};
use std::path::Path;

use crate::error::{Error, Result};
use crate::signal::Signal;

pub fn parse_signal<R: BufRead>(reader: R) -> Result<Signal> {
    let mut samples = Vec::new();
    let mut rate = None;
    for (idx, line) in reader.lines().enumerate() {
        let line = line?;
        let line = line.trim();
        if let Some(comment) = line.strip_prefix('#') {
            if let Some(value) = comment.trim().strip_prefix("sample_rate=") {
                let hz = value.trim().parse::<f64>().map_err(|_| {
                    Error::Parse(format!("line {}: bad sample rate {value:?}", idx + 1))
                })?;
                rate = Some(hz);
            }
            continue;
        }
        if line.is_empty() {
            continue;
        }
        let x = line
            .parse::<f64>()
            .map_err(|_| Error::Parse(format!("line {}: not a number: {line:?}", idx + 1)))?;
        samples.push(x);
    }
    Signal::new(samples)?.with_sample_rate(rate)
}

pub fn read_signal(path: impl AsRef<Path>) -> Result<Signal> {
    parse_signal(BufReader::new(File::open(path)?))
}

/// Reads the column named `column` from a headed CSV.
pub fn parse_signal_csv<R: Read>(reader: R, column: &str) -> Result<Signal> {
    let mut rdr = csv::ReaderBuilder::new()
        .trim(csv::Trim::All)
        .from_reader(reader);
    let csv_err = |e: csv::Error| Error::Parse(e.to_string());
    let idx = rdr
        .headers()
        .map_err(csv_err)?
        .iter()
        .position(|h| h == column)
        .ok_or_else(|| Error::Parse(format!("no column named {column:?}")))?;
    let mut samples = Vec::new();
    for (row, rec) in rdr.records().enumerate() {
        let rec = rec.map_err(csv_err)?;
        let field = rec.get(idx).unwrap_or("");
        let x = field
            .parse::<f64>()
            .map_err(|_| Error::Parse(format!("row {}: not a number: {field:?}", row + 1)))?;
        samples.push(x);
    }
    Signal::new(samples)
}

pub fn read_signal_csv(path: impl AsRef<Path>, column: &str) -> Result<Signal> {
    parse_signal_csv(File::open(path)?, column)
}

/// Writes the text format; samples round-trip exactly.
pub fn write_signal<W: Write>(signal: &Signal, mut out: W) -> Result<()> {
    if let Some(rate) = signal.sample_rate() {
        writeln!(out, "# sample_rate={rate}")?;
    }
    write_series(signal.samples(), out)
}

/// One value per line.
pub fn write_series<W: Write>(values: &[f64], out: W) -> Result<()> {
    let mut out = std::io::BufWriter::new(out);
    for v in values {
        writeln!(out, "{v}")?;
    }
    out.flush()?;
    Ok(())
}
