//! Row types that render as CSV with a fixed header.

use std::io::Write;

use serde::Serialize;

/// Shortest decimal that round-trips to the same `f64`.
pub fn fmt_f64(v: f64) -> String {
    format!("{v:?}")
}

pub trait CsvRow {
    fn header() -> &'static [&'static str];
    fn record(&self) -> Vec<String>;
}

/// Writes `rows` as CSV, header first, preceded by `comments` as `#` lines.
pub fn write_csv<R: CsvRow, W: Write>(out: W, comments: &[String], rows: &[R]) -> std::io::Result<()> {
    let mut out = out;
    for c in comments {
        writeln!(out, "# {c}")?;
    }
    let mut w = csv::Writer::from_writer(out);
    w.write_record(R::header())?;
    for r in rows {
        w.write_record(r.record())?;
    }
    w.flush()
}

/// Pretty JSON array of `rows`.
pub fn write_json<R: Serialize, W: Write>(mut out: W, rows: &R) -> std::io::Result<()> {
    serde_json::to_writer_pretty(&mut out, rows)?;
    writeln!(out)
}
