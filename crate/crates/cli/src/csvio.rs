//! CSV emission and parsing. Lines starting with `#` carry provenance and
//! are skipped when reading.

use std::io::{Read, Write};

use flipdec::SweepRow;
use serde::{Deserialize, Serialize};

pub const SWEEP_HEADER: &str =
    "code,decoder,ebno_db,bits_sent,bit_errors,ber,words_sent,word_errors,wer,avg_queries,max_queries,abandoned,seed";

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BoundRow {
    pub ebno_db: f64,
    pub rho_c_bar: f64,
    pub bound: f64,
}

pub fn write_comments<W: Write>(mut out: W, comments: &[String]) -> std::io::Result<W> {
    for c in comments {
        for line in c.lines() {
            writeln!(out, "# {line}")?;
        }
    }
    Ok(out)
}

pub fn write_rows<W: Write, T: Serialize>(
    out: W,
    comments: &[String],
    rows: &[T],
) -> Result<(), csv::Error> {
    let out = write_comments(out, comments)?;
    let mut w = csv::Writer::from_writer(out);
    for r in rows {
        w.serialize(r)?;
    }
    w.flush()?;
    Ok(())
}

pub fn read_rows<R: Read, T: for<'de> Deserialize<'de>>(input: R) -> Result<Vec<T>, csv::Error> {
    csv::ReaderBuilder::new()
        .comment(Some(b'#'))
        .from_reader(input)
        .deserialize()
        .collect()
}

pub fn write_sweep<W: Write>(
    out: W,
    comments: &[String],
    rows: &[SweepRow],
) -> Result<(), csv::Error> {
    if rows.is_empty() {
        let mut out = write_comments(out, comments)?;
        writeln!(out, "{SWEEP_HEADER}")?;
        return Ok(());
    }
    write_rows(out, comments, rows)
}

pub fn read_sweep<R: Read>(input: R) -> Result<Vec<SweepRow>, csv::Error> {
    read_rows(input)
}
