//! CSV output with a header row even when there are no records.

use std::io::Write;
use std::path::Path;

use serde::de::DeserializeOwned;
use serde::Serialize;

use crate::error::{Error, Result};

/// A serializable record with a fixed column list.
pub trait CsvRecord: Serialize {
    const HEADER: &'static [&'static str];
}

pub fn write_records<W: Write, R: CsvRecord>(rows: &[R], out: W) -> Result<()> {
    let mut w = csv::WriterBuilder::new().has_headers(false).from_writer(out);
    w.write_record(R::HEADER)?;
    for r in rows {
        w.serialize(r)?;
    }
    w.flush().map_err(|e| Error::Csv(e.into()))?;
    Ok(())
}

pub fn write_records_file<R: CsvRecord>(rows: &[R], path: &Path) -> Result<()> {
    let f = std::fs::File::create(path).map_err(|e| Error::io(path, e))?;
    write_records(rows, std::io::BufWriter::new(f))
}

pub fn read_records_file<R: DeserializeOwned>(path: &Path) -> Result<Vec<R>> {
    let mut r = csv::Reader::from_path(path)?;
    r.deserialize().map(|row| row.map_err(Error::from)).collect()
}
