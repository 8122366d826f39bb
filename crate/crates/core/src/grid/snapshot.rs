//! Field snapshot files.
//!
//! A snapshot is one NDJSON header line followed by a payload of the
//! row-major values (last axis fastest). The payload is either raw IEEE-754
//! binary64 in little-endian byte order (`"encoding": "f64-le"`) or CSV text
//! with one value per line (`"encoding": "csv"`). The header records the
//! payload length in bytes, so several snapshots can be concatenated in one
//! file.

use std::fs::File;
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::Path;

use serde::{Deserialize, Serialize};
use serde_json::Value;

use crate::error::{Error, Result};
use crate::group::GroupDescriptor;
use crate::scalar::Real;

use super::{Boundary, Grid, ScalarField};

pub const FORMAT: &str = "carnot-flow/field";

/// Payload encoding.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum Encoding {
    #[serde(rename = "f64-le")]
    BinaryLe,
    #[serde(rename = "csv")]
    Csv,
}

#[derive(Serialize, Deserialize)]
struct Header {
    format: String,
    version: u32,
    group: String,
    extents: Vec<f64>,
    counts: Vec<usize>,
    boundary: Boundary,
    time: Option<f64>,
    encoding: Encoding,
    byte_order: String,
    values: usize,
    payload_bytes: usize,
    #[serde(default)]
    metadata: Value,
}

fn csv_payload(values: impl Iterator<Item = f64>) -> Vec<u8> {
    let mut s = String::new();
    for v in values {
        s.push_str(&format!("{v:e}\n"));
    }
    s.into_bytes()
}

/// Writes one snapshot record.
pub fn write_snapshot<T: Real, W: Write>(
    w: &mut W,
    field: &ScalarField<T>,
    encoding: Encoding,
    metadata: Value,
) -> Result<()> {
    let g = &field.grid;
    let payload: Vec<u8> = match encoding {
        Encoding::BinaryLe => field.values.iter().flat_map(|v| v.as_f64().to_le_bytes()).collect(),
        Encoding::Csv => csv_payload(field.values.iter().map(|v| v.as_f64())),
    };
    let header = Header {
        format: FORMAT.into(),
        version: 1,
        group: g.group().id(),
        extents: g.extents().iter().map(|e| e.as_f64()).collect(),
        counts: g.counts()[..g.dims()].to_vec(),
        boundary: g.boundary(),
        time: field.time.map(|t| t.as_f64()),
        encoding,
        byte_order: "little-endian".into(),
        values: field.values.len(),
        payload_bytes: payload.len(),
        metadata,
    };
    let line = serde_json::to_string(&header).map_err(|e| Error::Parse(e.to_string()))?;
    w.write_all(line.as_bytes())?;
    w.write_all(b"\n")?;
    w.write_all(&payload)?;
    Ok(())
}

/// Reads the next snapshot record; `None` at end of input.
pub fn read_snapshot<T: Real, R: BufRead>(r: &mut R) -> Result<Option<(ScalarField<T>, Value)>> {
    let mut line = String::new();
    if r.read_line(&mut line)? == 0 {
        return Ok(None);
    }
    let h: Header = serde_json::from_str(line.trim_end()).map_err(|e| Error::Parse(format!("snapshot header: {e}")))?;
    if h.format != FORMAT {
        return Err(Error::Parse(format!("unexpected snapshot format `{}`", h.format)));
    }
    let mut payload = vec![0u8; h.payload_bytes];
    r.read_exact(&mut payload)?;
    let values: Vec<T> = match h.encoding {
        Encoding::BinaryLe => {
            if payload.len() != 8 * h.values {
                return Err(Error::Parse("binary payload length mismatch".into()));
            }
            payload.chunks_exact(8).map(|c| T::lit(f64::from_le_bytes(c.try_into().unwrap()))).collect()
        }
        Encoding::Csv => std::str::from_utf8(&payload)
            .map_err(|e| Error::Parse(e.to_string()))?
            .lines()
            .map(|l| l.trim().parse::<f64>().map(T::lit).map_err(|e| Error::Parse(format!("csv value `{l}`: {e}"))))
            .collect::<Result<_>>()?,
    };
    let group = GroupDescriptor::from_id(&h.group)?;
    let extents: Vec<T> = h.extents.iter().map(|&e| T::lit(e)).collect();
    let grid = Grid::new(group, &extents, &h.counts, h.boundary)?;
    let mut f = ScalarField::new(grid, values)?;
    f.time = h.time.map(T::lit);
    Ok(Some((f, h.metadata)))
}

pub fn save_snapshot<T: Real>(path: &Path, field: &ScalarField<T>, encoding: Encoding, metadata: Value) -> Result<()> {
    let mut w = BufWriter::new(File::create(path)?);
    write_snapshot(&mut w, field, encoding, metadata)?;
    w.flush()?;
    Ok(())
}

/// Reads every record of a snapshot file.
pub fn load_snapshots<T: Real>(path: &Path) -> Result<Vec<(ScalarField<T>, Value)>> {
    let mut r = BufReader::new(File::open(path)?);
    let mut out = Vec::new();
    while let Some(rec) = read_snapshot(&mut r)? {
        out.push(rec);
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn roundtrip_both_encodings() {
        let g = Grid::<f64>::heisenberg(2.0, 8, 16, Boundary::Periodic).unwrap();
        let f = g.sample(|x| x[0] * 0.1 + (x[2] * 3.0).sin()).at_time(0.25);
        for enc in [Encoding::BinaryLe, Encoding::Csv] {
            let mut buf = Vec::new();
            write_snapshot(&mut buf, &f, enc, serde_json::json!({"k": 1})).unwrap();
            write_snapshot(&mut buf, &f.scale(2.0), enc, Value::Null).unwrap();
            let mut r = std::io::Cursor::new(buf);
            let (a, meta) = read_snapshot::<f64, _>(&mut r).unwrap().unwrap();
            assert_eq!(a, f);
            assert_eq!(meta["k"], 1);
            let (b, _) = read_snapshot::<f64, _>(&mut r).unwrap().unwrap();
            assert_eq!(b.values, f.scale(2.0).values);
            assert!(read_snapshot::<f64, _>(&mut r).unwrap().is_none());
        }
    }
}
