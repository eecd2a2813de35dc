//! Binary snapshots and CSV time series.
//!
//! Snapshot layout (little-endian): magic `GHRT`, version `u32`, `N` as
//! `u32`, `N` point counts as `u32`, `N` side lengths as `f64`, time as
//! `f64`, then `n^N` complex values as `(re, im)` `f64` pairs, row-major.

use std::fs;
use std::io::{BufWriter, Write};
use std::path::Path;

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::grid::{Field, Grid};
use crate::observables::ObservableRecord;

pub const SNAPSHOT_MAGIC: &[u8; 4] = b"GHRT";
pub const SNAPSHOT_VERSION: u32 = 1;

pub fn encode_snapshot(field: &Field) -> Vec<u8> {
    let grid = field.grid();
    let mut out = Vec::with_capacity(16 + 12 * grid.dim() + 8 + 16 * grid.len());
    out.extend_from_slice(SNAPSHOT_MAGIC);
    out.extend_from_slice(&SNAPSHOT_VERSION.to_le_bytes());
    out.extend_from_slice(&(grid.dim() as u32).to_le_bytes());
    for &n in grid.points() {
        out.extend_from_slice(&(n as u32).to_le_bytes());
    }
    for &l in grid.lengths() {
        out.extend_from_slice(&l.to_le_bytes());
    }
    out.extend_from_slice(&field.t().to_le_bytes());
    for z in field.values() {
        out.extend_from_slice(&z.re.to_le_bytes());
        out.extend_from_slice(&z.im.to_le_bytes());
    }
    out
}

fn bad(detail: impl Into<String>) -> Error {
    Error::Format {
        kind: "snapshot",
        detail: detail.into(),
    }
}

struct Reader<'a> {
    bytes: &'a [u8],
    pos: usize,
}

impl Reader<'_> {
    fn take<const K: usize>(&mut self) -> Result<[u8; K]> {
        let end = self.pos + K;
        let slice = self.bytes.get(self.pos..end).ok_or_else(|| bad("truncated"))?;
        self.pos = end;
        Ok(slice.try_into().expect("length checked"))
    }

    fn u32(&mut self) -> Result<u32> {
        Ok(u32::from_le_bytes(self.take()?))
    }

    fn f64(&mut self) -> Result<f64> {
        Ok(f64::from_le_bytes(self.take()?))
    }
}

pub fn decode_snapshot(bytes: &[u8]) -> Result<Field> {
    let mut r = Reader { bytes, pos: 0 };
    if &r.take::<4>()? != SNAPSHOT_MAGIC {
        return Err(bad("missing GHRT magic"));
    }
    let version = r.u32()?;
    if version != SNAPSHOT_VERSION {
        return Err(bad(format!("unsupported version {version}")));
    }
    let dim = r.u32()? as usize;
    if !(1..=3).contains(&dim) {
        return Err(bad(format!("dimension {dim}")));
    }
    let points = (0..dim)
        .map(|_| r.u32().map(|n| n as usize))
        .collect::<Result<Vec<_>>>()?;
    let lengths = (0..dim).map(|_| r.f64()).collect::<Result<Vec<_>>>()?;
    let t = r.f64()?;
    let grid = Grid::new(&lengths, &points)?;
    let mut values = Vec::with_capacity(grid.len());
    for _ in 0..grid.len() {
        let re = r.f64()?;
        let im = r.f64()?;
        values.push(Complex64::new(re, im));
    }
    if r.pos != bytes.len() {
        return Err(bad("trailing bytes"));
    }
    Field::new(grid, values, t)
}

pub fn write_snapshot(field: &Field, path: &Path) -> Result<()> {
    fs::write(path, encode_snapshot(field))?;
    Ok(())
}

pub fn read_snapshot(path: &Path) -> Result<Field> {
    decode_snapshot(&fs::read(path)?)
}

/// Formats the records as CSV; values use the shortest round-trip form.
pub fn timeseries_csv(records: &[ObservableRecord]) -> Result<String> {
    let first = records.first().ok_or_else(|| Error::Format {
        kind: "time series",
        detail: "no records to write".into(),
    })?;
    let dim = first.momentum.len();
    let mut out = ObservableRecord::csv_header(dim);
    out.push('\n');
    for rec in records {
        if rec.momentum.len() != dim {
            return Err(Error::Format {
                kind: "time series",
                detail: "records of different dimensions".into(),
            });
        }
        let row: Vec<String> = rec.values().iter().map(|v| format!("{v:e}")).collect();
        out.push_str(&row.join(","));
        out.push('\n');
    }
    Ok(out)
}

pub fn write_timeseries(records: &[ObservableRecord], path: &Path) -> Result<()> {
    let text = timeseries_csv(records)?;
    let mut w = BufWriter::new(fs::File::create(path)?);
    w.write_all(text.as_bytes())?;
    w.flush()?;
    Ok(())
}

/// Parses a CSV produced by [`timeseries_csv`].
pub fn parse_timeseries(text: &str) -> Result<Vec<ObservableRecord>> {
    let fmt = |d: String| Error::Format {
        kind: "time series",
        detail: d,
    };
    let mut lines = text.lines();
    let header = lines.next().ok_or_else(|| fmt("empty file".into()))?;
    let dim = header.split(',').filter(|c| c.starts_with("momentum_")).count();
    if header != ObservableRecord::csv_header(dim) {
        return Err(fmt(format!("unexpected header '{header}'")));
    }
    let mut out = Vec::new();
    for (i, line) in lines.enumerate() {
        let v = line
            .split(',')
            .map(|s| s.parse::<f64>())
            .collect::<std::result::Result<Vec<_>, _>>()
            .map_err(|e| fmt(format!("line {}: {e}", i + 2)))?;
        if v.len() != 11 + dim {
            return Err(fmt(format!("line {}: {} columns", i + 2, v.len())));
        }
        let mut k = 3 + dim;
        let mut next = || {
            k += 1;
            v[k - 1]
        };
        out.push(ObservableRecord {
            t: v[0],
            mass: v[1],
            energy: v[2],
            momentum: v[3..3 + dim].to_vec(),
            variance: next(),
            variance_t: next(),
            variance_tt: next(),
            sup_norm: next(),
            grad_l2_sq: next(),
            x_norm: next(),
            min_weighted_modulus: next(),
            spectral_tail_fraction: next(),
        });
    }
    if out.is_empty() {
        return Err(fmt("no records".into()));
    }
    Ok(out)
}

pub fn read_timeseries(path: &Path) -> Result<Vec<ObservableRecord>> {
    parse_timeseries(&fs::read_to_string(path)?)
}
