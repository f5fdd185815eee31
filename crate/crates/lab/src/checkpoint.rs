//! Checkpoints of solved fields.
//!
//! Binary layout, all little-endian:
//!
//! ```text
//! magic  b"DGLBCKP1"
//! u64    nx, ny, level count
//! f64    hx, hy, x0, x1, y0, y1, t0, dt
//! f64    values, level-major then row-major (index j*nx + i)
//! ```
//!
//! The CSV form has a `nx,ny,hx,hy,x0,x1,y0,y1,t0,dt,levels` header row, its
//! values, then one row per level: `level, t, v_0, v_1, ...`. Floats are
//! written in shortest round-trip form, so both formats are lossless.
//!
//! The boundary trace is not stored; a loaded field carries levels only.

use std::fs;
use std::path::Path;

use degenlab_core::{GridField, GridSpec};

use crate::config::CheckpointFormat;
use crate::{LabError, Result};

const MAGIC: &[u8; 8] = b"DGLBCKP1";

pub fn file_name(format: CheckpointFormat) -> Option<&'static str> {
    match format {
        CheckpointFormat::Binary => Some("checkpoint.bin"),
        CheckpointFormat::Csv => Some("checkpoint.csv"),
        CheckpointFormat::None => None,
    }
}

pub fn encode_binary(field: &GridField) -> Vec<u8> {
    let spec = field.spec();
    let (x0, x1) = spec.x_range();
    let (y0, y1) = spec.y_range();
    let mut out = Vec::with_capacity(8 + 3 * 8 + 8 * 8 + field.level_count() * spec.len() * 8);
    out.extend_from_slice(MAGIC);
    for n in [spec.nx(), spec.ny(), field.level_count()] {
        out.extend_from_slice(&(n as u64).to_le_bytes());
    }
    for v in [spec.hx(), spec.hy(), x0, x1, y0, y1, field.t0(), field.dt()] {
        out.extend_from_slice(&v.to_le_bytes());
    }
    for level in field.levels() {
        for v in level {
            out.extend_from_slice(&v.to_le_bytes());
        }
    }
    out
}

fn assemble(
    path: &Path,
    nx: usize,
    ny: usize,
    ranges: [f64; 4],
    t0: f64,
    dt: f64,
    levels: Vec<Vec<f64>>,
) -> Result<GridField> {
    let spec = GridSpec::new(nx, ny, (ranges[0], ranges[1]), (ranges[2], ranges[3]))
        .map_err(|e| LabError::format(path, e.to_string()))?;
    GridField::from_levels(spec, t0, dt, levels).map_err(|e| LabError::format(path, e.to_string()))
}

pub fn decode_binary(bytes: &[u8], path: &Path) -> Result<GridField> {
    let bad = |m: &str| LabError::format(path, m.to_string());
    if bytes.len() < 8 + 24 + 64 || &bytes[..8] != MAGIC {
        return Err(bad("not a binary checkpoint"));
    }
    let word = |k: usize| -> [u8; 8] { bytes[k..k + 8].try_into().unwrap() };
    let nx = u64::from_le_bytes(word(8)) as usize;
    let ny = u64::from_le_bytes(word(16)) as usize;
    let count = u64::from_le_bytes(word(24)) as usize;
    let h: Vec<f64> = (0..8).map(|i| f64::from_le_bytes(word(32 + 8 * i))).collect();
    let per_level = nx.checked_mul(ny).ok_or_else(|| bad("grid size overflows"))?;
    let expected = per_level
        .checked_mul(count)
        .and_then(|n| n.checked_mul(8))
        .and_then(|n| n.checked_add(96))
        .ok_or_else(|| bad("size overflows"))?;
    if bytes.len() != expected {
        return Err(bad(&format!("expected {expected} bytes, found {}", bytes.len())));
    }
    let mut levels = Vec::with_capacity(count);
    let mut k = 96;
    for _ in 0..count {
        let mut level = Vec::with_capacity(per_level);
        for _ in 0..per_level {
            level.push(f64::from_le_bytes(word(k)));
            k += 8;
        }
        levels.push(level);
    }
    let field = assemble(path, nx, ny, [h[2], h[3], h[4], h[5]], h[6], h[7], levels)?;
    if field.spec().hx() != h[0] || field.spec().hy() != h[1] {
        return Err(bad("header spacing does not match the ranges"));
    }
    Ok(field)
}

pub fn encode_csv(field: &GridField) -> Result<Vec<u8>> {
    let spec = field.spec();
    let (x0, x1) = spec.x_range();
    let (y0, y1) = spec.y_range();
    let mut w = csv::WriterBuilder::new().flexible(true).from_writer(Vec::new());
    w.write_record(["nx", "ny", "hx", "hy", "x0", "x1", "y0", "y1", "t0", "dt", "levels"])?;
    let header = [
        spec.nx().to_string(),
        spec.ny().to_string(),
        spec.hx().to_string(),
        spec.hy().to_string(),
        x0.to_string(),
        x1.to_string(),
        y0.to_string(),
        y1.to_string(),
        field.t0().to_string(),
        field.dt().to_string(),
        field.level_count().to_string(),
    ];
    w.write_record(&header)?;
    for (k, level) in field.levels().iter().enumerate() {
        let mut row = Vec::with_capacity(level.len() + 2);
        row.push(k.to_string());
        row.push(field.time(k).to_string());
        row.extend(level.iter().map(f64::to_string));
        w.write_record(&row)?;
    }
    w.into_inner().map_err(|e| LabError::format("checkpoint.csv", e.to_string()))
}

pub fn decode_csv(bytes: &[u8], path: &Path) -> Result<GridField> {
    let bad = |m: String| LabError::format(path, m);
    let mut r = csv::ReaderBuilder::new().flexible(true).has_headers(true).from_reader(bytes);
    let mut records = r.records();
    let header = records.next().ok_or_else(|| bad("missing header values".into()))??;
    if header.len() != 11 {
        return Err(bad(format!("header has {} fields, expected 11", header.len())));
    }
    let num = |s: &str| s.trim().parse::<f64>().map_err(|e| bad(format!("`{s}`: {e}")));
    let int = |s: &str| s.trim().parse::<usize>().map_err(|e| bad(format!("`{s}`: {e}")));
    let nx = int(&header[0])?;
    let ny = int(&header[1])?;
    let (hx, hy) = (num(&header[2])?, num(&header[3])?);
    let ranges = [num(&header[4])?, num(&header[5])?, num(&header[6])?, num(&header[7])?];
    let (t0, dt) = (num(&header[8])?, num(&header[9])?);
    let count = int(&header[10])?;
    let mut levels = Vec::with_capacity(count);
    for (k, rec) in records.enumerate() {
        let rec = rec?;
        if rec.len() != nx * ny + 2 || int(&rec[0])? != k {
            return Err(bad(format!("malformed level row {k}")));
        }
        levels.push(rec.iter().skip(2).map(num).collect::<Result<Vec<f64>>>()?);
    }
    if levels.len() != count {
        return Err(bad(format!("expected {count} levels, found {}", levels.len())));
    }
    let field = assemble(path, nx, ny, ranges, t0, dt, levels)?;
    if field.spec().hx() != hx || field.spec().hy() != hy {
        return Err(bad("header spacing does not match the ranges".into()));
    }
    Ok(field)
}

pub fn write(field: &GridField, path: &Path, format: CheckpointFormat) -> Result<()> {
    let bytes = match format {
        CheckpointFormat::Binary => encode_binary(field),
        CheckpointFormat::Csv => encode_csv(field)?,
        CheckpointFormat::None => return Ok(()),
    };
    fs::write(path, bytes).map_err(|e| LabError::io(path, e))
}

/// Reads either format, dispatching on the magic bytes.
pub fn read(path: &Path) -> Result<GridField> {
    let bytes = fs::read(path).map_err(|e| LabError::io(path, e))?;
    if bytes.starts_with(MAGIC) {
        decode_binary(&bytes, path)
    } else {
        decode_csv(&bytes, path)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sample() -> GridField {
        let spec = GridSpec::new(5, 4, (-0.3, 1.7), (0.1, 0.9)).unwrap();
        let levels = (0..3)
            .map(|k| (0..spec.len()).map(|n| (n as f64 * 0.37 + k as f64).sin() / 3.0).collect())
            .collect();
        GridField::from_levels(spec, 0.125, 0.1, levels).unwrap()
    }

    fn same(a: &GridField, b: &GridField) {
        assert!(a.same_layout(b));
        assert_eq!(a.t0(), b.t0());
        assert_eq!(a.dt(), b.dt());
        for (x, y) in a.levels().iter().zip(b.levels()) {
            assert_eq!(
                x.iter().map(|v| v.to_bits()).collect::<Vec<_>>(),
                y.iter().map(|v| v.to_bits()).collect::<Vec<_>>()
            );
        }
    }

    #[test]
    fn binary_is_lossless() {
        let f = sample();
        let bytes = encode_binary(&f);
        same(&f, &decode_binary(&bytes, Path::new("mem")).unwrap());
        assert!(decode_binary(&bytes[..bytes.len() - 1], Path::new("mem")).is_err());
    }

    #[test]
    fn csv_is_lossless() {
        let f = sample();
        let bytes = encode_csv(&f).unwrap();
        same(&f, &decode_csv(&bytes, Path::new("mem")).unwrap());
        let text = String::from_utf8(bytes).unwrap();
        assert!(text.starts_with("nx,ny,hx,hy,x0,x1,y0,y1,t0,dt,levels\n5,4,"));
    }
}
