//! Field files: a little-endian binary body with a fixed header, a JSON
//! sidecar, and a CSV of grid values.
//!
//! Binary layout: `b"BRXF"`, `u32` version, `u64` M, `u64` K, `u64` seed
//! (`u64::MAX` when absent), `u64` level (`u64::MAX` when absent), then
//! `(re, im)` as `f64` pairs for `k = 0..=K`.

use std::fs::File;
use std::io::{BufReader, BufWriter, Read, Write};
use std::path::Path;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use super::field::FourierField;
use super::grid::PeriodicGrid;
use crate::error::{Error, Result};

const MAGIC: &[u8; 4] = b"BRXF";
const VERSION: u32 = 1;
const NONE: u64 = u64::MAX;

/// Lineage stored alongside a field.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct FieldMeta {
    pub seed: Option<u64>,
    pub level: Option<u64>,
    #[serde(default)]
    pub label: String,
}

#[derive(Serialize, Deserialize)]
struct Sidecar {
    schema: String,
    m: usize,
    k: usize,
    #[serde(flatten)]
    meta: FieldMeta,
}

pub fn write_field(mut w: impl Write, f: &FourierField, meta: &FieldMeta) -> Result<()> {
    let g = f.grid();
    w.write_all(MAGIC)?;
    w.write_all(&VERSION.to_le_bytes())?;
    for v in [
        g.m() as u64,
        g.k() as u64,
        meta.seed.unwrap_or(NONE),
        meta.level.unwrap_or(NONE),
    ] {
        w.write_all(&v.to_le_bytes())?;
    }
    for c in f.coeffs() {
        w.write_all(&c.re.to_le_bytes())?;
        w.write_all(&c.im.to_le_bytes())?;
    }
    Ok(())
}

fn read_u64(r: &mut impl Read) -> Result<u64> {
    let mut b = [0u8; 8];
    r.read_exact(&mut b)?;
    Ok(u64::from_le_bytes(b))
}

fn read_f64(r: &mut impl Read) -> Result<f64> {
    Ok(f64::from_bits(read_u64(r)?))
}

pub fn read_field(mut r: impl Read) -> Result<(FourierField, FieldMeta)> {
    let mut magic = [0u8; 4];
    r.read_exact(&mut magic)?;
    if &magic != MAGIC {
        return Err(Error::Format("bad magic".into()));
    }
    let mut v = [0u8; 4];
    r.read_exact(&mut v)?;
    let version = u32::from_le_bytes(v);
    if version != VERSION {
        return Err(Error::Format(format!("unsupported version {version}")));
    }
    let m = read_u64(&mut r)? as usize;
    let k = read_u64(&mut r)? as usize;
    let opt = |x: u64| (x != NONE).then_some(x);
    let seed = opt(read_u64(&mut r)?);
    let level = opt(read_u64(&mut r)?);
    let grid = PeriodicGrid::new(m, k)?;
    let mut coeffs = Vec::with_capacity(k + 1);
    for _ in 0..=k {
        let re = read_f64(&mut r)?;
        let im = read_f64(&mut r)?;
        coeffs.push(Complex64::new(re, im));
    }
    let mut rest = [0u8; 1];
    if r.read(&mut rest)? != 0 {
        return Err(Error::Format("trailing bytes after coefficients".into()));
    }
    let meta = FieldMeta {
        seed,
        level,
        label: String::new(),
    };
    Ok((FourierField::from_coeffs(grid, coeffs)?, meta))
}

/// Writes `<stem>.brxf` and `<stem>.json`.
pub fn save_field(stem: &Path, f: &FourierField, meta: &FieldMeta) -> Result<()> {
    let mut w = BufWriter::new(File::create(stem.with_extension("brxf"))?);
    write_field(&mut w, f, meta)?;
    w.flush()?;
    let sidecar = Sidecar {
        schema: "brox.field.v1".into(),
        m: f.grid().m(),
        k: f.grid().k(),
        meta: meta.clone(),
    };
    std::fs::write(stem.with_extension("json"), serde_json::to_string_pretty(&sidecar)?)?;
    Ok(())
}

/// Reads `<stem>.brxf`, taking the label from the sidecar when present.
pub fn load_field(stem: &Path) -> Result<(FourierField, FieldMeta)> {
    let (f, mut meta) = read_field(BufReader::new(File::open(stem.with_extension("brxf"))?))?;
    if let Ok(text) = std::fs::read_to_string(stem.with_extension("json")) {
        let side: Sidecar = serde_json::from_str(&text)?;
        if side.m != f.grid().m() || side.k != f.grid().k() {
            return Err(Error::Format("sidecar grid disagrees with binary header".into()));
        }
        meta.label = side.meta.label;
    }
    Ok((f, meta))
}

/// CSV rows `x,value` on the field's own grid.
pub fn write_values_csv(w: impl Write, f: &FourierField) -> Result<()> {
    let mut out = csv::Writer::from_writer(w);
    out.write_record(["x", "value"]).map_err(csv_err)?;
    for (x, v) in f.grid().points().into_iter().zip(f.values()) {
        out.serialize((x, v)).map_err(csv_err)?;
    }
    out.flush()?;
    Ok(())
}

fn csv_err(e: csv::Error) -> Error {
    Error::Format(e.to_string())
}
