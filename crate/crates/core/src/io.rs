//! SGF1 binary field files and CSV export.
//!
//! Layout, little-endian: `"SGF1"`, `u32 n_x`, `u32 n_p`, `f64 hbar`,
//! `f64 x_min, x_max, p_min, p_max`, then `n_x·n_p` interleaved `(re, im)`
//! pairs, row-major with `x` as the slow index. Wave fields use `n_p = 1`
//! and `p_min = p_max = 0`.

use std::fmt::Write as _;
use std::path::Path;

use crate::error::{Error, Result};
use crate::field::{PhaseField, WaveField, C64};
use crate::grid::{HbarContext, PhaseGrid, SpatialGrid};

const MAGIC: &[u8; 4] = b"SGF1";
const HEADER_LEN: usize = 4 + 4 + 4 + 5 * 8;

#[derive(Debug, Clone)]
pub enum SgfField {
    Wave { field: WaveField, hbar: HbarContext },
    Phase(PhaseField),
}

fn header(out: &mut Vec<u8>, nx: usize, np: usize, hbar: f64, bounds: [f64; 4]) {
    out.extend_from_slice(MAGIC);
    out.extend_from_slice(&(nx as u32).to_le_bytes());
    out.extend_from_slice(&(np as u32).to_le_bytes());
    out.extend_from_slice(&hbar.to_le_bytes());
    for b in bounds {
        out.extend_from_slice(&b.to_le_bytes());
    }
}

fn body(out: &mut Vec<u8>, values: &[C64]) {
    for v in values {
        out.extend_from_slice(&v.re.to_le_bytes());
        out.extend_from_slice(&v.im.to_le_bytes());
    }
}

pub fn encode_phase(f: &PhaseField) -> Vec<u8> {
    let g = f.grid();
    let mut out = Vec::with_capacity(HEADER_LEN + 16 * f.values().len());
    let (x, p) = (g.x_axis(), g.p_axis());
    header(&mut out, g.nx(), g.np(), g.hbar().value(), [x.x_min(), x.x_max(), p.x_min(), p.x_max()]);
    body(&mut out, f.values());
    out
}

pub fn encode_wave(f: &WaveField, hbar: HbarContext) -> Vec<u8> {
    let g = f.grid();
    let mut out = Vec::with_capacity(HEADER_LEN + 16 * f.values().len());
    header(&mut out, g.len(), 1, hbar.value(), [g.x_min(), g.x_max(), 0.0, 0.0]);
    body(&mut out, f.values());
    out
}

fn f64_at(b: &[u8], off: usize) -> f64 {
    f64::from_le_bytes(b[off..off + 8].try_into().unwrap())
}

fn u32_at(b: &[u8], off: usize) -> u32 {
    u32::from_le_bytes(b[off..off + 4].try_into().unwrap())
}

pub fn decode(bytes: &[u8]) -> Result<SgfField> {
    if bytes.len() < HEADER_LEN || &bytes[..4] != MAGIC {
        return Err(Error::Io("not an SGF1 file (bad magic or truncated header)".into()));
    }
    let nx = u32_at(bytes, 4) as usize;
    let np = u32_at(bytes, 8) as usize;
    let hbar = HbarContext::new(f64_at(bytes, 12))?;
    let b: Vec<f64> = (0..4).map(|i| f64_at(bytes, 20 + 8 * i)).collect();
    let count = nx
        .checked_mul(np)
        .ok_or_else(|| Error::Io("SGF1 dimensions overflow".into()))?;
    if bytes.len() != HEADER_LEN + 16 * count {
        return Err(Error::Io(format!(
            "SGF1 payload has {} bytes, header announces {}",
            bytes.len() - HEADER_LEN,
            16 * count
        )));
    }
    let values: Vec<C64> = (0..count)
        .map(|i| {
            let off = HEADER_LEN + 16 * i;
            C64::new(f64_at(bytes, off), f64_at(bytes, off + 8))
        })
        .collect();
    let x_axis = SpatialGrid::new(b[0], b[1], nx)?;
    if np == 1 {
        return Ok(SgfField::Wave { field: WaveField::new(x_axis, values)?, hbar });
    }
    let p_axis = SpatialGrid::new(b[2], b[3], np)?;
    Ok(SgfField::Phase(PhaseField::new(PhaseGrid::new(x_axis, p_axis, hbar), values)?))
}

pub fn write_phase(path: &Path, f: &PhaseField) -> Result<()> {
    Ok(std::fs::write(path, encode_phase(f))?)
}

pub fn write_wave(path: &Path, f: &WaveField, hbar: HbarContext) -> Result<()> {
    Ok(std::fs::write(path, encode_wave(f, hbar))?)
}

pub fn read(path: &Path) -> Result<SgfField> {
    decode(&std::fs::read(path).map_err(|e| Error::Io(format!("{}: {e}", path.display())))?)
}

pub fn read_phase(path: &Path) -> Result<PhaseField> {
    match read(path)? {
        SgfField::Phase(f) => Ok(f),
        SgfField::Wave { .. } => Err(Error::Shape(format!("{} holds a wave field, expected a phase field", path.display()))),
    }
}

pub fn read_wave(path: &Path) -> Result<(WaveField, HbarContext)> {
    match read(path)? {
        SgfField::Wave { field, hbar } => Ok((field, hbar)),
        SgfField::Phase(_) => Err(Error::Shape(format!("{} holds a phase field, expected a wave field", path.display()))),
    }
}

/// 17 significant digits.
pub fn fmt_f64(v: f64) -> String {
    format!("{v:.16e}")
}

pub fn phase_csv(f: &PhaseField) -> String {
    let g = f.grid();
    let mut s = String::from("x,p,re,im\n");
    for j in 0..g.nx() {
        for k in 0..g.np() {
            let z = g.point(j, k);
            let v = f.at(j, k);
            let _ = writeln!(s, "{},{},{},{}", fmt_f64(z.x), fmt_f64(z.p), fmt_f64(v.re), fmt_f64(v.im));
        }
    }
    s
}

pub fn wave_csv(f: &WaveField) -> String {
    let mut s = String::from("x,p,re,im\n");
    for (x, v) in f.grid().points().iter().zip(f.values()) {
        let _ = writeln!(s, "{},{},{},{}", fmt_f64(*x), fmt_f64(0.0), fmt_f64(v.re), fmt_f64(v.im));
    }
    s
}
