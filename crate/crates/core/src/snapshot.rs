//! THGSNAP1 field snapshots.
//!
//! Layout (all little-endian): the 8 ASCII bytes `THGSNAP1`, `u32` dimension,
//! `u32` points per axis, `f64` box length, `f64` time, then `n^d` `f64`
//! values in storage order (axis 0 slowest).

use std::fs;
use std::io::Write;
use std::path::Path;

use crate::error::{Error, Result};
use crate::field::RealField;
use crate::grid::Grid;

pub const MAGIC: &[u8; 8] = b"THGSNAP1";
const HEADER_LEN: usize = 8 + 4 + 4 + 8 + 8;

pub fn encode(field: &RealField, time: f64) -> Vec<u8> {
    let grid = field.grid();
    let mut out = Vec::with_capacity(HEADER_LEN + 8 * grid.len());
    out.extend_from_slice(MAGIC);
    out.extend_from_slice(&(grid.dim() as u32).to_le_bytes());
    out.extend_from_slice(&(grid.n() as u32).to_le_bytes());
    out.extend_from_slice(&grid.length().to_le_bytes());
    out.extend_from_slice(&time.to_le_bytes());
    for v in field.values() {
        out.extend_from_slice(&v.to_le_bytes());
    }
    out
}

/// Parses a snapshot, returning the field and its time stamp.
pub fn decode(bytes: &[u8]) -> Result<(RealField, f64)> {
    if bytes.len() < HEADER_LEN {
        return Err(Error::Format(format!(
            "file too short for header: {} bytes, need {HEADER_LEN}",
            bytes.len()
        )));
    }
    if &bytes[..8] != MAGIC {
        return Err(Error::Format(format!(
            "bad magic, expected {:?}",
            std::str::from_utf8(MAGIC).unwrap()
        )));
    }
    let u32_at = |o: usize| u32::from_le_bytes(bytes[o..o + 4].try_into().unwrap());
    let f64_at = |o: usize| f64::from_le_bytes(bytes[o..o + 8].try_into().unwrap());
    let dim = u32_at(8) as usize;
    let n = u32_at(12) as usize;
    let length = f64_at(16);
    let time = f64_at(24);
    let grid = Grid::new(dim, n, length)?;
    let expected = HEADER_LEN + 8 * grid.len();
    if bytes.len() != expected {
        return Err(Error::Format(format!(
            "size mismatch: header promises {expected} bytes, file has {}",
            bytes.len()
        )));
    }
    let values = bytes[HEADER_LEN..]
        .chunks_exact(8)
        .map(|c| f64::from_le_bytes(c.try_into().unwrap()))
        .collect();
    Ok((RealField::new(&grid, values)?, time))
}

pub fn save(field: &RealField, time: f64, path: &Path) -> Result<()> {
    let mut file = fs::File::create(path)?;
    file.write_all(&encode(field, time))?;
    Ok(())
}

pub fn load(path: &Path) -> Result<(RealField, f64)> {
    decode(&fs::read(path)?)
}
