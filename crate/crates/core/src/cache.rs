//! On-disk cache of representation lists.
//!
//! File layout, all little-endian: the magic bytes `TRIA`, a u32 format
//! version, λ as u64, d as u32, the vector count as u64, then count·d
//! coordinates as i64. The directory comes from `TRIADNE_CACHE_DIR`; with
//! the variable unset nothing is read or written.

use std::fs;
use std::io::{Read, Write};
use std::path::{Path, PathBuf};

use crate::error::{Error, Result};
use crate::lattice::{rep_list, RepList};

pub const MAGIC: &[u8; 4] = b"TRIA";
pub const VERSION: u32 = 1;
pub const CACHE_ENV: &str = "TRIADNE_CACHE_DIR";

pub fn encode(reps: &RepList) -> Vec<u8> {
    let mut out = Vec::with_capacity(28 + reps.coords.len() * 8);
    out.extend_from_slice(MAGIC);
    out.extend_from_slice(&VERSION.to_le_bytes());
    out.extend_from_slice(&reps.lambda.to_le_bytes());
    out.extend_from_slice(&(reps.d as u32).to_le_bytes());
    out.extend_from_slice(&(reps.len() as u64).to_le_bytes());
    for c in &reps.coords {
        out.extend_from_slice(&c.to_le_bytes());
    }
    out
}

pub fn decode(bytes: &[u8]) -> Result<RepList> {
    let bad = |m: &str| Error::Io(format!("malformed rep cache: {m}"));
    if bytes.len() < 28 || &bytes[..4] != MAGIC {
        return Err(bad("missing header"));
    }
    let u32_at = |i: usize| u32::from_le_bytes(bytes[i..i + 4].try_into().unwrap());
    let u64_at = |i: usize| u64::from_le_bytes(bytes[i..i + 8].try_into().unwrap());
    if u32_at(4) != VERSION {
        return Err(bad("unsupported version"));
    }
    let lambda = u64_at(8);
    let d = u32_at(16) as usize;
    let count = u64_at(20) as usize;
    let body = &bytes[28..];
    if d == 0 || body.len() != count * d * 8 {
        return Err(bad("length does not match header"));
    }
    let coords = body
        .chunks_exact(8)
        .map(|c| i64::from_le_bytes(c.try_into().unwrap()))
        .collect();
    Ok(RepList { lambda, d, coords })
}

pub fn write_reps(path: &Path, reps: &RepList) -> Result<()> {
    let tmp = path.with_extension("tmp");
    fs::File::create(&tmp)?.write_all(&encode(reps))?;
    fs::rename(tmp, path)?;
    Ok(())
}

pub fn read_reps(path: &Path) -> Result<RepList> {
    let mut bytes = Vec::new();
    fs::File::open(path)?.read_to_end(&mut bytes)?;
    decode(&bytes)
}

pub fn cache_dir() -> Option<PathBuf> {
    std::env::var_os(CACHE_ENV).map(PathBuf::from)
}

/// Representation list through the cache in `dir`, computing and storing it on a miss.
pub fn rep_list_cached_in(dir: &Path, lambda: u64, d: usize) -> Result<RepList> {
    let path = dir.join(format!("reps_d{d}_l{lambda}.bin"));
    if let Ok(r) = read_reps(&path) {
        if r.lambda == lambda && r.d == d {
            return Ok(r);
        }
    }
    let reps = rep_list(lambda, d)?;
    fs::create_dir_all(dir)?;
    write_reps(&path, &reps)?;
    Ok(reps)
}

/// Representation list, cached when `TRIADNE_CACHE_DIR` is set.
pub fn rep_list_cached(lambda: u64, d: usize) -> Result<RepList> {
    match cache_dir() {
        Some(dir) => rep_list_cached_in(&dir, lambda, d),
        None => rep_list(lambda, d),
    }
}
