//! On-disk Cayley-table cache.
//!
//! File layout, all integers little-endian:
//!
//! ```text
//! "RNGF"  u16 version  u32 size  u16 zero  u16 one
//! add table   size*size u16, row-major
//! mul table   size*size u16, row-major
//! labels      size * (u32 byte length, UTF-8 bytes)
//! ```
//!
//! Files are named by the SHA-256 of the canonical expression and the format
//! version. A version mismatch or corrupt file is a miss.

use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use jring_core::{FiniteRing, TableRing};
use sha2::{Digest, Sha256};

use crate::CliError;

pub const MAGIC: &[u8; 4] = b"RNGF";
pub const FORMAT_VERSION: u16 = 1;

pub struct Cache {
    dir: PathBuf,
}

impl Cache {
    pub fn new(dir: impl Into<PathBuf>) -> Result<Self, CliError> {
        let dir = dir.into();
        fs::create_dir_all(&dir).map_err(|e| CliError::Io(format!("{}: {e}", dir.display())))?;
        Ok(Cache { dir })
    }

    pub fn dir(&self) -> &Path {
        &self.dir
    }

    pub fn path_for(&self, canonical: &str) -> PathBuf {
        let mut h = Sha256::new();
        h.update(canonical.as_bytes());
        h.update(FORMAT_VERSION.to_le_bytes());
        self.dir.join(format!("{}.rngf", hex::encode(h.finalize())))
    }

    pub fn load(&self, canonical: &str) -> Option<FiniteRing> {
        let path = self.path_for(canonical);
        let bytes = fs::read(&path).ok()?;
        match decode(&bytes) {
            Ok(Some(table)) => Some(FiniteRing::from_table(table, canonical)),
            Ok(None) => None,
            Err(why) => {
                log::warn!("ignoring corrupt cache file {}: {why}", path.display());
                None
            }
        }
    }

    /// Writes to a temporary file and renames it into place.
    pub fn store(&self, canonical: &str, ring: &FiniteRing) -> Result<(), CliError> {
        let table = ring.require_table()?;
        let path = self.path_for(canonical);
        let tmp = path.with_extension(format!("tmp{}", std::process::id()));
        let io = |e: std::io::Error| CliError::Io(format!("{}: {e}", path.display()));
        let mut file = fs::File::create(&tmp).map_err(io)?;
        file.write_all(&encode(table)).map_err(io)?;
        file.sync_all().map_err(io)?;
        fs::rename(&tmp, &path).map_err(io)
    }
}

pub fn encode(t: &TableRing) -> Vec<u8> {
    let n = t.size();
    let mut out = Vec::with_capacity(14 + 4 * n * n + 8 * n);
    out.extend_from_slice(MAGIC);
    out.extend_from_slice(&FORMAT_VERSION.to_le_bytes());
    out.extend_from_slice(&(n as u32).to_le_bytes());
    out.extend_from_slice(&(t.zero() as u16).to_le_bytes());
    out.extend_from_slice(&(t.one() as u16).to_le_bytes());
    for &v in t.add_table().iter().chain(t.mul_table()) {
        out.extend_from_slice(&v.to_le_bytes());
    }
    for l in t.labels() {
        out.extend_from_slice(&(l.len() as u32).to_le_bytes());
        out.extend_from_slice(l.as_bytes());
    }
    out
}

struct Reader<'a> {
    bytes: &'a [u8],
    pos: usize,
}

impl<'a> Reader<'a> {
    fn take(&mut self, n: usize) -> Result<&'a [u8], String> {
        let end = self.pos.checked_add(n).filter(|&e| e <= self.bytes.len()).ok_or("truncated file")?;
        let s = &self.bytes[self.pos..end];
        self.pos = end;
        Ok(s)
    }

    fn u16(&mut self) -> Result<u16, String> {
        Ok(u16::from_le_bytes(self.take(2)?.try_into().unwrap()))
    }

    fn u32(&mut self) -> Result<u32, String> {
        Ok(u32::from_le_bytes(self.take(4)?.try_into().unwrap()))
    }
}

/// `Ok(None)` for a file written by another format version.
pub fn decode(bytes: &[u8]) -> Result<Option<TableRing>, String> {
    let mut r = Reader { bytes, pos: 0 };
    if r.take(4)? != MAGIC {
        return Err("bad magic".into());
    }
    if r.u16()? != FORMAT_VERSION {
        return Ok(None);
    }
    let n = r.u32()? as usize;
    if n == 0 || n > u16::MAX as usize + 1 {
        return Err(format!("invalid size {n}"));
    }
    if r.u16()? != 0 {
        return Err("zero must be index 0".into());
    }
    let one = r.u16()? as usize;
    let table = |r: &mut Reader| -> Result<Vec<u16>, String> {
        let raw = r.take(2 * n * n)?;
        Ok(raw.chunks_exact(2).map(|c| u16::from_le_bytes([c[0], c[1]])).collect())
    };
    let add = table(&mut r)?;
    let mul = table(&mut r)?;
    let mut labels = Vec::with_capacity(n);
    for _ in 0..n {
        let len = r.u32()? as usize;
        let s = std::str::from_utf8(r.take(len)?).map_err(|_| "label is not UTF-8")?;
        labels.push(s.to_string());
    }
    if r.pos != bytes.len() {
        return Err("trailing bytes".into());
    }
    TableRing::from_tables(add, mul, one, labels).map(Some).map_err(|e| e.to_string())
}

#[cfg(test)]
mod tests {
    use super::*;
    use jring_core::constructions::{matrix_ring, zmod};

    #[test]
    fn header_layout() {
        let z4 = zmod(4).unwrap();
        let bytes = encode(z4.require_table().unwrap());
        assert_eq!(&bytes[..4], b"RNGF");
        assert_eq!(&bytes[4..6], &[1, 0]);
        assert_eq!(&bytes[6..10], &[4, 0, 0, 0]);
        assert_eq!(&bytes[10..14], &[0, 0, 1, 0]);
        // add[0][1] = 1, then mul table starts after 16 entries
        assert_eq!(&bytes[16..18], &[1, 0]);
        assert_eq!(bytes.len(), 14 + 2 * 2 * 16 + 4 * (4 + 1));
    }

    #[test]
    fn miss_on_cold_cache_and_version_mismatch() {
        let dir = tempfile::tempdir().unwrap();
        let cache = Cache::new(dir.path()).unwrap();
        assert!(cache.load("zmod(4)").is_none());
        let m2 = matrix_ring(2, &zmod(2).unwrap()).unwrap().materialize(64).unwrap();
        cache.store("m(2,zmod(2))", &m2).unwrap();
        let loaded = cache.load("m(2,zmod(2))").unwrap();
        assert_eq!(loaded.require_table().unwrap(), m2.require_table().unwrap());
        assert_eq!(loaded.name(), "m(2,zmod(2))");

        let path = cache.path_for("m(2,zmod(2))");
        let mut bytes = fs::read(&path).unwrap();
        bytes[4] = 9;
        fs::write(&path, &bytes).unwrap();
        assert!(cache.load("m(2,zmod(2))").is_none());
        bytes[4] = 1;
        bytes.truncate(bytes.len() - 3);
        fs::write(&path, &bytes).unwrap();
        assert!(cache.load("m(2,zmod(2))").is_none());
        fs::write(&path, b"garbage").unwrap();
        assert!(cache.load("m(2,zmod(2))").is_none());
    }
}
