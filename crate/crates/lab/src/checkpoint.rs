//! Length-prefixed binary checkpoints.
//!
//! Layout (little endian): magic `RLCK1`, subcommand string, 32-byte
//! fingerprint, `u64` cursor, aggregate JSON string, then a count followed by
//! `(file name, byte offset)` pairs. Strings are a `u32` length and bytes.

use std::io::{Read, Write};
use std::path::Path;

use sha2::{Digest, Sha256};

use crate::LabError;

pub const MAGIC: &[u8; 5] = b"RLCK1";

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Checkpoint {
    pub subcommand: String,
    pub fingerprint: [u8; 32],
    /// Number of completed work units.
    pub cursor: u64,
    pub aggregate: String,
    pub files: Vec<(String, u64)>,
}

/// SHA-256 over the subcommand, seed and parameter-file bytes.
pub fn fingerprint(subcommand: &str, seed: u64, params: &[u8]) -> [u8; 32] {
    let mut h = Sha256::new();
    for part in [subcommand.as_bytes(), &seed.to_le_bytes(), params] {
        h.update((part.len() as u64).to_le_bytes());
        h.update(part);
    }
    h.finalize().into()
}

fn put_str<W: Write>(out: &mut W, s: &str) -> std::io::Result<()> {
    out.write_all(&(s.len() as u32).to_le_bytes())?;
    out.write_all(s.as_bytes())
}

fn malformed(msg: &str) -> LabError {
    LabError::Checkpoint(format!("malformed checkpoint: {msg}"))
}

fn get_u32<R: Read>(input: &mut R) -> Result<u32, LabError> {
    let mut b = [0u8; 4];
    input
        .read_exact(&mut b)
        .map_err(|_| malformed("truncated"))?;
    Ok(u32::from_le_bytes(b))
}

fn get_u64<R: Read>(input: &mut R) -> Result<u64, LabError> {
    let mut b = [0u8; 8];
    input
        .read_exact(&mut b)
        .map_err(|_| malformed("truncated"))?;
    Ok(u64::from_le_bytes(b))
}

fn get_str<R: Read>(input: &mut R) -> Result<String, LabError> {
    let len = get_u32(input)? as usize;
    let mut buf = Vec::new();
    input
        .take(len as u64)
        .read_to_end(&mut buf)
        .map_err(|_| malformed("truncated"))?;
    if buf.len() != len {
        return Err(malformed("truncated string"));
    }
    String::from_utf8(buf).map_err(|_| malformed("string is not UTF-8"))
}

impl Checkpoint {
    pub fn encode(&self) -> Vec<u8> {
        let mut out = Vec::new();
        out.extend_from_slice(MAGIC);
        put_str(&mut out, &self.subcommand).unwrap();
        out.extend_from_slice(&self.fingerprint);
        out.extend_from_slice(&self.cursor.to_le_bytes());
        put_str(&mut out, &self.aggregate).unwrap();
        out.extend_from_slice(&(self.files.len() as u32).to_le_bytes());
        for (name, off) in &self.files {
            put_str(&mut out, name).unwrap();
            out.extend_from_slice(&off.to_le_bytes());
        }
        out
    }

    pub fn decode(bytes: &[u8]) -> Result<Self, LabError> {
        let mut input = bytes;
        let mut magic = [0u8; 5];
        input
            .read_exact(&mut magic)
            .map_err(|_| malformed("truncated"))?;
        if &magic != MAGIC {
            return Err(malformed("bad magic"));
        }
        let subcommand = get_str(&mut input)?;
        let mut fingerprint = [0u8; 32];
        input
            .read_exact(&mut fingerprint)
            .map_err(|_| malformed("truncated"))?;
        let cursor = get_u64(&mut input)?;
        let aggregate = get_str(&mut input)?;
        let n = get_u32(&mut input)?;
        let mut files = Vec::new();
        for _ in 0..n {
            let name = get_str(&mut input)?;
            files.push((name, get_u64(&mut input)?));
        }
        if !input.is_empty() {
            return Err(malformed("trailing bytes"));
        }
        Ok(Checkpoint {
            subcommand,
            fingerprint,
            cursor,
            aggregate,
            files,
        })
    }

    /// Writes to a temporary sibling and renames into place.
    pub fn save(&self, path: &Path) -> Result<(), LabError> {
        let tmp = path.with_extension("tmp");
        std::fs::write(&tmp, self.encode())?;
        std::fs::rename(&tmp, path)?;
        Ok(())
    }

    pub fn load(path: &Path) -> Result<Self, LabError> {
        let bytes = std::fs::read(path).map_err(|e| {
            LabError::Checkpoint(format!("cannot read checkpoint {}: {e}", path.display()))
        })?;
        Self::decode(&bytes)
    }
}
