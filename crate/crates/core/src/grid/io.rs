//! Text and binary formats for domains and grid functions.
//!
//! Domain document (TOML):
//!
//! ```text
//! dimension = 2
//! bounding_box = [[0.0, 1.0], [0.0, 1.0]]
//! spacing = [0.25, 0.25]
//! mask = "6F3T2F3T2F3T6F"
//! ```
//!
//! The mask is run-length encoded over lattice nodes in row-major order
//! (axis 0 slowest), `T` = interior.
//!
//! Snapshot binary layout, all little-endian:
//!
//! | offset | size | content                          |
//! |--------|------|----------------------------------|
//! | 0      | 8    | magic `NLSGF001`                 |
//! | 8      | 32   | SHA-256 digest of the domain doc |
//! | 40     | 8    | `u64` number of interior values  |
//! | 48     | 16·n | `f64` re, `f64` im per node      |

use std::io::{Read, Write};

use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use super::{DomainSpec, Grid, GridError, GridFunction};

pub const SNAPSHOT_MAGIC: &[u8; 8] = b"NLSGF001";

#[derive(Serialize, Deserialize)]
struct DomainDocument {
    dimension: usize,
    bounding_box: Vec<[f64; 2]>,
    spacing: Vec<f64>,
    mask: String,
}

pub fn encode_mask(mask: &[bool]) -> String {
    let mut out = String::new();
    let mut iter = mask.iter().peekable();
    while let Some(&v) = iter.next() {
        let mut run = 1;
        while iter.peek() == Some(&&v) {
            iter.next();
            run += 1;
        }
        out.push_str(&run.to_string());
        out.push(if v { 'T' } else { 'F' });
    }
    out
}

pub fn decode_mask(text: &str) -> Result<Vec<bool>, GridError> {
    let mut out = Vec::new();
    let mut digits = String::new();
    for ch in text.chars().filter(|c| !c.is_whitespace()) {
        match ch {
            '0'..='9' => digits.push(ch),
            'T' | 'F' => {
                let run: usize = digits
                    .parse()
                    .map_err(|_| GridError::Document(format!("missing run length before '{ch}'")))?;
                out.extend(std::iter::repeat_n(ch == 'T', run));
                digits.clear();
            }
            _ => return Err(GridError::Document(format!("unexpected mask character '{ch}'"))),
        }
    }
    if !digits.is_empty() {
        return Err(GridError::Document("trailing run length without value".into()));
    }
    Ok(out)
}

impl DomainSpec {
    pub fn to_document(&self) -> String {
        let doc = DomainDocument {
            dimension: self.dimension,
            bounding_box: self.bounding_box.clone(),
            spacing: self.spacing.clone(),
            mask: encode_mask(&self.mask),
        };
        toml::to_string(&doc).expect("domain document serializes")
    }

    pub fn from_document(text: &str) -> Result<Self, GridError> {
        let doc: DomainDocument =
            toml::from_str(text).map_err(|e| GridError::Document(e.to_string()))?;
        let spec = DomainSpec {
            dimension: doc.dimension,
            bounding_box: doc.bounding_box,
            spacing: doc.spacing,
            mask: decode_mask(&doc.mask)?,
        };
        spec.validate()?;
        Ok(spec)
    }
}

impl Grid {
    /// SHA-256 of the canonical domain document.
    pub fn digest(&self) -> [u8; 32] {
        Sha256::digest(self.spec().to_document().as_bytes()).into()
    }
}

pub fn write_snapshot<W: Write>(mut w: W, grid: &Grid, u: &GridFunction) -> std::io::Result<()> {
    w.write_all(SNAPSHOT_MAGIC)?;
    w.write_all(&grid.digest())?;
    w.write_all(&(u.len() as u64).to_le_bytes())?;
    for z in u.values() {
        w.write_all(&z.re.to_le_bytes())?;
        w.write_all(&z.im.to_le_bytes())?;
    }
    Ok(())
}

#[derive(Debug, thiserror::Error)]
pub enum SnapshotError {
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error("not a grid-function snapshot")]
    Magic,
    #[error("snapshot was written for a different grid")]
    GridMismatch,
    #[error("snapshot has {got} values, grid has {expected}")]
    Length { expected: usize, got: usize },
}

pub fn read_snapshot<R: Read>(mut r: R, grid: &Grid) -> Result<GridFunction, SnapshotError> {
    let mut magic = [0u8; 8];
    r.read_exact(&mut magic)?;
    if &magic != SNAPSHOT_MAGIC {
        return Err(SnapshotError::Magic);
    }
    let mut digest = [0u8; 32];
    r.read_exact(&mut digest)?;
    if digest != grid.digest() {
        return Err(SnapshotError::GridMismatch);
    }
    let mut len = [0u8; 8];
    r.read_exact(&mut len)?;
    let n = u64::from_le_bytes(len) as usize;
    if n != grid.len() {
        return Err(SnapshotError::Length { expected: grid.len(), got: n });
    }
    let mut buf = vec![0u8; 16 * n];
    r.read_exact(&mut buf)?;
    let values = buf
        .chunks_exact(16)
        .map(|c| {
            Complex64::new(
                f64::from_le_bytes(c[..8].try_into().unwrap()),
                f64::from_le_bytes(c[8..].try_into().unwrap()),
            )
        })
        .collect();
    Ok(GridFunction::from_vec(values))
}

/// CSV with header `index,re,im`.
pub fn write_snapshot_csv<W: Write>(w: W, u: &GridFunction) -> csv::Result<()> {
    let mut out = csv::Writer::from_writer(w);
    out.write_record(["index", "re", "im"])?;
    for (k, z) in u.values().iter().enumerate() {
        out.write_record([k.to_string(), format!("{:e}", z.re), format!("{:e}", z.im)])?;
    }
    out.flush()?;
    Ok(())
}
