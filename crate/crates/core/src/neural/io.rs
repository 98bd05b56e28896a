//! Binary model files.
//!
//! ```text
//! "PMND"                 magic
//! u16                    format version (1)
//! u8                     input kind: 0 = binary matrix, 1 = symbol sequence
//! u32                    n
//! u32                    c_max (binary matrix) or embedding width
//! u32                    hidden width
//! f64                    dropout rate
//! f64 * param_count      weights in layout order
//! u32                    CRC-32 of every preceding byte
//! ```
//!
//! All integers and reals are little-endian.

use std::path::Path;

use super::model::ModelWeights;
use super::{InputKind, MlpSpec};
use crate::error::{Error, Result};

pub const MODEL_MAGIC: &[u8; 4] = b"PMND";
pub const MODEL_VERSION: u16 = 1;

const HEADER_LEN: usize = 4 + 2 + 1 + 4 + 4 + 4 + 8;

pub fn write_model(w: &ModelWeights) -> Vec<u8> {
    let spec = w.spec();
    let mut out = Vec::with_capacity(HEADER_LEN + 8 * w.params().len() + 4);
    out.extend_from_slice(MODEL_MAGIC);
    out.extend_from_slice(&MODEL_VERSION.to_le_bytes());
    let (tag, width) = match spec.input {
        InputKind::BinaryMatrix { c_max, .. } => (0u8, c_max),
        InputKind::SymbolSequence { embed_dim, .. } => (1u8, embed_dim),
    };
    out.push(tag);
    out.extend_from_slice(&(spec.n() as u32).to_le_bytes());
    out.extend_from_slice(&(width as u32).to_le_bytes());
    out.extend_from_slice(&(spec.hidden as u32).to_le_bytes());
    out.extend_from_slice(&spec.dropout.to_le_bytes());
    for v in w.params() {
        out.extend_from_slice(&v.to_le_bytes());
    }
    let crc = crc32fast::hash(&out);
    out.extend_from_slice(&crc.to_le_bytes());
    out
}

pub fn read_model(bytes: &[u8]) -> Result<ModelWeights> {
    if bytes.len() >= 6 {
        if &bytes[..4] != MODEL_MAGIC {
            return Err(Error::Version("bad magic bytes".into()));
        }
        let version = u16::from_le_bytes([bytes[4], bytes[5]]);
        if version != MODEL_VERSION {
            return Err(Error::Version(format!(
                "format version {version}, expected {MODEL_VERSION}"
            )));
        }
    }
    if bytes.len() < HEADER_LEN + 4 {
        return Err(Error::Checksum);
    }
    let (body, crc) = bytes.split_at(bytes.len() - 4);
    if crc32fast::hash(body) != u32::from_le_bytes(crc.try_into().unwrap()) {
        return Err(Error::Checksum);
    }

    let u32_at = |at: usize| u32::from_le_bytes(body[at..at + 4].try_into().unwrap()) as usize;
    let tag = body[6];
    let n = u32_at(7);
    let width = u32_at(11);
    let hidden = u32_at(15);
    let dropout = f64::from_le_bytes(body[19..27].try_into().unwrap());
    let input = match tag {
        0 => InputKind::BinaryMatrix { n, c_max: width },
        1 => InputKind::SymbolSequence {
            n,
            embed_dim: width,
        },
        t => return Err(Error::Corrupt(format!("unknown input kind {t}"))),
    };
    let spec = MlpSpec {
        input,
        hidden,
        dropout,
    };
    spec.validate()
        .map_err(|e| Error::Corrupt(format!("bad architecture: {e}")))?;
    let payload = &body[HEADER_LEN..];
    if payload.len() != 8 * spec.param_count() {
        return Err(Error::Corrupt(format!(
            "{} weight bytes, architecture needs {}",
            payload.len(),
            8 * spec.param_count()
        )));
    }
    let params = payload
        .chunks_exact(8)
        .map(|c| f64::from_le_bytes(c.try_into().unwrap()))
        .collect();
    ModelWeights::from_params(spec, params)
}

pub fn save_model(w: &ModelWeights, path: &Path) -> Result<()> {
    crate::harness::write_atomically(path, &write_model(w))
}

pub fn load_model(path: &Path) -> Result<ModelWeights> {
    read_model(&std::fs::read(path)?)
}
