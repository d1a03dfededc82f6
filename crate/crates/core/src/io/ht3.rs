//! HT31: `b"HT31"`, little-endian `u32` m, n, p, then `m*n*p` little-endian
//! `f32` values in band-major order.

use std::fs;
use std::path::Path;

use crate::error::{Error, Result};
use crate::tensor::Tensor3;

pub const HT3_MAGIC: &[u8; 4] = b"HT31";
const HEADER_LEN: usize = 16;

pub fn encode_ht3(t: &Tensor3) -> Result<Vec<u8>> {
    let (m, n, p) = t.dims();
    let mut out = Vec::with_capacity(HEADER_LEN + 4 * t.len());
    out.extend_from_slice(HT3_MAGIC);
    for d in [m, n, p] {
        let d = u32::try_from(d)
            .map_err(|_| Error::InvalidParameter(format!("dimension {d} exceeds u32")))?;
        out.extend_from_slice(&d.to_le_bytes());
    }
    for (index, &v) in t.as_slice().iter().enumerate() {
        let f = v as f32;
        if !f.is_finite() {
            return Err(Error::NonFiniteValue { index });
        }
        out.extend_from_slice(&f.to_le_bytes());
    }
    Ok(out)
}

/// Parses an HT31 buffer; `path` only labels errors.
pub fn decode_ht3(bytes: &[u8], path: &Path) -> Result<Tensor3> {
    if bytes.len() < 4 || &bytes[..4] != HT3_MAGIC {
        return Err(Error::BadMagic { path: path.into() });
    }
    if bytes.len() < HEADER_LEN {
        return Err(Error::TruncatedFile {
            path: path.into(),
            expected: HEADER_LEN as u64,
            found: bytes.len() as u64,
        });
    }
    let dim = |k: usize| u32::from_le_bytes(bytes[4 + 4 * k..8 + 4 * k].try_into().unwrap()) as usize;
    let dims = (dim(0), dim(1), dim(2));
    let count = dims.0 as u64 * dims.1 as u64 * dims.2 as u64;
    let expected = HEADER_LEN as u64 + 4 * count;
    let found = bytes.len() as u64;
    if found < expected {
        return Err(Error::TruncatedFile {
            path: path.into(),
            expected,
            found,
        });
    }
    if found > expected {
        return Err(Error::TrailingData {
            path: path.into(),
            extra: found - expected,
        });
    }
    let data: Vec<f64> = bytes[HEADER_LEN..]
        .chunks_exact(4)
        .map(|c| f32::from_le_bytes(c.try_into().unwrap()) as f64)
        .collect();
    Tensor3::from_vec(dims, data)
}

pub fn load_ht3(path: impl AsRef<Path>) -> Result<Tensor3> {
    let path = path.as_ref();
    decode_ht3(&fs::read(path)?, path)
}

/// Values are stored as `f32`.
pub fn save_ht3(path: impl AsRef<Path>, t: &Tensor3) -> Result<()> {
    super::write_atomic(path.as_ref(), &encode_ht3(t)?)
}
