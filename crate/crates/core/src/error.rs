use std::path::PathBuf;

use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("inverse transform left an imaginary residue of {magnitude:e}")]
    ImaginaryResidueTooLarge { magnitude: f64 },

    #[error("SVD did not converge on frontal slice {slice}")]
    NumericalFailure { slice: usize },

    #[error("domain error: {0}")]
    DomainError(String),

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("dimension mismatch: expected {expected:?}, found {found:?}")]
    DimensionMismatch {
        expected: (usize, usize, usize),
        found: (usize, usize, usize),
    },

    #[error("patch {patch:?} does not fit in a {rows}x{cols} image")]
    PatchLargerThanImage {
        patch: (usize, usize),
        rows: usize,
        cols: usize,
    },

    #[error("window index {index} out of range ({count} windows)")]
    IndexOutOfRange { index: usize, count: usize },

    #[error("window {0} has no contribution")]
    MissingWindow(usize),

    #[error("window {0} contributes more than once")]
    DuplicateWindow(usize),

    #[error("image of {rows}x{cols} is smaller than the {window}x{window} SSIM window")]
    ImageTooSmall {
        rows: usize,
        cols: usize,
        window: usize,
    },

    #[error("reference band {band} has zero mean")]
    ZeroBandMean { band: usize },

    #[error("pixel {pixel} has an all-zero spectrum")]
    ZeroSpectrum { pixel: usize },

    #[error("band range {first}..={last} outside 1..={bands}")]
    BandRangeOutOfBounds {
        first: usize,
        last: usize,
        bands: usize,
    },

    #[error("unknown noise case {0} (expected 1-6)")]
    UnknownCase(u8),

    #[error("{path}: bad magic, not an HT31 file")]
    BadMagic { path: PathBuf },

    #[error("{path}: truncated file, expected {expected} bytes, found {found}")]
    TruncatedFile {
        path: PathBuf,
        expected: u64,
        found: u64,
    },

    #[error("{path}: {extra} trailing bytes after payload")]
    TrailingData { path: PathBuf, extra: u64 },

    #[error("non-finite value at index {index}")]
    NonFiniteValue { index: usize },

    #[error("config line {line}: key `{key}`: {reason}")]
    Config {
        line: usize,
        key: String,
        reason: String,
    },

    #[error(transparent)]
    Io(#[from] std::io::Error),
}
