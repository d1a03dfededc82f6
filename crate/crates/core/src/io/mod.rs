//! File formats and configuration: the HT31 cube format, `key = value` run
//! configs, per-band normalization, CSV reports and PGM band export.
//!
//! Every writer goes through [`write_atomic`], so a failed command never
//! leaves a partial output file behind.

mod config;
mod ht3;
mod normalize;
mod report;

use std::io::Write;
use std::path::Path;

pub use config::{parse_run_config, RunConfig};
pub use ht3::{decode_ht3, encode_ht3, load_ht3, save_ht3, HT3_MAGIC};
pub use normalize::{denormalize_bands, normalize_bands, BandTransform};
pub use report::{band_pgm, metrics_csv, trace_csv};

use crate::error::Result;

/// Writes `bytes` to a temporary sibling of `path`, then renames it into place.
pub fn write_atomic(path: &Path, bytes: &[u8]) -> Result<()> {
    let dir = match path.parent() {
        Some(d) if !d.as_os_str().is_empty() => d,
        _ => Path::new("."),
    };
    let mut tmp = tempfile::NamedTempFile::new_in(dir)?;
    tmp.write_all(bytes)?;
    tmp.flush()?;
    tmp.persist(path).map_err(|e| e.error)?;
    Ok(())
}
