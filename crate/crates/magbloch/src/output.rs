//! Deterministic report files.
//!
//! Every artifact is reproducible byte for byte from the same config and
//! binary: no timestamps, no environment data, fixed float formatting, and a
//! config fingerprint stamped into each file so results can be traced back to
//! their inputs. Files are written atomically (temp file + rename) so a
//! crash never leaves a truncated report behind.

use std::path::{Path, PathBuf};

use serde::Serialize;

use crate::bands::{BandStructure, FluxSweepReport};
use crate::config::RunConfig;
use crate::error::Error;
use crate::Result;

/// Crate version stamped into every artifact.
pub const TOOL_VERSION: &str = env!("CARGO_PKG_VERSION");

/// 64-bit FNV-1a over a byte string.
pub fn fnv1a64(bytes: &[u8]) -> u64 {
    let mut h: u64 = 0xcbf2_9ce4_8422_2325;
    for &b in bytes {
        h ^= b as u64;
        h = h.wrapping_mul(0x0000_0100_0000_01b3);
    }
    h
}

/// Fingerprint of the resolved config (defaults applied), as 16 hex digits.
///
/// Serialization order of struct fields is fixed, so equal configs hash
/// equally regardless of key order or whitespace in the source file.
pub fn config_hash(config: &RunConfig) -> Result<String> {
    let canonical = serde_json::to_string(config)
        .map_err(|e| Error::SolverFailure(format!("config serialization failed: {e}")))?;
    Ok(format!("{:016x}", fnv1a64(canonical.as_bytes())))
}

/// Write `bytes` to `path` atomically: write a sibling temp file, then rename.
pub fn atomic_write(path: &Path, bytes: &[u8]) -> Result<()> {
    let mut tmp = path.as_os_str().to_owned();
    tmp.push(".tmp");
    let tmp = PathBuf::from(tmp);
    std::fs::write(&tmp, bytes)?;
    std::fs::rename(&tmp, path)?;
    Ok(())
}

#[derive(Serialize)]
struct Envelope<'a, R: Serialize> {
    tool: &'static str,
    version: &'static str,
    config_hash: &'a str,
    config: &'a RunConfig,
    report: &'a R,
}

/// Write a report as pretty JSON wrapped in the standard envelope
/// (`tool`, `version`, `config_hash`, resolved `config`, `report`).
pub fn write_json_report<R: Serialize>(
    path: &Path,
    config: &RunConfig,
    hash: &str,
    report: &R,
) -> Result<()> {
    let envelope = Envelope {
        tool: "magbloch",
        version: TOOL_VERSION,
        config_hash: hash,
        config,
        report,
    };
    let mut text = serde_json::to_string_pretty(&envelope)
        .map_err(|e| Error::SolverFailure(format!("report serialization failed: {e}")))?;
    text.push('\n');
    atomic_write(path, text.as_bytes())
}

fn csv_header(hash: &str) -> String {
    format!("# magbloch {TOOL_VERSION}\n# config_hash {hash}\n")
}

/// Band energies as CSV: grouped by band, row-major in the θ-grid inside
/// each band so every band is one contiguous, plottable series.
pub fn write_band_csv(path: &Path, structure: &BandStructure, hash: &str) -> Result<()> {
    let mut text = csv_header(hash);
    text.push_str("t1,t2,band,energy\n");
    let points = structure.theta_grid.points();
    for band in 0..structure.bands {
        for (k, &(_, _, t1, t2)) in points.iter().enumerate() {
            let e = structure.energies[k][band];
            text.push_str(&format!("{t1:.12e},{t2:.12e},{band},{e:.12e}\n"));
        }
    }
    atomic_write(path, text.as_bytes())
}

/// Flux-sweep energies as CSV: one row per (flux point, band); points that
/// failed are skipped here and carried in the JSON report instead.
pub fn write_butterfly_csv(path: &Path, sweep: &FluxSweepReport, hash: &str) -> Result<()> {
    let mut text = csv_header(hash);
    text.push_str("p,q,flux,band,energy\n");
    for point in &sweep.points {
        let Some(energies) = &point.energies else {
            continue;
        };
        for (band, e) in energies.iter().enumerate() {
            text.push_str(&format!(
                "{},{},{:.12e},{band},{e:.12e}\n",
                point.p, point.q, point.flux
            ));
        }
    }
    atomic_write(path, text.as_bytes())
}
