//! Machine-readable report emission: CSV with pinned formatting, JSON
//! summaries, and the flat binary field format.
//!
//! All floats in CSV files are printed with 17 significant digits
//! (round-trip exact for f64); files are UTF-8 and newline-terminated, and
//! byte-identical across reruns of the same (config, seed).

use crate::error::Result;
use crate::percolation::Estimate;
use crate::sampler::GridField;
use crate::Kernel;
use std::io::Write;
use std::path::Path;

/// 17-significant-digit float formatting used in every CSV cell.
pub fn fmt_f64(x: f64) -> String {
    if x.is_nan() {
        "nan".into()
    } else if x.is_infinite() {
        if x > 0.0 { "inf".into() } else { "-inf".into() }
    } else {
        format!("{:.16e}", x)
    }
}

/// Write a CSV file with the given header and rows (already formatted).
pub fn write_csv(path: &Path, header: &str, rows: &[Vec<String>]) -> Result<()> {
    let mut out = String::with_capacity(rows.len() * 64 + header.len() + 1);
    out.push_str(header);
    out.push('\n');
    for row in rows {
        out.push_str(&row.join(","));
        out.push('\n');
    }
    std::fs::write(path, out)?;
    Ok(())
}

pub const ESTIMATE_CSV_HEADER: &str =
    "kernel,alpha,gamma,event,level,R,method,trials,ess,p_hat,se,ci_lo,ci_hi,seed";

/// Row of the percolation estimate schema.
pub fn estimate_row(kernel: &Kernel, e: &Estimate) -> Vec<String> {
    vec![
        kernel.family.to_string(),
        fmt_f64(kernel.alpha),
        kernel
            .gamma
            .map(fmt_f64)
            .unwrap_or_else(|| "".into()),
        e.event.clone(),
        fmt_f64(e.level),
        fmt_f64(e.scale),
        e.method.clone(),
        e.trials.to_string(),
        fmt_f64(e.ess),
        fmt_f64(e.p_hat),
        fmt_f64(e.se),
        fmt_f64(e.ci_lo),
        fmt_f64(e.ci_hi),
        e.seed.to_string(),
    ]
}

/// Write a JSON value with a trailing newline.
pub fn write_json(path: &Path, value: &serde_json::Value) -> Result<()> {
    let mut s = serde_json::to_string_pretty(value).expect("serializable");
    s.push('\n');
    std::fs::write(path, s)?;
    Ok(())
}

/// Field file format: one JSON header line, then values as little-endian
/// f64 in row-major order.
pub fn write_field_binary(path: &Path, field: &GridField) -> Result<()> {
    let header = serde_json::json!({
        "dims": field.grid.dims,
        "spacing": field.grid.spacing,
        "origin": field.grid.origin,
        "seed": field.seed,
        "method": field.provenance.method,
    });
    let mut f = std::fs::File::create(path)?;
    writeln!(f, "{}", serde_json::to_string(&header).expect("header"))?;
    let mut buf = Vec::with_capacity(field.values.len() * 8);
    for v in &field.values {
        buf.extend_from_slice(&v.to_le_bytes());
    }
    f.write_all(&buf)?;
    Ok(())
}

/// Read back a field file written by [`write_field_binary`].
pub fn read_field_binary(path: &Path) -> Result<(serde_json::Value, Vec<f64>)> {
    let data = std::fs::read(path)?;
    let newline = data
        .iter()
        .position(|&b| b == b'\n')
        .ok_or_else(|| crate::Error::config("field file missing header line"))?;
    let header: serde_json::Value = serde_json::from_slice(&data[..newline])
        .map_err(|e| crate::Error::Config(format!("bad field header: {e}")))?;
    let body = &data[newline + 1..];
    if body.len() % 8 != 0 {
        return Err(crate::Error::config("field payload not a multiple of 8 bytes"));
    }
    let values = body
        .chunks_exact(8)
        .map(|c| f64::from_le_bytes(c.try_into().unwrap()))
        .collect();
    Ok((header, values))
}
