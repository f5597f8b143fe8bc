//! Snapshot and report formats, written atomically.

use std::fmt::Write as _;
use std::io::Write as _;
use std::path::Path;

use ccsl_core::{CellField, Grid2D};

use crate::error::RunError;

/// Writes through a temporary file in the target directory, then renames.
pub fn write_atomic(path: &Path, bytes: &[u8]) -> Result<(), RunError> {
    let dir = match path.parent() {
        Some(d) if !d.as_os_str().is_empty() => d,
        _ => Path::new("."),
    };
    std::fs::create_dir_all(dir).map_err(|e| RunError::io(dir, e))?;
    let mut tmp = tempfile::NamedTempFile::new_in(dir).map_err(|e| RunError::io(dir, e))?;
    tmp.write_all(bytes).map_err(|e| RunError::io(path, e))?;
    tmp.as_file().sync_all().map_err(|e| RunError::io(path, e))?;
    tmp.persist(path).map_err(|e| RunError::io(path, e.error))?;
    Ok(())
}

/// `x_center,y_center,value`, one row per cell, `i` fastest.
pub fn snapshot_csv(f: &CellField) -> String {
    let g = f.grid;
    let mut s = String::from("x_center,y_center,value\n");
    for j in 0..g.ny() {
        let y = g.y.center(j as isize);
        for i in 0..g.nx() {
            let _ = writeln!(s, "{:e},{:e},{:e}", g.x.center(i as isize), y, f.get(i, j));
        }
    }
    s
}

/// Little-endian `u32 nx, u32 ny, f64 time`, then the values row-major.
pub fn snapshot_binary(f: &CellField) -> Vec<u8> {
    let mut b = Vec::with_capacity(16 + 8 * f.values.len());
    b.extend_from_slice(&(f.grid.nx() as u32).to_le_bytes());
    b.extend_from_slice(&(f.grid.ny() as u32).to_le_bytes());
    b.extend_from_slice(&f.time.to_le_bytes());
    for v in &f.values {
        b.extend_from_slice(&v.to_le_bytes());
    }
    b
}

/// Inverse of [`snapshot_binary`]; the grid supplies geometry and boundaries.
pub fn read_snapshot_binary(bytes: &[u8], grid: Grid2D) -> Result<CellField, RunError> {
    let bad = |m: &str| RunError::Config(format!("malformed snapshot: {m}"));
    if bytes.len() < 16 {
        return Err(bad("short header"));
    }
    let u32_at = |k: usize| u32::from_le_bytes(bytes[k..k + 4].try_into().expect("4 bytes")) as usize;
    let f64_at = |k: usize| f64::from_le_bytes(bytes[k..k + 8].try_into().expect("8 bytes"));
    let (nx, ny) = (u32_at(0), u32_at(4));
    if (nx, ny) != (grid.nx(), grid.ny()) {
        return Err(bad("mesh does not match the grid"));
    }
    if bytes.len() != 16 + 8 * nx * ny {
        return Err(bad("payload length"));
    }
    let values = (0..nx * ny).map(|k| f64_at(16 + 8 * k)).collect();
    Ok(CellField::from_values(grid, values, f64_at(8))?)
}
