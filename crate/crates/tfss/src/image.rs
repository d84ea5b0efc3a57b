//! Log-magnitude rasters in binary PGM.

use std::fs;
use std::path::Path;

use tfss_core::{TfrGrid, TfrKind};

use crate::error::{CliError, Result};

/// Display floor below the grid maximum, in dB.
pub const FLOOR_DB: f64 = -60.0;

/// Level of a cell in dB relative to the grid maximum. Energy grids hold
/// power in the real part; other kinds are complex amplitudes.
fn levels(grid: &TfrGrid) -> Vec<f64> {
    let power: Vec<f64> = match grid.kind() {
        TfrKind::Spectrogram | TfrKind::ReassignedSpectrogram => grid.values().iter().map(|v| v.re.max(0.0)).collect(),
        _ => grid.values().iter().map(|v| v.norm_sqr()).collect(),
    };
    let peak = power.iter().cloned().fold(0.0, f64::max);
    power
        .into_iter()
        .map(|p| if peak > 0.0 && p > 0.0 { 10.0 * (p / peak).log10() } else { f64::NEG_INFINITY })
        .collect()
}

/// 8-bit grey level: 0 at or below [`FLOOR_DB`], 255 at the maximum.
pub fn grey(db: f64) -> u8 {
    let x = ((db - FLOOR_DB) / -FLOOR_DB).clamp(0.0, 1.0);
    (x * 255.0).round() as u8
}

/// Renders `rows` of `grid` (highest frequency on top) as a PGM image, one
/// pixel per cell.
pub fn render_pgm(grid: &TfrGrid, rows: &[usize]) -> Vec<u8> {
    let db = levels(grid);
    let cols = grid.cols();
    let mut out = format!("P5\n{} {}\n255\n", cols, rows.len()).into_bytes();
    for &r in rows.iter().rev() {
        out.extend(db[r * cols..(r + 1) * cols].iter().map(|&v| grey(v)));
    }
    out
}

/// Rows to display: the non-negative frequencies of real input, all rows
/// otherwise, optionally restricted to `[f_lo, f_hi]` Hz.
pub fn display_rows(grid: &TfrGrid, band: Option<(f64, f64)>) -> Vec<usize> {
    (0..grid.rows())
        .filter(|&r| !grid.axes().real_input || grid.bin(r) >= 0)
        .filter(|&r| band.is_none_or(|(lo, hi)| (lo..=hi).contains(&grid.frequency_hz(r))))
        .collect()
}

pub fn write_pgm(path: &Path, grid: &TfrGrid, rows: &[usize]) -> Result<()> {
    fs::write(path, render_pgm(grid, rows)).map_err(|e| CliError::io(path, e))
}
