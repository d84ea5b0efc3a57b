//! Binary grid files.
//!
//! Little-endian layout: magic `TFSS`, version `u32`, `M` `u32`, `N` `u32`,
//! `fs` `f64`, kind `u8`, then `M * N` complex values, each an `f32` real
//! part followed by an `f32` imaginary part, row-major with rows in bin
//! order `-M/2 + 1 ..= M/2`.

use std::fs;
use std::path::Path;

use num_complex::{Complex32, Complex64};
use tfss_core::{TfrGrid, TfrKind};

use crate::error::{CliError, Result};

pub const MAGIC: [u8; 4] = *b"TFSS";
pub const VERSION: u32 = 1;
pub const HEADER_LEN: usize = 4 + 4 + 4 + 4 + 8 + 1;

/// Contents of a grid file.
#[derive(Debug, Clone, PartialEq)]
pub struct GridFile {
    pub fft_len: u32,
    pub cols: u32,
    pub fs: f64,
    pub kind: TfrKind,
    pub values: Vec<Complex32>,
}

impl GridFile {
    pub fn from_grid(grid: &TfrGrid) -> Self {
        Self {
            fft_len: grid.rows() as u32,
            cols: grid.cols() as u32,
            fs: grid.fs(),
            kind: grid.kind(),
            values: grid
                .values()
                .iter()
                .map(|v| Complex32::new(v.re as f32, v.im as f32))
                .collect(),
        }
    }

    pub fn get(&self, r: usize, c: usize) -> Complex32 {
        self.values[r * self.cols as usize + c]
    }

    pub fn values_f64(&self) -> Vec<Complex64> {
        self.values
            .iter()
            .map(|v| Complex64::new(v.re as f64, v.im as f64))
            .collect()
    }

    pub fn to_bytes(&self) -> Vec<u8> {
        let mut out = Vec::with_capacity(HEADER_LEN + 8 * self.values.len());
        out.extend_from_slice(&MAGIC);
        out.extend_from_slice(&VERSION.to_le_bytes());
        out.extend_from_slice(&self.fft_len.to_le_bytes());
        out.extend_from_slice(&self.cols.to_le_bytes());
        out.extend_from_slice(&self.fs.to_le_bytes());
        out.push(self.kind.code());
        for v in &self.values {
            out.extend_from_slice(&v.re.to_le_bytes());
            out.extend_from_slice(&v.im.to_le_bytes());
        }
        out
    }

    pub fn from_bytes(bytes: &[u8]) -> std::result::Result<Self, String> {
        if bytes.len() < HEADER_LEN {
            return Err("truncated header".into());
        }
        if bytes[..4] != MAGIC {
            return Err("not a TFSS grid file".into());
        }
        let u32_at = |i: usize| u32::from_le_bytes(bytes[i..i + 4].try_into().unwrap());
        let version = u32_at(4);
        if version != VERSION {
            return Err(format!("unsupported version {version}"));
        }
        let (fft_len, cols) = (u32_at(8), u32_at(12));
        let fs = f64::from_le_bytes(bytes[16..24].try_into().unwrap());
        let kind = TfrKind::from_code(bytes[24]).ok_or_else(|| format!("unknown kind {}", bytes[24]))?;
        let n = fft_len as usize * cols as usize;
        let body = &bytes[HEADER_LEN..];
        if body.len() != 8 * n {
            return Err(format!("expected {} value bytes, found {}", 8 * n, body.len()));
        }
        let f32_at = |c: &[u8]| f32::from_le_bytes(c.try_into().unwrap());
        let values = body
            .chunks_exact(8)
            .map(|c| Complex32::new(f32_at(&c[..4]), f32_at(&c[4..])))
            .collect();
        Ok(Self {
            fft_len,
            cols,
            fs,
            kind,
            values,
        })
    }
}

pub fn write_grid(path: &Path, grid: &TfrGrid) -> Result<()> {
    fs::write(path, GridFile::from_grid(grid).to_bytes()).map_err(|e| CliError::io(path, e))
}

pub fn read_grid(path: &Path) -> Result<GridFile> {
    let bytes = fs::read(path).map_err(|e| CliError::io(path, e))?;
    GridFile::from_bytes(&bytes).map_err(|m| CliError::format(path, m))
}
