//! Signal reconstruction from squeezed transforms.

use alloc::vec::Vec;
use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::fft::FftProvider;
use crate::grid::{PhaseConvention, TfrGrid, TfrKind};
use crate::signal::SignalRecord;
use crate::stft::{invert_row_sums, MIN_WINDOW_GAIN};
use crate::window::{gaussian_window, DerivedWindowKind, WindowSpec};

/// How a mask was produced.
#[derive(Debug, Clone, PartialEq)]
pub enum MaskProvenance {
    /// Whole columns where the saliency exceeds `threshold`.
    SaliencyThreshold { threshold: f64, factor: f64 },
    /// Only the rows of the saliency band, in columns above `threshold`.
    SaliencyThresholdBand { threshold: f64, factor: f64, f_lo: f64, f_hi: f64 },
    Manual,
}

/// Binary keep/zero mask aligned with a grid.
#[derive(Debug, Clone, PartialEq)]
pub struct TfrMask {
    rows: usize,
    cols: usize,
    keep: Vec<bool>,
    pub provenance: MaskProvenance,
}

impl TfrMask {
    pub fn new(rows: usize, cols: usize, keep: Vec<bool>, provenance: MaskProvenance) -> Result<Self> {
        if keep.len() != rows * cols {
            return Err(Error::LengthMismatch(keep.len(), rows * cols));
        }
        Ok(Self {
            rows,
            cols,
            keep,
            provenance,
        })
    }

    pub fn filled(rows: usize, cols: usize, value: bool) -> Self {
        Self {
            rows,
            cols,
            keep: alloc::vec![value; rows * cols],
            provenance: MaskProvenance::Manual,
        }
    }

    /// Mask keeping the columns where `columns[c]` is set.
    pub fn from_columns(rows: usize, columns: &[bool], provenance: MaskProvenance) -> Self {
        let cols = columns.len();
        let keep = (0..rows * cols).map(|i| columns[i % cols]).collect();
        Self {
            rows,
            cols,
            keep,
            provenance,
        }
    }

    pub fn shape(&self) -> (usize, usize) {
        (self.rows, self.cols)
    }

    pub fn keep(&self) -> &[bool] {
        &self.keep
    }

    pub fn get(&self, r: usize, c: usize) -> bool {
        self.keep[r * self.cols + c]
    }

    pub fn count(&self) -> usize {
        self.keep.iter().filter(|&&k| k).count()
    }

    pub fn is_empty(&self) -> bool {
        self.count() == 0
    }

    /// Columns with at least one kept cell.
    pub fn active_columns(&self) -> Vec<bool> {
        let mut cols = alloc::vec![false; self.cols];
        for (i, &k) in self.keep.iter().enumerate() {
            if k {
                cols[i % self.cols] = true;
            }
        }
        cols
    }

    /// Cellwise product with `grid`.
    pub fn apply(&self, grid: &TfrGrid) -> Result<TfrGrid> {
        if grid.shape() != self.shape() {
            return Err(Error::ShapeMismatch {
                expected: grid.shape(),
                found: self.shape(),
            });
        }
        let values = grid
            .values()
            .iter()
            .zip(&self.keep)
            .map(|(&v, &k)| if k { v } else { Complex64::new(0.0, 0.0) })
            .collect();
        grid.with_values(values, grid.kind())
    }
}

/// Inverse of a horizontal transform (or the plain STFT) through its
/// time-marginal; identical weights to [`crate::stft::stft_inverse`].
pub fn tsst_inverse<P: FftProvider>(fft: &P, squeezed: &TfrGrid, spec: &WindowSpec) -> Result<SignalRecord> {
    crate::stft::stft_inverse(fft, squeezed, spec)
}

/// Zeroes the cells outside `mask`, then inverts with [`tsst_inverse`].
pub fn masked_reconstruct<P: FftProvider>(
    fft: &P,
    squeezed: &TfrGrid,
    mask: &TfrMask,
    spec: &WindowSpec,
) -> Result<SignalRecord> {
    tsst_inverse(fft, &mask.apply(squeezed)?, spec)
}

/// Per-column inverse of a vertical transform:
/// `x[n] = 1 / (2 pi h(0)^*) sum_m S~[m, n] dw`, with `S~` in the
/// window-relative phase convention. Needs `R < M` so that only `n` itself
/// folds onto column `n`.
pub fn vertical_sst_inverse(squeezed: &TfrGrid, spec: &WindowSpec) -> Result<SignalRecord> {
    if spec.support_radius() >= squeezed.fft_len() {
        return Err(Error::InvalidConfig("vertical inversion needs support radius below the FFT length"));
    }
    let h0 = gaussian_window(spec, DerivedWindowKind::H)?.at(0);
    if h0.abs() < MIN_WINDOW_GAIN {
        return Err(Error::DegenerateWindowGain(h0.abs()));
    }
    let rel = if squeezed.phase() == PhaseConvention::WindowRelative {
        alloc::borrow::Cow::Borrowed(squeezed)
    } else {
        alloc::borrow::Cow::Owned(squeezed.with_phase(PhaseConvention::WindowRelative))
    };
    let axes = rel.axes();
    let sums = rel.column_sums();
    let scale = axes.fs / (axes.fft_len as f64 * h0);
    let samples = (0..axes.record_len)
        .map(|n| match rel.column_of_sample(n as isize) {
            Some(c) => sums[c] * scale,
            None => Complex64::new(0.0, 0.0),
        })
        .collect();
    Ok(SignalRecord::from_parts(samples, axes.fs, axes.start_time, axes.real_input))
}

/// Inverts any invertible grid with the formula that matches its kind.
pub fn invert<P: FftProvider>(fft: &P, grid: &TfrGrid, spec: &WindowSpec) -> Result<SignalRecord> {
    match grid.kind() {
        TfrKind::Sst | TfrKind::Sst2 => vertical_sst_inverse(grid, spec),
        TfrKind::Stft | TfrKind::Tsst | TfrKind::Tsst2 => tsst_inverse(fft, grid, spec),
        TfrKind::Spectrogram | TfrKind::ReassignedSpectrogram => {
            Err(Error::InvalidConfig("energy distributions carry no phase and cannot be inverted"))
        }
    }
}

/// Row sums of the masked grid, exposed for callers that reconstruct many
/// disjoint masks of one transform.
pub fn masked_row_sums(grid: &TfrGrid, mask: &TfrMask) -> Result<Vec<Complex64>> {
    Ok(mask.apply(grid)?.row_sums())
}

/// Inverts precomputed row sums (see [`masked_row_sums`]).
pub fn invert_marginal<P: FftProvider>(
    fft: &P,
    row_sums: &[Complex64],
    like: &TfrGrid,
    spec: &WindowSpec,
) -> Result<SignalRecord> {
    invert_row_sums(fft, row_sums, like.axes(), spec)
}
