//! Reassignment operators and the reassigned spectrogram.
//!
//! `t~ = t - F^{Th} / F^h` and `w~ = j w + F^{Dh} / F^h`, with the group
//! delay `t^ = Re(t~)` and instantaneous frequency `w^ = Im(w~)`. Cells
//! whose STFT magnitude does not exceed the gate carry no operator values.

use alloc::vec;
use alloc::vec::Vec;
use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::fft::FftProvider;
use crate::grid::{FrameLayout, GridAxes, PhaseConvention, TfrGrid, TfrKind};
use crate::par;
use crate::round_half_down;
use crate::signal::SignalRecord;
use crate::stft::analyze_frames;
use crate::window::{DerivedWindowKind, WindowSpec};

/// Magnitude threshold below which reassignment ratios are not formed.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum MagnitudeGate {
    /// Fraction of the largest STFT magnitude in the grid.
    Relative(f64),
    Absolute(f64),
}

impl Default for MagnitudeGate {
    fn default() -> Self {
        Self::Relative(1e-6)
    }
}

impl MagnitudeGate {
    pub fn validate(self) -> Result<()> {
        let (Self::Relative(g) | Self::Absolute(g)) = self;
        if g >= 0.0 && g.is_finite() {
            Ok(())
        } else {
            Err(Error::InvalidConfig("magnitude gate must be non-negative"))
        }
    }

    pub fn threshold(self, max_magnitude: f64) -> f64 {
        match self {
            Self::Relative(f) => f * max_magnitude,
            Self::Absolute(g) => g,
        }
    }
}

/// Per-cell complex operators, aligned with an STFT grid.
#[derive(Debug, Clone, PartialEq)]
pub struct ReassignFields {
    rows: usize,
    cols: usize,
    /// Complex group delay in seconds from sample 0.
    t_tilde: Vec<Complex64>,
    /// Complex instantaneous frequency in rad/s.
    omega_tilde: Vec<Complex64>,
    valid: Vec<bool>,
    threshold: f64,
}

impl ReassignFields {
    /// Builds fields from raw ratios, gating against `|F|`.
    pub(crate) fn gated(
        grid: &TfrGrid,
        mut t_tilde: Vec<Complex64>,
        mut omega_tilde: Vec<Complex64>,
        gate: MagnitudeGate,
    ) -> Self {
        let threshold = gate.threshold(grid.max_magnitude());
        let valid: Vec<bool> = grid.values().iter().map(|v| v.norm() > threshold).collect();
        for (i, &ok) in valid.iter().enumerate() {
            if !ok {
                t_tilde[i] = Complex64::new(0.0, 0.0);
                omega_tilde[i] = Complex64::new(0.0, 0.0);
            }
        }
        Self {
            rows: grid.rows(),
            cols: grid.cols(),
            t_tilde,
            omega_tilde,
            valid,
            threshold,
        }
    }

    pub fn shape(&self) -> (usize, usize) {
        (self.rows, self.cols)
    }

    pub fn threshold(&self) -> f64 {
        self.threshold
    }

    pub fn t_tilde(&self) -> &[Complex64] {
        &self.t_tilde
    }

    pub fn omega_tilde(&self) -> &[Complex64] {
        &self.omega_tilde
    }

    pub fn valid(&self) -> &[bool] {
        &self.valid
    }

    pub fn is_valid(&self, r: usize, c: usize) -> bool {
        self.valid[r * self.cols + c]
    }

    /// Group delay `Re(t~)` in seconds from sample 0.
    pub fn t_hat(&self, r: usize, c: usize) -> f64 {
        self.t_tilde[r * self.cols + c].re
    }

    /// Instantaneous frequency `Im(w~)` in rad/s.
    pub fn omega_hat(&self, r: usize, c: usize) -> f64 {
        self.omega_tilde[r * self.cols + c].im
    }

    /// `t^` for every cell, row-major (zero where invalid).
    pub fn t_hat_field(&self) -> Vec<f64> {
        self.t_tilde.iter().map(|v| v.re).collect()
    }

    /// `w^` for every cell, row-major (zero where invalid).
    pub fn omega_hat_field(&self) -> Vec<f64> {
        self.omega_tilde.iter().map(|v| v.im).collect()
    }

    pub fn valid_count(&self) -> usize {
        self.valid.iter().filter(|&&v| v).count()
    }
}

/// Row-major per-cell ratios `F^{g} / F^h`, zero where `F^h` vanishes.
#[inline]
pub(crate) fn ratio(num: Complex64, den: Complex64) -> Complex64 {
    if den.norm_sqr() > 0.0 {
        num / den
    } else {
        Complex64::new(0.0, 0.0)
    }
}

/// Row angular frequencies of a grid with `axes`.
pub(crate) fn row_omegas(axes: &GridAxes) -> Vec<f64> {
    let half = (axes.fft_len / 2) as i64;
    (0..axes.fft_len)
        .map(|r| 2.0 * core::f64::consts::PI * (r as i64 - half + 1) as f64 * axes.fs / axes.fft_len as f64)
        .collect()
}

/// STFT with `h`, `Th` and `Dh`, and the operator fields derived from them.
pub fn compute_operators<P: FftProvider>(
    fft: &P,
    x: &SignalRecord,
    spec: &WindowSpec,
    layout: &FrameLayout,
    gate: MagnitudeGate,
) -> Result<(TfrGrid, ReassignFields)> {
    gate.validate()?;
    let kinds = [DerivedWindowKind::H, DerivedWindowKind::T, DerivedWindowKind::D];
    let omegas = row_omegas(&crate::stft::grid_axes(x, spec, layout));
    let (axes, mut out) = analyze_frames(fft, x, spec, &kinds, layout, 3, |ctx, sp, out| {
        let m_len = sp[0].len();
        let (f_out, rest) = out.split_at_mut(m_len);
        let (t_out, w_out) = rest.split_at_mut(m_len);
        for r in 0..m_len {
            let f = sp[0][r];
            f_out[r] = f;
            t_out[r] = ctx.time - ratio(sp[1][r], f);
            w_out[r] = Complex64::new(0.0, omegas[r]) + ratio(sp[2][r], f);
        }
    })?;
    let omega_tilde = out.pop().unwrap();
    let t_tilde = out.pop().unwrap();
    let grid = TfrGrid::from_parts(out.pop().unwrap(), axes, TfrKind::Stft, PhaseConvention::Absolute)?;
    let fields = ReassignFields::gated(&grid, t_tilde, omega_tilde, gate);
    Ok((grid, fields))
}

/// Energy map of a reassigned spectrogram plus bookkeeping.
#[derive(Debug, Clone, PartialEq)]
pub struct ReassignedSpectrogram {
    /// Real energies stored in the real part.
    pub grid: TfrGrid,
    /// Total `|F|^2` over valid cells.
    pub gated_energy: f64,
    /// Energy that landed inside the grid.
    pub retained_energy: f64,
    /// Valid cells whose target fell outside the grid.
    pub dropped_cells: usize,
}

/// Sources are split into this many fixed row blocks, each accumulated into
/// its own partial grid and merged in block order, so the output does not
/// depend on how many workers run.
const PARTIAL_BLOCKS: usize = 4;

/// Moves each valid cell's energy `|F|^2` to the cell nearest `(t^, w^)`.
///
/// Targets outside the grid are dropped and counted; exact halves round to
/// the earlier column / lower row.
pub fn reassigned_spectrogram(grid: &TfrGrid, fields: &ReassignFields) -> Result<ReassignedSpectrogram> {
    if fields.shape() != grid.shape() {
        return Err(Error::ShapeMismatch {
            expected: grid.shape(),
            found: fields.shape(),
        });
    }
    let (rows, cols) = grid.shape();
    let fs = grid.fs();
    let bin_per_rad = grid.fft_len() as f64 / (2.0 * core::f64::consts::PI * fs);
    let block_rows = rows.div_ceil(PARTIAL_BLOCKS).max(1);
    let blocks = rows.div_ceil(block_rows);

    let partials = par::map_range(blocks, |b| {
        let mut acc = vec![0.0_f64; rows * cols];
        let mut dropped = 0usize;
        let mut gated = 0.0;
        let mut retained = 0.0;
        for r in b * block_rows..((b + 1) * block_rows).min(rows) {
            for c in 0..cols {
                if !fields.is_valid(r, c) {
                    continue;
                }
                let e = grid.get(r, c).norm_sqr();
                gated += e;
                let s = round_half_down(fields.t_hat(r, c) * fs) as i64;
                let m = round_half_down(fields.omega_hat(r, c) * bin_per_rad) as i64;
                match (grid.column_of_sample(s as isize), grid.row_of_bin(m)) {
                    (Some(tc), Some(tr)) => {
                        acc[tr * cols + tc] += e;
                        retained += e;
                    }
                    _ => dropped += 1,
                }
            }
        }
        (acc, dropped, gated, retained)
    });

    let mut energy = vec![0.0_f64; rows * cols];
    let (mut dropped_cells, mut gated_energy, mut retained_energy) = (0, 0.0, 0.0);
    for (acc, d, g, k) in partials {
        energy.iter_mut().zip(&acc).for_each(|(e, a)| *e += a);
        dropped_cells += d;
        gated_energy += g;
        retained_energy += k;
    }
    let values = energy.into_iter().map(|e| Complex64::new(e, 0.0)).collect();
    Ok(ReassignedSpectrogram {
        grid: grid.with_values(values, TfrKind::ReassignedSpectrogram)?,
        gated_energy,
        retained_energy,
        dropped_cells,
    })
}
