//! The time-frequency grid shared by every transform.
//!
//! Rows are frequency bins `m` in `[-M/2 + 1, M/2]` (row `r` holds bin
//! `r - M/2 + 1`), columns are frame centres at consecutive sample indices
//! starting at `first_frame`. Values are stored row-major.

use alloc::vec;
use alloc::vec::Vec;
use core::f64::consts::PI;
use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::window::WindowSpec;

/// What a grid holds.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
#[repr(u8)]
pub enum TfrKind {
    Stft = 0,
    Spectrogram = 1,
    ReassignedSpectrogram = 2,
    /// Classical (vertical, frequency-reassigned) synchrosqueezing.
    Sst = 3,
    /// Second-order vertical synchrosqueezing.
    Sst2 = 4,
    /// Time-reassigned (horizontal) synchrosqueezing.
    Tsst = 5,
    /// Second-order time-reassigned synchrosqueezing.
    Tsst2 = 6,
}

impl TfrKind {
    pub fn code(self) -> u8 {
        self as u8
    }

    pub fn from_code(code: u8) -> Option<Self> {
        Some(match code {
            0 => Self::Stft,
            1 => Self::Spectrogram,
            2 => Self::ReassignedSpectrogram,
            3 => Self::Sst,
            4 => Self::Sst2,
            5 => Self::Tsst,
            6 => Self::Tsst2,
            _ => return None,
        })
    }

    pub fn name(self) -> &'static str {
        match self {
            Self::Stft => "stft",
            Self::Spectrogram => "spectrogram",
            Self::ReassignedSpectrogram => "reassigned",
            Self::Sst => "sst1",
            Self::Sst2 => "sst2",
            Self::Tsst => "tsst1",
            Self::Tsst2 => "tsst2",
        }
    }
}

/// Phase reference of the stored complex values.
///
/// `Absolute` is `x(tau) h(t - tau) exp(-j w tau)`, the convention used for
/// every STFT and horizontal transform. `WindowRelative` multiplies by
/// `exp(j w t)`; vertical synchrosqueezing squeezes in this convention, where
/// column sums reproduce the signal sample.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum PhaseConvention {
    Absolute,
    WindowRelative,
}

/// Frames computed beyond each end of the record.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum FrameMargin {
    /// One window support radius on each side: every sample is covered by
    /// its full window, which is what makes the time-marginal exact.
    #[default]
    Support,
    Samples(usize),
}

/// FFT length and frame range of an analysis.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct FrameLayout {
    pub fft_len: usize,
    pub margin: FrameMargin,
}

impl FrameLayout {
    pub fn new(fft_len: usize) -> Result<Self> {
        if fft_len == 0 || fft_len % 2 != 0 {
            return Err(Error::OddFftLength(fft_len));
        }
        Ok(Self {
            fft_len,
            margin: FrameMargin::Support,
        })
    }

    pub fn with_margin(self, margin: FrameMargin) -> Self {
        Self { margin, ..self }
    }

    pub fn margin_samples(&self, spec: &WindowSpec) -> usize {
        match self.margin {
            FrameMargin::Support => spec.support_radius(),
            FrameMargin::Samples(n) => n,
        }
    }
}

/// Axis metadata of a [`TfrGrid`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GridAxes {
    /// FFT length `M`, also the number of rows.
    pub fft_len: usize,
    pub cols: usize,
    pub fs: f64,
    /// Sample index at the centre of column 0.
    pub first_frame: isize,
    /// Time of sample 0 of the analysed record, in seconds.
    pub start_time: f64,
    /// Length of the analysed record.
    pub record_len: usize,
    /// Whether the analysed record was real-valued.
    pub real_input: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct TfrGrid {
    values: Vec<Complex64>,
    axes: GridAxes,
    kind: TfrKind,
    phase: PhaseConvention,
}

impl TfrGrid {
    /// Assembles a grid from row-major values.
    pub fn from_parts(
        values: Vec<Complex64>,
        axes: GridAxes,
        kind: TfrKind,
        phase: PhaseConvention,
    ) -> Result<Self> {
        if axes.fft_len == 0 || axes.fft_len % 2 != 0 {
            return Err(Error::OddFftLength(axes.fft_len));
        }
        if !(axes.fs.is_finite() && axes.fs > 0.0) {
            return Err(Error::InvalidSamplingRate);
        }
        if values.len() != axes.fft_len * axes.cols {
            return Err(Error::ShapeMismatch {
                expected: (axes.fft_len, axes.cols),
                found: (values.len() / axes.cols.max(1), axes.cols),
            });
        }
        Ok(Self {
            values,
            axes,
            kind,
            phase,
        })
    }

    /// All-zero grid with the axes of `self`.
    pub fn zeros_like(&self, kind: TfrKind) -> Self {
        self.rebuild(vec![Complex64::new(0.0, 0.0); self.values.len()], kind, self.phase)
    }

    /// Same axes, new values.
    pub fn with_values(&self, values: Vec<Complex64>, kind: TfrKind) -> Result<Self> {
        if values.len() != self.values.len() {
            return Err(Error::ShapeMismatch {
                expected: self.shape(),
                found: (values.len() / self.axes.cols.max(1), self.axes.cols),
            });
        }
        Ok(self.rebuild(values, kind, self.phase))
    }

    /// Same values relabelled as `kind`.
    pub fn with_kind(mut self, kind: TfrKind) -> Self {
        self.kind = kind;
        self
    }

    pub(crate) fn rebuild(&self, values: Vec<Complex64>, kind: TfrKind, phase: PhaseConvention) -> Self {
        Self {
            values,
            axes: self.axes,
            kind,
            phase,
        }
    }

    pub fn axes(&self) -> &GridAxes {
        &self.axes
    }

    pub fn rows(&self) -> usize {
        self.axes.fft_len
    }

    pub fn cols(&self) -> usize {
        self.axes.cols
    }

    pub fn shape(&self) -> (usize, usize) {
        (self.axes.fft_len, self.axes.cols)
    }

    pub fn fft_len(&self) -> usize {
        self.axes.fft_len
    }

    pub fn fs(&self) -> f64 {
        self.axes.fs
    }

    pub fn first_frame(&self) -> isize {
        self.axes.first_frame
    }

    pub fn start_time(&self) -> f64 {
        self.axes.start_time
    }

    pub fn kind(&self) -> TfrKind {
        self.kind
    }

    pub fn phase(&self) -> PhaseConvention {
        self.phase
    }

    pub fn values(&self) -> &[Complex64] {
        &self.values
    }

    pub fn values_mut(&mut self) -> &mut [Complex64] {
        &mut self.values
    }

    pub fn into_values(self) -> Vec<Complex64> {
        self.values
    }

    pub fn row(&self, r: usize) -> &[Complex64] {
        &self.values[r * self.axes.cols..(r + 1) * self.axes.cols]
    }

    pub fn get(&self, r: usize, c: usize) -> Complex64 {
        self.values[r * self.axes.cols + c]
    }

    /// Frequency bin index `m` of row `r`.
    pub fn bin(&self, r: usize) -> i64 {
        r as i64 - (self.axes.fft_len / 2) as i64 + 1
    }

    /// Row holding bin `m`, if inside `[-M/2 + 1, M/2]`.
    pub fn row_of_bin(&self, m: i64) -> Option<usize> {
        let r = m + (self.axes.fft_len / 2) as i64 - 1;
        (r >= 0 && (r as usize) < self.axes.fft_len).then_some(r as usize)
    }

    /// Angular frequency of row `r` in rad/s.
    pub fn omega(&self, r: usize) -> f64 {
        2.0 * PI * self.bin(r) as f64 * self.axes.fs / self.axes.fft_len as f64
    }

    pub fn frequency_hz(&self, r: usize) -> f64 {
        self.bin(r) as f64 * self.axes.fs / self.axes.fft_len as f64
    }

    /// Frequency step `2 pi fs / M` in rad/s.
    pub fn bin_width(&self) -> f64 {
        2.0 * PI * self.axes.fs / self.axes.fft_len as f64
    }

    /// Sample index at the centre of column `c`.
    pub fn sample_index(&self, c: usize) -> isize {
        self.axes.first_frame + c as isize
    }

    /// Frame time of column `c` in seconds from sample 0.
    pub fn time(&self, c: usize) -> f64 {
        self.sample_index(c) as f64 / self.axes.fs
    }

    /// Absolute frame time of column `c`, including the record start time.
    pub fn absolute_time(&self, c: usize) -> f64 {
        self.axes.start_time + self.time(c)
    }

    pub fn column_of_sample(&self, s: isize) -> Option<usize> {
        let c = s - self.axes.first_frame;
        (c >= 0 && (c as usize) < self.axes.cols).then_some(c as usize)
    }

    pub fn energy(&self) -> f64 {
        self.values.iter().map(|v| v.norm_sqr()).sum()
    }

    pub fn max_magnitude(&self) -> f64 {
        self.values.iter().fold(0.0, |a, v| a.max(v.norm()))
    }

    /// Squared magnitude, stored as a real-valued grid.
    pub fn energy_grid(&self, kind: TfrKind) -> Self {
        let values = self.values.iter().map(|v| Complex64::new(v.norm_sqr(), 0.0)).collect();
        self.rebuild(values, kind, self.phase)
    }

    /// Re-expresses the values in phase convention `to`.
    pub fn with_phase(&self, to: PhaseConvention) -> Self {
        if to == self.phase {
            return self.clone();
        }
        // exp(+j w_m t) takes absolute to window-relative.
        let sign = match to {
            PhaseConvention::WindowRelative => 1.0,
            PhaseConvention::Absolute => -1.0,
        };
        let m_len = self.axes.fft_len as i64;
        let mut values = self.values.clone();
        for r in 0..self.axes.fft_len {
            let m = self.bin(r);
            for c in 0..self.axes.cols {
                // Reduce m * s modulo M before scaling to keep the phase exact.
                let s = self.sample_index(c) as i64;
                let turns = (m * s).rem_euclid(m_len) as f64 / m_len as f64;
                let rot = Complex64::from_polar(1.0, sign * 2.0 * PI * turns);
                values[r * self.axes.cols + c] *= rot;
            }
        }
        self.rebuild(values, self.kind, to)
    }

    /// Row sums `sum_k S[m, k]`.
    pub fn row_sums(&self) -> Vec<Complex64> {
        (0..self.axes.fft_len).map(|r| self.row(r).iter().sum()).collect()
    }

    /// Column sums `sum_m S[m, k]`.
    pub fn column_sums(&self) -> Vec<Complex64> {
        let mut sums = vec![Complex64::new(0.0, 0.0); self.axes.cols];
        for r in 0..self.axes.fft_len {
            for (s, v) in sums.iter_mut().zip(self.row(r)) {
                *s += v;
            }
        }
        sums
    }

    /// Grid with column `c` kept where `keep[c]` is set and zeroed elsewhere.
    pub fn mask_columns(&self, keep: &[bool]) -> Result<Self> {
        if keep.len() != self.axes.cols {
            return Err(Error::LengthMismatch(keep.len(), self.axes.cols));
        }
        let mut out = self.clone();
        for r in 0..self.axes.fft_len {
            for (c, &k) in keep.iter().enumerate() {
                if !k {
                    out.values[r * self.axes.cols + c] = Complex64::new(0.0, 0.0);
                }
            }
        }
        Ok(out)
    }
}
