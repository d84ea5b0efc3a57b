//! Discrete STFT with the absolute-time phase convention.
//!
//! `F[m, k] = sum_n x[n] h[k - n] exp(-j w_m n / fs) / fs` with
//! `w_m = 2 pi m fs / M`. Each frame is evaluated by folding the windowed
//! samples onto `n mod M` and taking one length-`M` FFT; because the kernel
//! `exp(-j 2 pi m n / M)` is `M`-periodic in `n` this is exact for any
//! window length, and the phase stays anchored to absolute time.

use alloc::vec;
use alloc::vec::Vec;
use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::fft::{FftPlan, FftProvider};
use crate::grid::{FrameLayout, GridAxes, PhaseConvention, TfrGrid, TfrKind};
use crate::par;
use crate::signal::SignalRecord;
use crate::window::{gaussian_window, window_zero_frequency_gain, DerivedWindowKind, Window, WindowSpec};

/// Below this magnitude `F_h(0)` is treated as zero.
pub const MIN_WINDOW_GAIN: f64 = 1e-12;

/// Context handed to per-frame callbacks.
#[derive(Debug, Clone, Copy)]
pub(crate) struct FrameCtx {
    /// Frame time in seconds from sample 0.
    pub time: f64,
}

/// Axes of the grid an analysis of `x` produces.
pub(crate) fn grid_axes(x: &SignalRecord, spec: &WindowSpec, layout: &FrameLayout) -> GridAxes {
    let margin = layout.margin_samples(spec);
    GridAxes {
        fft_len: layout.fft_len,
        cols: x.len() + 2 * margin,
        fs: x.fs(),
        first_frame: -(margin as isize),
        start_time: x.start_time(),
        record_len: x.len(),
        real_input: x.is_real(),
    }
}

fn check_inputs(x: &SignalRecord, spec: &WindowSpec, layout: &FrameLayout) -> Result<()> {
    if layout.fft_len == 0 || layout.fft_len % 2 != 0 {
        return Err(Error::OddFftLength(layout.fft_len));
    }
    if x.is_empty() {
        return Err(Error::EmptySignal);
    }
    if (x.fs() - spec.fs()).abs() > 1e-12 * spec.fs() {
        return Err(Error::InvalidConfig("window and signal sampling rates differ"));
    }
    Ok(())
}

/// Evaluates the STFTs of `x` with every window in `kinds` frame by frame.
///
/// For each frame `f(ctx, spectra, out)` receives one spectrum per kind (in
/// row order, already scaled by `1/fs`) and fills `out`, which holds
/// `n_out` consecutive column vectors of length `M`. Returns the grid axes
/// and the `n_out` outputs transposed to row-major order.
pub(crate) fn analyze_frames<P, F>(
    fft: &P,
    x: &SignalRecord,
    spec: &WindowSpec,
    kinds: &[DerivedWindowKind],
    layout: &FrameLayout,
    n_out: usize,
    f: F,
) -> Result<(GridAxes, Vec<Vec<Complex64>>)>
where
    P: FftProvider,
    F: Fn(FrameCtx, &[Vec<Complex64>], &mut [Complex64]) + Sync + Send,
{
    check_inputs(x, spec, layout)?;
    let windows = kinds
        .iter()
        .map(|&k| gaussian_window(spec, k))
        .collect::<Result<Vec<Window>>>()?;
    let axes = grid_axes(x, spec, layout);
    let m_len = axes.fft_len;
    let plan = fft.plan(m_len);
    let samples = x.samples();
    let n_len = samples.len() as isize;
    let radius = spec.support_radius() as isize;
    let inv_fs = 1.0 / x.fs();
    let half = (m_len / 2) as i64;

    let stride = n_out * m_len;
    let mut col_major = vec![Complex64::new(0.0, 0.0); stride * axes.cols];
    par::for_each_chunk(&mut col_major, stride.max(1), |c, out| {
        let s = axes.first_frame + c as isize;
        let mut spectra = Vec::with_capacity(windows.len());
        let mut buf = vec![Complex64::new(0.0, 0.0); m_len];
        for w in &windows {
            buf.iter_mut().for_each(|v| *v = Complex64::new(0.0, 0.0));
            let lo = (s - radius).max(0);
            let hi = (s + radius).min(n_len - 1);
            for n in lo..=hi {
                let pos = n.rem_euclid(m_len as isize) as usize;
                buf[pos] += samples[n as usize] * w.at(s - n);
            }
            plan.forward(&mut buf);
            let spectrum = (0..m_len)
                .map(|r| {
                    let m = r as i64 - half + 1;
                    buf[m.rem_euclid(m_len as i64) as usize] * inv_fs
                })
                .collect::<Vec<_>>();
            spectra.push(spectrum);
        }
        let ctx = FrameCtx {
            time: s as f64 * inv_fs,
        };
        f(ctx, &spectra, out);
    });

    let outputs = (0..n_out)
        .map(|j| transpose_output(&col_major, j, m_len, n_out, axes.cols))
        .collect();
    Ok((axes, outputs))
}

fn transpose_output(col_major: &[Complex64], j: usize, m_len: usize, n_out: usize, cols: usize) -> Vec<Complex64> {
    let mut row_major = vec![Complex64::new(0.0, 0.0); m_len * cols];
    let stride = n_out * m_len;
    par::for_each_chunk(&mut row_major, cols.max(1), |r, row| {
        for (c, v) in row.iter_mut().enumerate() {
            *v = col_major[c * stride + j * m_len + r];
        }
    });
    row_major
}

/// STFT of `x` with the derived window `kind`.
pub fn stft_forward<P: FftProvider>(
    fft: &P,
    x: &SignalRecord,
    spec: &WindowSpec,
    kind: DerivedWindowKind,
    layout: &FrameLayout,
) -> Result<TfrGrid> {
    let (axes, mut outputs) = analyze_frames(fft, x, spec, &[kind], layout, 1, |_, spectra, out| {
        out.copy_from_slice(&spectra[0]);
    })?;
    TfrGrid::from_parts(outputs.remove(0), axes, TfrKind::Stft, PhaseConvention::Absolute)
}

/// Time-marginal `sum_k F[m, k] / fs`, one value per row.
///
/// Equals `F_h(0)^* X(w_m)` when the frames cover the record plus one window
/// radius on each side (the default [`FrameLayout`]); a grid truncated inside
/// the signal support gives a meaningless result, which is not detected.
pub fn stft_time_marginal(grid: &TfrGrid, _spec: &WindowSpec) -> Vec<Complex64> {
    let grid = absolute(grid);
    let inv_fs = 1.0 / grid.fs();
    grid.row_sums().into_iter().map(|v| v * inv_fs).collect()
}

fn absolute(grid: &TfrGrid) -> alloc::borrow::Cow<'_, TfrGrid> {
    match grid.phase() {
        PhaseConvention::Absolute => alloc::borrow::Cow::Borrowed(grid),
        PhaseConvention::WindowRelative => alloc::borrow::Cow::Owned(grid.with_phase(PhaseConvention::Absolute)),
    }
}

/// Inverts a grid through its time-marginal.
///
/// `x[n] = 1 / (2 pi F_h(0)^*) sum_m sum_k S[m, k] exp(j w_m n / fs) dt dw`
/// with `dt = 1/fs`, `dw = 2 pi fs / M`. Real records are returned as real.
pub fn stft_inverse<P: FftProvider>(fft: &P, grid: &TfrGrid, spec: &WindowSpec) -> Result<SignalRecord> {
    let grid = absolute(grid);
    invert_row_sums(fft, &grid.row_sums(), grid.axes(), spec)
}

/// Shared tail of every marginal-based inversion: `row_sums[r]` holds
/// `sum_k S[r, k]`.
pub(crate) fn invert_row_sums<P: FftProvider>(
    fft: &P,
    row_sums: &[Complex64],
    axes: &GridAxes,
    spec: &WindowSpec,
) -> Result<SignalRecord> {
    let gain = window_zero_frequency_gain(spec);
    if gain.norm() < MIN_WINDOW_GAIN {
        return Err(Error::DegenerateWindowGain(gain.norm()));
    }
    let m_len = axes.fft_len;
    if row_sums.len() != m_len {
        return Err(Error::LengthMismatch(row_sums.len(), m_len));
    }
    let half = (m_len / 2) as i64;
    let mut buf = vec![Complex64::new(0.0, 0.0); m_len];
    for (r, &v) in row_sums.iter().enumerate() {
        let m = r as i64 - half + 1;
        buf[m.rem_euclid(m_len as i64) as usize] = v;
    }
    fft.plan(m_len).inverse(&mut buf);
    // dt * dw / (2 pi) = 1 / M
    let scale = 1.0 / (m_len as f64 * gain.conj());
    let samples = (0..axes.record_len).map(|n| buf[n % m_len] * scale).collect();
    Ok(SignalRecord::from_parts(samples, axes.fs, axes.start_time, axes.real_input))
}
