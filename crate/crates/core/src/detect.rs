//! Impulse detection from the band saliency of a squeezed transform.

use alloc::vec;
use alloc::vec::Vec;
#[cfg(not(feature = "std"))]
use num_traits::Float;

use crate::error::{Error, Result};
use crate::fft::FftProvider;
use crate::grid::{TfrGrid, TfrKind};
use crate::reconstruct::{masked_reconstruct, MaskProvenance, TfrMask};
use crate::signal::SignalRecord;
use crate::window::WindowSpec;

/// Which cells of an above-threshold column the mask keeps.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum MaskExtent {
    /// The whole frequency column.
    #[default]
    Column,
    /// Only the rows of the saliency band.
    Band,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DetectionConfig {
    /// Lower band edge in Hz.
    pub f_lo: f64,
    /// Upper band edge in Hz.
    pub f_hi: f64,
    /// Threshold as a multiple of the mean saliency.
    pub threshold_factor: f64,
    /// Minimum time between two picked peaks, in seconds.
    pub min_separation: f64,
    pub extent: MaskExtent,
}

impl DetectionConfig {
    pub fn new(f_lo: f64, f_hi: f64) -> Self {
        Self {
            f_lo,
            f_hi,
            threshold_factor: 5.0,
            min_separation: 0.0,
            extent: MaskExtent::Column,
        }
    }

    pub fn validate(&self, fs: f64) -> Result<()> {
        if !(self.f_lo >= 0.0 && self.f_lo < self.f_hi && self.f_hi <= fs / 2.0) {
            return Err(Error::EmptyBand {
                lo: self.f_lo,
                hi: self.f_hi,
            });
        }
        if !(self.threshold_factor > 0.0 && self.threshold_factor.is_finite()) {
            return Err(Error::InvalidConfig("threshold factor must be positive"));
        }
        if !(self.min_separation >= 0.0) {
            return Err(Error::InvalidConfig("minimum separation must be non-negative"));
        }
        Ok(())
    }
}

/// A detected impulse.
#[derive(Debug, Clone, PartialEq)]
pub struct ImpulseEvent {
    /// Seconds from the first sample.
    pub time: f64,
    /// Grid column of the peak.
    pub column: usize,
    /// Sample index of the peak.
    pub sample: isize,
    /// Saliency at the peak.
    pub saliency: f64,
    /// First and last column of the above-threshold run holding the peak.
    pub run: (usize, usize),
    /// Reconstruction of the run alone, over the whole record.
    pub waveform: SignalRecord,
}

/// Result of [`detect_impulses`].
#[derive(Debug, Clone, PartialEq)]
pub struct Detection {
    pub events: Vec<ImpulseEvent>,
    pub mask: TfrMask,
    pub saliency: Vec<f64>,
    pub threshold: f64,
}

/// Rows of the non-negative bins whose frequency lies in `[f_lo, f_hi]`.
pub fn band_rows(grid: &TfrGrid, f_lo: f64, f_hi: f64) -> Result<Vec<usize>> {
    let rows: Vec<usize> = (0..grid.rows())
        .filter(|&r| {
            let f = grid.frequency_hz(r);
            grid.bin(r) >= 0 && f >= f_lo && f <= f_hi
        })
        .collect();
    if rows.is_empty() {
        return Err(Error::EmptyBand { lo: f_lo, hi: f_hi });
    }
    Ok(rows)
}

/// `G[k] = (sum over band rows of |S[m, k]|^2 dw)^(1/2)`.
pub fn saliency(grid: &TfrGrid, f_lo: f64, f_hi: f64) -> Result<Vec<f64>> {
    if !(f_lo <= f_hi) {
        return Err(Error::EmptyBand { lo: f_lo, hi: f_hi });
    }
    let rows = band_rows(grid, f_lo, f_hi)?;
    let energy_kind = matches!(grid.kind(), TfrKind::Spectrogram | TfrKind::ReassignedSpectrogram);
    let dw = grid.bin_width();
    let mut g = vec![0.0; grid.cols()];
    for &r in &rows {
        for (acc, v) in g.iter_mut().zip(grid.row(r)) {
            *acc += if energy_kind { v.re.max(0.0) } else { v.norm_sqr() };
        }
    }
    Ok(g.into_iter().map(|e| (e * dw).sqrt()).collect())
}

/// Local maxima strictly above `threshold`, at least `min_gap` columns
/// apart, chosen greedily by height. Plateaus yield their first column.
/// Returned in column order.
pub fn pick_peaks(g: &[f64], threshold: f64, min_gap: usize) -> Vec<usize> {
    let n = g.len();
    let mut candidates: Vec<usize> = (0..n)
        .filter(|&k| {
            g[k] > threshold && (k == 0 || g[k] > g[k - 1]) && (k + 1 == n || g[k] >= g[k + 1])
        })
        .collect();
    candidates.sort_by(|&a, &b| g[b].total_cmp(&g[a]).then(a.cmp(&b)));
    let mut picked: Vec<usize> = Vec::new();
    for k in candidates {
        if picked.iter().all(|&p| p.abs_diff(k) >= min_gap) {
            picked.push(k);
        }
    }
    picked.sort_unstable();
    picked
}

/// Thresholds the saliency of `grid` at `factor * mean(G)`, masks the
/// above-threshold columns, picks peaks and reconstructs each peak's
/// contiguous run.
pub fn detect_impulses<P: FftProvider>(
    fft: &P,
    grid: &TfrGrid,
    spec: &WindowSpec,
    config: &DetectionConfig,
) -> Result<Detection> {
    config.validate(grid.fs())?;
    let g = saliency(grid, config.f_lo, config.f_hi)?;
    let mean = g.iter().sum::<f64>() / g.len() as f64;
    let threshold = config.threshold_factor * mean;
    let above: Vec<bool> = g.iter().map(|&v| v > threshold).collect();

    let band = band_rows(grid, config.f_lo, config.f_hi)?;
    let mask_for = |cols: &[bool]| -> TfrMask {
        match config.extent {
            MaskExtent::Column => TfrMask::from_columns(
                grid.rows(),
                cols,
                MaskProvenance::SaliencyThreshold {
                    threshold,
                    factor: config.threshold_factor,
                },
            ),
            MaskExtent::Band => {
                let mut keep = vec![false; grid.rows() * grid.cols()];
                for &r in &band {
                    for (c, &k) in cols.iter().enumerate() {
                        keep[r * grid.cols() + c] = k;
                    }
                }
                TfrMask::new(
                    grid.rows(),
                    grid.cols(),
                    keep,
                    MaskProvenance::SaliencyThresholdBand {
                        threshold,
                        factor: config.threshold_factor,
                        f_lo: config.f_lo,
                        f_hi: config.f_hi,
                    },
                )
                .expect("mask sized from grid")
            }
        }
    };

    let min_gap = (config.min_separation * grid.fs()).ceil() as usize;
    let mut events = Vec::new();
    for k in pick_peaks(&g, threshold, min_gap.max(1)) {
        let mut lo = k;
        while lo > 0 && above[lo - 1] {
            lo -= 1;
        }
        let mut hi = k;
        while hi + 1 < above.len() && above[hi + 1] {
            hi += 1;
        }
        let run: Vec<bool> = (0..grid.cols()).map(|c| c >= lo && c <= hi).collect();
        let waveform = masked_reconstruct(fft, grid, &mask_for(&run), spec)?;
        events.push(ImpulseEvent {
            time: grid.time(k),
            column: k,
            sample: grid.sample_index(k),
            saliency: g[k],
            run: (lo, hi),
            waveform,
        });
    }
    Ok(Detection {
        events,
        mask: mask_for(&above),
        saliency: g,
        threshold,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::{GridAxes, PhaseConvention};
    use num_complex::Complex64;

    fn grid_with(cols: usize, hits: &[(usize, usize, f64)]) -> TfrGrid {
        let rows = 16;
        let mut v = vec![Complex64::new(0.0, 0.0); rows * cols];
        for &(r, c, a) in hits {
            v[r * cols + c] = Complex64::new(a, 0.0);
        }
        let axes = GridAxes {
            fft_len: rows,
            cols,
            fs: 1.0,
            first_frame: 0,
            start_time: 0.0,
            record_len: cols,
            real_input: false,
        };
        TfrGrid::from_parts(v, axes, TfrKind::Tsst, PhaseConvention::Absolute).unwrap()
    }

    #[test]
    fn zero_transform_has_zero_saliency() {
        let g = saliency(&grid_with(10, &[]), 0.0, 0.5).unwrap();
        assert!(g.iter().all(|&v| v == 0.0));
    }

    #[test]
    fn single_column_hit_is_the_argmax() {
        let g = saliency(&grid_with(10, &[(9, 4, 2.0), (10, 4, 1.0)]), 0.0, 0.5).unwrap();
        let dw = 2.0 * core::f64::consts::PI / 16.0;
        assert!((g[4] - (5.0 * dw).sqrt()).abs() < 1e-12);
        assert_eq!(g.iter().filter(|&&v| v > 0.0).count(), 1);
    }

    #[test]
    fn band_excludes_negative_bins_and_rejects_empty() {
        let s = grid_with(4, &[(2, 1, 1.0)]);
        assert!(saliency(&s, 0.0, 0.5).unwrap().iter().all(|&v| v == 0.0));
        assert!(matches!(saliency(&s, 0.01, 0.02), Err(Error::EmptyBand { .. })));
    }

    #[test]
    fn peaks_respect_separation() {
        let g = [0.0, 5.0, 1.0, 4.0, 0.0, 0.0, 6.0, 0.0];
        assert_eq!(pick_peaks(&g, 0.5, 1), vec![1, 3, 6]);
        assert_eq!(pick_peaks(&g, 0.5, 3), vec![1, 6]);
        assert_eq!(pick_peaks(&g, 4.5, 1), vec![1, 6]);
        assert_eq!(pick_peaks(&[2.0, 2.0, 0.0], 1.0, 1), vec![0]);
    }

    #[test]
    fn nothing_above_threshold_gives_nothing() {
        let fft = crate::fft::NaiveDft;
        let s = grid_with(12, &[]);
        let spec = WindowSpec::new(1.0, 1.0).unwrap();
        let d = detect_impulses(&fft, &s, &spec, &DetectionConfig::new(0.0, 0.5)).unwrap();
        assert!(d.events.is_empty());
        assert!(d.mask.is_empty());
    }

    #[test]
    fn invalid_config() {
        let mut c = DetectionConfig::new(0.2, 0.1);
        assert!(matches!(c.validate(1.0), Err(Error::EmptyBand { .. })));
        c = DetectionConfig::new(0.0, 0.6);
        assert!(c.validate(1.0).is_err());
        c = DetectionConfig::new(0.0, 0.5);
        c.threshold_factor = 0.0;
        assert!(c.validate(1.0).is_err());
    }
}
