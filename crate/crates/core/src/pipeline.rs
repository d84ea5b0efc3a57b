//! One-pass analysis producing every representation of a signal.

use alloc::vec::Vec;
use num_complex::Complex64;

use crate::error::Result;
use crate::fft::FftProvider;
use crate::grid::{FrameLayout, PhaseConvention, TfrGrid, TfrKind};
use crate::reassign::{ratio, reassigned_spectrogram, row_omegas, MagnitudeGate, ReassignFields, ReassignedSpectrogram};
use crate::signal::SignalRecord;
use crate::stft::{analyze_frames, grid_axes};
use crate::synchro::{
    group_delay_second_order, instantaneous_frequency_second_order, tsst, vertical_sst, EstimatorChoice,
    ModulationField, OutOfGrid, QEstimator, SecondOrderDelays, SpectraIndex, Squeezed,
};
use crate::window::{DerivedWindowKind, WindowSpec};

/// Everything an analysis needs besides the signal.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AnalysisConfig {
    pub window: WindowSpec,
    pub layout: FrameLayout,
    pub gate: MagnitudeGate,
    pub estimator: EstimatorChoice,
    /// Horizontal targets outside the frame range. Keeping them preserves
    /// the time-marginal, hence exact inversion.
    pub tsst_out_of_grid: OutOfGrid,
    /// Vertical targets beyond the frequency range.
    pub sst_out_of_grid: OutOfGrid,
    /// Median-smoothing radius for `q^`; 0 disables it.
    pub q_smoothing: usize,
}

impl AnalysisConfig {
    pub fn new(window: WindowSpec, layout: FrameLayout) -> Self {
        Self {
            window,
            layout,
            gate: MagnitudeGate::default(),
            estimator: EstimatorChoice::default(),
            tsst_out_of_grid: OutOfGrid::Keep,
            sst_out_of_grid: OutOfGrid::Drop,
            q_smoothing: 0,
        }
    }
}

/// STFT, reassignment operators and modulation estimates of one signal.
#[derive(Debug, Clone, PartialEq)]
pub struct Analysis {
    pub config: AnalysisConfig,
    pub stft: TfrGrid,
    pub fields: ReassignFields,
    pub q: ModulationField,
}

/// Computes the STFT, `t~`, `w~` and `q^` of `x` from one pass over the
/// frames.
pub fn analyze<P: FftProvider>(fft: &P, x: &SignalRecord, config: &AnalysisConfig) -> Result<Analysis> {
    config.estimator.validate()?;
    config.gate.validate()?;
    let index = SpectraIndex::new(config.estimator.required_kinds());
    let est = QEstimator::new(&config.estimator, &index);
    let (h, t, d) = (
        index.pos(DerivedWindowKind::H),
        index.pos(DerivedWindowKind::T),
        index.pos(DerivedWindowKind::D),
    );
    let omegas = row_omegas(&grid_axes(x, &config.window, &config.layout));
    let (axes, mut out) = analyze_frames(fft, x, &config.window, index.kinds(), &config.layout, 4, |ctx, sp, out| {
        let m_len = sp[0].len();
        let (f_out, rest) = out.split_at_mut(m_len);
        let (t_out, rest) = rest.split_at_mut(m_len);
        let (w_out, q_out) = rest.split_at_mut(m_len);
        for r in 0..m_len {
            let f = sp[h][r];
            f_out[r] = f;
            t_out[r] = ctx.time - ratio(sp[t][r], f);
            w_out[r] = Complex64::new(0.0, omegas[r]) + ratio(sp[d][r], f);
            q_out[r] = est.estimate(sp, r).unwrap_or(Complex64::new(f64::NAN, f64::NAN));
        }
    })?;
    let raw_q = out.pop().unwrap();
    let omega_tilde = out.pop().unwrap();
    let t_tilde = out.pop().unwrap();
    let stft = TfrGrid::from_parts(out.pop().unwrap(), axes, TfrKind::Stft, PhaseConvention::Absolute)?;
    let fields = ReassignFields::gated(&stft, t_tilde, omega_tilde, config.gate);
    let mut q = ModulationField::from_raw(&stft, raw_q, fields.threshold());
    if config.q_smoothing > 0 {
        q = q.median_smoothed(config.q_smoothing);
    }
    Ok(Analysis {
        config: *config,
        stft,
        fields,
        q,
    })
}

impl Analysis {
    pub fn spectrogram(&self) -> TfrGrid {
        self.stft.energy_grid(TfrKind::Spectrogram)
    }

    pub fn reassigned(&self) -> Result<ReassignedSpectrogram> {
        reassigned_spectrogram(&self.stft, &self.fields)
    }

    pub fn second_order_delays(&self) -> Result<SecondOrderDelays> {
        group_delay_second_order(self.stft.axes(), &self.fields, &self.q, &self.config.estimator)
    }

    /// Horizontal transform squeezing to `t^`.
    pub fn tsst1(&self) -> Result<Squeezed> {
        tsst(&self.stft, &self.fields.t_hat_field(), self.fields.valid(), self.config.tsst_out_of_grid)
    }

    /// Horizontal transform squeezing to the second-order group delay.
    pub fn tsst2(&self) -> Result<Squeezed> {
        let delays = self.second_order_delays()?;
        self.tsst_with(&delays.t2, TfrKind::Tsst2)
    }

    /// Like [`Analysis::tsst2`] but with the estimator that ignores the
    /// amplitude curvature.
    pub fn tsst2_biased(&self) -> Result<Squeezed> {
        let delays = self.second_order_delays()?;
        self.tsst_with(&delays.t2b, TfrKind::Tsst2)
    }

    fn tsst_with(&self, times: &[f64], kind: TfrKind) -> Result<Squeezed> {
        let s = tsst(&self.stft, times, self.fields.valid(), self.config.tsst_out_of_grid)?;
        Ok(Squeezed {
            grid: s.grid.with_kind(kind),
            ..s
        })
    }

    /// Vertical transform squeezing to `w^`.
    pub fn sst1(&self) -> Result<Squeezed> {
        vertical_sst(&self.stft, &self.fields.omega_hat_field(), self.fields.valid(), self.config.sst_out_of_grid)
    }

    /// Vertical transform squeezing to the second-order frequency.
    pub fn sst2(&self) -> Result<Squeezed> {
        let omegas: Vec<f64> = instantaneous_frequency_second_order(&self.fields, &self.q, &self.stft)?;
        let s = vertical_sst(&self.stft, &omegas, self.fields.valid(), self.config.sst_out_of_grid)?;
        Ok(Squeezed {
            grid: s.grid.with_kind(TfrKind::Sst2),
            ..s
        })
    }

    /// The representation of `kind`. Squeezing bookkeeping is discarded.
    pub fn transform(&self, kind: TfrKind) -> Result<TfrGrid> {
        Ok(match kind {
            TfrKind::Stft => self.stft.clone(),
            TfrKind::Spectrogram => self.spectrogram(),
            TfrKind::ReassignedSpectrogram => self.reassigned()?.grid,
            TfrKind::Tsst => self.tsst1()?.grid,
            TfrKind::Tsst2 => self.tsst2()?.grid,
            TfrKind::Sst => self.sst1()?.grid,
            TfrKind::Sst2 => self.sst2()?.grid,
        })
    }
}

#[cfg(all(test, feature = "std"))]
mod tests {
    use super::*;
    use crate::fft::RustFft;
    use crate::reassign::compute_operators;
    use crate::synchro::estimate_q;

    fn signal() -> SignalRecord {
        let v: Vec<f64> = (0..120)
            .map(|n| {
                let t = n as f64;
                (0.3 * t + 0.002 * t * t).cos() + if n == 40 { 3.0 } else { 0.0 }
            })
            .collect();
        SignalRecord::from_real(&v, 1.0).unwrap()
    }

    #[test]
    fn one_pass_matches_separate_passes() {
        let fft = RustFft::new();
        let x = signal();
        let cfg = AnalysisConfig::new(WindowSpec::new(4.0, 1.0).unwrap(), FrameLayout::new(64).unwrap());
        let a = analyze(&fft, &x, &cfg).unwrap();
        let (grid, fields) = compute_operators(&fft, &x, &cfg.window, &cfg.layout, cfg.gate).unwrap();
        let q = estimate_q(&fft, &x, &cfg.window, &cfg.layout, &cfg.estimator, cfg.gate).unwrap();
        assert_eq!(a.stft, grid);
        assert_eq!(a.fields, fields);
        assert_eq!(a.q, q);
    }

    #[test]
    fn kinds_are_labelled() {
        let fft = RustFft::new();
        let cfg = AnalysisConfig::new(WindowSpec::new(4.0, 1.0).unwrap(), FrameLayout::new(64).unwrap());
        let a = analyze(&fft, &signal(), &cfg).unwrap();
        for kind in [
            TfrKind::Stft,
            TfrKind::Spectrogram,
            TfrKind::ReassignedSpectrogram,
            TfrKind::Tsst,
            TfrKind::Tsst2,
            TfrKind::Sst,
            TfrKind::Sst2,
        ] {
            assert_eq!(a.transform(kind).unwrap().kind(), kind);
        }
    }
}
