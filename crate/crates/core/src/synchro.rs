//! Synchrosqueezing: local modulation estimators, second-order group delay
//! and instantaneous frequency, and the horizontal (time-reassigned) and
//! vertical (frequency-reassigned) squeezing operators.
//!
//! For the linear chirp `exp(l + mu t + nu t^2/2 + j(phi + w0 t + alpha t^2/2))`
//! with `p = mu + j w0` and `q = nu + j alpha`, the STFT operators satisfy
//! `p = w~ - q t~`. Hence the frequency crossing time of row `w` is
//! `(w - w^ + Im(q t~)) / alpha`, which is what the second-order horizontal
//! transform squeezes to.

use alloc::vec;
use alloc::vec::Vec;
use core::f64::consts::PI;
use num_complex::Complex64;
#[cfg(not(feature = "std"))]
use num_traits::Float;

use crate::error::{Error, Result};
use crate::fft::FftProvider;
use crate::grid::{FrameLayout, GridAxes, PhaseConvention, TfrGrid, TfrKind};
use crate::par;
use crate::reassign::{row_omegas, MagnitudeGate, ReassignFields};
use crate::round_half_down;
use crate::signal::SignalRecord;
use crate::stft::analyze_frames;
use crate::window::{DerivedWindowKind, WindowSpec};

/// Linear chirp with quadratic log-amplitude.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ChirpModel {
    /// Log-amplitude offset.
    pub l: f64,
    /// Log-amplitude slope (1/s).
    pub mu: f64,
    /// Log-amplitude curvature (1/s^2); negative for a Gaussian envelope.
    pub nu: f64,
    /// Initial phase (rad).
    pub phi: f64,
    /// Frequency at t = 0 (rad/s).
    pub omega0: f64,
    /// Frequency slope (rad/s^2).
    pub alpha: f64,
}

impl ChirpModel {
    /// Gaussian-envelope chirp centred at `t0` seconds with envelope spread
    /// `sigma` seconds, frequency `omega_c` at `t0` and slope `alpha`.
    pub fn gaussian(amplitude: f64, t0: f64, sigma: f64, omega_c: f64, alpha: f64) -> Self {
        let nu = -1.0 / (sigma * sigma);
        Self {
            l: amplitude.ln() + 0.5 * nu * t0 * t0,
            mu: -nu * t0,
            nu,
            phi: 0.0,
            omega0: omega_c - alpha * t0,
            alpha,
        }
    }

    pub fn p(&self) -> Complex64 {
        Complex64::new(self.mu, self.omega0)
    }

    pub fn q(&self) -> Complex64 {
        Complex64::new(self.nu, self.alpha)
    }

    pub fn value(&self, t: f64) -> Complex64 {
        let lambda = self.l + self.mu * t + 0.5 * self.nu * t * t;
        let phase = self.phi + self.omega0 * t + 0.5 * self.alpha * t * t;
        Complex64::from_polar(lambda.exp(), phase)
    }

    pub fn instantaneous_frequency(&self, t: f64) -> f64 {
        self.omega0 + self.alpha * t
    }

    /// Time at which the instantaneous frequency equals `omega`.
    pub fn crossing_time(&self, omega: f64) -> f64 {
        (omega - self.omega0) / self.alpha
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum EstimatorFamily {
    /// Time-derivative family `(tn)`.
    Time,
    /// Frequency-derivative family `(wn)`.
    Frequency,
}

impl EstimatorFamily {
    fn name(self) -> &'static str {
        match self {
            Self::Time => "tn",
            Self::Frequency => "wn",
        }
    }
}

/// Which `q` estimator to use and when to fall back to first order.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EstimatorChoice {
    pub family: EstimatorFamily,
    pub order: u8,
    /// `|alpha^|` at or below this (rad/s^2) falls back to first order.
    /// `None` uses [`default_alpha_gate`].
    pub alpha_gate: Option<f64>,
}

impl Default for EstimatorChoice {
    fn default() -> Self {
        Self {
            family: EstimatorFamily::Frequency,
            order: 2,
            alpha_gate: None,
        }
    }
}

impl EstimatorChoice {
    pub fn new(family: EstimatorFamily, order: u8) -> Result<Self> {
        let choice = Self {
            family,
            order,
            alpha_gate: None,
        };
        choice.validate()?;
        Ok(choice)
    }

    pub fn validate(&self) -> Result<()> {
        // Orders above 3 would need window derivatives beyond the closed forms.
        if !(2..=3).contains(&self.order) {
            return Err(Error::UnsupportedEstimator {
                family: self.family.name(),
                order: self.order,
            });
        }
        if let Some(g) = self.alpha_gate {
            if !(g > 0.0) {
                return Err(Error::InvalidConfig("alpha gate must be positive"));
            }
        }
        Ok(())
    }

    /// Windows whose STFTs the estimator combines.
    pub fn required_kinds(&self) -> Vec<DerivedWindowKind> {
        let n = self.order;
        let mut kinds = match self.family {
            EstimatorFamily::Time => vec![
                DerivedWindowKind::H,
                DerivedWindowKind::T,
                DerivedWindowKind::D,
                DerivedWindowKind::new(0, n),
                DerivedWindowKind::new(0, n - 1),
                DerivedWindowKind::new(1, n - 1),
            ],
            EstimatorFamily::Frequency => vec![
                DerivedWindowKind::H,
                DerivedWindowKind::T,
                DerivedWindowKind::D,
                DerivedWindowKind::new(n - 1, 1),
                DerivedWindowKind::new(n - 2, 0),
                DerivedWindowKind::new(n - 1, 0),
                DerivedWindowKind::new(n, 0),
            ],
        };
        kinds.sort();
        kinds.dedup();
        kinds
    }

    pub fn alpha_gate_for(&self, fs: f64, fft_len: usize) -> f64 {
        self.alpha_gate.unwrap_or_else(|| default_alpha_gate(fs, fft_len))
    }
}

/// One hundredth of a slope of one bin per sample: `2 pi fs^2 / M^2 / 100`.
pub fn default_alpha_gate(fs: f64, fft_len: usize) -> f64 {
    2.0 * PI * fs * fs / (fft_len as f64 * fft_len as f64) / 100.0
}

/// Denominators smaller than this fraction of their two terms are treated
/// as zero. An impulse makes both terms cancel exactly.
pub const DENOMINATOR_GATE: f64 = 1e-9;

/// Looks up spectra by window kind.
pub(crate) struct SpectraIndex {
    kinds: Vec<DerivedWindowKind>,
}

impl SpectraIndex {
    pub(crate) fn new(kinds: Vec<DerivedWindowKind>) -> Self {
        Self { kinds }
    }

    pub(crate) fn kinds(&self) -> &[DerivedWindowKind] {
        &self.kinds
    }

    pub(crate) fn pos(&self, kind: DerivedWindowKind) -> usize {
        self.kinds.iter().position(|&k| k == kind).expect("kind was requested")
    }
}

/// Per-frame `q^` evaluator with kind positions resolved once.
pub(crate) struct QEstimator {
    family: EstimatorFamily,
    order: f64,
    h: usize,
    t: usize,
    d: usize,
    a: usize,
    b: usize,
    c: usize,
    e: Option<usize>,
}

impl QEstimator {
    pub(crate) fn new(choice: &EstimatorChoice, index: &SpectraIndex) -> Self {
        let n = choice.order;
        let (a, b, c, e) = match choice.family {
            EstimatorFamily::Time => (
                index.pos(DerivedWindowKind::new(0, n)),
                index.pos(DerivedWindowKind::new(0, n - 1)),
                index.pos(DerivedWindowKind::new(1, n - 1)),
                None,
            ),
            EstimatorFamily::Frequency => (
                index.pos(DerivedWindowKind::new(n - 1, 1)),
                index.pos(DerivedWindowKind::new(n - 2, 0)),
                index.pos(DerivedWindowKind::new(n - 1, 0)),
                Some(index.pos(DerivedWindowKind::new(n, 0))),
            ),
        };
        Self {
            family: choice.family,
            order: n as f64,
            h: index.pos(DerivedWindowKind::H),
            t: index.pos(DerivedWindowKind::T),
            d: index.pos(DerivedWindowKind::D),
            a,
            b,
            c,
            e,
        }
    }

    /// `q^` at row `r`, or `None` when the denominator vanishes.
    pub(crate) fn estimate(&self, sp: &[Vec<Complex64>], r: usize) -> Option<Complex64> {
        let f = sp[self.h][r];
        let ft = sp[self.t][r];
        let fd = sp[self.d][r];
        let (num, den_a, den_b) = match self.family {
            EstimatorFamily::Time => {
                // (F^{D^n} F - F^{D^{n-1}} F^D) / (F^T F^{D^{n-1}} - F^{T D^{n-1}} F)
                let (fdn, fdn1, ftdn1) = (sp[self.a][r], sp[self.b][r], sp[self.c][r]);
                (fdn * f - fdn1 * fd, ft * fdn1, ftdn1 * f)
            }
            EstimatorFamily::Frequency => {
                // ((F^{T^{n-1} D} + (n-1) F^{T^{n-2}}) F - F^{T^{n-1}} F^D)
                //   / (F^{T^{n-1}} F^T - F^{T^n} F)
                let (ftn1d, ftn2, ftn1) = (sp[self.a][r], sp[self.b][r], sp[self.c][r]);
                let ftn = sp[self.e.expect("frequency family")][r];
                ((ftn1d + ftn2 * (self.order - 1.0)) * f - ftn1 * fd, ftn1 * ft, ftn * f)
            }
        };
        let den = den_a - den_b;
        let scale = den_a.norm() + den_b.norm();
        if !(den.norm() > DENOMINATOR_GATE * scale) {
            return None;
        }
        let q = num / den;
        (q.re.is_finite() && q.im.is_finite()).then_some(q)
    }
}

/// `q^ = nu^ + j alpha^` per cell.
#[derive(Debug, Clone, PartialEq)]
pub struct ModulationField {
    rows: usize,
    cols: usize,
    q: Vec<Complex64>,
    valid: Vec<bool>,
}

impl ModulationField {
    /// `raw` carries NaN where the denominator gate fired.
    pub(crate) fn from_raw(grid: &TfrGrid, mut raw: Vec<Complex64>, magnitude_threshold: f64) -> Self {
        let valid: Vec<bool> = grid
            .values()
            .iter()
            .zip(&raw)
            .map(|(f, q)| f.norm() > magnitude_threshold && !q.re.is_nan())
            .collect();
        for (q, &ok) in raw.iter_mut().zip(&valid) {
            if !ok {
                *q = Complex64::new(0.0, 0.0);
            }
        }
        Self {
            rows: grid.rows(),
            cols: grid.cols(),
            q: raw,
            valid,
        }
    }

    pub fn shape(&self) -> (usize, usize) {
        (self.rows, self.cols)
    }

    pub fn values(&self) -> &[Complex64] {
        &self.q
    }

    pub fn valid(&self) -> &[bool] {
        &self.valid
    }

    pub fn q(&self, r: usize, c: usize) -> Complex64 {
        self.q[r * self.cols + c]
    }

    pub fn is_valid(&self, r: usize, c: usize) -> bool {
        self.valid[r * self.cols + c]
    }

    /// Median of the valid neighbours within `radius` cells, applied to the
    /// real and imaginary parts separately. Invalid cells stay invalid.
    pub fn median_smoothed(&self, radius: usize) -> Self {
        let (rows, cols) = (self.rows, self.cols);
        let smoothed = par::map_range(rows, |r| {
            let mut row = vec![Complex64::new(0.0, 0.0); cols];
            let mut re = Vec::new();
            let mut im = Vec::new();
            for (c, out) in row.iter_mut().enumerate() {
                if !self.is_valid(r, c) {
                    continue;
                }
                re.clear();
                im.clear();
                for rr in r.saturating_sub(radius)..(r + radius + 1).min(rows) {
                    for cc in c.saturating_sub(radius)..(c + radius + 1).min(cols) {
                        if self.is_valid(rr, cc) {
                            let v = self.q(rr, cc);
                            re.push(v.re);
                            im.push(v.im);
                        }
                    }
                }
                *out = Complex64::new(median(&mut re), median(&mut im));
            }
            row
        });
        Self {
            rows,
            cols,
            q: smoothed.concat(),
            valid: self.valid.clone(),
        }
    }
}

fn median(v: &mut [f64]) -> f64 {
    v.sort_by(|a, b| a.total_cmp(b));
    let n = v.len();
    if n % 2 == 1 {
        v[n / 2]
    } else {
        0.5 * (v[n / 2 - 1] + v[n / 2])
    }
}

/// Estimates `q` on every cell of the STFT grid of `x`.
pub fn estimate_q<P: FftProvider>(
    fft: &P,
    x: &SignalRecord,
    spec: &WindowSpec,
    layout: &FrameLayout,
    choice: &EstimatorChoice,
    gate: MagnitudeGate,
) -> Result<ModulationField> {
    choice.validate()?;
    gate.validate()?;
    let index = SpectraIndex::new(choice.required_kinds());
    let est = QEstimator::new(choice, &index);
    let h = index.pos(DerivedWindowKind::H);
    let (axes, mut out) = analyze_frames(fft, x, spec, index.kinds(), layout, 2, |_, sp, out| {
        let m_len = sp[0].len();
        let (f_out, q_out) = out.split_at_mut(m_len);
        for r in 0..m_len {
            f_out[r] = sp[h][r];
            q_out[r] = est.estimate(sp, r).unwrap_or(Complex64::new(f64::NAN, f64::NAN));
        }
    })?;
    let raw = out.pop().unwrap();
    let grid = TfrGrid::from_parts(out.pop().unwrap(), axes, TfrKind::Stft, PhaseConvention::Absolute)?;
    let threshold = gate.threshold(grid.max_magnitude());
    Ok(ModulationField::from_raw(&grid, raw, threshold))
}

/// Second-order group-delay estimates, row-major, in seconds from sample 0.
#[derive(Debug, Clone, PartialEq)]
pub struct SecondOrderDelays {
    /// `(w - w^ + Im(q^ t~)) / alpha^`, unbiased for the chirp model.
    pub t2: Vec<f64>,
    /// `t^ + (w - w^) / alpha^`, biased when `nu != 0`.
    pub t2b: Vec<f64>,
    /// Cells that used the second-order branch.
    pub second_order: Vec<bool>,
}

/// Both second-order group-delay estimators; cells with `|alpha^|` at or
/// below the gate (or without a valid `q^`) fall back to `t^`.
pub fn group_delay_second_order(
    axes: &GridAxes,
    fields: &ReassignFields,
    q: &ModulationField,
    choice: &EstimatorChoice,
) -> Result<SecondOrderDelays> {
    let shape = (axes.fft_len, axes.cols);
    if fields.shape() != shape || q.shape() != shape {
        return Err(Error::ShapeMismatch {
            expected: shape,
            found: if fields.shape() != shape { fields.shape() } else { q.shape() },
        });
    }
    let gate = choice.alpha_gate_for(axes.fs, axes.fft_len);
    let omegas = row_omegas(axes);
    let cols = axes.cols;
    let rows = par::map_range(axes.fft_len, |r| {
        let mut t2 = Vec::with_capacity(cols);
        let mut t2b = Vec::with_capacity(cols);
        let mut second = Vec::with_capacity(cols);
        for c in 0..cols {
            let i = r * cols + c;
            let t_tilde = fields.t_tilde()[i];
            let t_hat = t_tilde.re;
            let qv = q.values()[i];
            if fields.valid()[i] && q.valid()[i] && qv.im.abs() > gate {
                let detune = omegas[r] - fields.omega_tilde()[i].im;
                // Im(q t~) = alpha t^ + nu Im(t~); keeping t^ outside the
                // ratio avoids cancelling two large terms.
                t2.push(t_hat + (detune + qv.re * t_tilde.im) / qv.im);
                t2b.push(t_hat + detune / qv.im);
                second.push(true);
            } else {
                t2.push(t_hat);
                t2b.push(t_hat);
                second.push(false);
            }
        }
        (t2, t2b, second)
    });
    let mut out = SecondOrderDelays {
        t2: Vec::with_capacity(shape.0 * cols),
        t2b: Vec::with_capacity(shape.0 * cols),
        second_order: Vec::with_capacity(shape.0 * cols),
    };
    for (a, b, s) in rows {
        out.t2.extend(a);
        out.t2b.extend(b);
        out.second_order.extend(s);
    }
    Ok(out)
}

/// Second-order instantaneous frequency
/// `w^(2) = w^ - Im(q^ t~) + alpha^ t = w^ + Im(q^ (t - t~))`, falling back to
/// `w^` where `q^` is invalid.
pub fn instantaneous_frequency_second_order(
    fields: &ReassignFields,
    q: &ModulationField,
    stft: &TfrGrid,
) -> Result<Vec<f64>> {
    if fields.shape() != stft.shape() || q.shape() != stft.shape() {
        return Err(Error::ShapeMismatch {
            expected: stft.shape(),
            found: fields.shape(),
        });
    }
    let cols = stft.cols();
    Ok((0..stft.rows() * cols)
        .map(|i| {
            let w_hat = fields.omega_tilde()[i].im;
            if fields.valid()[i] && q.valid()[i] {
                let offset = Complex64::new(stft.time(i % cols), 0.0) - fields.t_tilde()[i];
                w_hat + (q.values()[i] * offset).im
            } else {
                w_hat
            }
        })
        .collect())
}

/// What to do with a cell whose target falls outside the grid.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum OutOfGrid {
    /// Discard the value and count it.
    Drop,
    /// Leave the value in its own cell and count it.
    Keep,
}

/// A squeezed transform with boundary bookkeeping.
#[derive(Debug, Clone, PartialEq)]
pub struct Squeezed {
    pub grid: TfrGrid,
    /// Valid cells whose target fell outside the grid.
    pub out_of_grid_cells: usize,
    /// Sum of `|F|^2` over those cells.
    pub out_of_grid_energy: f64,
    /// Whether out-of-grid values were discarded (`Drop`) or kept in place.
    pub policy: OutOfGrid,
}

impl Squeezed {
    /// Cells whose value was discarded.
    pub fn dropped_cells(&self) -> usize {
        match self.policy {
            OutOfGrid::Drop => self.out_of_grid_cells,
            OutOfGrid::Keep => 0,
        }
    }
}

fn check_field(grid: &TfrGrid, field: &[f64], valid: &[bool]) -> Result<()> {
    let n = grid.rows() * grid.cols();
    if field.len() != n {
        return Err(Error::LengthMismatch(field.len(), n));
    }
    if valid.len() != n {
        return Err(Error::LengthMismatch(valid.len(), n));
    }
    Ok(())
}

/// Horizontal synchrosqueezing: each valid cell's complex value moves along
/// its row to the column nearest `times[cell] * fs`. Invalid cells stay in
/// place. Row sums are preserved except for dropped values.
pub fn tsst(grid: &TfrGrid, times: &[f64], valid: &[bool], policy: OutOfGrid) -> Result<Squeezed> {
    check_field(grid, times, valid)?;
    let grid = if grid.phase() == PhaseConvention::Absolute {
        alloc::borrow::Cow::Borrowed(grid)
    } else {
        alloc::borrow::Cow::Owned(grid.with_phase(PhaseConvention::Absolute))
    };
    let (rows, cols) = grid.shape();
    let fs = grid.fs();
    let squeezed = par::map_range(rows, |r| {
        let mut out = vec![Complex64::new(0.0, 0.0); cols];
        let (mut lost, mut lost_energy) = (0usize, 0.0);
        for (c, &v) in grid.row(r).iter().enumerate() {
            let i = r * cols + c;
            if !valid[i] {
                out[c] += v;
                continue;
            }
            let target = round_half_down(times[i] * fs);
            match column_of(&grid, target) {
                Some(tc) => out[tc] += v,
                None => {
                    lost += 1;
                    lost_energy += v.norm_sqr();
                    if policy == OutOfGrid::Keep {
                        out[c] += v;
                    }
                }
            }
        }
        (out, lost, lost_energy)
    });
    let mut values = Vec::with_capacity(rows * cols);
    let (mut cells, mut energy) = (0, 0.0);
    for (row, l, e) in squeezed {
        values.extend(row);
        cells += l;
        energy += e;
    }
    Ok(Squeezed {
        grid: grid.rebuild(values, TfrKind::Tsst, PhaseConvention::Absolute),
        out_of_grid_cells: cells,
        out_of_grid_energy: energy,
        policy,
    })
}

fn column_of(grid: &TfrGrid, sample: f64) -> Option<usize> {
    if !sample.is_finite() || sample.abs() > isize::MAX as f64 / 2.0 {
        return None;
    }
    grid.column_of_sample(sample as isize)
}

/// Vertical synchrosqueezing: each valid cell moves along its column to the
/// row nearest `omegas[cell]`. Squeezing happens in the window-relative
/// phase convention, in which column sums give back the signal, and the
/// result is returned in that convention.
pub fn vertical_sst(grid: &TfrGrid, omegas: &[f64], valid: &[bool], policy: OutOfGrid) -> Result<Squeezed> {
    check_field(grid, omegas, valid)?;
    let rel = grid.with_phase(PhaseConvention::WindowRelative);
    let (rows, cols) = rel.shape();
    let bin_per_rad = rel.fft_len() as f64 / (2.0 * PI * rel.fs());
    let columns = par::map_range(cols, |c| {
        let mut out = vec![Complex64::new(0.0, 0.0); rows];
        let (mut lost, mut lost_energy) = (0usize, 0.0);
        for r in 0..rows {
            let i = r * cols + c;
            let v = rel.get(r, c);
            if !valid[i] {
                out[r] += v;
                continue;
            }
            let m = round_half_down(omegas[i] * bin_per_rad);
            let target = if m.is_finite() && m.abs() < 1e15 {
                rel.row_of_bin(m as i64)
            } else {
                None
            };
            match target {
                Some(tr) => out[tr] += v,
                None => {
                    lost += 1;
                    lost_energy += v.norm_sqr();
                    if policy == OutOfGrid::Keep {
                        out[r] += v;
                    }
                }
            }
        }
        (out, lost, lost_energy)
    });
    let mut values = vec![Complex64::new(0.0, 0.0); rows * cols];
    let (mut cells, mut energy) = (0, 0.0);
    for (c, (col, l, e)) in columns.into_iter().enumerate() {
        for (r, v) in col.into_iter().enumerate() {
            values[r * cols + c] = v;
        }
        cells += l;
        energy += e;
    }
    Ok(Squeezed {
        grid: rel.rebuild(values, TfrKind::Sst, PhaseConvention::WindowRelative),
        out_of_grid_cells: cells,
        out_of_grid_energy: energy,
        policy,
    })
}
