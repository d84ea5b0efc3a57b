//! Gaussian analysis window and its time-weighted / differentiated family.
//!
//! The base window is the unit-area Gaussian
//! `h(t) = exp(-t^2 / (2 T^2)) / (sqrt(2 pi) T)`. A [`DerivedWindowKind`]
//! `(n, k)` selects `t^n * d^k h / dt^k`, evaluated in closed form through
//! probabilists' Hermite polynomials:
//! `d^k h / dt^k = (-1)^k He_k(t / T) h(t) / T^k`.

use alloc::vec::Vec;
use num_complex::Complex64;
#[cfg(not(feature = "std"))]
use num_traits::Float;

use crate::error::{Error, Result};

/// Default truncation radius in units of the dimensionless spread `L`.
pub const DEFAULT_SUPPORT_FACTOR: f64 = 5.0;

/// Gaussian window parameters.
///
/// The spread is stored in samples (`L = T * fs`); `T` is derived.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct WindowSpec {
    spread_samples: f64,
    fs: f64,
    support_radius: usize,
}

impl WindowSpec {
    /// Window of spread `L` samples at sampling rate `fs`, truncated at
    /// `ceil(5 L)` samples on each side.
    pub fn new(spread_samples: f64, fs: f64) -> Result<Self> {
        Self::validate_params(spread_samples, fs)?;
        let support_radius = minimum_radius(spread_samples);
        Ok(Self {
            spread_samples,
            fs,
            support_radius,
        })
    }

    /// Window with time spread `T` in seconds.
    pub fn from_time_spread(spread_seconds: f64, fs: f64) -> Result<Self> {
        Self::new(spread_seconds * fs, fs)
    }

    /// Overrides the truncation radius. Radii below `ceil(5 L)` are rejected.
    pub fn with_support_radius(self, radius: usize) -> Result<Self> {
        let minimum = minimum_radius(self.spread_samples);
        if radius < minimum {
            return Err(Error::SupportTooSmall { radius, minimum });
        }
        Ok(Self {
            support_radius: radius,
            ..self
        })
    }

    fn validate_params(spread_samples: f64, fs: f64) -> Result<()> {
        if !(fs.is_finite() && fs > 0.0) {
            return Err(Error::InvalidSamplingRate);
        }
        if !(spread_samples.is_finite() && spread_samples > 0.0) {
            return Err(Error::InvalidWindow("spread must be positive and finite"));
        }
        Ok(())
    }

    /// Dimensionless spread `L = T * fs`.
    pub fn spread_samples(&self) -> f64 {
        self.spread_samples
    }

    /// Time spread `T` in seconds.
    pub fn spread_seconds(&self) -> f64 {
        self.spread_samples / self.fs
    }

    pub fn fs(&self) -> f64 {
        self.fs
    }

    pub fn support_radius(&self) -> usize {
        self.support_radius
    }

    /// Number of samples in the truncated support, `2 R + 1`.
    pub fn support_len(&self) -> usize {
        2 * self.support_radius + 1
    }
}

fn minimum_radius(spread_samples: f64) -> usize {
    (DEFAULT_SUPPORT_FACTOR * spread_samples).ceil() as usize
}

/// `t^time_weight * d^derivative h / dt^derivative`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct DerivedWindowKind {
    pub time_weight: u8,
    pub derivative: u8,
}

impl DerivedWindowKind {
    pub const H: Self = Self::new(0, 0);
    pub const T: Self = Self::new(1, 0);
    pub const D: Self = Self::new(0, 1);
    pub const T2: Self = Self::new(2, 0);
    pub const TD: Self = Self::new(1, 1);
    pub const D2: Self = Self::new(0, 2);

    pub const fn new(time_weight: u8, derivative: u8) -> Self {
        Self {
            time_weight,
            derivative,
        }
    }

    /// Highest combined order with a closed form here.
    pub const MAX_ORDER: u8 = 3;

    pub fn validate(self) -> Result<()> {
        if self.time_weight as u32 + self.derivative as u32 > Self::MAX_ORDER as u32 {
            return Err(Error::UnsupportedWindowOrder {
                time_weight: self.time_weight,
                derivative: self.derivative,
            });
        }
        Ok(())
    }

    /// `true` when the sampled window is even in time.
    pub fn is_even(self) -> bool {
        (self.time_weight + self.derivative) % 2 == 0
    }
}

/// Probabilists' Hermite polynomial `He_k(u)` for `k <= 3`.
fn hermite(k: u8, u: f64) -> f64 {
    match k {
        0 => 1.0,
        1 => u,
        2 => u * u - 1.0,
        3 => u * u * u - 3.0 * u,
        _ => unreachable!("order checked by DerivedWindowKind::validate"),
    }
}

/// Closed-form value of `t^n d^k h / dt^k` at `t = u * T`.
fn derived_value(kind: DerivedWindowKind, u: f64, spread_seconds: f64) -> f64 {
    let gauss = (-0.5 * u * u).exp() / ((2.0 * core::f64::consts::PI).sqrt() * spread_seconds);
    let sign = if kind.derivative % 2 == 0 { 1.0 } else { -1.0 };
    let scale = spread_seconds.powi(kind.time_weight as i32 - kind.derivative as i32);
    sign * u.powi(kind.time_weight as i32) * hermite(kind.derivative, u) * scale * gauss
}

/// A sampled window over `[-R, R]`.
#[derive(Debug, Clone, PartialEq)]
pub struct Window {
    kind: DerivedWindowKind,
    radius: usize,
    samples: Vec<f64>,
}

impl Window {
    pub fn kind(&self) -> DerivedWindowKind {
        self.kind
    }

    pub fn radius(&self) -> usize {
        self.radius
    }

    /// Samples for offsets `-R..=R`.
    pub fn samples(&self) -> &[f64] {
        &self.samples
    }

    /// Value at integer offset `i` (zero outside the support).
    pub fn at(&self, i: isize) -> f64 {
        let idx = i + self.radius as isize;
        if idx < 0 || idx as usize >= self.samples.len() {
            0.0
        } else {
            self.samples[idx as usize]
        }
    }
}

/// Samples `t^n d^k h / dt^k` at `t = i / fs`, `i in [-R, R]`.
pub fn gaussian_window(spec: &WindowSpec, kind: DerivedWindowKind) -> Result<Window> {
    kind.validate()?;
    let radius = spec.support_radius();
    let big_l = spec.spread_samples();
    let spread = spec.spread_seconds();
    let samples = (-(radius as isize)..=radius as isize)
        .map(|i| derived_value(kind, i as f64 / big_l, spread))
        .collect();
    Ok(Window {
        kind,
        radius,
        samples,
    })
}

/// Rectangle-rule `F_h(0) = sum_i h[i] / fs` over the truncated support.
pub fn window_zero_frequency_gain(spec: &WindowSpec) -> Complex64 {
    let h = gaussian_window(spec, DerivedWindowKind::H).expect("base window is always supported");
    Complex64::new(h.samples().iter().sum::<f64>() / spec.fs(), 0.0)
}
