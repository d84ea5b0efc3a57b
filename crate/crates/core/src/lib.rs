//! Sharpened, invertible time-frequency representations built on a
//! Gaussian-window short-time Fourier transform.
//!
//! The crate covers the discrete STFT with the absolute-time phase
//! convention, its time-marginal and exact inversion, reassignment
//! operators, the reassigned spectrogram, classical (vertical) and
//! time-reassigned (horizontal) synchrosqueezing at first and second order,
//! masked reconstruction and saliency-based impulse detection.
//!
//! The crate is `no_std` (it needs `alloc`). FFTs are supplied through the
//! [`fft::FftProvider`] trait; with the default `std` feature a
//! [`fft::RustFft`] backend and rayon-backed parallel loops are available.

#![no_std]
#![forbid(unsafe_code)]

extern crate alloc;
#[cfg(feature = "std")]
extern crate std;

pub mod detect;
pub mod error;
pub mod fft;
pub mod grid;
pub mod metrics;
mod par;
pub mod pipeline;
pub mod reassign;
pub mod reconstruct;
pub mod signal;
pub mod signals;
pub mod stft;
pub mod synchro;
pub mod window;

pub use error::{Error, Result};
pub use grid::{FrameLayout, FrameMargin, GridAxes, PhaseConvention, TfrGrid, TfrKind};
pub use num_complex::Complex64;
pub use signal::SignalRecord;
pub use window::{DerivedWindowKind, Window, WindowSpec};

/// Nearest integer with exact halves rounded down (toward earlier time or
/// lower frequency).
#[inline]
pub(crate) fn round_half_down(x: f64) -> f64 {
    num_traits::Float::ceil(x - 0.5)
}
