//! FFT abstraction.
//!
//! Transforms in this crate only need in-place, unnormalized complex FFTs of
//! arbitrary length. Targets without `std` plug their own implementation in
//! through [`FftProvider`].

use alloc::vec::Vec;
use core::f64::consts::PI;
use num_complex::Complex64;

/// A planned transform of one fixed length.
pub trait FftPlan: Send + Sync {
    fn len(&self) -> usize;

    /// `X[k] = sum_n x[n] exp(-j 2 pi k n / N)`, in place, unnormalized.
    fn forward(&self, buf: &mut [Complex64]);

    /// `x[n] = sum_k X[k] exp(+j 2 pi k n / N)`, in place, unnormalized.
    fn inverse(&self, buf: &mut [Complex64]);
}

pub trait FftProvider: Sync {
    type Plan: FftPlan;

    fn plan(&self, len: usize) -> Self::Plan;
}

/// Direct `O(N^2)` DFT. Works without `std`; slow but exact enough to serve
/// as a reference.
#[derive(Debug, Clone, Copy, Default)]
pub struct NaiveDft;

#[derive(Debug, Clone)]
pub struct NaiveDftPlan {
    twiddles: Vec<Complex64>,
}

impl NaiveDftPlan {
    fn run(&self, buf: &mut [Complex64], conj: bool) {
        let n = self.twiddles.len();
        assert_eq!(buf.len(), n, "buffer length differs from plan length");
        let input = buf.to_vec();
        for (k, out) in buf.iter_mut().enumerate() {
            let mut acc = Complex64::new(0.0, 0.0);
            for (j, &x) in input.iter().enumerate() {
                let w = self.twiddles[(k * j) % n];
                acc += x * if conj { w.conj() } else { w };
            }
            *out = acc;
        }
    }
}

impl FftPlan for NaiveDftPlan {
    fn len(&self) -> usize {
        self.twiddles.len()
    }

    fn forward(&self, buf: &mut [Complex64]) {
        self.run(buf, false);
    }

    fn inverse(&self, buf: &mut [Complex64]) {
        self.run(buf, true);
    }
}

impl FftProvider for NaiveDft {
    type Plan = NaiveDftPlan;

    fn plan(&self, len: usize) -> NaiveDftPlan {
        let twiddles = (0..len)
            .map(|k| Complex64::from_polar(1.0, -2.0 * PI * k as f64 / len as f64))
            .collect();
        NaiveDftPlan { twiddles }
    }
}

#[cfg(feature = "std")]
pub use self::rust_fft::{RustFft, RustFftPlan};

#[cfg(feature = "std")]
mod rust_fft {
    use super::{FftPlan, FftProvider};
    use num_complex::Complex64;
    use rustfft::{Fft, FftPlanner};
    use std::sync::{Arc, Mutex};

    /// [`FftProvider`] backed by `rustfft`. Plans are cached by the planner.
    pub struct RustFft {
        planner: Mutex<FftPlanner<f64>>,
    }

    impl RustFft {
        pub fn new() -> Self {
            Self {
                planner: Mutex::new(FftPlanner::new()),
            }
        }
    }

    impl Default for RustFft {
        fn default() -> Self {
            Self::new()
        }
    }

    impl core::fmt::Debug for RustFft {
        fn fmt(&self, f: &mut core::fmt::Formatter<'_>) -> core::fmt::Result {
            f.write_str("RustFft")
        }
    }

    #[derive(Clone)]
    pub struct RustFftPlan {
        forward: Arc<dyn Fft<f64>>,
        inverse: Arc<dyn Fft<f64>>,
    }

    impl FftPlan for RustFftPlan {
        fn len(&self) -> usize {
            self.forward.len()
        }

        fn forward(&self, buf: &mut [Complex64]) {
            self.forward.process(buf);
        }

        fn inverse(&self, buf: &mut [Complex64]) {
            self.inverse.process(buf);
        }
    }

    impl FftProvider for RustFft {
        type Plan = RustFftPlan;

        fn plan(&self, len: usize) -> RustFftPlan {
            let mut planner = self.planner.lock().unwrap_or_else(|e| e.into_inner());
            RustFftPlan {
                forward: planner.plan_fft_forward(len),
                inverse: planner.plan_fft_inverse(len),
            }
        }
    }
}
