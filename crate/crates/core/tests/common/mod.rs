#![allow(dead_code)]

use std::f64::consts::PI;
use tfss_core::synchro::ChirpModel;
use tfss_core::{Complex64, SignalRecord};

/// Closed-form STFT operators of `model` under a Gaussian window of spread
/// `t_spread` (seconds), for the continuous-time transform
/// `F(t, w) = int x(s) h(t - s) exp(-j w s) ds`.
///
/// With `x = exp(l + p s + q s^2 / 2)` the integrand is `exp(a s^2 + b s + c)`,
/// `a = q/2 - 1/(2T^2)`, `b = p - j w + t/T^2`, a complex Gaussian in `s` with
/// mean `-b / (2a)`. Returns `(F, t~, w~)`.
pub fn chirp_oracle(model: &ChirpModel, t_spread: f64, t: f64, omega: f64) -> (Complex64, Complex64, Complex64) {
    let j = Complex64::new(0.0, 1.0);
    let inv_t2 = 1.0 / (t_spread * t_spread);
    let a = model.q() / 2.0 - 0.5 * inv_t2;
    let b = model.p() - j * omega + t * inv_t2;
    let c = Complex64::new(model.l - 0.5 * t * t * inv_t2, model.phi);
    let gauss = (Complex64::new(PI, 0.0) / (-a)).sqrt() * (-b * b / (4.0 * a) + c).exp();
    let f = gauss / ((2.0 * PI).sqrt() * t_spread);
    let mean = -b / (2.0 * a);
    let t_tilde = mean;
    let omega_tilde = j * omega - (t - mean) * inv_t2;
    (f, t_tilde, omega_tilde)
}

pub fn sample(model: &ChirpModel, len: usize, fs: f64) -> SignalRecord {
    SignalRecord::from_complex((0..len).map(|n| model.value(n as f64 / fs)).collect(), fs).unwrap()
}

/// Gaussian-envelope chirp used by the oracle tests: centred in a
/// 512-sample record, envelope spread 60 samples, 0.2 cycles/sample at the
/// centre, sweeping 0.3 cycles/sample over the record.
pub fn test_chirp(fs: f64) -> ChirpModel {
    let n = 512.0;
    ChirpModel::gaussian(
        1.0,
        256.0 / fs,
        60.0 / fs,
        2.0 * PI * 0.2 * fs,
        2.0 * PI * 0.3 * fs * fs / n,
    )
}

pub fn lcg_signal(len: usize, seed: u64) -> Vec<f64> {
    let mut s = seed.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
    (0..len)
        .map(|_| {
            s = s.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
            ((s >> 11) as f64 / (1u64 << 53) as f64) - 0.5
        })
        .collect()
}
