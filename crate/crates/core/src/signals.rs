//! Synthetic test signals, noise injection and the reconstruction quality
//! factor.

use alloc::vec;
use alloc::vec::Vec;
use core::f64::consts::PI;
use num_complex::Complex64;
#[cfg(not(feature = "std"))]
use num_traits::Float;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

use crate::error::{Error, Result};
use crate::signal::SignalRecord;
use crate::synchro::ChirpModel;

/// RQF reported for an exact reconstruction.
pub const RQF_CAP_DB: f64 = 320.0;

/// One synthetic component. Times are sample indices or seconds from
/// sample 0, frequencies are in Hz.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum ComponentSpec {
    Impulse {
        sample: usize,
        amplitude: f64,
    },
    Tone {
        freq: f64,
        phase: f64,
        amplitude: f64,
    },
    /// Real linear chirp sweeping `f_start` to `f_end` over the record.
    LinearChirp {
        f_start: f64,
        f_end: f64,
        phase: f64,
        amplitude: f64,
    },
    /// Real sinusoidally frequency-modulated sinusoid,
    /// `f(t) = carrier + deviation * sin(2 pi rate t)`.
    SinFm {
        carrier: f64,
        deviation: f64,
        rate: f64,
        amplitude: f64,
    },
    /// Complex chirp with quadratic log-amplitude.
    GaussianChirp(ChirpModel),
}

impl ComponentSpec {
    fn is_real(&self) -> bool {
        !matches!(self, Self::GaussianChirp(_))
    }

    fn validate(&self, len: usize, fs: f64) -> Result<()> {
        let nyquist = fs / 2.0;
        let in_band = |f: f64| {
            if f > 0.0 && f < nyquist {
                Ok(())
            } else {
                Err(Error::FrequencyOutOfBand(f))
            }
        };
        match *self {
            Self::Impulse { sample, .. } => {
                if sample >= len {
                    return Err(Error::TimeOutOfRecord { index: sample, len });
                }
            }
            Self::Tone { freq, .. } => in_band(freq)?,
            Self::LinearChirp { f_start, f_end, .. } => {
                in_band(f_start)?;
                in_band(f_end)?;
            }
            Self::SinFm {
                carrier, deviation, ..
            } => {
                in_band(carrier - deviation.abs())?;
                in_band(carrier + deviation.abs())?;
            }
            Self::GaussianChirp(model) => {
                let duration = (len - 1) as f64 / fs;
                for t in [0.0, duration] {
                    let f = model.instantaneous_frequency(t) / (2.0 * PI);
                    if f.abs() >= nyquist {
                        return Err(Error::FrequencyOutOfBand(f));
                    }
                }
            }
        }
        Ok(())
    }

    fn render(&self, len: usize, fs: f64) -> Vec<Complex64> {
        let duration = len as f64 / fs;
        let real = |f: &dyn Fn(f64) -> f64| -> Vec<Complex64> {
            (0..len).map(|n| Complex64::new(f(n as f64 / fs), 0.0)).collect()
        };
        match *self {
            Self::Impulse { sample, amplitude } => {
                let mut v = vec![Complex64::new(0.0, 0.0); len];
                v[sample] = Complex64::new(amplitude, 0.0);
                v
            }
            Self::Tone {
                freq,
                phase,
                amplitude,
            } => real(&|t| amplitude * (2.0 * PI * freq * t + phase).cos()),
            Self::LinearChirp {
                f_start,
                f_end,
                phase,
                amplitude,
            } => {
                let rate = (f_end - f_start) / duration;
                real(&|t| amplitude * (2.0 * PI * (f_start * t + 0.5 * rate * t * t) + phase).cos())
            }
            Self::SinFm {
                carrier,
                deviation,
                rate,
                amplitude,
            } => real(&|t| {
                let excursion = deviation / rate * (1.0 - (2.0 * PI * rate * t).cos());
                amplitude * (2.0 * PI * (carrier * t + excursion)).cos()
            }),
            Self::GaussianChirp(model) => (0..len).map(|n| model.value(n as f64 / fs)).collect(),
        }
    }
}

/// A synthesized mixture and its separate components.
#[derive(Debug, Clone, PartialEq)]
pub struct Synthesis {
    pub mixture: SignalRecord,
    pub components: Vec<SignalRecord>,
}

/// Sums `components` over `len` samples at `fs`.
pub fn synthesize(components: &[ComponentSpec], len: usize, fs: f64) -> Result<Synthesis> {
    if len == 0 {
        return Err(Error::EmptySignal);
    }
    if !(fs.is_finite() && fs > 0.0) {
        return Err(Error::InvalidSamplingRate);
    }
    let is_real = components.iter().all(ComponentSpec::is_real);
    let mut mixture = vec![Complex64::new(0.0, 0.0); len];
    let mut parts = Vec::with_capacity(components.len());
    for spec in components {
        spec.validate(len, fs)?;
        let samples = spec.render(len, fs);
        for (m, s) in mixture.iter_mut().zip(&samples) {
            *m += s;
        }
        parts.push(SignalRecord::from_parts(samples, fs, 0.0, spec.is_real()));
    }
    Ok(Synthesis {
        mixture: SignalRecord::from_parts(mixture, fs, 0.0, is_real),
        components: parts,
    })
}

/// Adds seeded white Gaussian noise scaled so that the realized SNR is
/// exactly `snr_db`. Complex records get circular complex noise.
pub fn add_noise(x: &SignalRecord, snr_db: f64, seed: u64) -> Result<SignalRecord> {
    let signal_energy = x.energy();
    if signal_energy == 0.0 {
        return Err(Error::ZeroSignal);
    }
    if !snr_db.is_finite() {
        return Err(Error::InvalidConfig("SNR must be finite"));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let noise: Vec<Complex64> = (0..x.len())
        .map(|_| {
            let re: f64 = StandardNormal.sample(&mut rng);
            if x.is_real() {
                Complex64::new(re, 0.0)
            } else {
                let im: f64 = StandardNormal.sample(&mut rng);
                Complex64::new(re, im)
            }
        })
        .collect();
    let noise_energy: f64 = noise.iter().map(|v| v.norm_sqr()).sum();
    let sigma = (signal_energy / (noise_energy * 10.0_f64.powf(snr_db / 10.0))).sqrt();
    let samples = x.samples().iter().zip(&noise).map(|(s, w)| s + w * sigma).collect();
    Ok(x.like(samples))
}

/// Reconstruction quality factor
/// `10 log10(sum |x|^2 / sum |x - x^|^2)` in dB, capped at [`RQF_CAP_DB`].
pub fn rqf(x: &SignalRecord, estimate: &SignalRecord) -> Result<f64> {
    rqf_samples(x.samples(), estimate.samples())
}

pub fn rqf_samples(x: &[Complex64], estimate: &[Complex64]) -> Result<f64> {
    if x.len() != estimate.len() {
        return Err(Error::LengthMismatch(x.len(), estimate.len()));
    }
    let signal: f64 = x.iter().map(|v| v.norm_sqr()).sum();
    let error: f64 = x.iter().zip(estimate).map(|(a, b)| (a - b).norm_sqr()).sum();
    if error == 0.0 {
        return Ok(RQF_CAP_DB);
    }
    Ok((10.0 * (signal / error).log10()).min(RQF_CAP_DB))
}

/// Named synthetic corpora.
pub mod corpus {
    use super::*;

    pub const LEN: usize = 500;
    pub const FS: f64 = 1.0;
    pub const IMPULSE_SAMPLES: [usize; 2] = [125, 375];
    pub const IMPULSE_AMPLITUDE: f64 = 4.0;

    fn impulses() -> [ComponentSpec; 2] {
        IMPULSE_SAMPLES.map(|sample| ComponentSpec::Impulse {
            sample,
            amplitude: IMPULSE_AMPLITUDE,
        })
    }

    /// Two impulses at a quarter and three quarters of the record, a
    /// low-band tone, a mid-band linear chirp and an upper-band
    /// sinusoidally modulated sinusoid: 500 samples at unit rate.
    pub fn mixed() -> Vec<ComponentSpec> {
        let mut c = impulses().to_vec();
        c.extend([
            ComponentSpec::Tone {
                freq: 0.06,
                phase: 0.0,
                amplitude: 1.0,
            },
            ComponentSpec::LinearChirp {
                f_start: 0.12,
                f_end: 0.28,
                phase: 0.0,
                amplitude: 1.0,
            },
            ComponentSpec::SinFm {
                carrier: 0.38,
                deviation: 0.04,
                rate: 2.0 / LEN as f64,
                amplitude: 1.0,
            },
        ]);
        c
    }

    /// The two impulses of [`mixed`] over a low-amplitude tone.
    pub fn impulses_and_tone() -> Vec<ComponentSpec> {
        let mut c = impulses().to_vec();
        c.push(ComponentSpec::Tone {
            freq: 0.1,
            phase: 0.3,
            amplitude: 0.5,
        });
        c
    }

    pub fn impulses_only() -> Vec<ComponentSpec> {
        impulses().to_vec()
    }

    /// Corpus by name: `paper-corpus`, `impulses-tone` or `impulses`.
    pub fn by_name(name: &str) -> Option<Vec<ComponentSpec>> {
        match name {
            "paper-corpus" | "mixed" => Some(mixed()),
            "impulses-tone" => Some(impulses_and_tone()),
            "impulses" => Some(impulses_only()),
            _ => None,
        }
    }

    pub const NAMES: [&str; 3] = ["paper-corpus", "impulses-tone", "impulses"];
}
