use alloc::vec::Vec;
use num_complex::Complex64;

use crate::error::{Error, Result};

/// Uniformly sampled time series.
///
/// Samples are held as complex values; `is_real` records whether the source
/// was real so that reconstructions can be projected back onto the reals.
#[derive(Debug, Clone, PartialEq)]
pub struct SignalRecord {
    samples: Vec<Complex64>,
    fs: f64,
    start_time: f64,
    is_real: bool,
}

impl SignalRecord {
    pub fn from_real(samples: &[f64], fs: f64) -> Result<Self> {
        let samples = samples.iter().map(|&v| Complex64::new(v, 0.0)).collect();
        Self::build(samples, fs, true)
    }

    pub fn from_complex(samples: Vec<Complex64>, fs: f64) -> Result<Self> {
        Self::build(samples, fs, false)
    }

    /// Zero record of `len` samples.
    pub fn zeros(len: usize, fs: f64, is_real: bool) -> Result<Self> {
        Self::build(alloc::vec![Complex64::new(0.0, 0.0); len], fs, is_real)
    }

    fn build(samples: Vec<Complex64>, fs: f64, is_real: bool) -> Result<Self> {
        if !(fs.is_finite() && fs > 0.0) {
            return Err(Error::InvalidSamplingRate);
        }
        if samples.is_empty() {
            return Err(Error::EmptySignal);
        }
        if let Some(i) = samples.iter().position(|v| !(v.re.is_finite() && v.im.is_finite())) {
            return Err(Error::NonFiniteSample(i));
        }
        Ok(Self {
            samples,
            fs,
            start_time: 0.0,
            is_real,
        })
    }

    /// Sets the time of sample 0 in seconds.
    pub fn with_start_time(mut self, start_time: f64) -> Self {
        self.start_time = start_time;
        self
    }

    pub fn samples(&self) -> &[Complex64] {
        &self.samples
    }

    pub fn len(&self) -> usize {
        self.samples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.samples.is_empty()
    }

    pub fn fs(&self) -> f64 {
        self.fs
    }

    pub fn start_time(&self) -> f64 {
        self.start_time
    }

    pub fn is_real(&self) -> bool {
        self.is_real
    }

    /// Real parts of the samples.
    pub fn real_parts(&self) -> Vec<f64> {
        self.samples.iter().map(|v| v.re).collect()
    }

    pub fn energy(&self) -> f64 {
        self.samples.iter().map(|v| v.norm_sqr()).sum()
    }

    /// Absolute time of sample `n` in seconds.
    pub fn time_of(&self, n: usize) -> f64 {
        self.start_time + n as f64 / self.fs
    }

    /// Builds a record with the same metadata, projecting onto the reals when
    /// this record is real.
    pub(crate) fn like(&self, mut samples: Vec<Complex64>) -> Self {
        if self.is_real {
            samples.iter_mut().for_each(|v| v.im = 0.0);
        }
        Self {
            samples,
            fs: self.fs,
            start_time: self.start_time,
            is_real: self.is_real,
        }
    }

    pub(crate) fn from_parts(samples: Vec<Complex64>, fs: f64, start_time: f64, is_real: bool) -> Self {
        let mut rec = Self {
            samples,
            fs,
            start_time,
            is_real,
        };
        if is_real {
            rec.samples.iter_mut().for_each(|v| v.im = 0.0);
        }
        rec
    }
}
