use thiserror::Error;

pub type Result<T> = core::result::Result<T, Error>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("unsupported window order: t^{time_weight} d^{derivative}h (at most 3 combined)")]
    UnsupportedWindowOrder { time_weight: u8, derivative: u8 },

    #[error("invalid window: {0}")]
    InvalidWindow(&'static str),

    #[error("support radius {radius} below the minimum {minimum} samples")]
    SupportTooSmall { radius: usize, minimum: usize },

    #[error("FFT length must be even and nonzero, got {0}")]
    OddFftLength(usize),

    #[error("empty signal")]
    EmptySignal,

    #[error("non-finite sample at index {0}")]
    NonFiniteSample(usize),

    #[error("sampling frequency must be positive and finite")]
    InvalidSamplingRate,

    #[error("degenerate window gain {0:e}")]
    DegenerateWindowGain(f64),

    #[error("shape mismatch: expected {expected:?}, found {found:?}")]
    ShapeMismatch {
        expected: (usize, usize),
        found: (usize, usize),
    },

    #[error("length mismatch: {0} vs {1}")]
    LengthMismatch(usize, usize),

    #[error("empty band: no frequency bin in [{lo}, {hi}] Hz")]
    EmptyBand { lo: f64, hi: f64 },

    #[error("unsupported estimator: {family} family of order {order}")]
    UnsupportedEstimator { family: &'static str, order: u8 },

    #[error("frequency {0} Hz outside (0, fs/2)")]
    FrequencyOutOfBand(f64),

    #[error("sample index {index} outside record of length {len}")]
    TimeOutOfRecord { index: usize, len: usize },

    #[error("zero signal: SNR undefined")]
    ZeroSignal,

    #[error("invalid configuration: {0}")]
    InvalidConfig(&'static str),
}
