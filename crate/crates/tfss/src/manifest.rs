//! Everything a run depends on, and its key=value record.

use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use tfss_core::detect::{DetectionConfig, MaskExtent};
use tfss_core::pipeline::AnalysisConfig;
use tfss_core::reassign::MagnitudeGate;
use tfss_core::signals::{add_noise, corpus, synthesize};
use tfss_core::synchro::{EstimatorChoice, EstimatorFamily, OutOfGrid};
use tfss_core::{FrameLayout, SignalRecord, TfrKind, WindowSpec};

use crate::error::{CliError, Result};
use crate::input::{read_signal, InputFormat};

#[derive(Debug, Clone, PartialEq)]
pub enum Source {
    File {
        path: PathBuf,
        format: InputFormat,
        fs: Option<f64>,
    },
    /// A named corpus from [`corpus::by_name`].
    Synthetic(String),
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunManifest {
    pub source: Source,
    pub transform: TfrKind,
    pub fft_len: usize,
    /// Window spread `L` in samples.
    pub spread: f64,
    /// Window support radius in samples; `None` is the default `ceil(5 L)`.
    pub support: Option<usize>,
    pub estimator: EstimatorChoice,
    /// Noise added before analysis, in dB SNR.
    pub snr_db: Option<f64>,
    pub seed: u64,
    /// Display band for images, `(lo, hi)` in Hz.
    pub band: Option<(f64, f64)>,
    pub detection: DetectionConfig,
    pub out_dir: PathBuf,
}

/// A loaded signal and, for synthetic corpora, its noiseless components.
#[derive(Debug, Clone)]
pub struct LoadedSignal {
    pub record: SignalRecord,
    pub components: Vec<SignalRecord>,
}

impl RunManifest {
    /// Defaults of the synthetic experiment: `M = 600`, `L = 8`.
    pub fn new(source: Source, out_dir: impl Into<PathBuf>) -> Self {
        Self {
            source,
            transform: TfrKind::Tsst2,
            fft_len: 600,
            spread: 8.0,
            support: None,
            estimator: EstimatorChoice::default(),
            snr_db: None,
            seed: 1,
            band: None,
            detection: DetectionConfig::new(0.0, f64::INFINITY),
            out_dir: out_dir.into(),
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.fft_len == 0 || self.fft_len % 2 != 0 {
            return Err(CliError::Usage(format!("--M must be even and positive, got {}", self.fft_len)));
        }
        if !(self.spread.is_finite() && self.spread > 0.0) {
            return Err(CliError::Usage(format!("--L must be positive, got {}", self.spread)));
        }
        if let Some((lo, hi)) = self.band {
            if !(lo >= 0.0 && lo < hi) {
                return Err(CliError::Usage(format!("empty band {lo}:{hi}")));
            }
        }
        if let Source::Synthetic(name) = &self.source {
            if corpus::by_name(name).is_none() {
                return Err(CliError::Usage(format!(
                    "unknown corpus {name:?} (known: {})",
                    corpus::NAMES.join(", ")
                )));
            }
        }
        Ok(())
    }

    pub fn load_signal(&self) -> Result<LoadedSignal> {
        let (record, components) = match &self.source {
            Source::File { path, format, fs } => (read_signal(path, *format, *fs)?, Vec::new()),
            Source::Synthetic(name) => {
                let specs = corpus::by_name(name).ok_or_else(|| CliError::Usage(format!("unknown corpus {name:?}")))?;
                let s = synthesize(&specs, corpus::LEN, corpus::FS)?;
                (s.mixture, s.components)
            }
        };
        let record = match self.snr_db {
            Some(snr) => add_noise(&record, snr, self.seed)?,
            None => record,
        };
        Ok(LoadedSignal { record, components })
    }

    pub fn window(&self, fs: f64) -> Result<WindowSpec> {
        let w = WindowSpec::new(self.spread, fs)?;
        Ok(match self.support {
            Some(r) => w.with_support_radius(r)?,
            None => w,
        })
    }

    pub fn analysis_config(&self, fs: f64) -> Result<AnalysisConfig> {
        let mut cfg = AnalysisConfig::new(self.window(fs)?, FrameLayout::new(self.fft_len)?);
        cfg.estimator = self.estimator;
        Ok(cfg)
    }

    /// Detection settings with an open upper band edge clamped to `fs / 2`.
    pub fn detection_config(&self, fs: f64) -> DetectionConfig {
        let mut d = self.detection;
        d.f_hi = d.f_hi.min(fs / 2.0);
        d
    }

    /// Ordered key=value pairs describing the run on `x`.
    pub fn metadata(&self, x: &SignalRecord) -> Result<Vec<(&'static str, String)>> {
        let cfg = self.analysis_config(x.fs())?;
        let det = self.detection_config(x.fs());
        let mut m = Vec::new();
        match &self.source {
            Source::File { path, .. } => m.push(("input", path.display().to_string())),
            Source::Synthetic(name) => m.push(("synthetic", name.clone())),
        }
        m.push(("transform", self.transform.name().to_string()));
        m.push(("fs", x.fs().to_string()));
        m.push(("samples", x.len().to_string()));
        m.push(("start_time", x.start_time().to_string()));
        m.push(("M", self.fft_len.to_string()));
        m.push(("L", self.spread.to_string()));
        m.push(("support_radius", cfg.window.support_radius().to_string()));
        m.push(("frame_margin", cfg.layout.margin_samples(&cfg.window).to_string()));
        m.push((
            "estimator",
            match cfg.estimator.family {
                EstimatorFamily::Time => "tn",
                EstimatorFamily::Frequency => "wn",
            }
            .to_string(),
        ));
        m.push(("estimator_order", cfg.estimator.order.to_string()));
        m.push((
            "alpha_gate",
            cfg.estimator.alpha_gate_for(x.fs(), self.fft_len).to_string(),
        ));
        m.push((
            "magnitude_gate",
            match cfg.gate {
                MagnitudeGate::Relative(g) => format!("relative:{g}"),
                MagnitudeGate::Absolute(g) => format!("absolute:{g}"),
            },
        ));
        m.push(("tsst_out_of_grid", policy(cfg.tsst_out_of_grid).to_string()));
        m.push(("sst_out_of_grid", policy(cfg.sst_out_of_grid).to_string()));
        m.push(("snr_db", self.snr_db.map_or("none".to_string(), |v| v.to_string())));
        m.push(("seed", self.seed.to_string()));
        m.push((
            "band",
            self.band.map_or("none".to_string(), |(lo, hi)| format!("{lo}:{hi}")),
        ));
        m.push(("detect_band", format!("{}:{}", det.f_lo, det.f_hi)));
        m.push(("detect_factor", det.threshold_factor.to_string()));
        m.push(("detect_min_separation", det.min_separation.to_string()));
        m.push((
            "detect_mask",
            match det.extent {
                MaskExtent::Column => "column",
                MaskExtent::Band => "band",
            }
            .to_string(),
        ));
        m.push(("out_dir", self.out_dir.display().to_string()));
        Ok(m)
    }

    pub fn write_metadata(&self, path: &Path, x: &SignalRecord, extra: &[(&str, String)]) -> Result<()> {
        let mut text = String::new();
        for (k, v) in self.metadata(x)?.iter().map(|(k, v)| (*k, v)).chain(extra.iter().map(|(k, v)| (*k, v))) {
            writeln!(text, "{k}={v}").unwrap();
        }
        fs::write(path, text).map_err(|e| CliError::io(path, e))
    }
}

fn policy(p: OutOfGrid) -> &'static str {
    match p {
        OutOfGrid::Drop => "drop",
        OutOfGrid::Keep => "keep",
    }
}

/// Parses a transform name as printed by [`TfrKind::name`]; `sst` and
/// `tsst` are accepted for the first-order kinds.
pub fn parse_transform(name: &str) -> Option<TfrKind> {
    Some(match name {
        "stft" => TfrKind::Stft,
        "spectrogram" => TfrKind::Spectrogram,
        "reassigned" => TfrKind::ReassignedSpectrogram,
        "sst" | "sst1" => TfrKind::Sst,
        "sst2" => TfrKind::Sst2,
        "tsst" | "tsst1" => TfrKind::Tsst,
        "tsst2" => TfrKind::Tsst2,
        _ => return None,
    })
}

/// Parses `lo:hi`.
pub fn parse_band(s: &str) -> Option<(f64, f64)> {
    let (lo, hi) = s.split_once(':')?;
    Some((lo.trim().parse().ok()?, hi.trim().parse().ok()?))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parsers() {
        assert_eq!(parse_band("0.2:1.0"), Some((0.2, 1.0)));
        assert_eq!(parse_band("0.2"), None);
        assert_eq!(parse_band("a:1"), None);
        for k in [TfrKind::Stft, TfrKind::Sst, TfrKind::Sst2, TfrKind::Tsst, TfrKind::Tsst2, TfrKind::Spectrogram] {
            assert_eq!(parse_transform(k.name()), Some(k));
        }
        assert_eq!(parse_transform("wavelet"), None);
    }

    #[test]
    fn validation() {
        let mut m = RunManifest::new(Source::Synthetic("paper-corpus".into()), "out");
        m.validate().unwrap();
        m.fft_len = 601;
        assert!(m.validate().is_err());
        m.fft_len = 600;
        m.band = Some((0.3, 0.3));
        assert!(m.validate().unwrap_err().to_string().contains("empty band"));
        m.band = None;
        m.source = Source::Synthetic("nope".into());
        assert!(m.validate().is_err());
    }

    #[test]
    fn noise_is_seeded() {
        let mut m = RunManifest::new(Source::Synthetic("impulses-tone".into()), "out");
        m.snr_db = Some(25.0);
        let a = m.load_signal().unwrap();
        assert_eq!(a.record, m.load_signal().unwrap().record);
        assert_eq!(a.components.len(), 3);
        m.seed = 2;
        assert_ne!(a.record, m.load_signal().unwrap().record);
    }

    #[test]
    fn metadata_lists_parameters() {
        let m = RunManifest::new(Source::Synthetic("impulses".into()), "out");
        let x = m.load_signal().unwrap().record;
        let md = m.metadata(&x).unwrap();
        let get = |k: &str| md.iter().find(|(key, _)| *key == k).map(|(_, v)| v.clone());
        assert_eq!(get("M").as_deref(), Some("600"));
        assert_eq!(get("L").as_deref(), Some("8"));
        assert_eq!(get("support_radius").as_deref(), Some("40"));
        assert_eq!(get("transform").as_deref(), Some("tsst2"));
        assert_eq!(get("detect_band").as_deref(), Some("0:0.5"));
    }
}
