use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use tfss::commands::{analyze, detect, roundtrip, roundtrip_table};
use tfss::input::InputFormat;
use tfss::manifest::{parse_band, parse_transform};
use tfss::{threads, CliError, RunManifest, Source};
use tfss_core::detect::MaskExtent;
use tfss_core::synchro::{EstimatorChoice, EstimatorFamily};

/// Sharpened, invertible time-frequency analysis.
#[derive(Parser)]
#[command(name = "tfss", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Compute one transform; write the grid, an image and metadata.
    Analyze {
        #[command(flatten)]
        common: Common,
        /// Also write the displayed magnitudes as CSV.
        #[arg(long)]
        magnitude_csv: bool,
    },
    /// Reconstruction quality of stft, sst1, sst2, tsst1 and tsst2.
    Roundtrip {
        #[command(flatten)]
        common: Common,
    },
    /// Impulse detection on the second-order horizontal transform.
    Detect {
        #[command(flatten)]
        common: Common,
    },
}

#[derive(Clone, Copy, ValueEnum)]
enum Format {
    Text,
    Raw,
}

#[derive(Clone, Copy, ValueEnum)]
enum Family {
    Tn,
    Wn,
}

#[derive(Clone, Copy, ValueEnum)]
enum Extent {
    Column,
    Band,
}

#[derive(Args)]
struct Common {
    /// Signal file: one column (value) or two (time,value), or raw f64.
    #[arg(long, conflicts_with = "synthetic", required_unless_present = "synthetic")]
    input: Option<PathBuf>,
    /// Built-in corpus: paper-corpus, impulses-tone or impulses.
    #[arg(long)]
    synthetic: Option<String>,
    /// Sampling rate in Hz; overrides a time column.
    #[arg(long)]
    fs: Option<f64>,
    /// Input format; by default raw for .f64/.raw/.bin, text otherwise.
    #[arg(long, value_enum)]
    format: Option<Format>,
    /// stft, spectrogram, reassigned, sst1, sst2, tsst1 or tsst2.
    #[arg(long, default_value = "tsst2")]
    transform: String,
    /// FFT length (even).
    #[arg(long = "M", default_value_t = 600)]
    fft_len: usize,
    /// Window spread in samples.
    #[arg(long = "L", default_value_t = 8.0)]
    spread: f64,
    /// Window support radius in samples (default ceil(5 L)).
    #[arg(long)]
    support: Option<usize>,
    /// Chirp-rate estimator family.
    #[arg(long, value_enum, default_value = "wn")]
    estimator: Family,
    /// Chirp-rate estimator order (2 or 3).
    #[arg(long, default_value_t = 2)]
    order: u8,
    /// Add white Gaussian noise at this SNR (dB).
    #[arg(long)]
    snr: Option<f64>,
    /// Noise seed.
    #[arg(long, default_value_t = 1)]
    seed: u64,
    /// Frequency band lo:hi in Hz, for images and detection.
    #[arg(long)]
    band: Option<String>,
    /// Detection threshold as a multiple of the mean saliency.
    #[arg(long, default_value_t = 5.0)]
    factor: f64,
    /// Minimum time between detected events, in seconds.
    #[arg(long, default_value_t = 0.0)]
    min_sep: f64,
    /// Cells kept by the detection mask.
    #[arg(long, value_enum, default_value = "column")]
    mask: Extent,
    /// Output directory.
    #[arg(long, short, default_value = ".")]
    out: PathBuf,
}

impl Common {
    fn manifest(self) -> Result<RunManifest, CliError> {
        let source = match (self.input, self.synthetic) {
            (Some(path), _) => Source::File {
                format: match self.format {
                    Some(Format::Text) => InputFormat::Text,
                    Some(Format::Raw) => InputFormat::RawF64,
                    None => InputFormat::from_path(&path),
                },
                path,
                fs: self.fs,
            },
            (None, Some(name)) => Source::Synthetic(name),
            (None, None) => return Err(CliError::Usage("one of --input or --synthetic is required".into())),
        };
        let mut m = RunManifest::new(source, self.out);
        m.transform = parse_transform(&self.transform)
            .ok_or_else(|| CliError::Usage(format!("unknown transform {:?}", self.transform)))?;
        m.fft_len = self.fft_len;
        m.spread = self.spread;
        m.support = self.support;
        let family = match self.estimator {
            Family::Tn => EstimatorFamily::Time,
            Family::Wn => EstimatorFamily::Frequency,
        };
        m.estimator = EstimatorChoice::new(family, self.order).map_err(|e| CliError::Usage(e.to_string()))?;
        m.snr_db = self.snr;
        m.seed = self.seed;
        if let Some(b) = &self.band {
            let (lo, hi) = parse_band(b).ok_or_else(|| CliError::Usage(format!("--band expects lo:hi, got {b:?}")))?;
            m.band = Some((lo, hi));
            m.detection.f_lo = lo;
            m.detection.f_hi = hi;
        }
        m.detection.threshold_factor = self.factor;
        m.detection.min_separation = self.min_sep;
        m.detection.extent = match self.mask {
            Extent::Column => MaskExtent::Column,
            Extent::Band => MaskExtent::Band,
        };
        Ok(m)
    }
}

fn run(cli: Cli) -> Result<(), CliError> {
    threads::init_from_env()?;
    match cli.command {
        Command::Analyze { common, magnitude_csv } => {
            let o = analyze(&common.manifest()?, magnitude_csv)?;
            println!("grid      {}", o.grid.display());
            println!("image     {}", o.image.display());
            println!("metadata  {}", o.metadata.display());
            if let Some(p) = o.magnitude_csv {
                println!("magnitude {}", p.display());
            }
        }
        Command::Roundtrip { common } => {
            print!("{}", roundtrip_table(&roundtrip(&common.manifest()?)?));
        }
        Command::Detect { common } => {
            let d = detect(&common.manifest()?)?;
            println!("{} event(s), threshold {:.6e}", d.events.len(), d.threshold);
            for e in &d.events {
                println!("t = {:.6} s  sample {}  saliency {:.6e}", e.time, e.sample, e.saliency);
            }
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("tfss: {e}");
            ExitCode::from(&e)
        }
    }
}
