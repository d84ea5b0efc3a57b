//! The three subcommands, as library functions writing into the manifest's
//! output directory.

use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use tfss_core::detect::{detect_impulses, Detection};
use tfss_core::fft::RustFft;
use tfss_core::pipeline::{analyze as run_analysis, Analysis};
use tfss_core::reconstruct::invert;
use tfss_core::signals::rqf;
use tfss_core::synchro::Squeezed;
use tfss_core::{SignalRecord, TfrGrid, TfrKind};

use crate::error::{CliError, Result};
use crate::gridfile::write_grid;
use crate::image::{display_rows, write_pgm};
use crate::input::{csv_error, write_series_csv, write_signal_csv};
use crate::manifest::RunManifest;

/// Transforms of the reconstruction table, in table order.
pub const ROUNDTRIP_KINDS: [TfrKind; 5] = [TfrKind::Stft, TfrKind::Sst, TfrKind::Sst2, TfrKind::Tsst, TfrKind::Tsst2];

/// A transform with its squeezing bookkeeping (zero for unsqueezed kinds).
pub struct Computed {
    pub grid: TfrGrid,
    pub out_of_grid_cells: usize,
    pub dropped_cells: usize,
}

pub fn compute(a: &Analysis, kind: TfrKind) -> Result<Computed> {
    let squeezed: Option<Squeezed> = match kind {
        TfrKind::Sst => Some(a.sst1()?),
        TfrKind::Sst2 => Some(a.sst2()?),
        TfrKind::Tsst => Some(a.tsst1()?),
        TfrKind::Tsst2 => Some(a.tsst2()?),
        _ => None,
    };
    Ok(match squeezed {
        Some(s) => Computed {
            out_of_grid_cells: s.out_of_grid_cells,
            dropped_cells: s.dropped_cells(),
            grid: s.grid,
        },
        None => Computed {
            grid: a.transform(kind)?,
            out_of_grid_cells: 0,
            dropped_cells: 0,
        },
    })
}

fn prepare(m: &RunManifest) -> Result<(SignalRecord, Analysis)> {
    m.validate()?;
    let x = m.load_signal()?.record;
    let cfg = m.analysis_config(x.fs())?;
    fs::create_dir_all(&m.out_dir).map_err(|e| CliError::io(&m.out_dir, e))?;
    let a = run_analysis(&RustFft::new(), &x, &cfg)?;
    Ok((x, a))
}

fn out(m: &RunManifest, name: &str) -> PathBuf {
    m.out_dir.join(name)
}

#[derive(Debug, Clone, PartialEq)]
pub struct AnalyzeOutputs {
    pub grid: PathBuf,
    pub image: PathBuf,
    pub metadata: PathBuf,
    pub magnitude_csv: Option<PathBuf>,
}

/// Writes `<kind>.tfss`, `<kind>.pgm` and `<kind>.meta`, and with
/// `magnitude_csv` a `<kind>_magnitude.csv` of the displayed cells.
pub fn analyze(m: &RunManifest, magnitude_csv: bool) -> Result<AnalyzeOutputs> {
    let (x, a) = prepare(m)?;
    let c = compute(&a, m.transform)?;
    let name = m.transform.name();
    let outputs = AnalyzeOutputs {
        grid: out(m, &format!("{name}.tfss")),
        image: out(m, &format!("{name}.pgm")),
        metadata: out(m, &format!("{name}.meta")),
        magnitude_csv: magnitude_csv.then(|| out(m, &format!("{name}_magnitude.csv"))),
    };
    write_grid(&outputs.grid, &c.grid)?;
    let rows = display_rows(&c.grid, m.band);
    write_pgm(&outputs.image, &c.grid, &rows)?;
    if let Some(p) = &outputs.magnitude_csv {
        write_magnitude_csv(p, &c.grid, &rows)?;
    }
    let extra = [
        ("cols", c.grid.cols().to_string()),
        ("first_frame", c.grid.first_frame().to_string()),
        ("out_of_grid_cells", c.out_of_grid_cells.to_string()),
        ("dropped_cells", c.dropped_cells.to_string()),
        ("image_rows", rows.len().to_string()),
    ];
    m.write_metadata(&outputs.metadata, &x, &extra)?;
    Ok(outputs)
}

fn write_magnitude_csv(path: &Path, grid: &TfrGrid, rows: &[usize]) -> Result<()> {
    let mut w = csv::Writer::from_path(path).map_err(|e| csv_error(path, e))?;
    w.write_record(["time_s", "freq_hz", "magnitude"]).map_err(|e| csv_error(path, e))?;
    for &r in rows {
        let f = grid.frequency_hz(r).to_string();
        for (c, v) in grid.row(r).iter().enumerate() {
            w.write_record([grid.time(c).to_string(), f.clone(), v.norm().to_string()])
                .map_err(|e| csv_error(path, e))?;
        }
    }
    w.flush().map_err(|e| CliError::io(path, e))
}

#[derive(Debug, Clone, PartialEq)]
pub struct RoundtripRow {
    pub kind: TfrKind,
    pub rqf_db: f64,
    pub out_of_grid_cells: usize,
    pub dropped_cells: usize,
}

/// Forward and inverse transform of the manifest signal for each of
/// [`ROUNDTRIP_KINDS`]. Writes `roundtrip.csv` and `roundtrip.txt`.
pub fn roundtrip(m: &RunManifest) -> Result<Vec<RoundtripRow>> {
    let (x, a) = prepare(m)?;
    let fft = RustFft::new();
    let mut rows = Vec::new();
    for kind in ROUNDTRIP_KINDS {
        let c = compute(&a, kind)?;
        let xhat = invert(&fft, &c.grid, &a.config.window)?;
        rows.push(RoundtripRow {
            kind,
            rqf_db: rqf(&x, &xhat)?,
            out_of_grid_cells: c.out_of_grid_cells,
            dropped_cells: c.dropped_cells,
        });
    }
    let csv_path = out(m, "roundtrip.csv");
    let mut w = csv::Writer::from_path(&csv_path).map_err(|e| csv_error(&csv_path, e))?;
    w.write_record(["transform", "rqf_db", "out_of_grid_cells", "dropped_cells"])
        .map_err(|e| csv_error(&csv_path, e))?;
    for r in &rows {
        w.write_record([
            r.kind.name().to_string(),
            r.rqf_db.to_string(),
            r.out_of_grid_cells.to_string(),
            r.dropped_cells.to_string(),
        ])
        .map_err(|e| csv_error(&csv_path, e))?;
    }
    w.flush().map_err(|e| CliError::io(&csv_path, e))?;
    let txt = out(m, "roundtrip.txt");
    fs::write(&txt, roundtrip_table(&rows)).map_err(|e| CliError::io(&txt, e))?;
    Ok(rows)
}

/// Aligned text version of the reconstruction table.
pub fn roundtrip_table(rows: &[RoundtripRow]) -> String {
    let mut s = format!("{:<10} {:>10} {:>12} {:>8}\n", "transform", "RQF (dB)", "out of grid", "dropped");
    for r in rows {
        writeln!(
            s,
            "{:<10} {:>10.2} {:>12} {:>8}",
            r.kind.name(),
            r.rqf_db,
            r.out_of_grid_cells,
            r.dropped_cells
        )
        .unwrap();
    }
    s
}

/// Impulse detection on the second-order horizontal transform. Writes
/// `events.csv` (`time_s,saliency`), `saliency.csv` and one
/// `event_NN.csv` waveform per event. Times are seconds from the first
/// sample.
pub fn detect(m: &RunManifest) -> Result<Detection> {
    let (x, a) = prepare(m)?;
    let grid = a.tsst2()?.grid;
    let det = detect_impulses(&RustFft::new(), &grid, &a.config.window, &m.detection_config(x.fs()))?;
    write_series_csv(
        &out(m, "events.csv"),
        ["time_s", "saliency"],
        det.events.iter().map(|e| (e.time, e.saliency)),
    )?;
    write_series_csv(
        &out(m, "saliency.csv"),
        ["time_s", "saliency"],
        det.saliency.iter().enumerate().map(|(c, &g)| (grid.time(c), g)),
    )?;
    for (i, e) in det.events.iter().enumerate() {
        write_signal_csv(&out(m, &format!("event_{:02}.csv", i + 1)), &e.waveform)?;
    }
    let extra = [
        ("threshold", det.threshold.to_string()),
        ("events", det.events.len().to_string()),
    ];
    m.write_metadata(&out(m, "detect.meta"), &x, &extra)?;
    Ok(det)
}
