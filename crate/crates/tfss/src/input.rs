//! Signal files: one- or two-column text tables and raw little-endian f64.

use std::fs;
use std::io::Write;
use std::path::Path;

use tfss_core::{Complex64, SignalRecord};

use crate::error::{CliError, Result};

/// Relative tolerance on the spacing of a time column.
const SPACING_TOLERANCE: f64 = 1e-6;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum InputFormat {
    /// Comma- or whitespace-separated columns: `value` or `time,value`.
    Text,
    /// Packed little-endian f64 samples.
    RawF64,
}

impl InputFormat {
    /// `.f64`, `.raw` and `.bin` are raw; anything else is text.
    pub fn from_path(path: &Path) -> Self {
        match path.extension().and_then(|e| e.to_str()) {
            Some("f64" | "raw" | "bin") => Self::RawF64,
            _ => Self::Text,
        }
    }
}

/// Reads a real signal. `fs` overrides the rate implied by a time column
/// and is required when there is none.
pub fn read_signal(path: &Path, format: InputFormat, fs: Option<f64>) -> Result<SignalRecord> {
    let bytes = fs::read(path).map_err(|e| CliError::io(path, e))?;
    match format {
        InputFormat::RawF64 => {
            let fs = fs.ok_or_else(|| CliError::Usage("raw input needs --fs".into()))?;
            if bytes.len() % 8 != 0 {
                return Err(CliError::format(path, "length is not a multiple of 8 bytes"));
            }
            let v: Vec<f64> = bytes
                .chunks_exact(8)
                .map(|c| f64::from_le_bytes(c.try_into().unwrap()))
                .collect();
            Ok(SignalRecord::from_real(&v, fs)?)
        }
        InputFormat::Text => {
            let text = String::from_utf8(bytes).map_err(|_| CliError::format(path, "not UTF-8 text"))?;
            let rows = parse_table(path, &text)?;
            table_to_signal(path, &rows, fs)
        }
    }
}

fn parse_table(path: &Path, text: &str) -> Result<Vec<Vec<f64>>> {
    let comma = text.contains(',');
    let mut rows = Vec::new();
    if comma {
        let mut reader = csv::ReaderBuilder::new()
            .has_headers(false)
            .flexible(true)
            .trim(csv::Trim::All)
            .comment(Some(b'#'))
            .from_reader(text.as_bytes());
        for (i, rec) in reader.records().enumerate() {
            let rec = rec.map_err(|e| CliError::format(path, e.to_string()))?;
            if let Some(row) = parse_row(path, i, rec.iter().filter(|f| !f.is_empty()))? {
                rows.push(row);
            }
        }
    } else {
        for (i, line) in text.lines().enumerate() {
            let line = line.split('#').next().unwrap_or("");
            if let Some(row) = parse_row(path, i, line.split_whitespace())? {
                rows.push(row);
            }
        }
    }
    Ok(rows)
}

// A first line that does not parse is taken as a header.
fn parse_row<'a>(path: &Path, line: usize, fields: impl Iterator<Item = &'a str>) -> Result<Option<Vec<f64>>> {
    let fields: Vec<&str> = fields.collect();
    if fields.is_empty() {
        return Ok(None);
    }
    match fields.iter().map(|f| f.parse::<f64>()).collect::<std::result::Result<Vec<_>, _>>() {
        Ok(v) => Ok(Some(v)),
        Err(_) if line == 0 => Ok(None),
        Err(_) => Err(CliError::format(path, format!("line {}: not a number", line + 1))),
    }
}

fn table_to_signal(path: &Path, rows: &[Vec<f64>], fs: Option<f64>) -> Result<SignalRecord> {
    let width = rows.first().map_or(0, Vec::len);
    if rows.is_empty() {
        return Err(CliError::format(path, "no samples"));
    }
    if rows.iter().any(|r| r.len() != width) || !(1..=2).contains(&width) {
        return Err(CliError::format(path, "expected one column (value) or two (time, value)"));
    }
    if width == 1 {
        let fs = fs.ok_or_else(|| CliError::Usage(format!("{}: no time column, pass --fs", path.display())))?;
        let v: Vec<f64> = rows.iter().map(|r| r[0]).collect();
        return Ok(SignalRecord::from_real(&v, fs)?);
    }
    let times: Vec<f64> = rows.iter().map(|r| r[0]).collect();
    let v: Vec<f64> = rows.iter().map(|r| r[1]).collect();
    let fs = match fs {
        Some(fs) => fs,
        None => rate_from_times(path, &times)?,
    };
    Ok(SignalRecord::from_real(&v, fs)?.with_start_time(times[0]))
}

fn rate_from_times(path: &Path, times: &[f64]) -> Result<f64> {
    if times.len() < 2 {
        return Err(CliError::Usage(format!("{}: one sample, pass --fs", path.display())));
    }
    let step = (times[times.len() - 1] - times[0]) / (times.len() - 1) as f64;
    let uniform = step > 0.0
        && times
            .windows(2)
            .all(|w| ((w[1] - w[0]) - step).abs() <= SPACING_TOLERANCE * step);
    if !uniform {
        return Err(CliError::format(path, "time column is not uniformly increasing"));
    }
    Ok(1.0 / step)
}

/// Writes `time_s,value` rows, with an `imag` column for complex records.
pub fn write_signal_csv(path: &Path, x: &SignalRecord) -> Result<()> {
    let mut w = csv::Writer::from_path(path).map_err(|e| csv_error(path, e))?;
    let header: &[&str] = if x.is_real() {
        &["time_s", "value"]
    } else {
        &["time_s", "real", "imag"]
    };
    w.write_record(header).map_err(|e| csv_error(path, e))?;
    for (n, v) in x.samples().iter().enumerate() {
        let t = x.time_of(n).to_string();
        let rec = if x.is_real() {
            vec![t, v.re.to_string()]
        } else {
            vec![t, v.re.to_string(), v.im.to_string()]
        };
        w.write_record(&rec).map_err(|e| csv_error(path, e))?;
    }
    w.flush().map_err(|e| CliError::io(path, e))
}

/// Writes `(time, value)` pairs under the given header.
pub fn write_series_csv(path: &Path, header: [&str; 2], rows: impl IntoIterator<Item = (f64, f64)>) -> Result<()> {
    let mut w = csv::Writer::from_path(path).map_err(|e| csv_error(path, e))?;
    w.write_record(header).map_err(|e| csv_error(path, e))?;
    for (a, b) in rows {
        w.write_record([a.to_string(), b.to_string()]).map_err(|e| csv_error(path, e))?;
    }
    w.flush().map_err(|e| CliError::io(path, e))
}

pub(crate) fn csv_error(path: &Path, e: csv::Error) -> CliError {
    match e.into_kind() {
        csv::ErrorKind::Io(io) => CliError::io(path, io),
        other => CliError::format(path, format!("{other:?}")),
    }
}

/// Writes raw little-endian f64 samples (real parts).
pub fn write_raw_f64(path: &Path, samples: &[Complex64]) -> Result<()> {
    let mut f = fs::File::create(path).map_err(|e| CliError::io(path, e))?;
    let bytes: Vec<u8> = samples.iter().flat_map(|v| v.re.to_le_bytes()).collect();
    f.write_all(&bytes).map_err(|e| CliError::io(path, e))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn read_text(text: &str, fs: Option<f64>) -> Result<SignalRecord> {
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("x.csv");
        fs::write(&p, text).unwrap();
        read_signal(&p, InputFormat::Text, fs)
    }

    #[test]
    fn single_column_needs_rate() {
        assert!(matches!(read_text("1\n2\n3\n", None), Err(CliError::Usage(_))));
        let x = read_text("value\n1\n2\n3\n", Some(2.0)).unwrap();
        assert_eq!(x.real_parts(), vec![1.0, 2.0, 3.0]);
        assert_eq!(x.fs(), 2.0);
    }

    #[test]
    fn time_column_gives_rate_and_start() {
        let x = read_text("t,v\n10.0,1\n10.5,2\n11.0,3\n", None).unwrap();
        assert!((x.fs() - 2.0).abs() < 1e-12);
        assert_eq!(x.start_time(), 10.0);
        let y = read_text("0 1\n0.5 2\n1.0 3\n", None).unwrap();
        assert_eq!(y.real_parts(), vec![1.0, 2.0, 3.0]);
        assert!(read_text("0,1\n0.5,2\n2.0,3\n", None).is_err());
    }

    #[test]
    fn bad_rows_are_reported() {
        let e = read_text("1\n2\nx\n", Some(1.0)).unwrap_err();
        assert!(e.to_string().contains("line 3"), "{e}");
        assert!(read_text("1,2,3\n", None).is_err());
    }

    #[test]
    fn raw_round_trip() {
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("x.f64");
        let v = [1.5, -2.0, 1e-300];
        let x = SignalRecord::from_real(&v, 3.0).unwrap();
        write_raw_f64(&p, x.samples()).unwrap();
        assert_eq!(InputFormat::from_path(&p), InputFormat::RawF64);
        assert_eq!(read_signal(&p, InputFormat::RawF64, Some(3.0)).unwrap(), x);
    }

    #[test]
    fn signal_csv_reads_back() {
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("x.csv");
        let x = SignalRecord::from_real(&[0.25, -1.0, 3.0], 4.0).unwrap();
        write_signal_csv(&p, &x).unwrap();
        assert_eq!(read_signal(&p, InputFormat::Text, None).unwrap(), x);
    }
}
