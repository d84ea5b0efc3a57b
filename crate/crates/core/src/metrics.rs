//! Scalar figures of merit on signals and grids.

use num_complex::Complex64;
#[cfg(not(feature = "std"))]
use num_traits::Float;

use crate::error::{Error, Result};
use crate::grid::TfrGrid;

/// `|<a, b>| / (|a| |b|)`. Zero when either input has no energy.
pub fn normalized_correlation(a: &[Complex64], b: &[Complex64]) -> Result<f64> {
    if a.len() != b.len() {
        return Err(Error::LengthMismatch(a.len(), b.len()));
    }
    let dot: Complex64 = a.iter().zip(b).map(|(x, y)| x * y.conj()).sum();
    let ea: f64 = a.iter().map(|v| v.norm_sqr()).sum();
    let eb: f64 = b.iter().map(|v| v.norm_sqr()).sum();
    if ea == 0.0 || eb == 0.0 {
        return Ok(0.0);
    }
    Ok(dot.norm() / (ea * eb).sqrt())
}

/// Energy-weighted time variance of `grid`, in samples squared: for each
/// row in `rows` the variance of the column index under the weights
/// `|S|^2`, averaged over those rows with the row energies as weights.
///
/// Energy grids (spectrogram kinds) hold energies in the real part and are
/// used as is.
pub fn time_variance(grid: &TfrGrid, rows: impl IntoIterator<Item = usize>) -> f64 {
    let energy_kind = matches!(
        grid.kind(),
        crate::TfrKind::Spectrogram | crate::TfrKind::ReassignedSpectrogram
    );
    let (mut total, mut acc) = (0.0, 0.0);
    for r in rows {
        let (mut e, mut m1, mut m2) = (0.0, 0.0, 0.0);
        for (c, &v) in grid.row(r).iter().enumerate() {
            let w = if energy_kind { v.re.max(0.0) } else { v.norm_sqr() };
            let c = c as f64;
            e += w;
            m1 += w * c;
            m2 += w * c * c;
        }
        if e > 0.0 {
            let mean = m1 / e;
            acc += e * (m2 / e - mean * mean).max(0.0);
            total += e;
        }
    }
    if total > 0.0 {
        acc / total
    } else {
        0.0
    }
}

/// [`time_variance`] over the rows whose frequency lies in `[f_lo, f_hi]` Hz.
pub fn band_time_variance(grid: &TfrGrid, f_lo: f64, f_hi: f64) -> f64 {
    time_variance(
        grid,
        (0..grid.rows()).filter(|&r| (f_lo..=f_hi).contains(&grid.frequency_hz(r))),
    )
}

/// Fraction of the grid energy held by its most energetic column.
pub fn peak_column_fraction(grid: &TfrGrid) -> (usize, f64) {
    let mut col_energy = alloc::vec![0.0; grid.cols()];
    for r in 0..grid.rows() {
        for (c, v) in grid.row(r).iter().enumerate() {
            col_energy[c] += v.norm_sqr();
        }
    }
    let total: f64 = col_energy.iter().sum();
    let (best, e) = col_energy
        .iter()
        .enumerate()
        .fold((0, f64::NEG_INFINITY), |acc, (c, &e)| if e > acc.1 { (c, e) } else { acc });
    (best, if total > 0.0 { e / total } else { 0.0 })
}
