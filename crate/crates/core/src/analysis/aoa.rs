use num_complex::Complex64;
use rustfft::FftPlanner;
use serde::{Deserialize, Serialize};

use super::AnalysisError;
use crate::extraction::ChannelEstimate;
use crate::units::power_to_db;

/// Spatial FFT length; the few array elements are zero-padded to this.
pub const ANGLE_FFT_LEN: usize = 256;

/// Elevation/delay power map, normalised to a 0 dB peak.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AoaMap {
    pub delays: Vec<f64>,
    /// Angle grid (deg), uniform over [−90, 90].
    pub angles_deg: Vec<f64>,
    /// `power_db[delay][angle]`.
    pub power_db: Vec<Vec<f64>>,
    pub n_angle_bins: usize,
}

impl AoaMap {
    /// Angle (deg) of the strongest cell at delay index `i`.
    pub fn peak_angle_at(&self, i: usize) -> f64 {
        let row = &self.power_db[i];
        let mut best = 0;
        for (k, p) in row.iter().enumerate() {
            if *p > row[best] {
                best = k;
            }
        }
        self.angles_deg[best]
    }

    /// Step of the angle grid (deg).
    pub fn angle_step(&self) -> f64 {
        180.0 / (self.n_angle_bins - 1) as f64
    }
}

/// Angle FFT across the rx antennas at every delay of the estimate.
///
/// For an arrival at elevation θ the antennas see the progression
/// `exp(j·2π·m·d·sin θ)` (`d` in wavelengths). The zero-padded spatial
/// spectrum peaks at spatial frequency `u = d·sin θ`, so each angle bin reads
/// the FFT bin nearest `u`. Angles beyond the unambiguous range of the array
/// map onto aliased spatial frequencies, as a physical array would.
pub fn angle_fft(est: &ChannelEstimate, n_angle_bins: usize, spacing_wavelengths: f64) -> Result<AoaMap, AnalysisError> {
    if est.n_rx() < 2 {
        return Err(AnalysisError::TooFewAntennas(est.n_rx()));
    }
    if n_angle_bins < 2 || !(spacing_wavelengths > 0.0) {
        return Err(AnalysisError::invalid("n_angle_bins", "need >= 2 bins and positive spacing"));
    }
    let angles_deg: Vec<f64> = (0..n_angle_bins)
        .map(|k| -90.0 + 180.0 * k as f64 / (n_angle_bins - 1) as f64)
        .collect();
    let fft_bins: Vec<usize> = angles_deg
        .iter()
        .map(|a| {
            let u = spacing_wavelengths * a.to_radians().sin();
            ((u * ANGLE_FFT_LEN as f64).round() as i64).rem_euclid(ANGLE_FFT_LEN as i64) as usize
        })
        .collect();
    let fft = FftPlanner::new().plan_fft_forward(ANGLE_FFT_LEN);
    let mut rows = Vec::with_capacity(est.delay_grid.len());
    let mut buf = vec![Complex64::new(0.0, 0.0); ANGLE_FFT_LEN];
    let mut peak = 0.0f64;
    for i in 0..est.delay_grid.len() {
        buf.iter_mut().for_each(|z| *z = Complex64::new(0.0, 0.0));
        for (m, cir) in est.cir.iter().enumerate() {
            buf[m] = cir[i];
        }
        fft.process(&mut buf);
        let row: Vec<f64> = fft_bins.iter().map(|&b| buf[b].norm_sqr()).collect();
        peak = row.iter().cloned().fold(peak, f64::max);
        rows.push(row);
    }
    let norm = if peak > 0.0 { peak } else { 1.0 };
    let power_db = rows
        .into_iter()
        .map(|r| r.into_iter().map(|p| power_to_db(p / norm)).collect())
        .collect();
    Ok(AoaMap {
        delays: est.delay_grid.clone(),
        angles_deg,
        power_db,
        n_angle_bins,
    })
}
