use serde::{Deserialize, Serialize};

use super::{AnalysisError, Pdp};
use crate::units::median;

/// Weights used for the delay moments.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DsMode {
    /// `g_i` is the linear amplitude of each sample.
    #[default]
    Amplitude,
    /// `g_i` is the linear power of each sample.
    Power,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RmsDsResult {
    /// RMS delay spread (s).
    pub rms_ds: f64,
    /// Weighted mean delay τ̄ (s).
    pub mean_delay: f64,
    /// Inclusive delay window `(t0, t1)` the moments were taken over (s).
    pub window: (f64, f64),
}

/// Weighted delay moments of the PDP samples inside `window`:
///
/// ```text
/// τ̄ = Σ gᵢ τᵢ / Σ gᵢ,    σ = sqrt( Σ gᵢ (τᵢ − τ̄)² / Σ gᵢ )
/// ```
pub fn rms_delay_spread(pdp: &Pdp, window: (f64, f64), mode: DsMode) -> Result<RmsDsResult, AnalysisError> {
    let (t0, t1) = window;
    let (mut delays, mut weights) = (Vec::new(), Vec::new());
    for (&t, &p) in pdp.delays.iter().zip(&pdp.power_db) {
        if t >= t0 && t <= t1 {
            delays.push(t);
            weights.push(match mode {
                DsMode::Amplitude => 10f64.powf(p / 20.0),
                DsMode::Power => 10f64.powf(p / 10.0),
            });
        }
    }
    let (mean_delay, rms_ds) = delay_moments(&delays, &weights).ok_or(AnalysisError::EmptyWindow { t0, t1 })?;
    Ok(RmsDsResult {
        rms_ds,
        mean_delay,
        window,
    })
}

/// `(τ̄, σ)` of a weighted delay set; `None` when the total weight is not positive.
///
/// Moments are taken about the first delay to limit cancellation.
pub fn delay_moments(delays: &[f64], weights: &[f64]) -> Option<(f64, f64)> {
    let total: f64 = weights.iter().sum();
    if delays.is_empty() || !(total > 0.0) {
        return None;
    }
    let origin = delays[0];
    let mean_rel = delays.iter().zip(weights).map(|(t, g)| g * (t - origin)).sum::<f64>() / total;
    let var = delays
        .iter()
        .zip(weights)
        .map(|(t, g)| g * (t - origin - mean_rel).powi(2))
        .sum::<f64>()
        / total;
    Some((origin + mean_rel, var.max(0.0).sqrt()))
}

/// Window from the first to the last sample lying more than `margin_db` above
/// the PDP noise floor (its median sample).
pub fn default_ds_window(pdp: &Pdp, margin_db: f64) -> Result<(f64, f64), AnalysisError> {
    let floor = median(&pdp.power_db);
    let above: Vec<f64> = pdp
        .delays
        .iter()
        .zip(&pdp.power_db)
        .filter(|(_, &p)| p > floor + margin_db)
        .map(|(&t, _)| t)
        .collect();
    match (above.first(), above.last()) {
        (Some(&a), Some(&b)) => Ok((a, b)),
        _ => Err(AnalysisError::EmptyWindow {
            t0: f64::NAN,
            t1: f64::NAN,
        }),
    }
}
