use serde::{Deserialize, Serialize};

use super::{AnalysisError, Tap};
use crate::scene_rt::{GroundTruthChannel, RayPath};

/// Which ray-traced paths are expected to be visible in the measurement.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TruthSelection {
    /// Paths within `k` RMS delay spreads of the measured mean delay.
    DsWindow { k: f64, mean_delay: f64, rms_ds: f64 },
    /// Paths no more than `margin_db` below the strongest path.
    GainMargin { margin_db: f64 },
}

impl Default for TruthSelection {
    fn default() -> Self {
        TruthSelection::GainMargin { margin_db: 30.0 }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct CompareParams {
    /// Largest delay difference accepted as a match (s).
    pub gate: f64,
    /// Aggressor transmit power (dBm), removed from measured tap levels.
    pub tx_power_dbm: f64,
    /// Known delay bias of the measurement (s), removed from tap delays.
    pub delay_offset: f64,
    pub selection: TruthSelection,
}

impl Default for CompareParams {
    fn default() -> Self {
        CompareParams {
            gate: 0.25e-9,
            tx_power_dbm: 12.0,
            delay_offset: 0.0,
            selection: TruthSelection::default(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MatchedPair {
    pub truth_delay: f64,
    pub measured_delay: f64,
    /// Measured minus ray-traced delay (s).
    pub delay_error: f64,
    pub truth_gain_db: f64,
    pub measured_gain_db: f64,
    /// Measured minus ray-traced gain (dB).
    pub gain_error_db: f64,
    pub bounce_ids: Vec<String>,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct MatchReport {
    pub pairs: Vec<MatchedPair>,
    /// Selected ray-traced paths with no tap inside the gate.
    pub unmatched_truth: Vec<RayPath>,
    /// Taps with no selected path inside the gate (compensated delay, gain).
    pub unmatched_taps: Vec<(f64, f64)>,
}

/// Pairs detected taps with ray-traced paths.
///
/// All candidate pairs inside the gate are ranked by delay difference and
/// taken greedily, each path and tap at most once.
pub fn compare_to_rt(taps: &[Tap], truth: &GroundTruthChannel, params: &CompareParams) -> Result<MatchReport, AnalysisError> {
    if !(params.gate > 0.0) {
        return Err(AnalysisError::invalid("gate", "must be positive"));
    }
    let selected = select_truth(truth, params.selection)?;
    let measured: Vec<(f64, f64)> = taps
        .iter()
        .map(|t| (t.delay - params.delay_offset, t.power_db - params.tx_power_dbm))
        .collect();

    let mut candidates = Vec::new();
    for (i, p) in selected.iter().enumerate() {
        for (j, m) in measured.iter().enumerate() {
            let d = (m.0 - p.delay).abs();
            if d <= params.gate {
                candidates.push((d, i, j));
            }
        }
    }
    candidates.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1)).then(a.2.cmp(&b.2)));
    let mut used_truth = vec![false; selected.len()];
    let mut used_tap = vec![false; measured.len()];
    let mut pairs = Vec::new();
    for (_, i, j) in candidates {
        if used_truth[i] || used_tap[j] {
            continue;
        }
        used_truth[i] = true;
        used_tap[j] = true;
        let (p, m) = (selected[i], measured[j]);
        pairs.push(MatchedPair {
            truth_delay: p.delay,
            measured_delay: m.0,
            delay_error: m.0 - p.delay,
            truth_gain_db: p.gain_db,
            measured_gain_db: m.1,
            gain_error_db: m.1 - p.gain_db,
            bounce_ids: p.bounce_ids.clone(),
        });
    }
    pairs.sort_by(|a, b| a.truth_delay.total_cmp(&b.truth_delay));
    Ok(MatchReport {
        pairs,
        unmatched_truth: selected
            .iter()
            .zip(&used_truth)
            .filter(|(_, u)| !**u)
            .map(|(p, _)| (*p).clone())
            .collect(),
        unmatched_taps: measured.iter().zip(&used_tap).filter(|(_, u)| !**u).map(|(m, _)| *m).collect(),
    })
}

fn select_truth(truth: &GroundTruthChannel, sel: TruthSelection) -> Result<Vec<&RayPath>, AnalysisError> {
    match sel {
        TruthSelection::DsWindow { k, mean_delay, rms_ds } => {
            if !(k >= 0.0) || !(rms_ds >= 0.0) {
                return Err(AnalysisError::invalid("ds_window", "k and rms_ds must be non-negative"));
            }
            let (t0, t1) = (mean_delay - k * rms_ds, mean_delay + k * rms_ds);
            Ok(truth.paths.iter().filter(|p| p.delay >= t0 && p.delay <= t1).collect())
        }
        TruthSelection::GainMargin { margin_db } => {
            if !(margin_db >= 0.0) {
                return Err(AnalysisError::invalid("margin_db", "must be non-negative"));
            }
            let top = truth.paths.iter().map(|p| p.gain_db).fold(f64::NEG_INFINITY, f64::max);
            Ok(truth.paths.iter().filter(|p| p.gain_db >= top - margin_db).collect())
        }
    }
}
