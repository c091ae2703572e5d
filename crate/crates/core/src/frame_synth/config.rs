use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use std::f64::consts::PI;

use super::SynthError;
use crate::units::thermal_noise_dbm;

/// FMCW front-end parameters of one radar.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct RadarConfig {
    pub f_start: f64,
    pub bandwidth: f64,
    /// Ramp slope (Hz/s).
    pub chirp_slope: f64,
    pub chirp_duration: f64,
    pub n_chirps_per_frame: usize,
    pub fs_adc: f64,
    pub n_samples_per_chirp: usize,
    pub tx_power_dbm: f64,
    pub noise_figure_db: f64,
    pub n_rx: usize,
    pub rx_spacing_wavelengths: f64,
}

impl Default for RadarConfig {
    /// 77–81 GHz sweep sampled over its full 4 GHz: 512 samples at 10 MS/s,
    /// giving 0.25 ns coarse delay bins and a 64 ns unambiguous delay.
    fn default() -> Self {
        RadarConfig {
            f_start: 77e9,
            bandwidth: 4e9,
            chirp_slope: 4e9 / 51.2e-6,
            chirp_duration: 51.2e-6,
            n_chirps_per_frame: 128,
            fs_adc: 10e6,
            n_samples_per_chirp: 512,
            tx_power_dbm: 12.0,
            noise_figure_db: 12.0,
            n_rx: 4,
            rx_spacing_wavelengths: 0.5,
        }
    }
}

impl RadarConfig {
    pub fn center_freq(&self) -> f64 {
        self.f_start + 0.5 * self.bandwidth
    }

    /// ADC observation window of one chirp (s).
    pub fn sampling_window(&self) -> f64 {
        self.n_samples_per_chirp as f64 / self.fs_adc
    }

    /// Delay spanned by one range-FFT bin (s).
    pub fn coarse_delay_step(&self) -> f64 {
        self.fs_adc / (self.n_samples_per_chirp as f64 * self.chirp_slope)
    }

    /// Dechirped beat frequency of a delay (Hz).
    pub fn beat_frequency(&self, delay: f64) -> f64 {
        self.chirp_slope * delay
    }

    /// AWGN power per complex ADC sample over the `fs_adc / 2` band (dBm).
    pub fn noise_power_dbm(&self) -> f64 {
        thermal_noise_dbm(0.5 * self.fs_adc, self.noise_figure_db)
    }

    pub fn validate(&self) -> Result<(), SynthError> {
        let positive = [
            ("f_start", self.f_start),
            ("bandwidth", self.bandwidth),
            ("chirp_slope", self.chirp_slope),
            ("chirp_duration", self.chirp_duration),
            ("fs_adc", self.fs_adc),
            ("rx_spacing_wavelengths", self.rx_spacing_wavelengths),
        ];
        for (name, v) in positive {
            if !(v.is_finite() && v > 0.0) {
                return Err(SynthError::invalid(name, format!("must be finite and > 0 (got {v})")));
            }
        }
        for (name, v) in [("tx_power_dbm", self.tx_power_dbm), ("noise_figure_db", self.noise_figure_db)] {
            if !v.is_finite() {
                return Err(SynthError::invalid(name, "must be finite"));
            }
        }
        if self.n_chirps_per_frame == 0 || self.n_samples_per_chirp == 0 || self.n_rx == 0 {
            return Err(SynthError::invalid(
                "n_chirps_per_frame/n_samples_per_chirp/n_rx",
                "must be >= 1",
            ));
        }
        // relative slack for values such as 4e9 / 51.2e-6 * 51.2e-6
        if self.chirp_slope * self.chirp_duration > self.bandwidth * (1.0 + 1e-9) {
            return Err(SynthError::invalid(
                "chirp_slope",
                format!(
                    "slope x duration = {} Hz exceeds bandwidth {} Hz",
                    self.chirp_slope * self.chirp_duration,
                    self.bandwidth
                ),
            ));
        }
        if self.sampling_window() > self.chirp_duration * (1.0 + 1e-9) {
            return Err(SynthError::ConfigMismatch(format!(
                "{} samples at {} Hz span {} s, longer than the {} s chirp",
                self.n_samples_per_chirp,
                self.fs_adc,
                self.sampling_window(),
                self.chirp_duration
            )));
        }
        Ok(())
    }
}

/// How the per-chirp time-reference phase of interfered chirps is drawn.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PhaseMode {
    /// Independent uniform phase per chirp.
    RandomUniform,
    /// One of `k` equally spaced phases, balanced across the interfered chirps.
    Quantized(u32),
    /// Same phase for every chirp.
    Coherent,
}

impl Default for PhaseMode {
    fn default() -> Self {
        PhaseMode::Quantized(8)
    }
}

/// Aggressor radar and the way its chirps leak into the victim's frame.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct InterferenceConfig {
    pub aggressor: RadarConfig,
    /// Aggressor slope minus victim slope (Hz/s).
    pub slope_delta: f64,
    /// Start of the aggressor ramp relative to the victim ramp (s).
    pub chirp_start_offset: f64,
    /// Sorted, unique chirp indices carrying interference.
    pub interfered_chirp_indices: Vec<usize>,
    pub per_chirp_phase_mode: PhaseMode,
}

/// Default aggressor/victim slope mismatch (Hz/s). It spreads each ghost tone by
/// about 0.026 coarse bins over the sampling window.
pub const DEFAULT_SLOPE_DELTA: f64 = 1e7;

/// Default share of chirps hit by interference.
pub const DEFAULT_INTERFERED_FRACTION: f64 = 0.25;

impl InterferenceConfig {
    /// Aggressor cloned from the victim with its slope offset by `slope_delta`,
    /// interfering in an explicit set of chirps.
    pub fn new(victim: &RadarConfig, slope_delta: f64, chirps: impl IntoIterator<Item = usize>) -> Self {
        let mut aggressor = victim.clone();
        aggressor.chirp_slope = victim.chirp_slope + slope_delta;
        aggressor.bandwidth = aggressor.bandwidth.max(aggressor.chirp_slope * aggressor.chirp_duration);
        let mut idx: Vec<usize> = chirps.into_iter().collect();
        idx.sort_unstable();
        idx.dedup();
        InterferenceConfig {
            aggressor,
            slope_delta,
            chirp_start_offset: 0.0,
            interfered_chirp_indices: idx,
            per_chirp_phase_mode: PhaseMode::default(),
        }
    }

    /// Interference in a seeded pseudo-random `fraction` of the victim's chirps.
    pub fn with_fraction(victim: &RadarConfig, slope_delta: f64, fraction: f64, seed: u64) -> Self {
        let n = victim.n_chirps_per_frame;
        let count = ((n as f64) * fraction.clamp(0.0, 1.0)).round() as usize;
        Self::new(victim, slope_delta, random_chirp_subset(n, count, seed))
    }

    pub fn with_phase_mode(mut self, mode: PhaseMode) -> Self {
        self.per_chirp_phase_mode = mode;
        self
    }

    pub fn validate(&self, victim: &RadarConfig) -> Result<(), SynthError> {
        self.aggressor.validate()?;
        if !self.slope_delta.is_finite() || !self.chirp_start_offset.is_finite() {
            return Err(SynthError::invalid("slope_delta", "must be finite"));
        }
        if !self.interfered_chirp_indices.is_empty() && self.slope_delta == 0.0 {
            return Err(SynthError::invalid(
                "slope_delta",
                "must be non-zero when interference is enabled",
            ));
        }
        let expected = victim.chirp_slope + self.slope_delta;
        if (self.aggressor.chirp_slope - expected).abs() > 1e-9 * expected.abs() {
            return Err(SynthError::ConfigMismatch(format!(
                "aggressor slope {} != victim slope {} + slope_delta {}",
                self.aggressor.chirp_slope, victim.chirp_slope, self.slope_delta
            )));
        }
        if let Some(&bad) = self
            .interfered_chirp_indices
            .iter()
            .find(|&&c| c >= victim.n_chirps_per_frame)
        {
            return Err(SynthError::invalid(
                "interfered_chirp_indices",
                format!("index {bad} outside [0, {})", victim.n_chirps_per_frame),
            ));
        }
        if self.interfered_chirp_indices.windows(2).any(|w| w[0] >= w[1]) {
            return Err(SynthError::invalid(
                "interfered_chirp_indices",
                "must be sorted and unique",
            ));
        }
        if let PhaseMode::Quantized(0) = self.per_chirp_phase_mode {
            return Err(SynthError::invalid("per_chirp_phase_mode", "quantized needs k >= 1"));
        }
        Ok(())
    }

    /// Per-chirp phases (rad), one per entry of `interfered_chirp_indices`.
    pub fn chirp_phases(&self, seed: u64) -> Vec<f64> {
        let n = self.interfered_chirp_indices.len();
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        rng.set_stream(PHASE_STREAM);
        match self.per_chirp_phase_mode {
            PhaseMode::Coherent => vec![0.0; n],
            PhaseMode::RandomUniform => (0..n).map(|_| 2.0 * PI * rng.random::<f64>()).collect(),
            PhaseMode::Quantized(k) => {
                let mut levels: Vec<u32> = (0..n).map(|i| (i as u32) % k).collect();
                levels.shuffle(&mut rng);
                levels
                    .into_iter()
                    .map(|l| 2.0 * PI * l as f64 / k as f64)
                    .collect()
            }
        }
    }
}

pub(crate) const PHASE_STREAM: u64 = 1;
pub(crate) const NOISE_STREAM: u64 = 2;
const SUBSET_STREAM: u64 = 3;

fn random_chirp_subset(n: usize, count: usize, seed: u64) -> Vec<usize> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(SUBSET_STREAM);
    let mut all: Vec<usize> = (0..n).collect();
    all.shuffle(&mut rng);
    all.truncate(count);
    all.sort_unstable();
    all
}

/// A static (monostatic) clutter return, identical in every chirp.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct StaticTap {
    /// Round-trip delay (s).
    pub delay: f64,
    /// Power relative to the victim's transmit power (dB).
    pub gain_db: f64,
}
