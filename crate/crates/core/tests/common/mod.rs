#![allow(dead_code)]

use isac_sounder::frame_synth::{
    synth_frame, FrameCube, InterferenceConfig, PhaseMode, RadarConfig, StaticTap, DEFAULT_SLOPE_DELTA,
};
use isac_sounder::scene_rt::{GroundTruthChannel, RayPath};

pub const C: f64 = 299_792_458.0;

pub fn path(delay: f64, gain_db: f64, aoa_deg: f64) -> RayPath {
    RayPath {
        path_length: delay * C,
        delay,
        gain_db,
        ref_loss_db: 0.0,
        aoa_elevation_deg: aoa_deg,
        bounce_ids: Vec::new(),
        vertices: Vec::new(),
    }
}

pub fn channel(paths: Vec<RayPath>) -> GroundTruthChannel {
    GroundTruthChannel::from_paths(paths, 79e9)
}

/// Gain (dB) that puts a path `snr_db` above the victim's per-sample noise.
pub fn gain_for_snr(victim: &RadarConfig, snr_db: f64) -> f64 {
    victim.noise_power_dbm() + snr_db - victim.tx_power_dbm
}

/// Default radar, 25 % interfered chirps in 8 quantised phase groups.
pub fn frame(ch: &GroundTruthChannel, clutter: &[StaticTap], seed: u64, noise: bool) -> FrameCube {
    let v = RadarConfig::default();
    let itf = InterferenceConfig::with_fraction(&v, DEFAULT_SLOPE_DELTA, 0.25, seed)
        .with_phase_mode(PhaseMode::Quantized(8));
    synth_frame(ch, &v, &itf, clutter, seed, noise).unwrap()
}

/// Local maxima of `|v|` above `floor`, strongest first.
pub fn local_peaks(v: &[f64], floor: f64) -> Vec<usize> {
    let mut p: Vec<usize> = (1..v.len().saturating_sub(1))
        .filter(|&i| v[i] > floor && v[i] >= v[i - 1] && v[i] > v[i + 1])
        .collect();
    p.sort_by(|&a, &b| v[b].total_cmp(&v[a]));
    p
}
