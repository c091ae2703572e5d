use num_complex::{Complex32, Complex64};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};
use std::f64::consts::PI;

use super::config::NOISE_STREAM;
use super::{FrameCube, FrameHeader, InterferenceConfig, RadarConfig, StaticTap, SynthError};
use crate::scene_rt::GroundTruthChannel;
use crate::units::db_to_power;

/// One dechirped tone: complex amplitude at the window centre plus its beat
/// frequency and linear frequency drift.
struct Tone {
    amp: Complex64,
    freq: f64,
    drift: f64,
}

/// Synthesises a raw victim frame.
///
/// Every interfered chirp carries one beat tone per channel path at
/// `k_victim·τ + k_victim·chirp_start_offset`, drifting at `slope_delta` Hz/s
/// around the centre of the ADC window, with the path's steering phase across
/// the array and the chirp's own reference phase. Static clutter is the same
/// in every chirp. Tones outside `(−fs/2, fs/2)` are removed by the brick-wall
/// anti-alias filter. Samples are in sqrt(mW).
pub fn synth_frame(
    channel: &GroundTruthChannel,
    victim: &RadarConfig,
    interf: &InterferenceConfig,
    static_clutter: &[StaticTap],
    seed: u64,
    noise: bool,
) -> Result<FrameCube, SynthError> {
    victim.validate()?;
    interf.validate(victim)?;
    for (i, t) in static_clutter.iter().enumerate() {
        if !(t.delay.is_finite() && t.delay >= 0.0 && t.gain_db.is_finite()) {
            return Err(SynthError::invalid(
                format!("static_clutter[{i}]"),
                "delay must be finite and >= 0, gain finite",
            ));
        }
    }

    let header = FrameHeader::from_radar(victim);
    let mut cube = FrameCube::zeros(header);
    let n = header.n_samples;
    let fs = victim.fs_adc;
    let half_band = 0.5 * fs;
    let t_mid = 0.5 * victim.sampling_window();
    let in_band = |f: f64| f.abs() < half_band;

    let clutter: Vec<Tone> = static_clutter
        .iter()
        .map(|t| Tone {
            amp: Complex64::from_polar(
                db_to_power(victim.tx_power_dbm + t.gain_db).sqrt(),
                -2.0 * PI * victim.f_start * t.delay,
            ),
            freq: victim.beat_frequency(t.delay),
            drift: 0.0,
        })
        .filter(|t| in_band(t.freq))
        .collect();

    let f_offset = victim.chirp_slope * interf.chirp_start_offset;
    let ghost_tones = |rx: usize| -> Vec<Tone> {
        channel
            .paths
            .iter()
            .map(|p| {
                let steer = 2.0 * PI * rx as f64 * victim.rx_spacing_wavelengths * p.aoa_elevation_deg.to_radians().sin();
                Tone {
                    amp: Complex64::from_polar(
                        db_to_power(interf.aggressor.tx_power_dbm + p.gain_db).sqrt(),
                        steer - 2.0 * PI * victim.f_start * p.delay,
                    ),
                    freq: victim.beat_frequency(p.delay) + f_offset,
                    drift: interf.slope_delta,
                }
            })
            .filter(|t| in_band(t.freq))
            .collect()
    };

    let phases = interf.chirp_phases(seed);
    let static_part = render(&clutter, n, fs, t_mid);
    for rx in 0..header.n_rx {
        for c in 0..header.n_chirps {
            let out = cube.chirp_mut(rx, c);
            for (o, s) in out.iter_mut().zip(&static_part) {
                *o = to_c32(*s);
            }
        }
        let ghost = render(&ghost_tones(rx), n, fs, t_mid);
        for (&c, &psi) in interf.interfered_chirp_indices.iter().zip(&phases) {
            let rot = Complex64::from_polar(1.0, psi);
            let out = cube.chirp_mut(rx, c);
            for ((o, g), s) in out.iter_mut().zip(&ghost).zip(&static_part) {
                *o = to_c32(s + g * rot);
            }
        }
    }

    if noise {
        add_noise(&mut cube, victim, seed);
    }
    cube.truth = Some(channel.clone());
    Ok(cube)
}

fn render(tones: &[Tone], n: usize, fs: f64, t_mid: f64) -> Vec<Complex64> {
    (0..n)
        .map(|i| {
            let t = i as f64 / fs;
            let tc = t - t_mid;
            tones
                .iter()
                .map(|tone| tone.amp * Complex64::from_polar(1.0, 2.0 * PI * tone.freq * tc + PI * tone.drift * tc * tc))
                .sum()
        })
        .collect()
}

fn to_c32(z: Complex64) -> Complex32 {
    Complex32::new(z.re as f32, z.im as f32)
}

fn add_noise(cube: &mut FrameCube, victim: &RadarConfig, seed: u64) {
    let sigma = (0.5 * db_to_power(victim.noise_power_dbm())).sqrt();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(NOISE_STREAM);
    let normal = Normal::new(0.0, sigma).expect("finite noise sigma");
    for x in cube.data.iter_mut() {
        let re = normal.sample(&mut rng);
        let im = normal.sample(&mut rng);
        *x += Complex32::new(re as f32, im as f32);
    }
}

/// Per-sample SNR (dB) of the strongest channel path as seen by the victim.
pub fn peak_snr_db(channel: &GroundTruthChannel, victim: &RadarConfig, interf: &InterferenceConfig) -> Option<f64> {
    channel
        .strongest()
        .map(|p| interf.aggressor.tx_power_dbm + p.gain_db - victim.noise_power_dbm())
}
