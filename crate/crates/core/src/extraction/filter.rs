use num_complex::Complex64;

use super::ExtractionError;
use crate::frame_synth::FrameCube;
use crate::units::median;

/// Chirps whose residual power exceeds this multiple of the median residual
/// are left out of the second-pass static estimate.
const OUTLIER_FACTOR: f64 = 2.0;

/// Removes components that are identical in every chirp.
///
/// Per (rx, sample) the slow-time mean is subtracted. The mean is estimated in
/// two passes: the first over all chirps, the second only over chirps whose
/// first-pass residual is not an outlier, so a minority of interfered chirps
/// does not leak into the static estimate of the others.
pub fn static_filter(cube: &FrameCube) -> Result<FrameCube, ExtractionError> {
    let h = cube.header;
    if h.n_chirps < 2 {
        return Err(ExtractionError::TooFewChirps(h.n_chirps));
    }
    let mut out = cube.clone();
    for rx in 0..h.n_rx {
        let all: Vec<usize> = (0..h.n_chirps).collect();
        let first = slow_time_mean(cube, rx, &all);
        let residual: Vec<f64> = all
            .iter()
            .map(|&c| {
                cube.chirp(rx, c)
                    .iter()
                    .zip(&first)
                    .map(|(x, m)| (Complex64::new(x.re as f64, x.im as f64) - m).norm_sqr())
                    .sum()
            })
            .collect();
        let med = median(&residual);
        let keep: Vec<usize> = all
            .iter()
            .copied()
            .filter(|&c| residual[c] <= OUTLIER_FACTOR * med)
            .collect();
        let mean = if keep.is_empty() || keep.len() == all.len() {
            first
        } else {
            slow_time_mean(cube, rx, &keep)
        };
        for c in 0..h.n_chirps {
            for (x, m) in out.chirp_mut(rx, c).iter_mut().zip(&mean) {
                let v = Complex64::new(x.re as f64, x.im as f64) - m;
                x.re = v.re as f32;
                x.im = v.im as f32;
            }
        }
    }
    Ok(out)
}

fn slow_time_mean(cube: &FrameCube, rx: usize, chirps: &[usize]) -> Vec<Complex64> {
    let mut acc = vec![Complex64::new(0.0, 0.0); cube.header.n_samples];
    for &c in chirps {
        for (a, x) in acc.iter_mut().zip(cube.chirp(rx, c)) {
            *a += Complex64::new(x.re as f64, x.im as f64);
        }
    }
    let inv = 1.0 / chirps.len() as f64;
    acc.iter_mut().for_each(|a| *a *= inv);
    acc
}
