use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use std::f64::consts::PI;

use super::fft::{fft_in_place, ifft_in_place, zoom_dft};
use super::ExtractionError;

/// Amplitude compensation for the Hamming window's coherent gain of 0.54.
pub const HAMMING_COMPENSATION_DB: f64 = 5.35;

/// Periodic Hamming window, `0.54 − 0.46·cos(2πn/N)`; its mean is exactly 0.54.
pub fn hamming(n: usize) -> Vec<f64> {
    (0..n)
        .map(|i| 0.54 - 0.46 * (2.0 * PI * i as f64 / n as f64).cos())
        .collect()
}

/// Sidelobe suppression of a range profile.
///
/// The profile is taken back to the beat-signal domain, Hamming-windowed,
/// transformed forward again and boosted by [`HAMMING_COMPENSATION_DB`].
pub fn autoclutter_hamming(profile: &[Complex64]) -> Vec<Complex64> {
    let n = profile.len();
    let mut buf = profile.to_vec();
    ifft_in_place(&mut buf);
    for (x, w) in buf.iter_mut().zip(hamming(n)) {
        *x *= w;
    }
    fft_in_place(&mut buf);
    let gain = 10f64.powf(HAMMING_COMPENSATION_DB / 20.0) / n as f64;
    buf.iter_mut().for_each(|x| *x *= gain);
    buf
}

/// A profile evaluated on a dense sub-band of range bins.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RefinedProfile {
    pub values: Vec<Complex64>,
    /// First coarse bin of the band.
    pub start_bin: usize,
    pub zoom: usize,
    /// Length of the underlying coarse profile.
    pub n_fft: usize,
}

impl RefinedProfile {
    /// Fractional coarse bin of sample `i`.
    pub fn bin_at(&self, i: usize) -> f64 {
        self.start_bin as f64 + i as f64 / self.zoom as f64
    }

    /// Sample `i` with its phase referred to the centre of the beat-signal
    /// window instead of its first sample. A tone then shows the same phase at
    /// every grid point of its main lobe.
    pub fn centred(&self, i: usize) -> Complex64 {
        let c = 0.5 * (self.n_fft as f64 - 1.0);
        self.values[i] * Complex64::from_polar(1.0, 2.0 * PI * self.bin_at(i) * c / self.n_fft as f64)
    }

    pub fn peak_index(&self) -> Option<usize> {
        let mut best: Option<(usize, f64)> = None;
        for (i, z) in self.values.iter().enumerate() {
            let m = z.norm();
            if m > 0.0 && best.is_none_or(|(_, b)| m > b) {
                best = Some((i, m));
            }
        }
        best.map(|(i, _)| i)
    }
}

/// Zoomed re-evaluation of a range profile over bins `[bin_lo, bin_hi)`.
///
/// The profile is taken back to the beat-signal domain and its z-transform is
/// evaluated on `(bin_hi − bin_lo)·zoom_factor` points spaced `1/zoom_factor`
/// coarse bins apart, starting at `bin_lo`. At integer bins the result equals
/// the input profile.
pub fn iczt_refine(
    profile: &[Complex64],
    band: (usize, usize),
    zoom_factor: usize,
) -> Result<RefinedProfile, ExtractionError> {
    let n = profile.len();
    let (lo, hi) = band;
    if lo >= hi || hi > n || zoom_factor == 0 {
        return Err(ExtractionError::BadBand {
            lo,
            hi,
            n_bins: n,
            zoom: zoom_factor,
        });
    }
    let mut x = profile.to_vec();
    ifft_in_place(&mut x);
    Ok(RefinedProfile {
        values: zoom_dft(&x, lo as f64, zoom_factor, (hi - lo) * zoom_factor),
        start_bin: lo,
        zoom: zoom_factor,
        n_fft: n,
    })
}

/// Brings every cluster into coherence with the first one.
///
/// Each later cluster is first delay-aligned on the refined grid (integer
/// grid shift within one coarse bin maximising the magnitude overlap with the
/// first cluster), then multiplied by the complex least-squares gain
/// `⟨c₀, cⱼ⟩ / ⟨cⱼ, cⱼ⟩`, which matches its taps to the first cluster's in
/// amplitude and phase.
pub fn realign_clusters(clusters: &[RefinedProfile]) -> Result<Vec<RefinedProfile>, ExtractionError> {
    let Some(reference) = clusters.first() else {
        return Err(ExtractionError::invalid("clusters", "nothing to realign"));
    };
    if reference.peak_index().is_none() {
        return Err(ExtractionError::NoDominantPeak { chirp: 0 });
    }
    let mut out = vec![reference.clone()];
    for (j, c) in clusters.iter().enumerate().skip(1) {
        if c.values.len() != reference.values.len() || c.start_bin != reference.start_bin || c.zoom != reference.zoom {
            return Err(ExtractionError::invalid("clusters", "refined grids differ"));
        }
        if c.peak_index().is_none() {
            return Err(ExtractionError::NoDominantPeak { chirp: j });
        }
        let shift = best_shift(&reference.values, &c.values, c.zoom as isize);
        let shifted = shift_zero_fill(&c.values, shift);
        let energy: f64 = shifted.iter().map(|z| z.norm_sqr()).sum();
        if energy == 0.0 {
            return Err(ExtractionError::NoDominantPeak { chirp: j });
        }
        let cross: Complex64 = reference.values.iter().zip(&shifted).map(|(a, b)| a * b.conj()).sum();
        let alpha = cross / energy;
        out.push(RefinedProfile {
            values: shifted.iter().map(|z| z * alpha).collect(),
            ..c.clone()
        });
    }
    Ok(out)
}

/// Shift `s` in `[-max, max]` maximising `Σ |a[i]|·|b[i + s]|`; smallest `|s|` on ties.
fn best_shift(a: &[Complex64], b: &[Complex64], max: isize) -> isize {
    let n = a.len() as isize;
    let mut best = (0isize, f64::NEG_INFINITY);
    for s in (-max..=max).filter(|s| s.abs() < n.max(1)) {
        let score: f64 = (0..n)
            .filter(|i| (0..n).contains(&(i + s)))
            .map(|i| a[i as usize].norm() * b[(i + s) as usize].norm())
            .sum();
        let tol = 1e-12 * best.1.abs();
        if best.1 == f64::NEG_INFINITY || score > best.1 + tol || ((score - best.1).abs() <= tol && s.abs() < best.0.abs()) {
            best = (s, score);
        }
    }
    best.0
}

/// `out[i] = v[i + s]`, zero outside.
fn shift_zero_fill(v: &[Complex64], s: isize) -> Vec<Complex64> {
    let n = v.len() as isize;
    (0..n)
        .map(|i| {
            let k = i + s;
            if (0..n).contains(&k) {
                v[k as usize]
            } else {
                Complex64::new(0.0, 0.0)
            }
        })
        .collect()
}
