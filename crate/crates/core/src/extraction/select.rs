use num_complex::Complex64;
use std::f64::consts::LN_2;

use super::fft::{fft_in_place, ifft_in_place, range_fft};
use super::ExtractionError;
use crate::frame_synth::FrameCube;
use crate::units::{median, power_to_db};

/// The noise floor is never placed more than this far below the strongest chirp,
/// so noise-free frames still have a usable threshold.
const MAX_DYNAMIC_RANGE_DB: f64 = 120.0;

/// Range profiles of the chirps carrying interference on one rx antenna.
#[derive(Debug, Clone, PartialEq)]
pub struct ChirpSet {
    pub rx: usize,
    /// Range-FFT of each chirp (see [`range_fft`]).
    pub chirps: Vec<Vec<Complex64>>,
    /// Chirp index in the frame of every entry of `chirps`.
    pub source_indices: Vec<usize>,
    pub reference_bin: usize,
    /// Circular shift (bins) applied to each chirp by alignment.
    pub shifts: Vec<isize>,
}

impl ChirpSet {
    pub fn len(&self) -> usize {
        self.chirps.len()
    }

    pub fn is_empty(&self) -> bool {
        self.chirps.is_empty()
    }

    pub fn n_bins(&self) -> usize {
        self.chirps.first().map_or(0, Vec::len)
    }

    /// Mean power per bin across chirps.
    pub fn mean_power(&self) -> Vec<f64> {
        mean_power(self.chirps.iter().map(|c| c.as_slice()), self.n_bins())
    }
}

/// Outcome of the chirp power threshold.
#[derive(Debug, Clone, PartialEq)]
pub struct Selection {
    /// Mean sample power of every chirp, averaged over rx (dB re 1 mW).
    pub chirp_power_db: Vec<f64>,
    pub noise_floor_db: f64,
    pub threshold_db: f64,
    pub selected: Vec<usize>,
}

/// Thresholds chirp power against the estimated noise floor.
///
/// A chirp is selected when its power, averaged over the rx antennas, exceeds
/// the floor by `threshold_db_over_noise`. The floor is the noise power per
/// chirp implied by the median range-bin power over the whole frame
/// (`N · median / ln 2` for complex Gaussian noise), which stays valid even
/// when every chirp is interfered.
pub fn select_chirps(cube: &FrameCube, threshold_db_over_noise: f64) -> Result<Selection, ExtractionError> {
    if !threshold_db_over_noise.is_finite() {
        return Err(ExtractionError::invalid("threshold_db_over_noise", "must be finite"));
    }
    let h = cube.header;
    let mut chirp_power = vec![0.0; h.n_chirps];
    let mut bin_powers = Vec::with_capacity(h.len());
    for rx in 0..h.n_rx {
        for (c, p) in chirp_power.iter_mut().enumerate() {
            let spec = range_fft(cube.chirp(rx, c));
            let mut total = 0.0;
            for z in &spec {
                let b = z.norm_sqr();
                total += b;
                bin_powers.push(b);
            }
            *p += total / h.n_rx as f64;
        }
    }
    let strongest = chirp_power.iter().cloned().fold(0.0, f64::max);
    let noise_floor = (h.n_samples as f64 * median(&bin_powers) / LN_2)
        .max(strongest * 10f64.powf(-MAX_DYNAMIC_RANGE_DB / 10.0));
    let threshold = noise_floor * 10f64.powf(threshold_db_over_noise / 10.0);
    let selected: Vec<usize> = (0..h.n_chirps).filter(|&c| chirp_power[c] > threshold).collect();
    if selected.is_empty() {
        return Err(ExtractionError::NoInterferenceFound {
            threshold_db: threshold_db_over_noise,
        });
    }
    Ok(Selection {
        chirp_power_db: chirp_power.iter().map(|&p| power_to_db(p)).collect(),
        noise_floor_db: power_to_db(noise_floor),
        threshold_db: power_to_db(threshold),
        selected,
    })
}

/// One [`ChirpSet`] per rx antenna holding the chirps that pass
/// [`select_chirps`]. The same chirps are selected on every antenna.
///
/// `reference_bin` is the bin of maximum mean power over the selected chirps,
/// summed across antennas.
pub fn select_interference_chirps(
    cube: &FrameCube,
    threshold_db_over_noise: f64,
) -> Result<Vec<ChirpSet>, ExtractionError> {
    let sel = select_chirps(cube, threshold_db_over_noise)?;
    Ok(chirp_sets(cube, &sel.selected))
}

pub(crate) fn chirp_sets(cube: &FrameCube, chirps: &[usize]) -> Vec<ChirpSet> {
    let mut sets: Vec<ChirpSet> = (0..cube.header.n_rx)
        .map(|rx| ChirpSet {
            rx,
            chirps: chirps.iter().map(|&c| range_fft(cube.chirp(rx, c))).collect(),
            source_indices: chirps.to_vec(),
            reference_bin: 0,
            shifts: vec![0; chirps.len()],
        })
        .collect();
    let n = cube.header.n_samples;
    let mut total = vec![0.0; n];
    for s in &sets {
        for (t, p) in total.iter_mut().zip(s.mean_power()) {
            *t += p;
        }
    }
    let reference_bin = argmax(&total);
    sets.iter_mut().for_each(|s| s.reference_bin = reference_bin);
    sets
}

/// Circularly shifts every chirp so its main contribution sits at `reference_bin`.
///
/// The strongest chirp (highest peak-to-median ratio) is moved so its peak
/// lands on `reference_bin`; every other chirp is registered against it by
/// circular cross-correlation of magnitude profiles, which follows the whole
/// multipath pattern rather than a single, possibly ambiguous, maximum.
/// Chirps whose peak is less than `min_peak_db` above their median bin are
/// dropped with a warning.
pub fn align_chirps(set: &ChirpSet, reference_bin: usize, min_peak_db: f64) -> Result<ChirpSet, ExtractionError> {
    let mags: Vec<Vec<f64>> = set.chirps.iter().map(|c| c.iter().map(|z| z.norm()).collect()).collect();
    let shifts = estimate_shifts(&mags, reference_bin, min_peak_db, &set.source_indices)?;
    Ok(apply_shifts(set, &shifts))
}

/// [`align_chirps`] with shifts estimated once from the magnitude profiles
/// summed over all antennas and applied to every antenna.
pub fn align_array(sets: &[ChirpSet], reference_bin: usize, min_peak_db: f64) -> Result<Vec<ChirpSet>, ExtractionError> {
    let Some(first) = sets.first() else {
        return Ok(Vec::new());
    };
    let mut mags = vec![vec![0.0; first.n_bins()]; first.len()];
    for s in sets {
        for (m, c) in mags.iter_mut().zip(&s.chirps) {
            for (a, z) in m.iter_mut().zip(c) {
                *a += z.norm();
            }
        }
    }
    let shifts = estimate_shifts(&mags, reference_bin, min_peak_db, &first.source_indices)?;
    Ok(sets.iter().map(|s| apply_shifts(s, &shifts)).collect())
}

fn estimate_shifts(
    mags: &[Vec<f64>],
    reference_bin: usize,
    min_peak_db: f64,
    source: &[usize],
) -> Result<Vec<Option<isize>>, ExtractionError> {
    let n = mags.first().map_or(0, Vec::len);
    if n == 0 {
        return Ok(Vec::new());
    }
    if reference_bin >= n {
        return Err(ExtractionError::invalid(
            "reference_bin",
            format!("{reference_bin} outside the {n}-bin profile"),
        ));
    }
    let min_ratio = 10f64.powf(min_peak_db / 10.0);
    let ratios: Vec<Option<f64>> = mags
        .iter()
        .zip(source)
        .map(|(m, &src)| {
            let p: Vec<f64> = m.iter().map(|a| a * a).collect();
            let peak = p.iter().cloned().fold(0.0, f64::max);
            let med = median(&p);
            let ratio = if med > 0.0 { peak / med } else if peak > 0.0 { f64::INFINITY } else { 0.0 };
            if ratio >= min_ratio {
                Some(ratio)
            } else {
                log::warn!("chirp {src}: no dominant peak ({:.1} dB over median), dropped", power_to_db(ratio));
                None
            }
        })
        .collect();
    let Some(ref_idx) = (0..mags.len())
        .filter(|&i| ratios[i].is_some())
        .max_by(|&a, &b| ratios[a].unwrap().total_cmp(&ratios[b].unwrap()).then(b.cmp(&a)))
    else {
        return Err(ExtractionError::NoDominantPeak {
            chirp: source.first().copied().unwrap_or(0),
        });
    };
    let reference = &mags[ref_idx];
    let offset = reference_bin as isize - argmax(reference) as isize;
    let mut ref_spec: Vec<Complex64> = reference.iter().map(|&a| Complex64::new(a, 0.0)).collect();
    fft_in_place(&mut ref_spec);
    Ok(mags
        .iter()
        .zip(&ratios)
        .map(|(m, r)| {
            r.map(|_| {
                let lag = circular_lag(&ref_spec, m);
                wrap(offset - lag, n)
            })
        })
        .collect())
}

/// Lag `l` maximising `Σ_k ref[k]·m[k + l]`, in `(−n/2, n/2]`, smallest `|l|` on ties.
fn circular_lag(ref_spec: &[Complex64], m: &[f64]) -> isize {
    let n = m.len();
    let mut spec: Vec<Complex64> = m.iter().map(|&a| Complex64::new(a, 0.0)).collect();
    fft_in_place(&mut spec);
    for (s, r) in spec.iter_mut().zip(ref_spec) {
        *s *= r.conj();
    }
    ifft_in_place(&mut spec);
    let mut best = (0isize, f64::NEG_INFINITY);
    for (l, v) in spec.iter().enumerate() {
        let lag = wrap(l as isize, n);
        let score = v.re;
        // relative tie tolerance guards against FFT rounding
        let tol = 1e-9 * best.1.abs();
        if l == 0 || score > best.1 + tol || ((score - best.1).abs() <= tol && lag.abs() < best.0.abs()) {
            best = (lag, score);
        }
    }
    best.0
}

fn wrap(s: isize, n: usize) -> isize {
    let n = n as isize;
    let r = s.rem_euclid(n);
    if r > n / 2 {
        r - n
    } else {
        r
    }
}

fn apply_shifts(set: &ChirpSet, shifts: &[Option<isize>]) -> ChirpSet {
    let n = set.n_bins();
    let mut out = ChirpSet {
        rx: set.rx,
        chirps: Vec::new(),
        source_indices: Vec::new(),
        reference_bin: set.reference_bin,
        shifts: Vec::new(),
    };
    for (i, s) in shifts.iter().enumerate() {
        let Some(s) = *s else { continue };
        let mut c = vec![Complex64::new(0.0, 0.0); n];
        for (k, v) in set.chirps[i].iter().enumerate() {
            c[(k as isize + s).rem_euclid(n as isize) as usize] = *v;
        }
        out.chirps.push(c);
        out.source_indices.push(set.source_indices[i]);
        out.shifts.push(set.shifts[i] + s);
    }
    out
}

pub(crate) fn mean_power<'a>(chirps: impl Iterator<Item = &'a [Complex64]>, n: usize) -> Vec<f64> {
    let mut acc = vec![0.0; n];
    let mut count = 0usize;
    for c in chirps {
        for (a, z) in acc.iter_mut().zip(c) {
            *a += z.norm_sqr();
        }
        count += 1;
    }
    if count > 0 {
        acc.iter_mut().for_each(|a| *a /= count as f64);
    }
    acc
}

/// Index of the largest value (first on ties).
pub(crate) fn argmax(v: &[f64]) -> usize {
    let mut best = 0;
    for (i, x) in v.iter().enumerate() {
        if *x > v[best] {
            best = i;
        }
    }
    best
}
