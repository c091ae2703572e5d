use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use std::f64::consts::PI;

use crate::extraction::{ChannelEstimate, HAMMING_COMPENSATION_DB};
use crate::units::{amplitude_to_db, median};

/// Search half-width (coarse bins) when re-fitting a tap against the others.
const REFINE_SPAN_BINS: f64 = 0.5;

/// Location change (coarse bins) below which re-fitting stops.
const SETTLED_BINS: f64 = 1e-4;

/// Taps closer than this (coarse bins) are not told apart.
const MIN_SEPARATION_BINS: f64 = 0.5;

/// A discrete multipath component found in a CIR.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Tap {
    /// Delay (s).
    pub delay: f64,
    /// Complex amplitude (sqrt(mW)), phase referred to the first beat sample.
    pub amplitude: Complex64,
    /// `20·log10|amplitude|` (dBm).
    pub power_db: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct TapParams {
    /// Minimum tap level over the CIR's median magnitude (dB).
    pub min_snr_db: f64,
    /// Taps weaker than the strongest by more than this are ignored (dB).
    pub dynamic_range_db: f64,
    pub max_taps: usize,
    /// Maximum re-estimation sweeps after each new tap.
    pub refine_passes: usize,
    /// Half-width of the fit window around a tap (coarse bins).
    pub fit_halfwidth_bins: f64,
}

impl Default for TapParams {
    fn default() -> Self {
        TapParams {
            min_snr_db: 15.0,
            dynamic_range_db: 35.0,
            max_taps: 24,
            refine_passes: 20,
            fit_halfwidth_bins: 4.0,
        }
    }
}

/// Response on the refined grid of a unit tone, as a function of the offset
/// `δ = f_tone − f` in coarse bins.
#[derive(Debug, Clone, Copy)]
pub struct TapKernel {
    n: usize,
    hamming: bool,
}

impl TapKernel {
    pub fn for_estimate(est: &ChannelEstimate) -> Self {
        TapKernel {
            n: est.n_fft,
            hamming: est.hamming,
        }
    }

    /// `(1/N) Σ_n e^{j2πδn/N}`.
    fn dirichlet(&self, delta: f64) -> Complex64 {
        let n = self.n as f64;
        let phase = Complex64::from_polar(1.0, PI * delta * (n - 1.0) / n);
        let den = n * (PI * delta / n).sin();
        if den.abs() < 1e-300 || delta.abs() < 1e-12 {
            return phase;
        }
        phase * ((PI * delta).sin() / den)
    }

    pub fn eval(&self, delta: f64) -> Complex64 {
        if !self.hamming {
            return self.dirichlet(delta);
        }
        let g = 10f64.powf(HAMMING_COMPENSATION_DB / 20.0);
        g * (0.54 * self.dirichlet(delta) - 0.23 * self.dirichlet(delta + 1.0) - 0.23 * self.dirichlet(delta - 1.0))
    }
}

/// Finds discrete taps in the CIR of antenna `rx` by successive cancellation.
///
/// The strongest residual sample is fitted with the tap kernel (location by
/// golden-section search of the matched-filter output, amplitude by least
/// squares), subtracted, and the search repeats until the residual drops
/// below the detection threshold. After each new tap every tap is re-fitted
/// in turn with the others removed, which undoes the bias closely spaced taps
/// impose on one another.
pub fn detect_taps(est: &ChannelEstimate, rx: usize, params: &TapParams) -> Vec<Tap> {
    let cir = &est.cir[rx];
    if cir.is_empty() {
        return Vec::new();
    }
    let kernel = TapKernel::for_estimate(est);
    let zoom = est.zoom_factor as f64;
    let bins: Vec<f64> = (0..cir.len()).map(|i| est.start_bin as f64 + i as f64 / zoom).collect();
    let mags: Vec<f64> = cir.iter().map(|z| z.norm()).collect();
    let strongest = mags.iter().cloned().fold(0.0, f64::max);
    if strongest == 0.0 {
        return Vec::new();
    }
    let floor = (median(&mags) * 10f64.powf(params.min_snr_db / 20.0))
        .max(strongest * 10f64.powf(-params.dynamic_range_db / 20.0));
    let fitter = Fitter {
        kernel,
        bins: &bins,
        zoom,
        halfwidth: params.fit_halfwidth_bins,
    };

    let mut residual = cir.clone();
    let mut found: Vec<(f64, Complex64)> = Vec::new();
    // grid samples whose peak could not be told apart from an existing tap
    let mut masked = vec![false; cir.len()];
    while found.len() < params.max_taps {
        let Some((i, m)) = residual
            .iter()
            .enumerate()
            .filter(|(i, _)| !masked[*i])
            .map(|(i, z)| (i, z.norm()))
            .max_by(|a, b| a.1.total_cmp(&b.1))
        else {
            break;
        };
        if m < floor {
            break;
        }
        let (f0, a) = fitter.fit(&residual, bins[i], 1.0 / zoom);
        if a.norm() == 0.0 {
            break;
        }
        fitter.subtract(&mut residual, f0, a);
        found.push((f0, a));
        fitter.relax(&mut found, &mut residual, params.refine_passes);
        let before = found.len();
        fitter.merge(&mut found, &mut residual, floor);
        if found.len() < before {
            for (k, b) in bins.iter().enumerate() {
                if (b - bins[i]).abs() < MIN_SEPARATION_BINS {
                    masked[k] = true;
                }
            }
            fitter.relax(&mut found, &mut residual, params.refine_passes);
        }
    }
    let mut taps: Vec<Tap> = found
        .into_iter()
        .filter(|(_, a)| a.norm() >= floor)
        .map(|(f0, a)| Tap {
            delay: f0 * est.coarse_step,
            amplitude: a,
            power_db: amplitude_to_db(a.norm()),
        })
        .collect();
    taps.sort_by(|a, b| a.delay.total_cmp(&b.delay));
    taps
}

struct Fitter<'a> {
    kernel: TapKernel,
    bins: &'a [f64],
    zoom: f64,
    halfwidth: f64,
}

impl Fitter<'_> {
    fn window(&self, centre: f64) -> std::ops::Range<usize> {
        let start = self.bins[0];
        let lo = ((centre - self.halfwidth - start) * self.zoom).floor().max(0.0) as usize;
        let hi = (((centre + self.halfwidth - start) * self.zoom).ceil() as usize + 1).min(self.bins.len());
        lo.min(hi)..hi
    }

    /// Least-squares amplitude and its matched-filter score at location `f0`.
    fn amplitude(&self, residual: &[Complex64], f0: f64) -> (Complex64, f64) {
        let (mut num, mut den) = (Complex64::new(0.0, 0.0), 0.0);
        for i in self.window(f0) {
            let k = self.kernel.eval(f0 - self.bins[i]);
            num += k.conj() * residual[i];
            den += k.norm_sqr();
        }
        if den == 0.0 {
            return (Complex64::new(0.0, 0.0), 0.0);
        }
        (num / den, num.norm_sqr() / den)
    }

    /// Best location within `guess ± span` bins and its amplitude.
    fn fit(&self, residual: &[Complex64], guess: f64, span: f64) -> (f64, Complex64) {
        let step = 1.0 / self.zoom;
        let (mut a, mut b) = (guess - span, guess + span);
        let ratio = 0.5 * (5f64.sqrt() - 1.0);
        let score = |f: f64| self.amplitude(residual, f).1;
        let mut c = b - ratio * (b - a);
        let mut d = a + ratio * (b - a);
        let (mut sc, mut sd) = (score(c), score(d));
        while b - a > 1e-3 * step {
            if sc > sd {
                b = d;
                d = c;
                sd = sc;
                c = b - ratio * (b - a);
                sc = score(c);
            } else {
                a = c;
                c = d;
                sc = sd;
                d = a + ratio * (b - a);
                sd = score(d);
            }
        }
        let f0 = 0.5 * (a + b);
        (f0, self.amplitude(residual, f0).0)
    }

    /// Re-fits every tap with the others removed until the locations settle.
    fn relax(&self, found: &mut [(f64, Complex64)], residual: &mut [Complex64], passes: usize) {
        for _ in 0..passes {
            let mut moved: f64 = 0.0;
            for t in found.iter_mut() {
                self.subtract(residual, t.0, -t.1);
                let next = self.fit(residual, t.0, REFINE_SPAN_BINS);
                moved = moved.max((next.0 - t.0).abs());
                *t = next;
                self.subtract(residual, t.0, t.1);
            }
            if moved < SETTLED_BINS {
                break;
            }
        }
    }

    /// Drops taps below `floor` and folds taps closer than `MIN_SEPARATION_BINS`
    /// into the stronger one.
    fn merge(&self, found: &mut Vec<(f64, Complex64)>, residual: &mut [Complex64], floor: f64) {
        let mut i = 0;
        while i < found.len() {
            let t = found[i];
            let crowded = found
                .iter()
                .enumerate()
                .any(|(j, u)| j != i && (u.0 - t.0).abs() < MIN_SEPARATION_BINS && u.1.norm() >= t.1.norm());
            if t.1.norm() < floor || crowded {
                self.subtract(residual, t.0, -t.1);
                found.remove(i);
            } else {
                i += 1;
            }
        }
    }

    fn subtract(&self, residual: &mut [Complex64], f0: f64, a: Complex64) {
        for (r, &f) in residual.iter_mut().zip(self.bins) {
            *r -= a * self.kernel.eval(f0 - f);
        }
    }
}
