//! Range transforms and the chirp-z transform used for zoomed refinement.

use num_complex::{Complex32, Complex64};
use rustfft::FftPlanner;
use std::f64::consts::PI;

/// Range profile of one chirp: `X[k] = (1/N) Σ x[n] e^{-j2πkn/N}`.
///
/// The `1/N` keeps an on-bin tone of amplitude `A` at `|X[k]| = A`.
pub fn range_fft(x: &[Complex32]) -> Vec<Complex64> {
    let mut buf: Vec<Complex64> = x.iter().map(|z| Complex64::new(z.re as f64, z.im as f64)).collect();
    fft_in_place(&mut buf);
    let scale = 1.0 / buf.len() as f64;
    buf.iter_mut().for_each(|z| *z *= scale);
    buf
}

/// Unnormalised forward DFT.
pub fn fft_in_place(buf: &mut [Complex64]) {
    if buf.is_empty() {
        return;
    }
    FftPlanner::new().plan_fft_forward(buf.len()).process(buf);
}

/// Unnormalised inverse DFT; `ifft(range_fft(x)) == x`.
pub fn ifft_in_place(buf: &mut [Complex64]) {
    if buf.is_empty() {
        return;
    }
    FftPlanner::new().plan_fft_inverse(buf.len()).process(buf);
}

/// Evaluates `X(f) = (1/N) Σ_n x[n] e^{-j2π f n / N}` at `f = f0 + m·df`,
/// `m = 0..m_out`, with Bluestein's algorithm.
///
/// `df` must be `1 / zoom` for an integer `zoom`, so the chirp phases can be
/// reduced exactly modulo the period.
pub fn zoom_dft(x: &[Complex64], f0: f64, zoom: usize, m_out: usize) -> Vec<Complex64> {
    let n = x.len();
    if n == 0 || m_out == 0 {
        return Vec::new();
    }
    // W^{k²/2} = exp(-jπ k² / (N·zoom)); k² taken modulo 2·N·zoom keeps the
    // argument small even for long transforms.
    let period = 2 * (n as u128) * (zoom as u128);
    let chirp = |k: usize| {
        let k2 = ((k as u128) * (k as u128)) % period;
        Complex64::from_polar(1.0, -PI * k2 as f64 / (n * zoom) as f64)
    };
    let l = (n + m_out - 1).next_power_of_two();
    let mut a = vec![Complex64::new(0.0, 0.0); l];
    for (i, v) in x.iter().enumerate() {
        let start = Complex64::from_polar(1.0, -2.0 * PI * f0 * i as f64 / n as f64);
        a[i] = v * start * chirp(i);
    }
    let mut b = vec![Complex64::new(0.0, 0.0); l];
    b[0] = Complex64::new(1.0, 0.0);
    for k in 1..n.max(m_out) {
        let c = chirp(k).conj();
        if k < m_out {
            b[k] = c;
        }
        if k < n {
            b[l - k] = c;
        }
    }
    let mut planner = FftPlanner::new();
    let fwd = planner.plan_fft_forward(l);
    let inv = planner.plan_fft_inverse(l);
    fwd.process(&mut a);
    fwd.process(&mut b);
    for (p, q) in a.iter_mut().zip(&b) {
        *p *= q;
    }
    inv.process(&mut a);
    let scale = 1.0 / (l as f64 * n as f64);
    (0..m_out).map(|m| a[m] * chirp(m) * scale).collect()
}
