use serde::{Deserialize, Serialize};

use crate::extraction::ChannelEstimate;
use crate::units::amplitude_to_db;

/// Power delay profile of one rx antenna.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Pdp {
    /// Delays (s), uniform and increasing.
    pub delays: Vec<f64>,
    /// `20·log10|cir|` (dB re 1 mW).
    pub power_db: Vec<f64>,
    pub rx_index: usize,
}

impl Pdp {
    pub fn len(&self) -> usize {
        self.delays.len()
    }

    pub fn is_empty(&self) -> bool {
        self.delays.is_empty()
    }

    /// Linear amplitude of every sample.
    pub fn amplitudes(&self) -> Vec<f64> {
        self.power_db.iter().map(|p| 10f64.powf(p / 20.0)).collect()
    }
}

/// PDP of antenna `rx`. Panics if `rx` is out of range.
pub fn compute_pdp(est: &ChannelEstimate, rx: usize) -> Pdp {
    Pdp {
        delays: est.delay_grid.clone(),
        power_db: est.cir[rx].iter().map(|z| amplitude_to_db(z.norm())).collect(),
        rx_index: rx,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use num_complex::Complex64;

    fn estimate(cir: Vec<Complex64>) -> ChannelEstimate {
        let n = cir.len();
        ChannelEstimate {
            cir: vec![cir],
            delay_grid: (0..n).map(|i| i as f64 * 1e-9).collect(),
            zoom_factor: 1,
            coarse_step: 1e-9,
            start_bin: 0,
            n_fft: n,
            n_clusters: 1,
            hamming: false,
        }
    }

    #[test]
    fn unit_impulse() {
        let mut cir = vec![Complex64::new(0.0, 0.0); 8];
        cir[3] = Complex64::new(0.0, 1.0);
        let pdp = compute_pdp(&estimate(cir.clone()), 0);
        assert_eq!(pdp.power_db[3], 0.0);
        assert!(pdp.power_db.iter().enumerate().all(|(i, p)| i == 3 || *p <= -300.0));
        let doubled: Vec<Complex64> = cir.iter().map(|z| z * 2.0).collect();
        let pdp2 = compute_pdp(&estimate(doubled), 0);
        assert!((pdp2.power_db[3] - 6.0206).abs() < 1e-4);
    }
}
