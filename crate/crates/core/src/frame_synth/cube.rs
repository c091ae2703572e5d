use num_complex::Complex32;

use super::RadarConfig;
use crate::scene_rt::GroundTruthChannel;

/// Acquisition parameters that travel with a frame (and its file header).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FrameHeader {
    pub n_rx: usize,
    pub n_chirps: usize,
    pub n_samples: usize,
    pub fs_adc: f64,
    pub f_start: f64,
    pub chirp_slope: f64,
}

impl FrameHeader {
    pub fn from_radar(cfg: &RadarConfig) -> Self {
        FrameHeader {
            n_rx: cfg.n_rx,
            n_chirps: cfg.n_chirps_per_frame,
            n_samples: cfg.n_samples_per_chirp,
            fs_adc: cfg.fs_adc,
            f_start: cfg.f_start,
            chirp_slope: cfg.chirp_slope,
        }
    }

    pub fn len(&self) -> usize {
        self.n_rx * self.n_chirps * self.n_samples
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// Delay spanned by one range-FFT bin (s).
    pub fn coarse_delay_step(&self) -> f64 {
        self.fs_adc / (self.n_samples as f64 * self.chirp_slope)
    }
}

/// Raw complex baseband frame, `[rx][chirp][sample]` with samples innermost.
///
/// Sample units are sqrt(mW) at the ADC input, so `|x|^2` is power in mW.
#[derive(Debug, Clone, PartialEq)]
pub struct FrameCube {
    pub header: FrameHeader,
    pub data: Vec<Complex32>,
    /// Ray-traced channel used to synthesise the frame. Never persisted.
    pub truth: Option<GroundTruthChannel>,
}

impl FrameCube {
    pub fn zeros(header: FrameHeader) -> Self {
        FrameCube {
            header,
            data: vec![Complex32::new(0.0, 0.0); header.len()],
            truth: None,
        }
    }

    #[inline]
    fn offset(&self, rx: usize, chirp: usize) -> usize {
        (rx * self.header.n_chirps + chirp) * self.header.n_samples
    }

    pub fn chirp(&self, rx: usize, chirp: usize) -> &[Complex32] {
        let o = self.offset(rx, chirp);
        &self.data[o..o + self.header.n_samples]
    }

    pub fn chirp_mut(&mut self, rx: usize, chirp: usize) -> &mut [Complex32] {
        let o = self.offset(rx, chirp);
        let n = self.header.n_samples;
        &mut self.data[o..o + n]
    }

    /// Every sample multiplied by `factor`.
    pub fn scaled(&self, factor: Complex32) -> Self {
        FrameCube {
            header: self.header,
            data: self.data.iter().map(|x| x * factor).collect(),
            truth: self.truth.clone(),
        }
    }

    pub fn is_finite(&self) -> bool {
        self.data.iter().all(|x| x.re.is_finite() && x.im.is_finite())
    }
}
