use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::cluster::{check_threshold, cluster_chirps, complex_mean, ClusterSet};
use super::correlate::{average_reports, correlate, CorrelationReport};
use super::fft::range_fft;
use super::filter::static_filter;
use super::refine::{autoclutter_hamming, iczt_refine, realign_clusters, RefinedProfile};
use super::select::{align_array, chirp_sets, mean_power, select_chirps, ChirpSet, Selection};
use super::ExtractionError;
use crate::frame_synth::FrameCube;

/// Coarse-bin band re-evaluated by the zoomed transform.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ZoomBand {
    /// `[reference − below, reference + above)`, clamped to the positive half
    /// of the range profile.
    Relative { below: usize, above: usize },
    /// Explicit `[lo, hi)`.
    Absolute { lo: usize, hi: usize },
}

impl Default for ZoomBand {
    fn default() -> Self {
        ZoomBand::Relative { below: 8, above: 24 }
    }
}

impl ZoomBand {
    pub fn resolve(&self, reference_bin: usize, n_bins: usize) -> (usize, usize) {
        match *self {
            ZoomBand::Relative { below, above } => {
                let lo = reference_bin.saturating_sub(below);
                let hi = (reference_bin + above).min((n_bins / 2).max(lo + 1)).min(n_bins);
                (lo, hi)
            }
            ZoomBand::Absolute { lo, hi } => (lo, hi),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct ExtractionParams {
    /// Chirp power needed above the noise floor to count as interfered (dB).
    pub threshold_db_over_noise: f64,
    /// Minimum peak-over-median of a chirp's range profile for alignment (dB).
    pub min_peak_db: f64,
    /// Alignment target; defaults to the strongest bin of the selected chirps.
    pub reference_bin: Option<usize>,
    pub module_thresh: f64,
    pub phase_thresh: f64,
    pub zoom_factor: usize,
    pub zoom_band: ZoomBand,
    /// Hamming sidelobe suppression before refinement.
    pub autoclutter: bool,
}

impl Default for ExtractionParams {
    fn default() -> Self {
        ExtractionParams {
            threshold_db_over_noise: 10.0,
            min_peak_db: 6.0,
            reference_bin: None,
            module_thresh: 0.85,
            phase_thresh: 0.8,
            zoom_factor: 16,
            zoom_band: ZoomBand::default(),
            autoclutter: true,
        }
    }
}

impl ExtractionParams {
    pub fn validate(&self) -> Result<(), ExtractionError> {
        check_threshold("module_thresh", self.module_thresh)?;
        check_threshold("phase_thresh", self.phase_thresh)?;
        if self.zoom_factor == 0 {
            return Err(ExtractionError::invalid("zoom_factor", "must be >= 1"));
        }
        if !self.threshold_db_over_noise.is_finite() || !self.min_peak_db.is_finite() {
            return Err(ExtractionError::invalid("threshold_db_over_noise", "must be finite"));
        }
        if let ZoomBand::Absolute { lo, hi } = self.zoom_band {
            if lo >= hi {
                return Err(ExtractionError::invalid("zoom_band", format!("empty band [{lo}, {hi})")));
            }
        }
        Ok(())
    }
}

/// Complex CIR per rx antenna on a uniform refined delay grid.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ChannelEstimate {
    /// `cir[rx][i]` is the tap at `delay_grid[i]`, in sqrt(mW).
    pub cir: Vec<Vec<Complex64>>,
    /// Delays (s), strictly increasing.
    pub delay_grid: Vec<f64>,
    pub zoom_factor: usize,
    /// Delay spanned by one coarse range bin (s).
    pub coarse_step: f64,
    pub start_bin: usize,
    pub n_fft: usize,
    /// Clusters averaged into the estimate.
    pub n_clusters: usize,
    /// Whether the clusters were Hamming-windowed (auto-clutter) before
    /// refinement; this sets the tap shape on the grid.
    #[serde(default)]
    pub hamming: bool,
}

impl ChannelEstimate {
    pub fn n_rx(&self) -> usize {
        self.cir.len()
    }

    /// Grid step (s) = coarse step / zoom factor.
    pub fn grid_step(&self) -> f64 {
        self.coarse_step / self.zoom_factor as f64
    }

    /// Index of the grid point nearest `delay`, if inside the grid.
    pub fn index_of(&self, delay: f64) -> Option<usize> {
        let first = *self.delay_grid.first()?;
        let i = ((delay - first) / self.grid_step()).round();
        (i >= 0.0 && (i as usize) < self.delay_grid.len()).then_some(i as usize)
    }
}

/// Averages realigned clusters per antenna into a [`ChannelEstimate`].
///
/// `clusters[rx]` holds the refined, realigned clusters of antenna `rx`.
pub fn extract_cir(clusters: &[Vec<RefinedProfile>], coarse_step: f64) -> Result<ChannelEstimate, ExtractionError> {
    let first = clusters
        .first()
        .and_then(|c| c.first())
        .ok_or_else(|| ExtractionError::invalid("clusters", "no clusters to average"))?;
    let len = first.values.len();
    let mut cir = Vec::with_capacity(clusters.len());
    for per_rx in clusters {
        if per_rx.iter().any(|c| c.values.len() != len || c.start_bin != first.start_bin || c.zoom != first.zoom) {
            return Err(ExtractionError::invalid("clusters", "refined grids differ"));
        }
        cir.push(complex_mean(per_rx.iter().map(|c| c.values.as_slice()), len));
    }
    let delay_grid = (0..len).map(|i| first.bin_at(i) * coarse_step).collect();
    Ok(ChannelEstimate {
        cir,
        delay_grid,
        zoom_factor: first.zoom,
        coarse_step,
        start_bin: first.start_bin,
        n_fft: first.n_fft,
        n_clusters: clusters[0].len(),
        hamming: false,
    })
}

/// Intermediate products of one extraction run, kept for stage dumps.
#[derive(Debug, Clone)]
pub struct StageTrace {
    /// Mean power per range bin over all chirps, `[rx][bin]` (mW).
    pub raw_power: Vec<Vec<f64>>,
    pub filtered_power: Vec<Vec<f64>>,
    pub selection: Selection,
    /// `(frame chirp, applied shift)` of chirps kept by alignment.
    pub shifts: Vec<(usize, isize)>,
    pub reference_bin: usize,
    /// Array-averaged correlations used for clustering.
    pub correlation: CorrelationReport,
    /// Frame chirp indices of every cluster.
    pub clusters: Vec<Vec<usize>>,
    /// Mean power over clusters before and after auto-clutter, `[rx][bin]`.
    pub cluster_power: Vec<Vec<f64>>,
    pub autoclutter_power: Vec<Vec<f64>>,
    pub band: (usize, usize),
}

#[derive(Debug, Clone)]
pub struct Extraction {
    pub estimate: ChannelEstimate,
    pub trace: StageTrace,
}

/// Runs the whole chain on a raw frame.
///
/// Decisions that belong to a chirp rather than to an antenna (which chirps are
/// interfered, their alignment shift, and which chirps share a phase
/// reference) are taken once for the array: chirp power and magnitude
/// profiles are summed over antennas and the correlation matrices averaged.
/// Clustering, auto-clutter, refinement and realignment then run per antenna,
/// in parallel, with identical cluster membership, so the inter-antenna phase
/// needed for the angle FFT is preserved.
pub fn extract_channel(cube: &FrameCube, params: &ExtractionParams) -> Result<Extraction, ExtractionError> {
    params.validate()?;
    let h = cube.header;
    let raw_power = power_per_bin(cube);
    let filtered = static_filter(cube)?;
    let filtered_power = power_per_bin(&filtered);
    let selection = select_chirps(&filtered, params.threshold_db_over_noise)?;
    let sets = chirp_sets(&filtered, &selection.selected);
    let reference_bin = params.reference_bin.unwrap_or(sets[0].reference_bin);
    if reference_bin >= h.n_samples {
        return Err(ExtractionError::invalid(
            "reference_bin",
            format!("{reference_bin} outside the {}-bin profile", h.n_samples),
        ));
    }
    let aligned = align_array(&sets, reference_bin, params.min_peak_db)?;
    let shifts = aligned[0]
        .source_indices
        .iter()
        .copied()
        .zip(aligned[0].shifts.iter().copied())
        .collect();

    let correlation = if aligned[0].len() >= 2 {
        let reports = aligned.iter().map(correlate).collect::<Result<Vec<_>, _>>()?;
        average_reports(&reports).expect("at least one antenna")
    } else {
        single_chirp_report(&aligned[0])
    };

    let cluster_sets: Vec<ClusterSet> = aligned
        .iter()
        .map(|s| cluster_chirps(&correlation.module_corr, &correlation.phase_corr, params.module_thresh, params.phase_thresh, s))
        .collect::<Result<_, _>>()?;
    let clusters = cluster_sets[0].clusters.iter().map(|c| c.source_indices.clone()).collect();
    let band = params.zoom_band.resolve(reference_bin, h.n_samples);

    let per_rx: Vec<(Vec<RefinedProfile>, Vec<f64>, Vec<f64>)> = cluster_sets
        .par_iter()
        .map(|cs| {
            let profiles: Vec<Vec<Complex64>> = cs.clusters.iter().map(|c| c.profile.clone()).collect();
            let before = mean_power(profiles.iter().map(|p| p.as_slice()), h.n_samples);
            let cleaned: Vec<Vec<Complex64>> = if params.autoclutter {
                profiles.iter().map(|p| autoclutter_hamming(p)).collect()
            } else {
                profiles
            };
            let after = mean_power(cleaned.iter().map(|p| p.as_slice()), h.n_samples);
            let refined = cleaned
                .iter()
                .map(|p| iczt_refine(p, band, params.zoom_factor))
                .collect::<Result<Vec<_>, _>>()?;
            Ok((realign_clusters(&refined)?, before, after))
        })
        .collect::<Result<_, ExtractionError>>()?;

    let mut realigned = Vec::with_capacity(per_rx.len());
    let mut cluster_power = Vec::with_capacity(per_rx.len());
    let mut autoclutter_power = Vec::with_capacity(per_rx.len());
    for (r, b, a) in per_rx {
        realigned.push(r);
        cluster_power.push(b);
        autoclutter_power.push(a);
    }
    let mut estimate = extract_cir(&realigned, h.coarse_delay_step())?;
    estimate.hamming = params.autoclutter;
    Ok(Extraction {
        estimate,
        trace: StageTrace {
            raw_power,
            filtered_power,
            selection,
            shifts,
            reference_bin,
            correlation,
            clusters,
            cluster_power,
            autoclutter_power,
            band,
        },
    })
}

fn single_chirp_report(set: &ChirpSet) -> CorrelationReport {
    let power = set.mean_power();
    CorrelationReport {
        module_corr: nalgebra::DMatrix::identity(set.len(), set.len()),
        phase_corr: nalgebra::DMatrix::identity(set.len(), set.len()),
        los_bin: super::select::argmax(&power),
    }
}

fn power_per_bin(cube: &FrameCube) -> Vec<Vec<f64>> {
    let h = cube.header;
    (0..h.n_rx)
        .map(|rx| {
            let spectra: Vec<Vec<Complex64>> = (0..h.n_chirps).map(|c| range_fft(cube.chirp(rx, c))).collect();
            mean_power(spectra.iter().map(|s| s.as_slice()), h.n_samples)
        })
        .collect()
}
