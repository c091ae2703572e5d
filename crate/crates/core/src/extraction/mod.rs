//! Channel extraction from interference-bearing radar frames.
//!
//! The chain runs static filtering, power-threshold chirp selection, chirp
//! alignment, module and phase correlation, clustering, Hamming auto-clutter
//! reduction, zoomed chirp-z refinement, cluster realignment and averaging.
//! [`extract_channel`] runs all of it; the individual stages are public.

mod cluster;
mod correlate;
mod fft;
mod filter;
mod pipeline;
mod refine;
mod select;

pub use cluster::{cluster_chirps, Cluster, ClusterSet};
pub use correlate::{average_reports, correlate, module_correlation, phase_correlation, CorrelationReport};
pub use fft::{range_fft, zoom_dft};
pub use filter::static_filter;
pub use pipeline::{
    extract_channel, extract_cir, ChannelEstimate, Extraction, ExtractionParams, StageTrace, ZoomBand,
};
pub use refine::{
    autoclutter_hamming, hamming, iczt_refine, realign_clusters, RefinedProfile, HAMMING_COMPENSATION_DB,
};
pub use select::{align_array, align_chirps, select_chirps, select_interference_chirps, ChirpSet, Selection};

use thiserror::Error;

#[derive(Debug, Error)]
pub enum ExtractionError {
    #[error("static filtering needs at least 2 chirps, frame has {0}")]
    TooFewChirps(usize),

    #[error("no interference found: no chirp exceeds the noise floor by {threshold_db} dB")]
    NoInterferenceFound { threshold_db: f64 },

    #[error("chirp {chirp} has no dominant peak")]
    NoDominantPeak { chirp: usize },

    #[error("chirp {chirp} has a degenerate (constant or zero) profile")]
    DegenerateChirp { chirp: usize },

    #[error("bad zoom band [{lo}, {hi}) with zoom {zoom} for a {n_bins}-bin profile")]
    BadBand { lo: usize, hi: usize, n_bins: usize, zoom: usize },

    #[error("invalid extraction parameter `{name}`: {reason}")]
    InvalidParameter { name: String, reason: String },
}

impl ExtractionError {
    pub(crate) fn invalid(name: impl Into<String>, reason: impl Into<String>) -> Self {
        ExtractionError::InvalidParameter {
            name: name.into(),
            reason: reason.into(),
        }
    }
}
