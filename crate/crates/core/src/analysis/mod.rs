//! Channel characterisation of an extracted CIR: power delay profile, RMS
//! delay spread, angle of arrival, discrete taps and comparison with ray
//! tracing.

mod aoa;
mod compare;
mod pdp;
mod rmsds;
mod taps;

pub use aoa::{angle_fft, AoaMap, ANGLE_FFT_LEN};
pub use compare::{compare_to_rt, CompareParams, MatchReport, MatchedPair, TruthSelection};
pub use pdp::{compute_pdp, Pdp};
pub use rmsds::{default_ds_window, delay_moments, rms_delay_spread, DsMode, RmsDsResult};
pub use taps::{detect_taps, Tap, TapKernel, TapParams};

use thiserror::Error;

#[derive(Debug, Error)]
pub enum AnalysisError {
    #[error("no PDP samples inside the delay window [{t0:e}, {t1:e}] s")]
    EmptyWindow { t0: f64, t1: f64 },

    #[error("angle estimation needs at least 2 rx antennas, estimate has {0}")]
    TooFewAntennas(usize),

    #[error("invalid analysis parameter `{name}`: {reason}")]
    InvalidParameter { name: String, reason: String },
}

impl AnalysisError {
    pub(crate) fn invalid(name: impl Into<String>, reason: impl Into<String>) -> Self {
        AnalysisError::InvalidParameter {
            name: name.into(),
            reason: reason.into(),
        }
    }
}
