//! Raw FMCW frame synthesis with inter-radar interference.

mod config;
mod cube;
mod format;
mod synth;

pub use config::{
    InterferenceConfig, PhaseMode, RadarConfig, StaticTap, DEFAULT_INTERFERED_FRACTION,
    DEFAULT_SLOPE_DELTA,
};
pub use cube::{FrameCube, FrameHeader};
pub use format::{read_frame, write_frame, FrameFormatError, FRAME_MAGIC};
pub use synth::{peak_snr_db, synth_frame};

use thiserror::Error;

#[derive(Debug, Error)]
pub enum SynthError {
    #[error("configuration mismatch: {0}")]
    ConfigMismatch(String),

    #[error("invalid radar field `{field}`: {reason}")]
    Invalid { field: String, reason: String },
}

impl SynthError {
    pub(crate) fn invalid(field: impl Into<String>, reason: impl Into<String>) -> Self {
        SynthError::Invalid {
            field: field.into(),
            reason: reason.into(),
        }
    }
}
