//! Geometrical-optics ray tracer for the reference channel.
//!
//! Specular paths off planar reflectors are found with the image method up to
//! `max_bounces` reflections; point scatterers contribute one single-bounce
//! path each. Every leg is checked for occlusion against all plates. Path
//! gains follow the transmission equation
//!
//! ```text
//! Prx/Ptx = Gtx·Grx / (FSPL · Lsys · Lref)
//! ```
//!
//! with `Lref` accumulated per bounce.

mod gain;
mod scene;
mod trace;
mod truth_csv;

pub use gain::{fspl_db, path_gain_db};
pub use scene::{PlanarReflector, PointScatterer, Scene, MAX_SUPPORTED_BOUNCES};
pub use trace::{ground_truth_channel, trace_paths, GroundTruthChannel, RadioParams, RayPath};
pub use truth_csv::{read_truth_csv, write_truth_csv, TruthRow};

use thiserror::Error;

#[derive(Debug, Error)]
pub enum SceneError {
    /// Nothing connects the transmitter to the receiver.
    #[error("empty scene: no propagation path connects tx and rx (LOS occluded and no reachable reflector or scatterer)")]
    EmptyScene,

    #[error("invalid scene field `{field}`: {reason}")]
    Invalid { field: String, reason: String },

    #[error("max_bounces = {0} exceeds the supported maximum of {MAX_SUPPORTED_BOUNCES}")]
    TooManyBounces(usize),

    #[error("truth csv: {0}")]
    Csv(#[from] csv::Error),
}

impl SceneError {
    pub(crate) fn invalid(field: impl Into<String>, reason: impl Into<String>) -> Self {
        SceneError::Invalid {
            field: field.into(),
            reason: reason.into(),
        }
    }
}
