//! Command-line front end: run configs, file outputs, and the
//! simulate → extract → analyze → compare commands.

mod commands;
mod config;
mod manifest;
mod output;

pub use commands::{cmd_analyze, cmd_compare, cmd_extract, cmd_pipeline, cmd_simulate, CirFile, RunContext};
pub use config::{AnalysisOptions, InterferenceSpec, Overrides, RunConfig, SCHEMA_VERSION};
pub use manifest::{ManifestFile, RunManifest};

use std::io;
use std::path::{Path, PathBuf};

use thiserror::Error;

use crate::analysis::AnalysisError;
use crate::extraction::ExtractionError;
use crate::frame_synth::{FrameFormatError, SynthError};
use crate::scene_rt::SceneError;

pub const FRAME_FILE: &str = "frame.isacfrm";
pub const TRUTH_FILE: &str = "truth.csv";
pub const CIR_FILE: &str = "cir.json";
pub const PDP_FILE: &str = "pdp.csv";
pub const RMSDS_FILE: &str = "rmsds.csv";
pub const AOA_FILE: &str = "aoa.csv";
pub const TAPS_FILE: &str = "taps.csv";
pub const MATCH_FILE: &str = "match.csv";
pub const MANIFEST_FILE: &str = "manifest.json";
pub const STAGES_DIR: &str = "stages";

/// Process exit status for each error class.
pub mod exit_code {
    pub const OK: i32 = 0;
    pub const CONFIG: i32 = 2;
    pub const DOMAIN: i32 = 3;
    pub const IO: i32 = 4;
}

#[derive(Debug, Error)]
pub enum CliError {
    /// The config or a command-line value is malformed or inconsistent.
    #[error("config error: {0}")]
    Config(String),

    /// Valid inputs the physics or the extraction cannot handle.
    #[error("{0}")]
    Domain(String),

    #[error("{}: {source}{}", path.display(), hint.as_ref().map(|h| format!(" (hint: {h})")).unwrap_or_default())]
    Io {
        path: PathBuf,
        source: io::Error,
        hint: Option<String>,
    },

    #[error("{}: {message}", path.display())]
    BadFile { path: PathBuf, message: String },
}

impl CliError {
    pub fn io(path: &Path, source: io::Error, hint: Option<&str>) -> Self {
        CliError::Io {
            path: path.to_path_buf(),
            source,
            hint: hint.map(str::to_owned),
        }
    }

    pub fn bad_file(path: &Path, message: impl ToString) -> Self {
        CliError::BadFile {
            path: path.to_path_buf(),
            message: message.to_string(),
        }
    }

    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Config(_) => exit_code::CONFIG,
            CliError::Domain(_) => exit_code::DOMAIN,
            CliError::Io { .. } | CliError::BadFile { .. } => exit_code::IO,
        }
    }
}

impl From<SceneError> for CliError {
    fn from(e: SceneError) -> Self {
        match e {
            SceneError::EmptyScene => CliError::Domain(e.to_string()),
            SceneError::Csv(_) => CliError::Domain(e.to_string()),
            SceneError::Invalid { .. } | SceneError::TooManyBounces(_) => CliError::Config(e.to_string()),
        }
    }
}

impl From<SynthError> for CliError {
    fn from(e: SynthError) -> Self {
        CliError::Config(e.to_string())
    }
}

impl From<ExtractionError> for CliError {
    fn from(e: ExtractionError) -> Self {
        match e {
            ExtractionError::InvalidParameter { .. } | ExtractionError::BadBand { .. } => CliError::Config(e.to_string()),
            _ => CliError::Domain(e.to_string()),
        }
    }
}

impl From<AnalysisError> for CliError {
    fn from(e: AnalysisError) -> Self {
        match e {
            AnalysisError::InvalidParameter { .. } => CliError::Config(e.to_string()),
            _ => CliError::Domain(e.to_string()),
        }
    }
}

impl From<(PathBuf, FrameFormatError)> for CliError {
    fn from((path, e): (PathBuf, FrameFormatError)) -> Self {
        match e {
            FrameFormatError::Io(source) => CliError::Io { path, source, hint: None },
            other => CliError::bad_file(&path, other),
        }
    }
}
