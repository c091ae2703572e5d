use std::fs;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use super::CliError;
use crate::analysis::{DsMode, TapParams};
use crate::extraction::ExtractionParams;
use crate::frame_synth::{
    InterferenceConfig, PhaseMode, RadarConfig, StaticTap, DEFAULT_INTERFERED_FRACTION, DEFAULT_SLOPE_DELTA,
};
use crate::scene_rt::{RadioParams, Scene};

pub const SCHEMA_VERSION: u32 = 1;

/// One run: scene, radios, interference, processing options and seed.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub schema_version: u32,
    /// Free text; JSON has no comments, so notes about the scene go here.
    #[serde(default, skip_serializing_if = "String::is_empty")]
    pub description: String,
    /// Inline scene. Exactly one of `scene` and `scene_file` must be given.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub scene: Option<Scene>,
    /// Scene JSON file, relative to the config file.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub scene_file: Option<PathBuf>,
    #[serde(default)]
    pub radio: RadioParams,
    #[serde(default)]
    pub victim: RadarConfig,
    #[serde(default)]
    pub interference: InterferenceSpec,
    #[serde(default)]
    pub static_clutter: Vec<StaticTap>,
    #[serde(default)]
    pub extraction: ExtractionParams,
    #[serde(default)]
    pub analysis: AnalysisOptions,
    #[serde(default)]
    pub seed: u64,
    #[serde(default = "default_output_dir")]
    pub output_dir: PathBuf,
    /// Add receiver noise to the synthesised frame.
    #[serde(default = "default_true")]
    pub noise: bool,
}

fn default_output_dir() -> PathBuf {
    PathBuf::from("out")
}

fn default_true() -> bool {
    true
}

/// How the aggressor is derived from the victim.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct InterferenceSpec {
    /// Share of chirps interfered, drawn with the run seed.
    pub fraction: f64,
    /// Explicit interfered chirps; overrides `fraction`.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub chirp_indices: Option<Vec<usize>>,
    pub slope_delta: f64,
    pub chirp_start_offset: f64,
    pub phase_mode: PhaseMode,
    /// Aggressor transmit power (dBm); defaults to the victim's.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub tx_power_dbm: Option<f64>,
}

impl Default for InterferenceSpec {
    fn default() -> Self {
        InterferenceSpec {
            fraction: DEFAULT_INTERFERED_FRACTION,
            chirp_indices: None,
            slope_delta: DEFAULT_SLOPE_DELTA,
            chirp_start_offset: 0.0,
            phase_mode: PhaseMode::default(),
            tx_power_dbm: None,
        }
    }
}

impl InterferenceSpec {
    pub fn build(&self, victim: &RadarConfig, seed: u64) -> InterferenceConfig {
        let mut cfg = match &self.chirp_indices {
            Some(idx) => InterferenceConfig::new(victim, self.slope_delta, idx.iter().copied()),
            None => InterferenceConfig::with_fraction(victim, self.slope_delta, self.fraction, seed),
        }
        .with_phase_mode(self.phase_mode);
        cfg.chirp_start_offset = self.chirp_start_offset;
        if let Some(p) = self.tx_power_dbm {
            cfg.aggressor.tx_power_dbm = p;
        }
        cfg
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct AnalysisOptions {
    pub ds_mode: DsMode,
    /// RMS DS window: samples this far above the PDP median (dB).
    pub ds_margin_db: f64,
    pub n_angle_bins: usize,
    pub taps: TapParams,
    /// Rays within `ds_k` RMS delay spreads of the mean delay are compared.
    pub ds_k: f64,
    /// Compare rays within this margin of the strongest instead (dB).
    #[serde(skip_serializing_if = "Option::is_none")]
    pub gain_margin_db: Option<f64>,
    /// Matching gate in coarse delay bins.
    pub gate_bins: f64,
}

impl Default for AnalysisOptions {
    fn default() -> Self {
        AnalysisOptions {
            ds_mode: DsMode::default(),
            ds_margin_db: 6.0,
            n_angle_bins: 181,
            taps: TapParams::default(),
            ds_k: 1.0,
            gain_margin_db: None,
            gate_bins: 1.0,
        }
    }
}

/// Command-line values that take precedence over the file.
#[derive(Debug, Clone, Default)]
pub struct Overrides {
    pub seed: Option<u64>,
    pub output_dir: Option<PathBuf>,
    pub module_thresh: Option<f64>,
    pub phase_thresh: Option<f64>,
    pub zoom: Option<usize>,
    pub ds_mode: Option<DsMode>,
}

impl RunConfig {
    /// Parses JSON text. Errors name the offending field path and position.
    pub fn from_json(text: &str) -> Result<Self, CliError> {
        let de = &mut serde_json::Deserializer::from_str(text);
        serde_path_to_error::deserialize(de).map_err(|e| {
            let inner = e.inner();
            CliError::Config(format!(
                "field `{}` (line {}, column {}): {}",
                e.path(),
                inner.line(),
                inner.column(),
                inner
            ))
        })
    }

    /// Reads a config file, inlining `scene_file` so the result is self-contained.
    pub fn load(path: &Path) -> Result<Self, CliError> {
        let text = fs::read_to_string(path).map_err(|e| CliError::io(path, e, Some("check the --config path")))?;
        let mut cfg = Self::from_json(&text).map_err(|e| match e {
            CliError::Config(m) => CliError::Config(format!("{}: {m}", path.display())),
            other => other,
        })?;
        if let Some(rel) = cfg.scene_file.take() {
            if cfg.scene.is_some() {
                return Err(CliError::Config("give either `scene` or `scene_file`, not both".into()));
            }
            let scene_path = path.parent().unwrap_or(Path::new(".")).join(&rel);
            let text = fs::read_to_string(&scene_path).map_err(|e| {
                CliError::io(&scene_path, e, Some("`scene_file` is resolved relative to the config file"))
            })?;
            let de = &mut serde_json::Deserializer::from_str(&text);
            let scene: Scene = serde_path_to_error::deserialize(de)
                .map_err(|e| CliError::Config(format!("{}: field `{}`: {}", scene_path.display(), e.path(), e.inner())))?;
            cfg.scene = Some(scene);
        }
        Ok(cfg)
    }

    pub fn apply(&mut self, o: &Overrides) {
        if let Some(s) = o.seed {
            self.seed = s;
        }
        if let Some(d) = &o.output_dir {
            self.output_dir = d.clone();
        }
        if let Some(t) = o.module_thresh {
            self.extraction.module_thresh = t;
        }
        if let Some(t) = o.phase_thresh {
            self.extraction.phase_thresh = t;
        }
        if let Some(z) = o.zoom {
            self.extraction.zoom_factor = z;
        }
        if let Some(m) = o.ds_mode {
            self.analysis.ds_mode = m;
        }
    }

    pub fn validate(&self) -> Result<(), CliError> {
        if self.schema_version != SCHEMA_VERSION {
            return Err(CliError::Config(format!(
                "schema_version {} is not supported (expected {SCHEMA_VERSION})",
                self.schema_version
            )));
        }
        let scene = self
            .scene
            .as_ref()
            .ok_or_else(|| CliError::Config("config needs a `scene` or `scene_file`".into()))?;
        scene.validate().map_err(CliError::from)?;
        self.victim.validate().map_err(CliError::from)?;
        self.interference
            .build(&self.victim, self.seed)
            .validate(&self.victim)
            .map_err(CliError::from)?;
        self.extraction.validate().map_err(CliError::from)?;
        let a = &self.analysis;
        if a.n_angle_bins < 2 || !(a.ds_k >= 0.0) || !(a.gate_bins > 0.0) || !a.ds_margin_db.is_finite() {
            return Err(CliError::Config(
                "analysis: need n_angle_bins >= 2, ds_k >= 0, gate_bins > 0 and a finite ds_margin_db".into(),
            ));
        }
        Ok(())
    }

    pub fn scene(&self) -> &Scene {
        self.scene.as_ref().expect("validated config has a scene")
    }

    /// SHA-256 of the canonical JSON form: keys sorted, no whitespace, scene
    /// inlined. Formatting and key order of the source file do not matter.
    pub fn canonical_hash(&self) -> String {
        let value = serde_json::to_value(self).expect("config serialises");
        let text = serde_json::to_string(&value).expect("value serialises");
        hex::encode(Sha256::digest(text.as_bytes()))
    }
}
