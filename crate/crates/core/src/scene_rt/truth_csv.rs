use std::io::{Read, Write};

use serde::{Deserialize, Serialize};

use super::{GroundTruthChannel, RayPath, SceneError};
use crate::units::SPEED_OF_LIGHT;

/// One row of `truth.csv`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TruthRow {
    pub delay_ns: f64,
    pub gain_db: f64,
    pub aoa_deg: f64,
    /// Bounce ids joined with `;`, empty for the direct path.
    pub bounces: String,
}

impl From<&RayPath> for TruthRow {
    fn from(p: &RayPath) -> Self {
        TruthRow {
            delay_ns: p.delay * 1e9,
            gain_db: p.gain_db,
            aoa_deg: p.aoa_elevation_deg,
            bounces: p.bounce_ids.join(";"),
        }
    }
}

pub fn write_truth_csv<W: Write>(channel: &GroundTruthChannel, w: W) -> Result<(), SceneError> {
    let mut out = csv::Writer::from_writer(w);
    for p in &channel.paths {
        out.serialize(TruthRow::from(p))?;
    }
    out.flush().map_err(csv::Error::from)?;
    Ok(())
}

/// Reads a truth table back into a channel. Geometry (vertices) is not stored,
/// so the returned paths carry none.
pub fn read_truth_csv<R: Read>(r: R, carrier_freq: f64) -> Result<GroundTruthChannel, SceneError> {
    let mut rdr = csv::Reader::from_reader(r);
    let mut paths = Vec::new();
    for row in rdr.deserialize() {
        let row: TruthRow = row?;
        let delay = row.delay_ns * 1e-9;
        let bounce_ids: Vec<String> = if row.bounces.is_empty() {
            Vec::new()
        } else {
            row.bounces.split(';').map(str::to_owned).collect()
        };
        paths.push(RayPath {
            path_length: delay * SPEED_OF_LIGHT,
            delay,
            gain_db: row.gain_db,
            ref_loss_db: 0.0,
            aoa_elevation_deg: row.aoa_deg,
            bounce_ids,
            vertices: Vec::new(),
        });
    }
    Ok(GroundTruthChannel::from_paths(paths, carrier_freq))
}
