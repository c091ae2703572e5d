use nalgebra::Vector3;
use serde::{Deserialize, Serialize};

use super::gain::path_gain_db;
use super::scene::{PlanarReflector, Scene};
use super::SceneError;
use crate::units::SPEED_OF_LIGHT;

/// One resolved propagation path from tx to rx.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RayPath {
    pub path_length: f64,
    /// `path_length / c` (s).
    pub delay: f64,
    /// Tap power gain in dB. Straight out of [`trace_paths`] this only holds the
    /// negated surface losses; [`ground_truth_channel`] fills in the full value.
    pub gain_db: f64,
    /// Sum of per-bounce surface losses (dB).
    pub ref_loss_db: f64,
    /// Elevation of the arrival direction at the receiver (deg, positive up).
    pub aoa_elevation_deg: f64,
    /// Ids of the surfaces/scatterers hit, in propagation order. Empty for LOS.
    pub bounce_ids: Vec<String>,
    /// Interaction points, in propagation order.
    pub vertices: Vec<Vector3<f64>>,
}

impl RayPath {
    pub fn is_direct(&self) -> bool {
        self.bounce_ids.is_empty()
    }

    pub fn touches(&self, id: &str) -> bool {
        self.bounce_ids.iter().any(|b| b == id)
    }
}

/// Scalar link-budget terms applied on top of the geometry.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct RadioParams {
    pub carrier_freq: f64,
    pub g_tx_db: f64,
    pub g_rx_db: f64,
    pub l_sys_db: f64,
}

impl Default for RadioParams {
    fn default() -> Self {
        RadioParams {
            carrier_freq: 79e9,
            g_tx_db: 10.0,
            g_rx_db: 10.0,
            l_sys_db: 10.0,
        }
    }
}

/// Ray-traced tap-delay channel, sorted by delay.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GroundTruthChannel {
    pub paths: Vec<RayPath>,
    pub carrier_freq: f64,
}

impl GroundTruthChannel {
    pub fn strongest(&self) -> Option<&RayPath> {
        self.paths
            .iter()
            .max_by(|a, b| a.gain_db.total_cmp(&b.gain_db))
    }

    /// Builds a channel from explicit taps, sorting them by delay.
    pub fn from_paths(mut paths: Vec<RayPath>, carrier_freq: f64) -> Self {
        sort_paths(&mut paths);
        GroundTruthChannel {
            paths,
            carrier_freq,
        }
    }
}

fn sort_paths(paths: &mut [RayPath]) {
    paths.sort_by(|a, b| {
        a.delay
            .total_cmp(&b.delay)
            .then(a.bounce_ids.len().cmp(&b.bounce_ids.len()))
            .then_with(|| a.bounce_ids.cmp(&b.bounce_ids))
    });
}

fn occluded(
    reflectors: &[PlanarReflector],
    a: &Vector3<f64>,
    b: &Vector3<f64>,
    skip: &[usize],
) -> bool {
    reflectors
        .iter()
        .enumerate()
        .any(|(i, r)| !skip.contains(&i) && r.intersect_segment(a, b).is_some())
}

fn elevation_deg(rx: &Vector3<f64>, from: &Vector3<f64>) -> f64 {
    let d = from - rx;
    (d.z / d.norm()).clamp(-1.0, 1.0).asin().to_degrees()
}

fn make_path(
    scene: &Scene,
    vertices: Vec<Vector3<f64>>,
    bounce_ids: Vec<String>,
    ref_loss_db: f64,
) -> RayPath {
    let mut length = 0.0;
    let mut prev = scene.tx_position;
    for v in vertices.iter().chain(std::iter::once(&scene.rx_position)) {
        length += (v - prev).norm();
        prev = *v;
    }
    let last = vertices.last().copied().unwrap_or(scene.tx_position);
    RayPath {
        path_length: length,
        delay: length / SPEED_OF_LIGHT,
        gain_db: -ref_loss_db,
        ref_loss_db,
        aoa_elevation_deg: elevation_deg(&scene.rx_position, &last),
        bounce_ids,
        vertices,
    }
}

/// Resolves a specular path for one ordered reflector sequence, if it exists.
fn specular_path(scene: &Scene, seq: &[usize]) -> Option<RayPath> {
    let refl = &scene.reflectors;
    let mut images = Vec::with_capacity(seq.len() + 1);
    images.push(scene.tx_position);
    for &s in seq {
        let prev = *images.last().unwrap();
        images.push(refl[s].mirror(&prev));
    }

    // walk back from the receiver towards successive images
    let mut points = vec![Vector3::zeros(); seq.len()];
    let mut cur = scene.rx_position;
    for k in (0..seq.len()).rev() {
        let hit = refl[seq[k]].intersect_segment(&cur, &images[k + 1])?;
        points[k] = hit;
        cur = hit;
    }

    // occlusion on every leg, ignoring the plates at the leg endpoints
    let mut from = scene.tx_position;
    let mut from_refl: Option<usize> = None;
    for (k, p) in points.iter().enumerate() {
        let mut skip = vec![seq[k]];
        skip.extend(from_refl);
        if occluded(refl, &from, p, &skip) {
            return None;
        }
        from = *p;
        from_refl = Some(seq[k]);
    }
    let skip: Vec<usize> = from_refl.into_iter().collect();
    if occluded(refl, &from, &scene.rx_position, &skip) {
        return None;
    }

    let ids = seq.iter().map(|&s| refl[s].id.clone()).collect();
    let loss = seq.iter().map(|&s| refl[s].reflection_loss_db).sum();
    Some(make_path(scene, points, ids, loss))
}

fn enumerate_sequences(n_refl: usize, order: usize, prefix: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
    if prefix.len() == order {
        out.push(prefix.clone());
        return;
    }
    for i in 0..n_refl {
        // a plate cannot reflect twice in a row
        if prefix.last() == Some(&i) {
            continue;
        }
        prefix.push(i);
        enumerate_sequences(n_refl, order, prefix, out);
        prefix.pop();
    }
}

/// All specular paths up to `max_bounces` plus one path per visible point scatterer.
///
/// Returned gains hold only the surface losses; see [`ground_truth_channel`].
pub fn trace_paths(scene: &Scene) -> Result<Vec<RayPath>, SceneError> {
    scene.validate()?;
    let mut scene = scene.clone();
    scene.assign_default_ids();
    let refl = &scene.reflectors;
    let (tx, rx) = (scene.tx_position, scene.rx_position);

    let mut paths = Vec::new();
    if !occluded(refl, &tx, &rx, &[]) {
        paths.push(make_path(&scene, Vec::new(), Vec::new(), 0.0));
    }

    for order in 1..=scene.max_bounces {
        let mut seqs = Vec::new();
        enumerate_sequences(refl.len(), order, &mut Vec::new(), &mut seqs);
        paths.extend(seqs.iter().filter_map(|seq| specular_path(&scene, seq)));
    }

    for s in &scene.scatterers {
        if occluded(refl, &tx, &s.position, &[]) || occluded(refl, &s.position, &rx, &[]) {
            continue;
        }
        paths.push(make_path(
            &scene,
            vec![s.position],
            vec![s.id.clone()],
            s.scatter_loss_db,
        ));
    }

    if paths.is_empty() {
        return Err(SceneError::EmptyScene);
    }
    sort_paths(&mut paths);
    Ok(paths)
}

/// Traces the scene and applies the link budget to every path.
pub fn ground_truth_channel(
    scene: &Scene,
    radio: &RadioParams,
) -> Result<GroundTruthChannel, SceneError> {
    let mut paths = trace_paths(scene)?;
    for p in &mut paths {
        p.gain_db = path_gain_db(
            p.path_length,
            radio.carrier_freq,
            radio.g_tx_db,
            radio.g_rx_db,
            radio.l_sys_db,
            p.ref_loss_db,
        );
    }
    Ok(GroundTruthChannel {
        paths,
        carrier_freq: radio.carrier_freq,
    })
}
