use nalgebra::Vector3;
use serde::{Deserialize, Serialize};

use super::SceneError;

/// Deeper reflection orders are rejected at validation time.
pub const MAX_SUPPORTED_BOUNCES: usize = 3;

const UNIT_NORM_TOL: f64 = 1e-9;
/// Plane-side tolerance (m) used by the segment/plate intersection test.
const PLANE_EPS: f64 = 1e-9;

/// A finite rectangular specular surface (both faces reflect).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PlanarReflector {
    #[serde(default)]
    pub id: String,
    pub center: Vector3<f64>,
    pub normal: Vector3<f64>,
    /// Half sizes along the two in-plane axes returned by [`PlanarReflector::axes`].
    pub half_extents: [f64; 2],
    #[serde(default)]
    pub reflection_loss_db: f64,
}

impl PlanarReflector {
    /// Orthonormal in-plane axes `(u, v)`.
    ///
    /// `u` is horizontal whenever the plate is not itself horizontal, so vertical
    /// plates have their extents laid out as (width, height).
    pub fn axes(&self) -> (Vector3<f64>, Vector3<f64>) {
        let n = self.normal;
        let helper = if n.z.abs() < 0.9 {
            Vector3::z()
        } else {
            Vector3::x()
        };
        let u = n.cross(&helper).normalize();
        let v = n.cross(&u);
        (u, v)
    }

    /// Mirror image of `p` through the reflector plane.
    pub fn mirror(&self, p: &Vector3<f64>) -> Vector3<f64> {
        let d = self.normal.dot(&(p - self.center));
        p - 2.0 * d * self.normal
    }

    pub fn signed_distance(&self, p: &Vector3<f64>) -> f64 {
        self.normal.dot(&(p - self.center))
    }

    /// Whether a point lying on the plane falls inside the rectangle.
    pub fn contains(&self, p: &Vector3<f64>) -> bool {
        let (u, v) = self.axes();
        let r = p - self.center;
        r.dot(&u).abs() <= self.half_extents[0] && r.dot(&v).abs() <= self.half_extents[1]
    }

    /// Crossing point of the open segment `a → b` with the plate, if any.
    ///
    /// Endpoints lying on the plane do not count as crossings.
    pub fn intersect_segment(&self, a: &Vector3<f64>, b: &Vector3<f64>) -> Option<Vector3<f64>> {
        let da = self.signed_distance(a);
        let db = self.signed_distance(b);
        if da.abs() <= PLANE_EPS || db.abs() <= PLANE_EPS || da.signum() == db.signum() {
            return None;
        }
        let t = da / (da - db);
        let p = a + (b - a) * t;
        self.contains(&p).then_some(p)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PointScatterer {
    #[serde(default)]
    pub id: String,
    pub position: Vector3<f64>,
    #[serde(default)]
    pub scatter_loss_db: f64,
}

/// Static propagation scene between the aggressor (tx) and the victim (rx).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Scene {
    pub tx_position: Vector3<f64>,
    pub rx_position: Vector3<f64>,
    #[serde(default)]
    pub reflectors: Vec<PlanarReflector>,
    #[serde(default)]
    pub scatterers: Vec<PointScatterer>,
    #[serde(default = "default_max_bounces")]
    pub max_bounces: usize,
}

fn default_max_bounces() -> usize {
    2
}

impl Scene {
    /// A scene with no objects.
    pub fn free_space(tx: Vector3<f64>, rx: Vector3<f64>) -> Self {
        Scene {
            tx_position: tx,
            rx_position: rx,
            reflectors: Vec::new(),
            scatterers: Vec::new(),
            max_bounces: default_max_bounces(),
        }
    }

    /// Fills empty ids with `plate{i}` / `scatterer{i}`.
    pub fn assign_default_ids(&mut self) {
        for (i, r) in self.reflectors.iter_mut().enumerate() {
            if r.id.is_empty() {
                r.id = format!("plate{i}");
            }
        }
        for (i, s) in self.scatterers.iter_mut().enumerate() {
            if s.id.is_empty() {
                s.id = format!("scatterer{i}");
            }
        }
    }

    /// Swaps transmitter and receiver.
    pub fn reversed(&self) -> Self {
        Scene {
            tx_position: self.rx_position,
            rx_position: self.tx_position,
            ..self.clone()
        }
    }

    pub fn without_object(&self, id: &str) -> Self {
        let mut s = self.clone();
        s.reflectors.retain(|r| r.id != id);
        s.scatterers.retain(|p| p.id != id);
        s
    }

    pub fn validate(&self) -> Result<(), SceneError> {
        let finite = |v: &Vector3<f64>| v.iter().all(|x| x.is_finite());
        if !finite(&self.tx_position) {
            return Err(SceneError::invalid("tx_position", "non-finite coordinate"));
        }
        if !finite(&self.rx_position) {
            return Err(SceneError::invalid("rx_position", "non-finite coordinate"));
        }
        if (self.tx_position - self.rx_position).norm() == 0.0 {
            return Err(SceneError::invalid(
                "rx_position",
                "must differ from tx_position",
            ));
        }
        if self.max_bounces > MAX_SUPPORTED_BOUNCES {
            return Err(SceneError::TooManyBounces(self.max_bounces));
        }
        let mut ids = std::collections::HashSet::new();
        for (i, r) in self.reflectors.iter().enumerate() {
            let field = |f: &str| format!("reflectors[{i}].{f}");
            if !finite(&r.center) {
                return Err(SceneError::invalid(field("center"), "non-finite coordinate"));
            }
            if !finite(&r.normal) || (r.normal.norm() - 1.0).abs() > UNIT_NORM_TOL {
                return Err(SceneError::invalid(
                    field("normal"),
                    format!("must have unit norm (got {})", r.normal.norm()),
                ));
            }
            if !r.half_extents.iter().all(|h| h.is_finite() && *h > 0.0) {
                return Err(SceneError::invalid(
                    field("half_extents"),
                    "must be strictly positive",
                ));
            }
            if !(r.reflection_loss_db.is_finite() && r.reflection_loss_db >= 0.0) {
                return Err(SceneError::invalid(
                    field("reflection_loss_db"),
                    "must be a finite value >= 0 dB",
                ));
            }
            if !r.id.is_empty() && !ids.insert(r.id.as_str()) {
                return Err(SceneError::invalid(field("id"), format!("duplicate id `{}`", r.id)));
            }
        }
        for (i, s) in self.scatterers.iter().enumerate() {
            let field = |f: &str| format!("scatterers[{i}].{f}");
            if !finite(&s.position) {
                return Err(SceneError::invalid(field("position"), "non-finite coordinate"));
            }
            if !(s.scatter_loss_db.is_finite() && s.scatter_loss_db >= 0.0) {
                return Err(SceneError::invalid(
                    field("scatter_loss_db"),
                    "must be a finite value >= 0 dB",
                ));
            }
            if !s.id.is_empty() && !ids.insert(s.id.as_str()) {
                return Err(SceneError::invalid(field("id"), format!("duplicate id `{}`", s.id)));
            }
        }
        Ok(())
    }
}
