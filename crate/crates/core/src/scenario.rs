//! World model: geometry, access points, hosted inference models, application
//! requirements and radio parameters.
//!
//! A [`Scenario`] is loaded from a versioned JSON document. Loading fills every
//! default and checks every invariant, so a `Scenario` obtained through
//! [`Scenario::from_json`] is always valid and immutable afterwards.

use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub const SCHEMA_VERSION: u32 = 1;

pub const DEFAULT_PIXEL_SIZE_M: f64 = 2.0;
pub const DEFAULT_CARRIER_FREQ_HZ: f64 = 3.7e9;
pub const DEFAULT_BANDWIDTH_HZ: f64 = 360e3;
pub const DEFAULT_COMPUTE_CAPACITY_FLOPS: f64 = 1e12;
pub const DEFAULT_INPUT_BITS: f64 = 1.0e5;
pub const DEFAULT_DEADLINE_S: f64 = 0.5;
pub const DEFAULT_EFFECTIVENESS_THRESHOLD: f64 = 0.99;
pub const DEFAULT_PATH_LOSS_EXPONENT: f64 = 2.0;
pub const DEFAULT_NOISE_FIGURE_DB: f64 = 7.0;
pub const DEFAULT_NOISE_PSD_DBM_HZ: f64 = -174.0;

const SPEED_OF_LIGHT_M_S: f64 = 299_792_458.0;

/// A position in meters. Serialized as `[x, y]`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(from = "[f64; 2]", into = "[f64; 2]")]
pub struct Point {
    pub x: f64,
    pub y: f64,
}

impl Point {
    pub const fn new(x: f64, y: f64) -> Self {
        Self { x, y }
    }

    pub fn distance(self, other: Point) -> f64 {
        (self.x - other.x).hypot(self.y - other.y)
    }
}

impl From<[f64; 2]> for Point {
    fn from([x, y]: [f64; 2]) -> Self {
        Self { x, y }
    }
}

impl From<Point> for [f64; 2] {
    fn from(p: Point) -> Self {
        [p.x, p.y]
    }
}

/// Axis-aligned rectangle in meters.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Rect {
    pub x0: f64,
    pub y0: f64,
    pub x1: f64,
    pub y1: f64,
}

impl Rect {
    pub const fn new(x0: f64, y0: f64, x1: f64, y1: f64) -> Self {
        Self { x0, y0, x1, y1 }
    }

    /// Strict containment; the boundary is outside.
    pub fn contains_strictly(&self, p: Point) -> bool {
        self.x0 < p.x && p.x < self.x1 && self.y0 < p.y && p.y < self.y1
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ObstacleKind {
    Wall,
    Rack,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Obstacle {
    pub rect: Rect,
    pub kind: ObstacleKind,
    /// Loss added once per traversal of the rectangle.
    pub penetration_loss_db: f64,
    /// Pixels whose centers lie strictly inside are excluded from every map.
    pub blocks_service: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AccessPoint {
    pub id: u32,
    pub position: Point,
    pub tx_power_dbm: f64,
    #[serde(default = "default_carrier_freq")]
    pub carrier_freq_hz: f64,
    #[serde(default = "default_bandwidth")]
    pub bandwidth_hz: f64,
    pub model_id: String,
    /// Processing rate ceiling of the co-located compute unit, FLOPS/s.
    #[serde(default = "default_compute_capacity")]
    pub compute_capacity_flops: f64,
}

/// A classifier hosted at an access point.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct InferenceModel {
    pub id: String,
    /// Floating point operations per inference.
    pub flops: f64,
    /// Probability of a correct classification, in (0, 1].
    pub accuracy: f64,
}

impl InferenceModel {
    pub fn new(id: impl Into<String>, flops: f64, accuracy: f64) -> Self {
        Self {
            id: id.into(),
            flops,
            accuracy,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Application {
    /// Size of one uplink input sample, bits.
    #[serde(default = "default_input_bits")]
    pub input_bits: f64,
    /// Loop delay budget, seconds.
    #[serde(default = "default_deadline")]
    pub deadline_s: f64,
    /// Minimum goal-effectiveness for a location to count as covered.
    #[serde(default = "default_threshold")]
    pub effectiveness_threshold: f64,
}

impl Default for Application {
    fn default() -> Self {
        Self {
            input_bits: DEFAULT_INPUT_BITS,
            deadline_s: DEFAULT_DEADLINE_S,
            effectiveness_threshold: DEFAULT_EFFECTIVENESS_THRESHOLD,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RadioDefaults {
    #[serde(default = "default_path_loss_exponent")]
    pub path_loss_exponent: f64,
    /// Loss at 1 m. When absent, the free-space loss at each access point's
    /// own carrier frequency is used.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub reference_loss_db: Option<f64>,
    #[serde(default = "default_noise_figure")]
    pub noise_figure_db: f64,
    #[serde(default = "default_noise_psd")]
    pub noise_psd_dbm_hz: f64,
}

impl Default for RadioDefaults {
    fn default() -> Self {
        Self {
            path_loss_exponent: DEFAULT_PATH_LOSS_EXPONENT,
            reference_loss_db: None,
            noise_figure_db: DEFAULT_NOISE_FIGURE_DB,
            noise_psd_dbm_hz: DEFAULT_NOISE_PSD_DBM_HZ,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct World {
    pub width_m: f64,
    pub height_m: f64,
    #[serde(default = "default_pixel_size")]
    pub pixel_size_m: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Scenario {
    pub schema_version: u32,
    pub world: World,
    #[serde(default)]
    pub obstacles: Vec<Obstacle>,
    /// Sorted by id after loading.
    pub access_points: Vec<AccessPoint>,
    pub models: Vec<InferenceModel>,
    #[serde(default)]
    pub application: Application,
    #[serde(default)]
    pub radio: RadioDefaults,
}

fn default_carrier_freq() -> f64 {
    DEFAULT_CARRIER_FREQ_HZ
}
fn default_bandwidth() -> f64 {
    DEFAULT_BANDWIDTH_HZ
}
fn default_compute_capacity() -> f64 {
    DEFAULT_COMPUTE_CAPACITY_FLOPS
}
fn default_input_bits() -> f64 {
    DEFAULT_INPUT_BITS
}
fn default_deadline() -> f64 {
    DEFAULT_DEADLINE_S
}
fn default_threshold() -> f64 {
    DEFAULT_EFFECTIVENESS_THRESHOLD
}
fn default_path_loss_exponent() -> f64 {
    DEFAULT_PATH_LOSS_EXPONENT
}
fn default_noise_figure() -> f64 {
    DEFAULT_NOISE_FIGURE_DB
}
fn default_noise_psd() -> f64 {
    DEFAULT_NOISE_PSD_DBM_HZ
}
fn default_pixel_size() -> f64 {
    DEFAULT_PIXEL_SIZE_M
}

/// Image classifiers with their per-inference cost and top-1 accuracy on
/// imagenette.
pub fn reference_catalog() -> Vec<InferenceModel> {
    vec![
        InferenceModel::new("mobilenet_v3", 0.11e9, 0.957),
        InferenceModel::new("resnet50", 8.17e9, 0.9858),
        InferenceModel::new("resnet101", 15.5e9, 0.989),
        InferenceModel::new("vit_b_16", 33.6e9, 0.996),
    ]
}

/// Free-space path loss in dB at distance `d_m` for carrier `freq_hz`.
pub fn free_space_loss_db(d_m: f64, freq_hz: f64) -> f64 {
    20.0 * (4.0 * std::f64::consts::PI * d_m * freq_hz / SPEED_OF_LIGHT_M_S).log10()
}

impl Scenario {
    pub fn from_json(document: &str) -> Result<Self> {
        let scenario: Scenario = serde_json::from_str(document)?;
        scenario.validated()
    }

    pub fn from_path(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::from_json(&text)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("scenario serializes")
    }

    /// Checks every invariant and normalizes access point order by id.
    pub fn validated(mut self) -> Result<Self> {
        self.access_points.sort_by_key(|ap| ap.id);
        self.validate()?;
        Ok(self)
    }

    pub fn validate(&self) -> Result<()> {
        let fail = |msg: String| Err(Error::Validation(msg));

        if self.schema_version != SCHEMA_VERSION {
            return fail(format!(
                "unsupported schema_version {} (expected {SCHEMA_VERSION})",
                self.schema_version
            ));
        }

        let w = &self.world;
        for (name, v) in [
            ("width_m", w.width_m),
            ("height_m", w.height_m),
            ("pixel_size_m", w.pixel_size_m),
        ] {
            if !(v.is_finite() && v > 0.0) {
                return fail(format!("world.{name} must be finite and > 0, got {v}"));
            }
        }
        let (cols, rows) = (self.cols(), self.rows());
        if cols == 0 || rows == 0 || cols.checked_mul(rows).is_none() {
            return fail(format!("pixel grid {cols}x{rows} is not representable"));
        }

        for (i, ob) in self.obstacles.iter().enumerate() {
            let r = &ob.rect;
            if ![r.x0, r.y0, r.x1, r.y1].iter().all(|v| v.is_finite()) {
                return fail(format!("obstacle {i}: rectangle coordinates must be finite"));
            }
            if !(r.x0 < r.x1 && r.y0 < r.y1) {
                return fail(format!("obstacle {i}: rectangle requires x0 < x1 and y0 < y1"));
            }
            if !(ob.penetration_loss_db.is_finite() && ob.penetration_loss_db >= 0.0) {
                return fail(format!(
                    "obstacle {i}: penetration_loss_db must be finite and >= 0, got {}",
                    ob.penetration_loss_db
                ));
            }
        }

        let mut seen = std::collections::BTreeSet::new();
        for m in &self.models {
            if !seen.insert(m.id.as_str()) {
                return fail(format!("duplicate model id {:?}", m.id));
            }
            if !(m.flops.is_finite() && m.flops > 0.0) {
                return fail(format!("model {:?}: flops must be finite and > 0", m.id));
            }
            if !(m.accuracy > 0.0 && m.accuracy <= 1.0) {
                return fail(format!(
                    "model {:?}: accuracy must lie in (0, 1], got {}",
                    m.id, m.accuracy
                ));
            }
        }

        if self.access_points.is_empty() {
            return fail("at least one access point is required".into());
        }
        for pair in self.access_points.windows(2) {
            if pair[0].id == pair[1].id {
                return fail(format!("duplicate access point id {}", pair[0].id));
            }
        }
        for ap in &self.access_points {
            let p = ap.position;
            if !(p.x.is_finite() && p.y.is_finite())
                || p.x < 0.0
                || p.x > w.width_m
                || p.y < 0.0
                || p.y > w.height_m
            {
                return fail(format!(
                    "AP {} at ({}, {}) outside bounds [0, {}]x[0, {}]",
                    ap.id, p.x, p.y, w.width_m, w.height_m
                ));
            }
            if !ap.tx_power_dbm.is_finite() {
                return fail(format!("AP {}: tx_power_dbm must be finite", ap.id));
            }
            if !(ap.carrier_freq_hz.is_finite() && ap.carrier_freq_hz > 0.0) {
                return fail(format!("AP {}: carrier_freq_hz must be finite and > 0", ap.id));
            }
            if !(ap.bandwidth_hz.is_finite() && ap.bandwidth_hz > 0.0) {
                return fail(format!("AP {}: bandwidth_hz must be finite and > 0", ap.id));
            }
            if !(ap.compute_capacity_flops.is_finite() && ap.compute_capacity_flops > 0.0) {
                return fail(format!(
                    "AP {}: compute_capacity_flops must be finite and > 0",
                    ap.id
                ));
            }
            if self.model(&ap.model_id).is_none() {
                return fail(format!("AP {}: unknown model_id {:?}", ap.id, ap.model_id));
            }
        }

        let app = &self.application;
        if !(app.input_bits.is_finite() && app.input_bits > 0.0) {
            return fail(format!("application.input_bits must be > 0, got {}", app.input_bits));
        }
        if !(app.deadline_s.is_finite() && app.deadline_s > 0.0) {
            return fail(format!("application.deadline_s must be > 0, got {}", app.deadline_s));
        }
        if !(0.0..=1.0).contains(&app.effectiveness_threshold) {
            return fail(format!(
                "application.effectiveness_threshold must lie in [0, 1], got {}",
                app.effectiveness_threshold
            ));
        }

        let r = &self.radio;
        if !(r.path_loss_exponent.is_finite() && r.path_loss_exponent > 0.0) {
            return fail(format!(
                "radio.path_loss_exponent must be finite and > 0, got {}",
                r.path_loss_exponent
            ));
        }
        if !r.reference_loss_db.is_none_or(f64::is_finite)
            || !r.noise_figure_db.is_finite()
            || !r.noise_psd_dbm_hz.is_finite()
        {
            return fail("radio dB fields must be finite".into());
        }
        Ok(())
    }

    pub fn model(&self, id: &str) -> Option<&InferenceModel> {
        self.models.iter().find(|m| m.id == id)
    }

    /// Model hosted at `ap`. Valid scenarios always resolve.
    pub fn hosted_model(&self, ap: &AccessPoint) -> &InferenceModel {
        self.model(&ap.model_id)
            .expect("validated scenario resolves every model_id")
    }

    pub fn access_point(&self, id: u32) -> Option<&AccessPoint> {
        self.access_points.iter().find(|ap| ap.id == id)
    }

    pub fn cols(&self) -> usize {
        (self.world.width_m / self.world.pixel_size_m).ceil() as usize
    }

    pub fn rows(&self) -> usize {
        (self.world.height_m / self.world.pixel_size_m).ceil() as usize
    }

    /// Center of the pixel at `(row, col)`. Row 0 is the northern edge
    /// (largest y). Centers of partial border pixels are clamped to the world.
    pub fn pixel_center(&self, row: usize, col: usize) -> Point {
        let p = self.world.pixel_size_m;
        let x = ((col as f64 + 0.5) * p).min(self.world.width_m);
        let y = ((self.rows() - 1 - row) as f64 + 0.5) * p;
        Point::new(x, y.min(self.world.height_m))
    }

    /// Row-major validity mask: false where the pixel center is strictly
    /// inside a service-blocking obstacle.
    pub fn pixel_mask(&self) -> Vec<bool> {
        let (rows, cols) = (self.rows(), self.cols());
        let mut mask = Vec::with_capacity(rows * cols);
        for row in 0..rows {
            for col in 0..cols {
                let c = self.pixel_center(row, col);
                mask.push(
                    !self
                        .obstacles
                        .iter()
                        .any(|o| o.blocks_service && o.rect.contains_strictly(c)),
                );
            }
        }
        mask
    }

    /// Loss at 1 m seen from `ap`.
    pub fn reference_loss_db(&self, ap: &AccessPoint) -> f64 {
        self.radio
            .reference_loss_db
            .unwrap_or_else(|| free_space_loss_db(1.0, ap.carrier_freq_hz))
    }

    /// Access point hosting the most accurate model; ties go to the lowest id.
    pub fn best_model_ap(&self) -> &AccessPoint {
        let mut best = &self.access_points[0];
        for ap in &self.access_points[1..] {
            if self.hosted_model(ap).accuracy > self.hosted_model(best).accuracy {
                best = ap;
            }
        }
        best
    }
}
