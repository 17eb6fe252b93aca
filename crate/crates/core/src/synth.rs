//! Randomized scenarios for property tests and benchmarks.

use rand::Rng;

use crate::scenario::{
    reference_catalog, AccessPoint, Application, Obstacle, ObstacleKind, Point, RadioDefaults,
    Rect, Scenario, World, DEFAULT_BANDWIDTH_HZ, DEFAULT_CARRIER_FREQ_HZ,
    DEFAULT_COMPUTE_CAPACITY_FLOPS, SCHEMA_VERSION,
};

#[derive(Debug, Clone)]
pub struct SynthParams {
    pub min_cols: usize,
    pub max_cols: usize,
    pub min_rows: usize,
    pub max_rows: usize,
    pub max_aps: usize,
    pub max_obstacles: usize,
    pub pixel_size_m: f64,
}

impl Default for SynthParams {
    fn default() -> Self {
        Self {
            min_cols: 1,
            max_cols: 40,
            min_rows: 1,
            max_rows: 40,
            max_aps: 8,
            max_obstacles: 6,
            pixel_size_m: 2.0,
        }
    }
}

/// A random valid scenario using the reference model catalog. All access
/// points share one bandwidth, so the strongest AP is also the fastest.
pub fn random_scenario(rng: &mut impl Rng, params: &SynthParams) -> Scenario {
    let cols = rng.random_range(params.min_cols.max(1)..=params.max_cols);
    let rows = rng.random_range(params.min_rows.max(1)..=params.max_rows);
    let width_m = cols as f64 * params.pixel_size_m;
    let height_m = rows as f64 * params.pixel_size_m;
    let models = reference_catalog();

    let n_aps = rng.random_range(1..=params.max_aps);
    let access_points = (0..n_aps)
        .map(|i| AccessPoint {
            id: i as u32 + 1,
            position: Point::new(rng.random_range(0.0..=width_m), rng.random_range(0.0..=height_m)),
            tx_power_dbm: rng.random_range(-15.0..20.0),
            carrier_freq_hz: DEFAULT_CARRIER_FREQ_HZ,
            bandwidth_hz: DEFAULT_BANDWIDTH_HZ,
            model_id: models[rng.random_range(0..models.len())].id.clone(),
            compute_capacity_flops: DEFAULT_COMPUTE_CAPACITY_FLOPS,
        })
        .collect();

    let n_obstacles = rng.random_range(0..=params.max_obstacles);
    let obstacles = (0..n_obstacles)
        .map(|_| {
            let x0 = rng.random_range(0.0..width_m);
            let y0 = rng.random_range(0.0..height_m);
            let x1 = rng.random_range(x0..=width_m.max(x0 + 0.5)) + 1e-3;
            let y1 = rng.random_range(y0..=height_m.max(y0 + 0.5)) + 1e-3;
            Obstacle {
                rect: Rect::new(x0, y0, x1, y1),
                kind: if rng.random_bool(0.5) { ObstacleKind::Wall } else { ObstacleKind::Rack },
                penetration_loss_db: rng.random_range(0.0..25.0),
                blocks_service: rng.random_bool(0.3),
            }
        })
        .collect();

    Scenario {
        schema_version: SCHEMA_VERSION,
        world: World {
            width_m,
            height_m,
            pixel_size_m: params.pixel_size_m,
        },
        obstacles,
        access_points,
        models,
        application: Application::default(),
        radio: RadioDefaults {
            path_loss_exponent: rng.random_range(2.0..4.0),
            ..RadioDefaults::default()
        },
    }
    .validated()
    .expect("synthetic scenarios are valid by construction")
}
