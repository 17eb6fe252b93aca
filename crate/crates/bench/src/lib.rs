//! Fixtures shared by the benchmarks.

use aoe_core::synth::{random_scenario, SynthParams};
use aoe_core::Scenario;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

pub const FACTORY: &str = concat!(env!("CARGO_MANIFEST_DIR"), "/../../scenarios/factory.json");

pub fn factory() -> Scenario {
    Scenario::from_path(FACTORY).expect("bundled scenario loads")
}

/// A full-size random scenario: 40x40 pixels, 8 APs, 6 obstacles.
pub fn large_random(seed: u64) -> Scenario {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let params = SynthParams {
        min_cols: 40,
        min_rows: 40,
        ..SynthParams::default()
    };
    loop {
        let s = random_scenario(&mut rng, &params);
        if s.access_points.len() == params.max_aps && s.obstacles.len() == params.max_obstacles {
            return s;
        }
    }
}
