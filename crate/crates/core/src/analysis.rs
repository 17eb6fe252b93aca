//! Whole-scenario maps, areas of effectiveness and empirical CDFs.

use rayon::prelude::*;
use serde::Serialize;

use crate::effectiveness::{evaluate, Policy, PolicyOutcome};
use crate::error::{Error, Result};
use crate::grid::GridMap;
use crate::propagation::RadioGrids;
use crate::scenario::Scenario;

/// Effectiveness, computational-load and AP-activity rasters of one policy.
#[derive(Debug, Clone, PartialEq)]
pub struct PolicyMaps {
    pub policy: Policy,
    pub effectiveness: GridMap,
    /// FLOPS/s.
    pub compute_load: GridMap,
    /// Seconds.
    pub activity: GridMap,
}

impl PolicyMaps {
    pub fn layers(&self) -> [(&'static str, &GridMap); 3] {
        [
            ("effectiveness", &self.effectiveness),
            ("compute_load", &self.compute_load),
            ("activity", &self.activity),
        ]
    }
}

/// Per-pixel outcomes of `policy`; `None` at masked pixels.
pub fn policy_outcomes(
    policy: Policy,
    scenario: &Scenario,
    grids: &RadioGrids,
) -> Vec<Option<PolicyOutcome>> {
    (0..grids.len())
        .into_par_iter()
        .map(|i| grids.mask[i].then(|| evaluate(policy, i, grids, scenario)))
        .collect()
}

pub fn build_policy_maps(policy: Policy, scenario: &Scenario, grids: &RadioGrids) -> PolicyMaps {
    let outcomes = policy_outcomes(policy, scenario, grids);
    let layer = |unit: &str, field: fn(&PolicyOutcome) -> f64| {
        GridMap::from_fn(
            grids.cols,
            grids.rows,
            grids.pixel_size_m,
            grids.mask.clone(),
            unit,
            |i| field(outcomes[i].as_ref().unwrap()),
        )
    };
    PolicyMaps {
        policy,
        effectiveness: layer("probability", |o| o.effectiveness),
        compute_load: layer("FLOPS/s", |o| o.expected_compute_flops),
        activity: layer("s", |o| o.expected_activity_s),
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct AoeResult {
    /// 1 inside the area of effectiveness, 0 outside, masked as the input.
    pub map: GridMap,
    pub pixels: usize,
    pub area_m2: f64,
    /// Share of the valid area.
    pub fraction: f64,
    pub threshold: f64,
}

impl AoeResult {
    pub fn contains(&self, pixel: usize) -> bool {
        self.map.mask[pixel] && self.map.values[pixel] == 1.0
    }
}

/// Pixels whose effectiveness is at least `threshold` (inclusive, no slack).
pub fn area_of_effectiveness(effectiveness: &GridMap, threshold: f64) -> AoeResult {
    let map = GridMap::from_fn(
        effectiveness.cols,
        effectiveness.rows,
        effectiveness.pixel_size_m,
        effectiveness.mask.clone(),
        "in_aoe",
        |i| f64::from(u8::from(effectiveness.values[i] >= threshold)),
    );
    let pixels = map.valid_values().filter(|&v| v == 1.0).count();
    let valid = map.valid_count();
    AoeResult {
        pixels,
        area_m2: pixels as f64 * map.pixel_size_m * map.pixel_size_m,
        fraction: if valid == 0 { 0.0 } else { pixels as f64 / valid as f64 },
        threshold,
        map,
    }
}

/// Empirical CDF: `F(x)` is the fraction of samples `<= x`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Ecdf {
    sorted: Vec<f64>,
}

impl Ecdf {
    pub fn new(samples: impl IntoIterator<Item = f64>) -> Result<Self> {
        let mut sorted: Vec<f64> = samples.into_iter().collect();
        if sorted.is_empty() {
            return Err(Error::EmptyMap);
        }
        sorted.sort_by(f64::total_cmp);
        Ok(Self { sorted })
    }

    /// ECDF over the valid pixels of `map`.
    pub fn from_map(map: &GridMap) -> Result<Self> {
        Self::new(map.valid_values())
    }

    pub fn samples(&self) -> &[f64] {
        &self.sorted
    }

    pub fn len(&self) -> usize {
        self.sorted.len()
    }

    pub fn is_empty(&self) -> bool {
        self.sorted.is_empty()
    }

    pub fn eval(&self, x: f64) -> f64 {
        let below = self.sorted.partition_point(|&v| v <= x);
        below as f64 / self.sorted.len() as f64
    }

    /// One `(x, F(x))` point per distinct sample value, ascending.
    pub fn points(&self) -> Vec<(f64, f64)> {
        let n = self.sorted.len() as f64;
        let mut out: Vec<(f64, f64)> = Vec::new();
        for (i, &v) in self.sorted.iter().enumerate() {
            let f = (i + 1) as f64 / n;
            match out.last_mut() {
                Some(last) if last.0 == v => last.1 = f,
                _ => out.push((v, f)),
            }
        }
        out
    }

    pub fn to_csv_string(&self) -> String {
        self.points()
            .iter()
            .map(|(x, f)| format!("{x},{f}\n"))
            .collect()
    }
}
