//! Loop delay, per-link service feasibility and per-pixel goal-effectiveness
//! under the three association policies.
//!
//! Correctness model: every input sample has a difficulty `d ~ U(0, 1)` and a
//! model with accuracy `a` classifies it correctly iff `a >= d`. A more
//! accurate model is therefore correct on a superset of the samples a less
//! accurate one gets right.
//!
//! Compute is allocated minimally: exactly the rate that makes the loop delay
//! hit the deadline. A pixel whose goal fails costs nothing.

use serde::{Deserialize, Serialize};

use crate::propagation::RadioGrids;
use crate::scenario::Scenario;

/// `input_bits / rate_bps`; infinite when the rate is zero.
pub fn transmission_delay(input_bits: f64, rate_bps: f64) -> f64 {
    if rate_bps > 0.0 {
        input_bits / rate_bps
    } else {
        f64::INFINITY
    }
}

/// Minimal processing rate (FLOPS/s) that meets `deadline_s` after spending
/// `tx_delay_s` on the uplink. `None` when no compute slack is left.
pub fn required_compute(model_flops: f64, deadline_s: f64, tx_delay_s: f64) -> Option<f64> {
    (tx_delay_s < deadline_s).then(|| model_flops / (deadline_s - tx_delay_s))
}

/// Transmission plus computation delay.
pub fn loop_delay(input_bits: f64, rate_bps: f64, model_flops: f64, allocated_flops: f64) -> f64 {
    transmission_delay(input_bits, rate_bps) + model_flops / allocated_flops
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Policy {
    /// Strongest received signal.
    Rss,
    /// Always the access point hosting the most accurate model.
    BestModel,
    /// Per-sample oracle: cheapest feasible option that classifies correctly.
    Genie,
}

impl Policy {
    pub const ALL: [Policy; 3] = [Policy::Rss, Policy::BestModel, Policy::Genie];

    pub fn name(self) -> &'static str {
        match self {
            Policy::Rss => "rss",
            Policy::BestModel => "best_model",
            Policy::Genie => "genie",
        }
    }
}

impl std::fmt::Display for Policy {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.name())
    }
}

impl std::str::FromStr for Policy {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Policy::ALL
            .into_iter()
            .find(|p| p.name() == s)
            .ok_or_else(|| format!("unknown policy {s:?}"))
    }
}

/// One (pixel, access point) link evaluated end to end.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ServiceOption {
    pub ap_id: u32,
    pub rate_bps: f64,
    pub tx_delay_s: f64,
    pub model_accuracy: f64,
    pub model_flops: f64,
    /// `None` when the uplink alone exhausts the deadline.
    pub required_compute_flops: Option<f64>,
    pub feasible: bool,
}

impl ServiceOption {
    pub fn new(
        ap_id: u32,
        rate_bps: f64,
        input_bits: f64,
        deadline_s: f64,
        model_flops: f64,
        model_accuracy: f64,
        compute_capacity_flops: f64,
    ) -> Self {
        let tx_delay_s = transmission_delay(input_bits, rate_bps);
        let required_compute_flops = required_compute(model_flops, deadline_s, tx_delay_s);
        let feasible = required_compute_flops.is_some_and(|f| f <= compute_capacity_flops);
        Self {
            ap_id,
            rate_bps,
            tx_delay_s,
            model_accuracy,
            model_flops,
            required_compute_flops,
            feasible,
        }
    }

    /// Required compute of a feasible option.
    pub fn compute(&self) -> f64 {
        debug_assert!(self.feasible);
        self.required_compute_flops.unwrap_or(f64::INFINITY)
    }
}

/// Service option for the access point at index `ap_index` seen from pixel
/// `pixel` (row-major index).
pub fn service_option(
    ap_index: usize,
    pixel: usize,
    grids: &RadioGrids,
    scenario: &Scenario,
) -> ServiceOption {
    let ap = &scenario.access_points[ap_index];
    let model = scenario.hosted_model(ap);
    let app = &scenario.application;
    ServiceOption::new(
        ap.id,
        grids.aps[ap_index].capacity_bps.values[pixel],
        app.input_bits,
        app.deadline_s,
        model.flops,
        model.accuracy,
        ap.compute_capacity_flops,
    )
}

/// All service options at `pixel`, in access point id order.
pub fn service_options(pixel: usize, grids: &RadioGrids, scenario: &Scenario) -> Vec<ServiceOption> {
    (0..scenario.access_points.len())
        .map(|i| service_option(i, pixel, grids, scenario))
        .collect()
}

/// The genie's choice for difficulty band `(lower, upper]`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct GenieBand {
    pub lower: f64,
    pub upper: f64,
    pub ap_id: u32,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Serving {
    /// Goal failure everywhere: nothing is transmitted.
    None,
    Static { ap_id: u32 },
    Genie(Vec<GenieBand>),
}

/// Per-pixel result of an association policy.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PolicyOutcome {
    /// Probability of a correct result within the deadline.
    pub effectiveness: f64,
    /// Expected processing rate spent, FLOPS/s.
    pub expected_compute_flops: f64,
    /// Expected uplink transmitter-on time, seconds.
    pub expected_activity_s: f64,
    pub serving: Serving,
}

impl PolicyOutcome {
    pub fn failure() -> Self {
        Self {
            effectiveness: 0.0,
            expected_compute_flops: 0.0,
            expected_activity_s: 0.0,
            serving: Serving::None,
        }
    }
}

/// Index of the option with the strongest RSS at `pixel`; ties go to the
/// lowest AP id.
fn strongest_ap(pixel: usize, grids: &RadioGrids) -> usize {
    let mut best = 0;
    for (i, ap) in grids.aps.iter().enumerate().skip(1) {
        if ap.rss_dbm.values[pixel] > grids.aps[best].rss_dbm.values[pixel] {
            best = i;
        }
    }
    best
}

/// Outcome of serving every sample through `option`: a feasible static
/// policy pays full cost even for misclassified samples.
pub fn static_outcome(option: &ServiceOption) -> PolicyOutcome {
    if option.feasible {
        PolicyOutcome {
            effectiveness: option.model_accuracy,
            expected_compute_flops: option.compute(),
            expected_activity_s: option.tx_delay_s,
            serving: Serving::Static {
                ap_id: option.ap_id,
            },
        }
    } else {
        PolicyOutcome::failure()
    }
}

/// Outcome of the rss or best-model policy at `pixel`.
///
/// # Panics
/// On [`Policy::Genie`], which is not a static policy.
pub fn associate_static(
    policy: Policy,
    pixel: usize,
    grids: &RadioGrids,
    scenario: &Scenario,
) -> PolicyOutcome {
    let ap_index = match policy {
        Policy::Rss => strongest_ap(pixel, grids),
        Policy::BestModel => {
            let id = scenario.best_model_ap().id;
            scenario
                .access_points
                .iter()
                .position(|ap| ap.id == id)
                .unwrap()
        }
        Policy::Genie => panic!("genie is not a static policy"),
    };
    static_outcome(&service_option(ap_index, pixel, grids, scenario))
}

/// Feasible options sorted by (required compute, AP id): the order in which
/// the genie prefers them.
pub(crate) fn genie_preference(options: &[ServiceOption]) -> Vec<&ServiceOption> {
    let mut feasible: Vec<&ServiceOption> = options.iter().filter(|o| o.feasible).collect();
    feasible.sort_by(|a, b| a.compute().total_cmp(&b.compute()).then(a.ap_id.cmp(&b.ap_id)));
    feasible
}

/// Closed-form genie outcome over a set of service options.
///
/// With distinct feasible accuracies `a_1 < ... < a_K`, samples with
/// difficulty in `(a_{k-1}, a_k]` are served by the cheapest feasible option
/// whose accuracy is at least `a_k`. Samples harder than `a_K` fail and cost
/// nothing.
pub fn genie_from_options(options: &[ServiceOption]) -> PolicyOutcome {
    let preference = genie_preference(options);
    if preference.is_empty() {
        return PolicyOutcome::failure();
    }
    let mut levels: Vec<f64> = preference.iter().map(|o| o.model_accuracy).collect();
    levels.sort_by(f64::total_cmp);
    levels.dedup();

    let mut outcome = PolicyOutcome {
        effectiveness: *levels.last().unwrap(),
        expected_compute_flops: 0.0,
        expected_activity_s: 0.0,
        serving: Serving::None,
    };
    let mut bands = Vec::with_capacity(levels.len());
    let mut lower = 0.0;
    for &upper in &levels {
        let choice = preference
            .iter()
            .find(|o| o.model_accuracy >= upper)
            .expect("the option defining this level qualifies");
        let weight = upper - lower;
        outcome.expected_compute_flops += weight * choice.compute();
        outcome.expected_activity_s += weight * choice.tx_delay_s;
        bands.push(GenieBand {
            lower,
            upper,
            ap_id: choice.ap_id,
        });
        lower = upper;
    }
    outcome.serving = Serving::Genie(bands);
    outcome
}

pub fn genie_evaluate(pixel: usize, grids: &RadioGrids, scenario: &Scenario) -> PolicyOutcome {
    genie_from_options(&service_options(pixel, grids, scenario))
}

pub fn evaluate(policy: Policy, pixel: usize, grids: &RadioGrids, scenario: &Scenario) -> PolicyOutcome {
    match policy {
        Policy::Genie => genie_evaluate(pixel, grids, scenario),
        p => associate_static(p, pixel, grids, scenario),
    }
}
