//! Goal-oriented coverage planning for edge inference.
//!
//! Classic coverage maps say where the radio link is good. This crate answers
//! a different question: where does a user actually get a *correct*
//! classification *within a deadline*, given which model each access point
//! hosts, how much compute it can allocate and how long the uplink takes?
//! The set of such locations, at a given probability threshold, is the area
//! of effectiveness (AoE).
//!
//! Pipeline:
//!
//! 1. [`Scenario`] describes the floor plan, access points and models.
//! 2. [`RadioGrids`] holds per-AP RSS and Shannon capacity per pixel.
//! 3. [`effectiveness`] turns capacities into loop delays, feasible service
//!    options and per-pixel outcomes under the rss, best-model and genie
//!    association policies.
//! 4. [`analysis`] rasterizes outcomes, thresholds them into AoEs and builds
//!    ECDFs of the costs; [`placement`] searches model placements.

pub mod analysis;
pub mod effectiveness;
pub mod error;
pub mod grid;
pub mod montecarlo;
pub mod placement;
pub mod propagation;
pub mod scenario;
pub mod synth;

pub use analysis::{area_of_effectiveness, build_policy_maps, AoeResult, Ecdf, PolicyMaps};
pub use effectiveness::{
    associate_static, genie_evaluate, loop_delay, required_compute, service_option,
    transmission_delay, Policy, PolicyOutcome, ServiceOption, Serving,
};
pub use error::{Error, Result};
pub use grid::GridMap;
pub use montecarlo::{genie_oracle_mc, Estimate, GenieEstimate};
pub use placement::{placement_search, Placement, SearchMode};
pub use propagation::{
    capacity_bps, obstacle_crossings, path_loss_db, rss_dbm, RadioGrids,
};
pub use scenario::{
    AccessPoint, Application, InferenceModel, Obstacle, ObstacleKind, Point, RadioDefaults, Rect,
    Scenario, World,
};
