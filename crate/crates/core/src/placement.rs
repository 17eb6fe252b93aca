//! Model-to-AP placement search maximizing the genie area of effectiveness.
//!
//! Under the genie policy a pixel is in the area of effectiveness iff some
//! access point offers a feasible option whose model accuracy reaches the
//! threshold. That set depends on each AP's model independently, so every
//! (AP, candidate model) pair is precomputed once as a pixel bitset and an
//! assignment is scored by the population count of the union.

use rayon::prelude::*;
use serde::Serialize;

use crate::effectiveness::ServiceOption;
use crate::error::{Error, Result};
use crate::propagation::RadioGrids;
use crate::scenario::Scenario;

pub const EXHAUSTIVE_LIMIT: u128 = 1_000_000;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum SearchMode {
    Exhaustive,
    Greedy,
}

impl std::str::FromStr for SearchMode {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, Self::Err> {
        match s {
            "exhaustive" => Ok(SearchMode::Exhaustive),
            "greedy" => Ok(SearchMode::Greedy),
            _ => Err(format!("unknown search mode {s:?}")),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Placement {
    pub mode: SearchMode,
    /// `(ap_id, model_id)` in AP id order.
    pub assignment: Vec<(u32, String)>,
    pub aoe_pixels: usize,
    pub aoe_fraction: f64,
    pub threshold: f64,
    pub assignments_evaluated: u128,
}

impl Placement {
    /// The scenario with this placement's models installed.
    pub fn apply(&self, scenario: &Scenario) -> Scenario {
        let mut out = scenario.clone();
        for (ap_id, model_id) in &self.assignment {
            if let Some(ap) = out.access_points.iter_mut().find(|a| a.id == *ap_id) {
                ap.model_id = model_id.clone();
            }
        }
        out
    }
}

/// Every catalog model is a candidate at every AP.
pub fn full_catalog_candidates(scenario: &Scenario) -> Vec<Vec<String>> {
    let ids: Vec<String> = scenario.models.iter().map(|m| m.id.clone()).collect();
    vec![ids; scenario.access_points.len()]
}

#[derive(Clone)]
struct Bits(Vec<u64>);

impl Bits {
    fn zeros(n: usize) -> Self {
        Bits(vec![0; n.div_ceil(64)])
    }

    fn set(&mut self, i: usize) {
        self.0[i / 64] |= 1 << (i % 64);
    }

    fn or_assign(&mut self, other: &Bits) {
        for (a, b) in self.0.iter_mut().zip(&other.0) {
            *a |= b;
        }
    }

    fn union_count(&self, other: &Bits) -> usize {
        self.0
            .iter()
            .zip(&other.0)
            .map(|(a, b)| (a | b).count_ones() as usize)
            .sum()
    }

    fn count(&self) -> usize {
        self.0.iter().map(|w| w.count_ones() as usize).sum()
    }
}

struct Instance {
    /// Sorted, deduplicated candidate model ids per AP index.
    candidates: Vec<Vec<String>>,
    /// `qualifies[ap][candidate]`: pixels where that pairing alone reaches the threshold.
    qualifies: Vec<Vec<Bits>>,
    /// Pixels in the AoE regardless of placement (threshold <= 0).
    base: Bits,
    valid: usize,
}

impl Instance {
    fn new(
        scenario: &Scenario,
        grids: &RadioGrids,
        candidates: &[Vec<String>],
        threshold: f64,
    ) -> Result<Self> {
        if candidates.len() != scenario.access_points.len() {
            return Err(Error::InvalidArgument(format!(
                "{} candidate lists for {} access points",
                candidates.len(),
                scenario.access_points.len()
            )));
        }
        let n = grids.len();
        let app = &scenario.application;
        let mut sorted = Vec::with_capacity(candidates.len());
        let mut qualifies = Vec::with_capacity(candidates.len());
        for (ap_index, (ap, list)) in scenario.access_points.iter().zip(candidates).enumerate() {
            let mut list = list.clone();
            list.sort();
            list.dedup();
            if list.is_empty() {
                return Err(Error::InvalidArgument(format!("AP {} has no candidate models", ap.id)));
            }
            let mut per_model = Vec::with_capacity(list.len());
            for id in &list {
                let model = scenario.model(id).ok_or_else(|| {
                    Error::InvalidArgument(format!("AP {}: unknown candidate model {id:?}", ap.id))
                })?;
                let mut bits = Bits::zeros(n);
                if model.accuracy >= threshold {
                    for pixel in (0..n).filter(|&i| grids.mask[i]) {
                        let opt = ServiceOption::new(
                            ap.id,
                            grids.aps[ap_index].capacity_bps.values[pixel],
                            app.input_bits,
                            app.deadline_s,
                            model.flops,
                            model.accuracy,
                            ap.compute_capacity_flops,
                        );
                        if opt.feasible {
                            bits.set(pixel);
                        }
                    }
                }
                per_model.push(bits);
            }
            sorted.push(list);
            qualifies.push(per_model);
        }
        let mut base = Bits::zeros(n);
        if threshold <= 0.0 {
            (0..n).filter(|&i| grids.mask[i]).for_each(|i| base.set(i));
        }
        Ok(Self {
            candidates: sorted,
            qualifies,
            base,
            valid: grids.mask.iter().filter(|&&m| m).count(),
        })
    }

    fn space(&self) -> u128 {
        self.candidates
            .iter()
            .try_fold(1u128, |acc, c| acc.checked_mul(c.len() as u128))
            .unwrap_or(u128::MAX)
    }

    /// Candidate indices of the `index`-th assignment in lexicographic order.
    fn decode(&self, mut index: u128) -> Vec<usize> {
        let mut choice = vec![0; self.candidates.len()];
        for (slot, list) in choice.iter_mut().zip(&self.candidates).rev() {
            let k = list.len() as u128;
            *slot = (index % k) as usize;
            index /= k;
        }
        choice
    }

    fn score(&self, choice: &[usize]) -> usize {
        let mut acc = self.base.clone();
        for (ap, &c) in choice.iter().enumerate() {
            acc.or_assign(&self.qualifies[ap][c]);
        }
        acc.count()
    }

    fn placement(&self, scenario: &Scenario, mode: SearchMode, choice: &[usize], pixels: usize, threshold: f64, evaluated: u128) -> Placement {
        Placement {
            mode,
            assignment: scenario
                .access_points
                .iter()
                .zip(choice)
                .enumerate()
                .map(|(ap, (a, &c))| (a.id, self.candidates[ap][c].clone()))
                .collect(),
            aoe_pixels: pixels,
            aoe_fraction: if self.valid == 0 { 0.0 } else { pixels as f64 / self.valid as f64 },
            threshold,
            assignments_evaluated: evaluated,
        }
    }
}

/// Finds the model assignment maximizing the genie AoE at `threshold`.
///
/// `candidates[i]` lists the model ids allowed at `scenario.access_points[i]`.
/// Exhaustive search returns the global optimum, breaking ties toward the
/// lexicographically smallest assignment (compared AP by AP in id order).
/// Greedy search fixes APs in id order, each to the model that maximizes the
/// AoE given the APs fixed so far (unfixed APs do not serve).
pub fn placement_search(
    scenario: &Scenario,
    grids: &RadioGrids,
    candidates: &[Vec<String>],
    threshold: f64,
    mode: SearchMode,
) -> Result<Placement> {
    let inst = Instance::new(scenario, grids, candidates, threshold)?;
    match mode {
        SearchMode::Exhaustive => {
            let size = inst.space();
            if size > EXHAUSTIVE_LIMIT {
                return Err(Error::SearchSpaceOverflow {
                    size,
                    limit: EXHAUSTIVE_LIMIT,
                });
            }
            let (best_index, best_score) = (0..size as u64)
                .into_par_iter()
                .map(|i| (i, inst.score(&inst.decode(i as u128))))
                .reduce(
                    || (u64::MAX, 0),
                    |a, b| {
                        if b.1 > a.1 || (b.1 == a.1 && b.0 < a.0) {
                            b
                        } else {
                            a
                        }
                    },
                );
            Ok(inst.placement(scenario, mode, &inst.decode(best_index as u128), best_score, threshold, size))
        }
        SearchMode::Greedy => {
            let mut acc = inst.base.clone();
            let mut choice = Vec::with_capacity(inst.candidates.len());
            let mut evaluated = 0u128;
            for per_model in &inst.qualifies {
                let mut best = (0, acc.union_count(&per_model[0]));
                for (c, bits) in per_model.iter().enumerate().skip(1) {
                    let score = acc.union_count(bits);
                    if score > best.1 {
                        best = (c, score);
                    }
                }
                evaluated += per_model.len() as u128;
                acc.or_assign(&per_model[best.0]);
                choice.push(best.0);
            }
            let pixels = acc.count();
            Ok(inst.placement(scenario, mode, &choice, pixels, threshold, evaluated))
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn bits_union() {
        let mut a = Bits::zeros(130);
        let mut b = Bits::zeros(130);
        a.set(0);
        a.set(129);
        b.set(129);
        b.set(64);
        assert_eq!(a.union_count(&b), 3);
        a.or_assign(&b);
        assert_eq!(a.count(), 3);
    }

    #[test]
    fn mode_parsing() {
        assert_eq!("greedy".parse::<SearchMode>(), Ok(SearchMode::Greedy));
        assert!("random".parse::<SearchMode>().is_err());
    }
}
