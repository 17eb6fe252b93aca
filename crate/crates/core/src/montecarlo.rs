//! Brute-force Monte Carlo realization of the genie policy.
//!
//! Each sample draws a difficulty `d ~ U[0, 1)` and is served by the cheapest
//! feasible option whose model is correct on it (accuracy `>= d`), or fails.
//! Sample `i` always consumes the same position of a ChaCha stream keyed by
//! the seed, and partial statistics are merged in fixed chunk order, so the
//! estimate does not depend on the number of worker threads.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;

use crate::effectiveness::{service_options, ServiceOption};
use crate::propagation::RadioGrids;
use crate::scenario::Scenario;

const CHUNK: u64 = 8192;

/// Streaming mean/variance (Welford), mergeable in a fixed order.
#[derive(Debug, Clone, Copy, Default)]
struct Moments {
    n: u64,
    mean: f64,
    m2: f64,
}

impl Moments {
    fn push(&mut self, x: f64) {
        self.n += 1;
        let delta = x - self.mean;
        self.mean += delta / self.n as f64;
        self.m2 += delta * (x - self.mean);
    }

    fn merge(self, other: Moments) -> Moments {
        if self.n == 0 {
            return other;
        }
        if other.n == 0 {
            return self;
        }
        let n = self.n + other.n;
        let delta = other.mean - self.mean;
        Moments {
            n,
            mean: self.mean + delta * (other.n as f64 / n as f64),
            m2: self.m2 + other.m2 + delta * delta * (self.n as f64 * other.n as f64 / n as f64),
        }
    }

    fn estimate(self) -> Estimate {
        let std_error = if self.n > 1 {
            (self.m2 / (self.n - 1) as f64 / self.n as f64).sqrt()
        } else {
            0.0
        };
        Estimate {
            mean: self.mean,
            std_error,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Estimate {
    pub mean: f64,
    pub std_error: f64,
}

impl Estimate {
    /// `|mean - value| <= k` standard errors. A relative slack of 1e-12
    /// absorbs rounding when the standard error is zero.
    pub fn agrees_with(&self, value: f64, k: f64) -> bool {
        (self.mean - value).abs() <= k * self.std_error + 1e-12 * value.abs()
    }
}

/// Monte Carlo estimate of a genie outcome.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct GenieEstimate {
    pub n_samples: u64,
    pub effectiveness: Estimate,
    pub expected_compute_flops: Estimate,
    pub expected_activity_s: Estimate,
}

pub fn genie_mc_from_options(options: &[ServiceOption], n_samples: u64, seed: u64) -> GenieEstimate {
    assert!(n_samples >= 1, "n_samples must be at least 1");
    let feasible: Vec<&ServiceOption> = options.iter().filter(|o| o.feasible).collect();
    let chunks = n_samples.div_ceil(CHUNK);

    let partials: Vec<[Moments; 3]> = (0..chunks)
        .into_par_iter()
        .map(|chunk| {
            let start = chunk * CHUNK;
            let end = (start + CHUNK).min(n_samples);
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            // one u64 (two 32-bit words) per sample
            rng.set_word_pos(u128::from(start) * 2);
            let mut acc = [Moments::default(); 3];
            for _ in start..end {
                let difficulty: f64 = rng.random();
                let mut served: Option<&ServiceOption> = None;
                for &o in &feasible {
                    if o.model_accuracy < difficulty {
                        continue;
                    }
                    served = match served {
                        Some(s)
                            if (s.compute(), s.ap_id) <= (o.compute(), o.ap_id) => Some(s),
                        _ => Some(o),
                    };
                }
                let (hit, compute, activity) = match served {
                    Some(o) => (1.0, o.compute(), o.tx_delay_s),
                    None => (0.0, 0.0, 0.0),
                };
                acc[0].push(hit);
                acc[1].push(compute);
                acc[2].push(activity);
            }
            acc
        })
        .collect();

    let total = partials
        .into_iter()
        .fold([Moments::default(); 3], |acc, p| {
            [acc[0].merge(p[0]), acc[1].merge(p[1]), acc[2].merge(p[2])]
        });
    GenieEstimate {
        n_samples,
        effectiveness: total[0].estimate(),
        expected_compute_flops: total[1].estimate(),
        expected_activity_s: total[2].estimate(),
    }
}

pub fn genie_oracle_mc(
    pixel: usize,
    grids: &RadioGrids,
    scenario: &Scenario,
    n_samples: u64,
    seed: u64,
) -> GenieEstimate {
    genie_mc_from_options(&service_options(pixel, grids, scenario), n_samples, seed)
}

/// Seed for pixel `pixel` derived from a run seed (SplitMix64 finalizer).
pub fn pixel_seed(seed: u64, pixel: usize) -> u64 {
    let mut z = seed ^ (pixel as u64).wrapping_add(1).wrapping_mul(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn moments_merge_matches_sequential() {
        let xs: Vec<f64> = (0..1000).map(|i| ((i * 37) % 101) as f64 * 0.5).collect();
        let mut all = Moments::default();
        xs.iter().for_each(|&x| all.push(x));
        let (a, b) = xs.split_at(313);
        let mut ma = Moments::default();
        let mut mb = Moments::default();
        a.iter().for_each(|&x| ma.push(x));
        b.iter().for_each(|&x| mb.push(x));
        let merged = ma.merge(mb);
        assert_eq!(merged.n, all.n);
        assert!((merged.mean - all.mean).abs() < 1e-12);
        assert!((merged.m2 - all.m2).abs() < 1e-8 * all.m2);
    }

    #[test]
    fn single_sample_is_reproducible() {
        let opt = ServiceOption::new(1, 1e6, 1e5, 0.5, 1e9, 0.9, 1e12);
        let a = genie_mc_from_options(std::slice::from_ref(&opt), 1, 42);
        let b = genie_mc_from_options(std::slice::from_ref(&opt), 1, 42);
        assert_eq!(a, b);
        assert_eq!(a.effectiveness.std_error, 0.0);
    }

    #[test]
    fn random_access_matches_sequential_stream() {
        let mut seq = ChaCha8Rng::seed_from_u64(9);
        let draws: Vec<f64> = (0..CHUNK + 5).map(|_| seq.random()).collect();
        let mut jumped = ChaCha8Rng::seed_from_u64(9);
        jumped.set_word_pos(u128::from(CHUNK) * 2);
        assert_eq!(jumped.random::<f64>(), draws[CHUNK as usize]);
    }
}
