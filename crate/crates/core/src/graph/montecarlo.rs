use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::sample::{seeded_rng, GraphModel};
use crate::exact::KeyParams;

/// Two-sided standard normal quantile for 99% coverage.
pub const Z_99: f64 = 2.5758293035489004;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Estimate {
    pub value: f64,
    pub ci_lo: f64,
    pub ci_hi: f64,
}

impl Estimate {
    pub fn covers(&self, x: f64) -> bool {
        self.ci_lo <= x && x <= self.ci_hi
    }

    pub fn overlaps(&self, other: &Estimate) -> bool {
        self.ci_lo <= other.ci_hi && other.ci_lo <= self.ci_hi
    }
}

/// Wilson score interval at 99%.
pub fn wilson(successes: u64, trials: u64) -> Estimate {
    let nf = trials as f64;
    let p = successes as f64 / nf;
    let z2 = Z_99 * Z_99;
    let denom = 1.0 + z2 / nf;
    let centre = (p + z2 / (2.0 * nf)) / denom;
    let half = Z_99 * (p * (1.0 - p) / nf + z2 / (4.0 * nf * nf)).sqrt() / denom;
    Estimate {
        value: p,
        ci_lo: (centre - half).max(0.0),
        ci_hi: (centre + half).min(1.0),
    }
}

/// Sample mean with a 99% normal interval from the sample variance.
pub fn normal_mean(xs: impl Iterator<Item = f64> + Clone) -> Estimate {
    let n = xs.clone().count() as f64;
    let mean = xs.clone().sum::<f64>() / n;
    let var = if n > 1.0 {
        xs.map(|x| (x - mean) * (x - mean)).sum::<f64>() / (n - 1.0)
    } else {
        0.0
    };
    let half = Z_99 * (var / n).sqrt();
    Estimate {
        value: mean,
        ci_lo: mean - half,
        ci_hi: mean + half,
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MonteCarloEstimate {
    pub n: u64,
    pub trials: u64,
    pub master_seed: u64,
    /// Trials with at least one triangle.
    pub hits: u64,
    pub p_triangle: Estimate,
    pub mean_t: Estimate,
    pub mean_t2: Estimate,
}

/// Triangle count of every trial, in trial order. Trial `i` samples from
/// stream `i` of `master_seed`, so the result does not depend on scheduling.
pub fn trial_counts<M: GraphModel>(n: usize, model: &M, trials: u64, master_seed: u64) -> Vec<u64> {
    (0..trials)
        .into_par_iter()
        .map(|i| {
            let mut rng = seeded_rng(master_seed, i);
            model.sample_adjacency(n, &mut rng).count_triangles()
        })
        .collect()
}

pub fn summarize(n: u64, counts: &[u64], master_seed: u64) -> MonteCarloEstimate {
    let trials = counts.len() as u64;
    let hits = counts.iter().filter(|&&t| t > 0).count() as u64;
    let ts = counts.iter().map(|&t| t as f64);
    MonteCarloEstimate {
        n,
        trials,
        master_seed,
        hits,
        p_triangle: wilson(hits, trials),
        mean_t: normal_mean(ts.clone()),
        mean_t2: normal_mean(ts.map(|t| t * t)),
    }
}

pub fn monte_carlo_model<M: GraphModel>(
    n: u64,
    model: &M,
    trials: u64,
    master_seed: u64,
) -> MonteCarloEstimate {
    assert!(trials >= 1, "monte carlo needs at least one trial");
    let counts = trial_counts(n as usize, model, trials, master_seed);
    summarize(n, &counts, master_seed)
}

/// Estimates `P[T>0]`, `E[T]` and `E[T^2]` for the random key graph.
pub fn monte_carlo(n: u64, theta: &KeyParams, trials: u64, master_seed: u64) -> MonteCarloEstimate {
    monte_carlo_model(n, theta, trials, master_seed)
}
