//! Random key graph and Erdős–Rényi sampling, triangle counting, Monte Carlo
//! estimation and the exhaustive enumeration oracle.

mod adjacency;
pub mod montecarlo;
pub mod oracle;
pub mod sample;

pub use adjacency::Adjacency;
pub use montecarlo::{monte_carlo, monte_carlo_model, Estimate, MonteCarloEstimate};
pub use oracle::{brute_force_four_rings, brute_force_moments, BruteForceReport, DEFAULT_CAP};
pub use sample::{
    rings_intersect, sample_er, sample_key_rings, EdgeProbability, ErdosRenyiSample, GraphModel,
    KeyGraphSample,
};
