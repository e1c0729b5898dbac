//! Triangles in random key graphs: exact moments, the polynomial structure
//! of the cross-moment numerator, sampling, and finite-n asymptotic probes.

pub mod asymptotics;
pub mod error;
pub mod exact;
pub mod graph;
pub mod poly;

pub use error::{CoreError, Result};
pub use exact::{KeyParams, Rational};
