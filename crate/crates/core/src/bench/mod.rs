//! Desk-scale reproduction of the two experiments: gas versus quantity for
//! the two token standards, and authentication latency across schemes on
//! simulated time.

pub mod auth;
pub mod exec;
pub mod gas;
pub mod latency;
pub mod report;

pub use auth::{run_auth_benchmark, AuthRun, AuthStats, SchemeKind, TrialResult};
pub use exec::Execution;
pub use gas::{run_gas_benchmark, GasRow};
pub use latency::LatencyModel;

use thiserror::Error;

#[derive(Debug, Error)]
pub enum BenchError {
    #[error("invalid parameter: {0}")]
    Invalid(String),
    #[error("benchmark fixture failed: {0}")]
    Fixture(String),
    #[error("gas not reproducible: {0}")]
    NonDeterministic(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error(transparent)]
    Csv(#[from] csv::Error),
}
