//! Failure-rate software reliability analysis: six hazard-based models over
//! time-between-failure data, maximum-likelihood fitting with a hybrid
//! particle-swarm/gravitational-search optimizer, and SSE/MSE comparison of
//! models per release.
//!
//! The pieces compose bottom-up:
//!
//! - [`series`]: per-release interval observations.
//! - [`model`]: the six failure intensities and their survival laws.
//! - [`likelihood`]: log-likelihood, gradients, and the penalized objective.
//! - [`optimizer`]: the seeded, derivative-free swarm minimizer.
//! - [`gof`]: fitting, SSE/MSE, and multi-model comparison.
//! - [`report`]: markdown/CSV/JSON rendering of fits and comparisons.
//! - [`data`]: dataset CSV schemas, bug-report ingestion, and simulation.

pub mod data;
pub mod error;
pub mod gof;
pub mod likelihood;
pub mod model;
pub mod optimizer;
pub mod report;
pub mod series;

pub use error::{DataError, FitError, ModelError, OptimError, SeriesError};
pub use model::{
    gamma_from_mu, jm_equivalent_gamma_sequence, mu_from_gamma, DebugProbs, IntervalContext,
    ModelKind, ModelSpec, Modulation,
};
pub use series::{FailureRecord, FailureSeries};
