//! Error types shared across the crate.

use thiserror::Error;

use crate::model::ModelKind;

/// Errors from model construction and per-interval evaluation.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum ModelError {
    /// A scalar argument fell outside its mathematical domain.
    #[error("{what} out of domain: {value}")]
    Domain { what: &'static str, value: f64 },

    /// The remaining-fault term was non-positive at some observed interval;
    /// the parameter combination cannot have produced the data.
    #[error("infeasible at interval {interval}: remaining-fault term {bracket}")]
    Infeasible { interval: usize, bracket: f64 },

    /// The operation is not defined for this model kind.
    #[error("{op} is not supported for the {kind} model")]
    Unsupported { kind: ModelKind, op: &'static str },

    /// The spec is structurally invalid (missing components, bad lengths).
    #[error("invalid model spec: {0}")]
    InvalidSpec(String),
}

/// Errors from failure-series construction.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum SeriesError {
    #[error("interval {index}: duration must be positive, got {value}")]
    NonPositiveDuration { index: usize, value: f64 },

    #[error("interval {index}: failure count must be at least 1")]
    ZeroFailures { index: usize },

    #[error("series needs at least {needed} intervals, has {actual}")]
    TooShort { needed: usize, actual: usize },
}

/// Errors from dataset loading, writing, and bug-report ingestion.
#[derive(Debug, Error)]
pub enum DataError {
    #[error("row {row}: {message}")]
    Schema { row: usize, message: String },

    #[error("series {release}: {source}")]
    Series {
        release: String,
        source: SeriesError,
    },

    #[error("release windows: {0}")]
    Windows(String),

    #[error(transparent)]
    Csv(#[from] csv::Error),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

/// Errors from the swarm optimizer.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum OptimError {
    #[error("invalid bound for dimension {dim}: {message}")]
    InvalidBound { dim: usize, message: String },

    #[error("invalid swarm config: {0}")]
    InvalidConfig(String),
}

/// Errors from fitting and goodness-of-fit computation.
#[derive(Debug, Error)]
pub enum FitError {
    /// The optimizer never found a parameter vector feasible over the data.
    #[error("no feasible parameter vector found for {kind} on release {release}")]
    NoFeasiblePoint { kind: ModelKind, release: String },

    /// MSE needs more observations than freely estimated parameters.
    #[error("degrees of freedom exhausted: {intervals} intervals, {k_params} free parameters")]
    DegreesOfFreedom { intervals: usize, k_params: usize },

    #[error("objective: {0}")]
    Objective(String),

    #[error(transparent)]
    Model(#[from] ModelError),

    #[error(transparent)]
    Optim(#[from] OptimError),
}
