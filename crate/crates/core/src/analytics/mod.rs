//! Measurements over wealth vectors and simulation traces.
//!
//! Quantities that do not exist for a given input (the Gini coefficient of
//! an economy with no money, the tail exponent of a constant sample) are
//! reported as [`Undefined`] rather than as zero.

pub mod audit;
pub mod convergence;
pub mod inequality;
pub mod stationary;
pub mod tail;

use std::fmt;

use thiserror::Error;

pub use audit::{conservation_audit, AuditReport};
pub use convergence::{convergence_diagnostics, ConvergenceReport};
pub use inequality::{gini, inequality_report, lorenz_curve, top_share, InequalityReport};
pub use stationary::{stationary_estimate, NotConverged, Stationary};
pub use tail::{default_hill_k, hill_estimator, TailFitReport};

/// Marker for a metric that has no value on the given input.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("undefined: {reason}")]
pub struct Undefined {
    pub reason: String,
}

impl Undefined {
    pub fn new(reason: impl fmt::Display) -> Self {
        Self {
            reason: reason.to_string(),
        }
    }
}

#[derive(Debug, Error)]
pub enum AnalyticsError {
    #[error(transparent)]
    Undefined(#[from] Undefined),

    #[error("trace has {found} full-vector snapshots; at least {needed} needed. Rerun with full snapshot content")]
    NeedFullSnapshots { needed: usize, found: usize },

    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("invalid argument: {0}")]
    InvalidArgument(String),
}
