//! Synthetic circulation matrices and schedules.
//!
//! A matrix is generated from a trade network ([`TopologySpec`]: who may
//! buy from whom) and a spending model ([`SpendingSpec`]: how much each buyer
//! spends and how it splits that amount among its sellers). These are
//! modeling knobs for exploration, not calibrated behavior.

mod edge_list;
mod matrix;
mod schedule;
mod spending;
mod topology;

use std::path::PathBuf;

use thiserror::Error;

pub use edge_list::{load_edge_list, parse_edge_list};
pub use matrix::{generate_matrix, generate_matrix_with, GenerationStats};
pub use schedule::{generate_schedule, ScheduleSpec, ScheduleSpecKind};
pub use spending::{Allocation, Propensity, SpendingSpec};
pub use topology::{Topology, TopologySpec};

use crate::ModelError;

#[derive(Debug, Error)]
pub enum GeneratorError {
    #[error("invalid {field}: {message}")]
    InvalidSpec { field: &'static str, message: String },

    #[error("{path}: line {line}: {message}")]
    EdgeList {
        path: PathBuf,
        line: usize,
        message: String,
    },

    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error(transparent)]
    Model(#[from] ModelError),
}

impl GeneratorError {
    pub(crate) fn spec(field: &'static str, message: impl Into<String>) -> Self {
        GeneratorError::InvalidSpec {
            field,
            message: message.into(),
        }
    }
}
