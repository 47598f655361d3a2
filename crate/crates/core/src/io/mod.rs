//! Text formats.
//!
//! Matrices use a triplet format:
//!
//! ```text
//! # optional comment lines
//! cfm <n> <nnz>
//! <i> <j> <f_ij>        (nnz lines, 1-based, any order)
//! ```
//!
//! Wealth traces are CSV files whose first comment lines carry a
//! [`Fingerprint`] and the column layout. Numbers are written in shortest
//! round-trip form, so reading a file back reproduces the values bitwise.

mod snapshot;
mod triplet;

use std::fmt;

use thiserror::Error;

pub use snapshot::{
    read_snapshots, read_wealth, write_drift, write_final, write_snapshots, SnapshotFile,
    SnapshotRows, SummaryRow,
};
pub use triplet::{read_matrix, write_matrix};

use crate::rng::RNG_ALGORITHM;
use crate::ModelError;

#[derive(Debug, Error)]
pub enum IoError {
    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error("line {line}: {message}")]
    Parse { line: usize, message: String },

    #[error(transparent)]
    Model(#[from] ModelError),
}

pub(crate) fn parse_error(line: usize, message: impl Into<String>) -> IoError {
    IoError::Parse {
        line,
        message: message.into(),
    }
}

/// Provenance written as the first line of every output file.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Fingerprint {
    pub tool: String,
    pub version: String,
    pub seed: Option<u64>,
    /// Hex digest of the resolved configuration.
    pub config: String,
    pub rng: String,
}

impl Fingerprint {
    pub fn new(seed: Option<u64>, config: impl Into<String>) -> Self {
        Self {
            tool: "circflow".into(),
            version: env!("CARGO_PKG_VERSION").into(),
            seed,
            config: config.into(),
            rng: RNG_ALGORITHM.into(),
        }
    }

    /// Parses the text after `# ` of a fingerprint line.
    pub fn parse(line: &str) -> Option<Self> {
        let body = line.trim().strip_prefix('#')?.trim();
        let mut words = body.split_whitespace();
        let tool = words.next()?.to_string();
        let version = words.next()?.to_string();
        let mut fp = Fingerprint {
            tool,
            version,
            seed: None,
            config: String::new(),
            rng: String::new(),
        };
        for w in words {
            let (k, v) = w.split_once('=')?;
            match k {
                "seed" if v != "none" => fp.seed = Some(v.parse().ok()?),
                "seed" => {}
                "config" => fp.config = v.to_string(),
                "rng" => fp.rng = v.to_string(),
                _ => {}
            }
        }
        Some(fp)
    }
}

impl fmt::Display for Fingerprint {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "# {} {}", self.tool, self.version)?;
        match self.seed {
            Some(s) => write!(f, " seed={s}")?,
            None => write!(f, " seed=none")?,
        }
        write!(f, " config={} rng={}", self.config, self.rng)
    }
}
