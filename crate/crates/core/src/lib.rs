//! Income-circulation dynamics for closed, credit-free economies.
//!
//! The state of an economy of `n` agents is a non-negative wealth vector
//! `x(t)`. Between two instants every agent `j` pays a fraction `f_ij` of its
//! wealth to each agent `i` it buys from and keeps the remainder
//! `f_jj = 1 - sum_{i != j} f_ij` as savings. The fractions form a sparse
//! column-stochastic [`CirculationMatrix`] `F_t` and the wealth evolves as
//!
//! ```text
//! x(t + 1) = F_t x(t)      x(t) = F_{t-1} ... F_1 F_0 x(0)
//! ```
//!
//! Column-stochasticity keeps the monetary base `M = sum_i x_i` constant. The
//! crate offers two numeric modes for the dynamics: 64-bit floats with
//! compensated accumulation ([`WealthVector`]) and integer minor units with
//! exact conservation ([`UnitWealth`]).
//!
//! Modules:
//!
//! - [`matrix`], [`step`], [`product`], [`schedule`], [`simulation`]: the
//!   model itself.
//! - [`generators`]: synthetic circulation matrices and schedules.
//! - [`analytics`]: conservation audits, inequality metrics, tail fits,
//!   stationary vectors and convergence diagnostics.
//! - [`oracle`]: a plain dense implementation used to cross-check the sparse
//!   engine.
//! - [`io`]: the matrix triplet format and snapshot CSV files.
//!
//! The step kernels are data-parallel over output rows when the `parallel`
//! feature (on by default) is enabled. Each output entry is always reduced
//! by a single worker in a fixed order, so results are bitwise identical for
//! any thread count and with the sequential fallback.

pub mod analytics;
mod error;
pub mod generators;
pub mod io;
pub mod matrix;
pub mod oracle;
pub mod par;
pub mod product;
pub mod rng;
pub mod schedule;
pub mod simulation;
pub mod step;
pub mod sum;
pub mod wealth;

pub use error::ModelError;
pub use matrix::{CirculationMatrix, ValidationReport, Violation, COLTOL, GENERATOR_TOL};
pub use par::Execution;
pub use product::{matrix_product, PRODUCT_NMAX};
pub use schedule::{Schedule, ScheduleKind, StepFactor};
pub use simulation::{
    run_simulation, run_simulation_with, SimulationTrace, Snapshot, SnapshotContent, SnapshotData,
    SnapshotPolicy, SnapshotTimes, Summary,
};
pub use step::{apply_step, apply_step_units};
pub use wealth::{NumericMode, UnitWealth, WealthState, WealthVector};
