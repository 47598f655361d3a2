//! Conservation of the monetary base along a trace.

use crate::simulation::SimulationTrace;
use crate::wealth::{NumericMode, WealthState};

/// Per-step relative drift allowed per agent in float mode.
pub const FLOAT_STEP_DRIFT_PER_AGENT: f64 = 1e-12;

#[derive(Debug, Clone, PartialEq)]
pub struct AuditReport {
    pub mode: NumericMode,
    pub monetary_base: f64,
    /// `|total(x(tau)) - M|` for `tau = 1..=T`.
    pub per_step: Vec<f64>,
    pub max_abs_drift: f64,
    pub max_relative_drift: f64,
    /// Largest relative change of the total over a single step.
    pub max_step_change: f64,
    /// Allowed single-step relative change: 0 in integer mode,
    /// `n * 1e-12` in float mode.
    pub step_bound: f64,
    pub passed: bool,
}

/// Checks that the total stayed at `M`: exactly in integer mode, within
/// `n * 1e-12` relative change per step in float mode.
pub fn conservation_audit<S: WealthState>(trace: &SimulationTrace<S>) -> AuditReport {
    let base = trace.monetary_base_f64();
    let scale = if base > 0.0 { base } else { 1.0 };
    let mut prev = base;
    let mut max_step_change = 0.0f64;
    for &t in &trace.totals {
        max_step_change = max_step_change.max((t - prev).abs() / scale);
        prev = t;
    }
    let max_abs_drift = trace.max_drift();
    let (step_bound, passed) = match trace.mode {
        NumericMode::Integer => (0.0, max_abs_drift == 0.0),
        NumericMode::Float => {
            let bound = trace.n as f64 * FLOAT_STEP_DRIFT_PER_AGENT;
            (bound, max_step_change <= bound)
        }
    };
    AuditReport {
        mode: trace.mode,
        monetary_base: base,
        per_step: trace.drift.clone(),
        max_abs_drift,
        max_relative_drift: max_abs_drift / scale,
        max_step_change,
        step_bound,
        passed,
    }
}
