//! Step-by-step evaluation of `x(t) = F_{t-1} ... F_0 x(0)` with snapshots
//! and conservation bookkeeping.

use crate::analytics::inequality::{gini, top_share};
use crate::par::Execution;
use crate::schedule::{Schedule, StepFactor};
use crate::wealth::{NumericMode, WealthState};
use crate::ModelError;

/// Agent count above which [`SnapshotPolicy::default_for`] stops storing
/// full vectors.
pub const FULL_SNAPSHOT_NMAX: usize = 10_000;

/// Which steps get a snapshot.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SnapshotTimes {
    /// `0, k, 2k, ...` and the final step.
    Every(u64),
    /// `0`, about ten steps per decade, and the final step.
    LogSpaced,
    /// The final step only.
    FinalOnly,
}

/// What a snapshot stores.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SnapshotContent {
    Full,
    /// Total, Gini and top shares only.
    Summary,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SnapshotPolicy {
    pub times: SnapshotTimes,
    pub content: SnapshotContent,
}

impl SnapshotPolicy {
    pub fn new(times: SnapshotTimes, content: SnapshotContent) -> Self {
        Self { times, content }
    }

    pub fn full_every(k: u64) -> Self {
        Self::new(SnapshotTimes::Every(k.max(1)), SnapshotContent::Full)
    }

    /// Log-spaced; full vectors up to [`FULL_SNAPSHOT_NMAX`] agents,
    /// summaries above.
    pub fn default_for(n: usize) -> Self {
        let content = if n <= FULL_SNAPSHOT_NMAX {
            SnapshotContent::Full
        } else {
            SnapshotContent::Summary
        };
        Self::new(SnapshotTimes::LogSpaced, content)
    }

    /// Snapshot steps for a run of `steps` steps, ascending.
    pub fn times_for(&self, steps: u64) -> Vec<u64> {
        let mut out = match self.times {
            SnapshotTimes::Every(k) => {
                let k = k.max(1);
                (0..=steps / k).map(|i| i * k).collect()
            }
            SnapshotTimes::LogSpaced => {
                let mut v = vec![0];
                let mut i = 0i32;
                loop {
                    let t = 10f64.powf(i as f64 / 10.0).round() as u64;
                    if t > steps {
                        break;
                    }
                    v.push(t);
                    i += 1;
                }
                v
            }
            SnapshotTimes::FinalOnly => Vec::new(),
        };
        out.push(steps);
        out.sort_unstable();
        out.dedup();
        out
    }
}

/// Scalar description of a wealth vector.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Summary {
    /// `None` when the total is zero.
    pub gini: Option<f64>,
    pub top1: Option<f64>,
    pub top10: Option<f64>,
}

impl Summary {
    pub fn of(values: &[f64]) -> Self {
        Self {
            gini: gini(values).ok(),
            top1: top_share(values, 0.01).ok(),
            top10: top_share(values, 0.10).ok(),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum SnapshotData<S> {
    Full(S),
    Summary(Summary),
}

impl<S> SnapshotData<S> {
    pub fn summary(&self) -> Option<Summary> {
        match self {
            SnapshotData::Summary(s) => Some(*s),
            SnapshotData::Full(_) => None,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Snapshot<S> {
    pub tau: u64,
    pub total: f64,
    pub data: SnapshotData<S>,
}

impl<S> Snapshot<S> {
    pub fn full(&self) -> Option<&S> {
        match &self.data {
            SnapshotData::Full(s) => Some(s),
            SnapshotData::Summary(_) => None,
        }
    }
}

/// Result of [`run_simulation`].
#[derive(Debug, Clone)]
pub struct SimulationTrace<S: WealthState> {
    pub mode: NumericMode,
    pub n: usize,
    pub steps: u64,
    /// Total of `x(0)`.
    pub monetary_base: S::Total,
    /// Snapshots in increasing `tau`.
    pub snapshots: Vec<Snapshot<S>>,
    /// `total(x(tau))` for `tau = 1..=steps`.
    pub totals: Vec<f64>,
    /// `|total(x(tau)) - M|` for `tau = 1..=steps`.
    pub drift: Vec<f64>,
    pub final_state: S,
    pub seed: Option<u64>,
    pub fingerprint: Option<String>,
}

impl<S: WealthState> SimulationTrace<S> {
    pub fn with_provenance(mut self, seed: u64, fingerprint: impl Into<String>) -> Self {
        self.seed = Some(seed);
        self.fingerprint = Some(fingerprint.into());
        self
    }

    pub fn monetary_base_f64(&self) -> f64 {
        S::total_f64(self.monetary_base)
    }

    pub fn max_drift(&self) -> f64 {
        self.drift.iter().fold(0.0, |m, &d| m.max(d))
    }

    /// Largest drift relative to `M` (0 when `M` is 0).
    pub fn max_relative_drift(&self) -> f64 {
        let m = self.monetary_base_f64();
        if m == 0.0 {
            0.0
        } else {
            self.max_drift() / m
        }
    }

    /// Snapshots carrying full vectors.
    pub fn full_snapshots(&self) -> impl Iterator<Item = (u64, &S)> + '_ {
        self.snapshots
            .iter()
            .filter_map(|s| s.full().map(|x| (s.tau, x)))
    }
}

/// Evolves `x0` through the first `steps` factors of `schedule`.
///
/// The vector is stepped factor by factor; the product matrix is never
/// formed. Idle steps copy the state unchanged.
pub fn run_simulation<S: WealthState>(
    schedule: &Schedule,
    x0: S,
    steps: u64,
    policy: &SnapshotPolicy,
) -> Result<SimulationTrace<S>, ModelError> {
    run_simulation_with(schedule, x0, steps, policy, Execution::default())
}

pub fn run_simulation_with<S: WealthState>(
    schedule: &Schedule,
    x0: S,
    steps: u64,
    policy: &SnapshotPolicy,
    exec: Execution,
) -> Result<SimulationTrace<S>, ModelError> {
    let n = x0.agents();
    if schedule.n() != n {
        return Err(ModelError::DimensionMismatch {
            expected: schedule.n(),
            found: n,
        });
    }
    if schedule.len() < steps {
        return Err(ModelError::ScheduleExhausted {
            requested: steps,
            available: schedule.len(),
        });
    }

    let times = policy.times_for(steps);
    let mut next_snapshot = times.iter().copied().peekable();
    let base = x0.total();
    let mut snapshots = Vec::with_capacity(times.len());
    let take = |tau: u64, x: &S, total: S::Total| Snapshot {
        tau,
        total: S::total_f64(total),
        data: match policy.content {
            SnapshotContent::Full => SnapshotData::Full(x.clone()),
            SnapshotContent::Summary => SnapshotData::Summary(Summary::of(&x.values_f64())),
        },
    };
    if next_snapshot.peek() == Some(&0) {
        next_snapshot.next();
        snapshots.push(take(0, &x0, base));
    }

    let mut totals = Vec::with_capacity(steps as usize);
    let mut drift = Vec::with_capacity(steps as usize);
    let mut current = x0.clone();
    let mut next = x0;
    for tau in 0..steps {
        match schedule.get(tau).expect("length checked") {
            StepFactor::Identity => next.clone_from(&current),
            StepFactor::Matrix(m) => current.step_into(m, &mut next, exec)?,
        }
        std::mem::swap(&mut current, &mut next);
        let total = current.total();
        totals.push(S::total_f64(total));
        drift.push(S::abs_drift(total, base));
        if next_snapshot.peek() == Some(&(tau + 1)) {
            next_snapshot.next();
            snapshots.push(take(tau + 1, &current, total));
        }
    }

    Ok(SimulationTrace {
        mode: S::MODE,
        n,
        steps,
        monetary_base: base,
        snapshots,
        totals,
        drift,
        final_state: current,
        seed: None,
        fingerprint: None,
    })
}
