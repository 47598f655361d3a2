//! How fast a trace settles.

use super::stationary::l1_distance;
use super::AnalyticsError;
use crate::simulation::SimulationTrace;
use crate::sum::compensated_sum;
use crate::wealth::WealthState;

#[derive(Debug, Clone, PartialEq)]
pub struct ConvergenceReport {
    /// `(tau, ||x(tau) - x(prev)||_1 / M)` between consecutive full
    /// snapshots, keyed by the later one.
    pub step_distances: Vec<(u64, f64)>,
    /// `(tau, ||x(tau) / M - r||_1)` against the reference `r` normalized to
    /// total 1, when a reference was given.
    pub reference_distances: Option<Vec<(u64, f64)>>,
    pub threshold: f64,
    /// First snapshot whose reference distance is below `threshold`.
    pub first_crossing: Option<u64>,
}

/// Diagnostics over the full-vector snapshots of a trace.
pub fn convergence_diagnostics<S: WealthState>(
    trace: &SimulationTrace<S>,
    reference: Option<&[f64]>,
    threshold: f64,
) -> Result<ConvergenceReport, AnalyticsError> {
    let series: Vec<(u64, Vec<f64>)> = trace
        .full_snapshots()
        .map(|(tau, x)| (tau, x.values_f64().into_owned()))
        .collect();
    convergence_from_series(&series, trace.monetary_base_f64(), reference, threshold)
}

/// Same as [`convergence_diagnostics`] over `(tau, vector)` pairs, for
/// snapshots read back from disk.
pub fn convergence_from_series(
    series: &[(u64, Vec<f64>)],
    monetary_base: f64,
    reference: Option<&[f64]>,
    threshold: f64,
) -> Result<ConvergenceReport, AnalyticsError> {
    if series.len() < 2 {
        return Err(AnalyticsError::NeedFullSnapshots {
            needed: 2,
            found: series.len(),
        });
    }
    let n = series[0].1.len();
    if let Some(bad) = series.iter().find(|(_, x)| x.len() != n) {
        return Err(AnalyticsError::DimensionMismatch {
            expected: n,
            found: bad.1.len(),
        });
    }
    let scale = if monetary_base > 0.0 { monetary_base } else { 1.0 };
    let step_distances = series
        .windows(2)
        .map(|w| (w[1].0, l1_distance(&w[0].1, &w[1].1) / scale))
        .collect();

    let mut first_crossing = None;
    let reference_distances = match reference {
        None => None,
        Some(r) => {
            if r.len() != n {
                return Err(AnalyticsError::DimensionMismatch {
                    expected: n,
                    found: r.len(),
                });
            }
            let r_total = compensated_sum(r);
            if r_total <= 0.0 {
                return Err(AnalyticsError::InvalidArgument(
                    "reference vector has zero total".into(),
                ));
            }
            let r: Vec<f64> = r.iter().map(|v| v / r_total).collect();
            let dists: Vec<(u64, f64)> = series
                .iter()
                .map(|(tau, x)| {
                    let shares: Vec<f64> = x.iter().map(|v| v / scale).collect();
                    (*tau, l1_distance(&shares, &r))
                })
                .collect();
            first_crossing = dists.iter().find(|(_, d)| *d < threshold).map(|(t, _)| *t);
            Some(dists)
        }
    };

    Ok(ConvergenceReport {
        step_distances,
        reference_distances,
        threshold,
        first_crossing,
    })
}
