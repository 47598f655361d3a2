//! Heavy-tail diagnostics: Hill estimator and empirical CCDF.

use super::{AnalyticsError, Undefined};
use crate::sum::NeumaierSum;

/// Hill fit over the top order statistics of a wealth vector.
#[derive(Debug, Clone, PartialEq)]
pub struct TailFitReport {
    /// `(level, P(X >= level))` over the fitted range, levels ascending.
    /// Probabilities are relative to the strictly positive entries.
    pub ccdf: Vec<(f64, f64)>,
    pub hill_alpha: f64,
    pub k_used: usize,
    /// `(x_(k+1), x_(1))`: threshold order statistic and maximum.
    pub fit_range: (f64, f64),
    /// Kolmogorov-Smirnov distance between the `k` exceedance ratios
    /// `x_(i) / x_(k+1)` and a Pareto law with the fitted exponent.
    pub ks_distance: f64,
    /// Strictly positive entries the fit drew from.
    pub positive_count: usize,
}

/// `max(10, m / 100)` for `m` positive entries.
pub fn default_hill_k(positive: usize) -> usize {
    (positive / 100).max(10)
}

/// Hill estimator `alpha = k / sum_{i=1..k} ln(x_(i) / x_(k+1))` over the
/// descending order statistics of the strictly positive entries of `x`.
/// Zero-wealth agents are ignored.
pub fn hill_estimator(x: &[f64], k: usize) -> Result<TailFitReport, AnalyticsError> {
    if k < 2 {
        return Err(AnalyticsError::InvalidArgument(format!(
            "Hill estimator needs k >= 2, got {k}"
        )));
    }
    let mut desc: Vec<f64> = x.iter().copied().filter(|&v| v > 0.0).collect();
    let m = desc.len();
    if m < k + 1 {
        return Err(Undefined::new(format!(
            "{m} positive entries, k = {k} needs at least {}",
            k + 1
        ))
        .into());
    }
    desc.sort_unstable_by(|a, b| b.total_cmp(a));
    let threshold = desc[k];
    let log_spacing: NeumaierSum = desc[..k].iter().map(|&v| (v / threshold).ln()).collect();
    let denom = log_spacing.value();
    if denom <= 0.0 {
        return Err(Undefined::new(format!(
            "top {} order statistics are tied at {threshold}; log-spacings sum to zero",
            k + 1
        ))
        .into());
    }
    let alpha = k as f64 / denom;

    // ccdf over the fitted range, ties sharing the probability of their
    // last occurrence
    let mut ccdf: Vec<(f64, f64)> = Vec::with_capacity(k + 1);
    for i in 0..=k {
        if i < k && desc[i + 1] == desc[i] {
            continue;
        }
        let mut last = i;
        while last + 1 < m && desc[last + 1] == desc[i] {
            last += 1;
        }
        ccdf.push((desc[i], (last + 1) as f64 / m as f64));
    }
    ccdf.reverse();

    let mut ratios: Vec<f64> = desc[..k].iter().map(|&v| v / threshold).collect();
    ratios.sort_unstable_by(f64::total_cmp);
    let kf = k as f64;
    let ks_distance = ratios
        .iter()
        .enumerate()
        .map(|(i, &y)| {
            let model = 1.0 - y.powf(-alpha);
            ((i + 1) as f64 / kf - model).max(model - i as f64 / kf)
        })
        .fold(0.0, f64::max);

    Ok(TailFitReport {
        ccdf,
        hill_alpha: alpha,
        k_used: k,
        fit_range: (threshold, desc[0]),
        ks_distance,
        positive_count: m,
    })
}
