//! Gini coefficient, Lorenz curve and top-wealth shares.

use super::Undefined;
use crate::sum::{compensated_sum, NeumaierSum};

fn sorted_ascending(x: &[f64]) -> Vec<f64> {
    let mut v = x.to_vec();
    v.sort_unstable_by(f64::total_cmp);
    v
}

fn positive_total(x: &[f64]) -> Result<f64, Undefined> {
    let total = compensated_sum(x);
    if x.is_empty() || total <= 0.0 {
        return Err(Undefined::new("total wealth is zero"));
    }
    Ok(total)
}

/// Gini coefficient by the sorted-rank formula
/// `G = 2 sum_i i x_(i) / (n sum x) - (n + 1) / n`, ranks 1-based over the
/// ascending sort. Zero-wealth agents count.
pub fn gini(x: &[f64]) -> Result<f64, Undefined> {
    let total = positive_total(x)?;
    let n = x.len() as f64;
    let weighted: NeumaierSum = sorted_ascending(x)
        .iter()
        .enumerate()
        .map(|(i, &v)| (i + 1) as f64 * v)
        .collect();
    let g = 2.0 * weighted.value() / (n * total) - (n + 1.0) / n;
    Ok(g.clamp(0.0, 1.0))
}

/// The `n + 1` points `(k / n, share held by the poorest k agents)`,
/// from `(0, 0)` to `(1, 1)`.
pub fn lorenz_curve(x: &[f64]) -> Result<Vec<(f64, f64)>, Undefined> {
    let total = positive_total(x)?;
    let n = x.len();
    let mut points = Vec::with_capacity(n + 1);
    points.push((0.0, 0.0));
    let mut acc = NeumaierSum::new();
    for (k, v) in sorted_ascending(x).into_iter().enumerate() {
        acc.add(v);
        points.push(((k + 1) as f64 / n as f64, (acc.value() / total).min(1.0)));
    }
    // the last point is (1, 1) by definition; pin it against rounding
    points[n] = (1.0, 1.0);
    Ok(points)
}

/// Share of the total held by the richest `ceil(q n)` agents (at least one).
pub fn top_share(x: &[f64], q: f64) -> Result<f64, Undefined> {
    let total = positive_total(x)?;
    let k = ((q * x.len() as f64).ceil() as usize).clamp(1, x.len());
    let sorted = sorted_ascending(x);
    let top = compensated_sum(&sorted[sorted.len() - k..]);
    Ok((top / total).clamp(0.0, 1.0))
}

/// Inequality metrics of one snapshot.
#[derive(Debug, Clone, PartialEq)]
pub struct InequalityReport {
    pub tau: u64,
    pub gini: f64,
    pub lorenz: Vec<(f64, f64)>,
    /// `(q, share of the richest fraction q)` for q = 0.01 and 0.10.
    pub top_shares: Vec<(f64, f64)>,
}

pub fn inequality_report(tau: u64, x: &[f64]) -> Result<InequalityReport, Undefined> {
    Ok(InequalityReport {
        tau,
        gini: gini(x)?,
        lorenz: lorenz_curve(x)?,
        top_shares: vec![(0.01, top_share(x, 0.01)?), (0.10, top_share(x, 0.10)?)],
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    /// sum_{i,j} |x_i - x_j| / (2 n^2 mean)
    fn pairwise_gini(x: &[f64]) -> f64 {
        let n = x.len() as f64;
        let mean = x.iter().sum::<f64>() / n;
        let mut s = 0.0;
        for a in x {
            for b in x {
                s += (a - b).abs();
            }
        }
        s / (2.0 * n * n * mean)
    }

    #[test]
    fn gini_examples() {
        assert_eq!(gini(&[1.0, 1.0, 1.0, 1.0]).unwrap(), 0.0);
        assert!((gini(&[0.0, 0.0, 0.0, 5.0]).unwrap() - 0.75).abs() < 1e-15);
        assert!((pairwise_gini(&[1.0, 2.0, 3.0, 4.0]) - 0.25).abs() < 1e-15);
        assert!((gini(&[1.0, 2.0, 3.0, 4.0]).unwrap() - 0.25).abs() < 1e-15);
        assert!(gini(&[0.0, 0.0]).is_err());
    }

    #[test]
    fn lorenz_examples() {
        assert_eq!(lorenz_curve(&[1.0, 1.0]).unwrap(), vec![(0.0, 0.0), (0.5, 0.5), (1.0, 1.0)]);
        assert_eq!(lorenz_curve(&[0.0, 1.0]).unwrap(), vec![(0.0, 0.0), (0.5, 0.0), (1.0, 1.0)]);
        assert_eq!(lorenz_curve(&[3.0, 1.0]).unwrap(), vec![(0.0, 0.0), (0.5, 0.25), (1.0, 1.0)]);
        assert!(lorenz_curve(&[0.0]).is_err());
    }

    #[test]
    fn top_shares() {
        let x = [0.0, 0.0, 0.0, 8.0];
        assert_eq!(top_share(&x, 0.01).unwrap(), 1.0);
        let x: Vec<f64> = (1..=100).map(|v| v as f64).collect();
        // richest 10 hold 91 + ... + 100 = 955 of 5050
        assert!((top_share(&x, 0.10).unwrap() - 955.0 / 5050.0).abs() < 1e-15);
    }

    proptest! {
        #[test]
        fn gini_matches_pairwise_oracle(x in prop::collection::vec(0.0f64..1e6, 1..512)) {
            prop_assume!(x.iter().sum::<f64>() > 0.0);
            let g = gini(&x).unwrap();
            prop_assert!((g - pairwise_gini(&x)).abs() <= 1e-9);
        }

        #[test]
        fn gini_matches_lorenz_area(x in prop::collection::vec(0.0f64..1e6, 1..512)) {
            prop_assume!(x.iter().sum::<f64>() > 0.0);
            let l = lorenz_curve(&x).unwrap();
            prop_assert_eq!(l[0], (0.0, 0.0));
            prop_assert_eq!(*l.last().unwrap(), (1.0, 1.0));
            prop_assert!(l.windows(2).all(|w| w[1].1 >= w[0].1));
            let area: f64 = l.windows(2).map(|w| (w[1].0 - w[0].0) * (w[1].1 + w[0].1) / 2.0).sum();
            prop_assert!((gini(&x).unwrap() - (1.0 - 2.0 * area)).abs() <= 1e-9);
        }
    }
}
