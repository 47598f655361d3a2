//! Fixed point of a single circulation matrix by power iteration.

use thiserror::Error;

use crate::matrix::CirculationMatrix;
use crate::par::Execution;
use crate::step::float_kernel;
use crate::sum::{fixed_shape_total, NeumaierSum};
use crate::wealth::WealthVector;
use crate::ModelError;

/// A wealth distribution `v` (total 1) with `||F v - v||_1 <= tolerance`.
#[derive(Debug, Clone, PartialEq)]
pub struct Stationary {
    pub vector: WealthVector,
    /// `||F v - v||_1`.
    pub residual: f64,
    /// Matrix applications performed.
    pub iterations: usize,
}

#[derive(Debug, Clone, PartialEq, Error)]
#[error("power iteration did not converge in {iterations} iterations (residual {residual:e})")]
pub struct NotConverged {
    pub last: WealthVector,
    pub residual: f64,
    pub iterations: usize,
}

#[derive(Debug, Error)]
pub enum StationaryError {
    #[error(transparent)]
    Model(#[from] ModelError),
    #[error(transparent)]
    NotConverged(#[from] NotConverged),
}

/// Power iteration from the uniform distribution.
///
/// Each iteration computes `w = F v` and stops as soon as
/// `||w - v||_1 <= tolerance`, returning `v`; otherwise `v` becomes `w`
/// renormalized to total 1. Convergence to a unique vector requires a
/// primitive `F` (irreducible and aperiodic); this is not checked.
pub fn stationary_estimate(
    f: &CirculationMatrix,
    tolerance: f64,
    max_iters: usize,
) -> Result<Stationary, StationaryError> {
    if !f.is_valid() {
        return Err(ModelError::InvalidMatrix(Box::new(f.validate())).into());
    }
    let n = f.n();
    let mut v = vec![1.0 / n as f64; n];
    let mut w = vec![0.0; n];
    let mut residual = f64::INFINITY;
    for iter in 1..=max_iters {
        float_kernel(f, &v, &mut w, Execution::default());
        residual = l1_distance(&v, &w);
        if residual <= tolerance {
            return Ok(Stationary {
                vector: WealthVector::from_raw(v),
                residual,
                iterations: iter,
            });
        }
        let total = fixed_shape_total(&w);
        for x in &mut w {
            *x /= total;
        }
        std::mem::swap(&mut v, &mut w);
    }
    Err(NotConverged {
        last: WealthVector::from_raw(v),
        residual,
        iterations: max_iters,
    }
    .into())
}

pub(crate) fn l1_distance(a: &[f64], b: &[f64]) -> f64 {
    a.iter()
        .zip(b)
        .map(|(x, y)| (x - y).abs())
        .collect::<NeumaierSum>()
        .value()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn identity_returns_uniform_after_one_check() {
        let id = CirculationMatrix::identity(4).unwrap();
        let s = stationary_estimate(&id, 1e-12, 10).unwrap();
        assert_eq!(s.vector.as_slice(), &[0.25; 4]);
        assert_eq!(s.residual, 0.0);
        assert_eq!(s.iterations, 1);
    }

    #[test]
    fn symmetric_two_agent_economy_is_uniform() {
        let f = CirculationMatrix::from_dense_columns(&[vec![0.6, 0.4], vec![0.4, 0.6]]).unwrap();
        let s = stationary_estimate(&f, 1e-14, 100).unwrap();
        assert!((s.vector.as_slice()[0] - 0.5).abs() < 1e-14);
        assert!((s.vector.total() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn asymmetric_fixed_point() {
        // columns (0.9, 0.1), (0.3, 0.7): stationary (0.75, 0.25)
        let f = CirculationMatrix::from_dense_columns(&[vec![0.9, 0.1], vec![0.3, 0.7]]).unwrap();
        let s = stationary_estimate(&f, 1e-14, 10_000).unwrap();
        assert!((s.vector.as_slice()[0] - 0.75).abs() < 1e-13);
    }

    #[test]
    fn slow_mixing_hits_the_iteration_cap() {
        let f = CirculationMatrix::from_dense_columns(&[vec![0.999, 0.001], vec![0.0, 1.0]]).unwrap();
        match stationary_estimate(&f, 1e-15, 3) {
            Err(StationaryError::NotConverged(nc)) => {
                assert_eq!(nc.iterations, 3);
                assert!(nc.residual > 1e-15);
            }
            other => panic!("expected non-convergence, got {other:?}"),
        }
    }
}
