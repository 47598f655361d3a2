//! Dense reference implementation.
//!
//! Plain row-major arrays, plain left-to-right summation, one thread. It
//! shares no arithmetic with the sparse engine (which uses compensated row
//! sums) and is used to cross-check it at small `n`.

use thiserror::Error;

use crate::matrix::{CirculationMatrix, COLTOL};

/// Largest `n` for [`dense_step`].
pub const ORACLE_NMAX: usize = 4096;
/// Largest `n` for [`dense_power`].
pub const POWER_NMAX: usize = 256;
/// Largest number of squarings for [`dense_power`].
pub const POWER_KMAX: u32 = 30;

#[derive(Debug, Error, PartialEq)]
pub enum OracleError {
    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },
    #[error("n = {n} exceeds the oracle limit {limit}")]
    TooLarge { n: usize, limit: usize },
    #[error("2^{k} exceeds the repeated-squaring limit 2^{limit}")]
    ExponentTooLarge { k: u32, limit: u32 },
    #[error("column {column} sums to {sum}, not 1")]
    NotStochastic { column: usize, sum: f64 },
}

/// Row-major `n x n` matrix; `data[i * n + j]` is `f_ij`.
#[derive(Debug, Clone, PartialEq)]
pub struct DenseMatrix {
    n: usize,
    data: Vec<f64>,
}

impl DenseMatrix {
    /// Requires entries in `[0, 1]` and column sums within [`COLTOL`] of 1.
    pub fn from_rows(rows: Vec<Vec<f64>>) -> Result<Self, OracleError> {
        let n = rows.len();
        let mut data = Vec::with_capacity(n * n);
        for row in rows {
            if row.len() != n {
                return Err(OracleError::DimensionMismatch {
                    expected: n,
                    found: row.len(),
                });
            }
            data.extend(row);
        }
        let m = Self { n, data };
        for j in 0..n {
            let sum = m.column_sum(j);
            let in_range = (0..n).all(|i| (0.0..=1.0).contains(&m.get(i, j)));
            if (sum - 1.0).abs() > COLTOL || !in_range {
                return Err(OracleError::NotStochastic { column: j, sum });
            }
        }
        Ok(m)
    }

    pub fn from_sparse(m: &CirculationMatrix) -> Result<Self, OracleError> {
        let n = m.n();
        if n > ORACLE_NMAX {
            return Err(OracleError::TooLarge {
                n,
                limit: ORACLE_NMAX,
            });
        }
        let mut data = vec![0.0; n * n];
        for (i, j, v) in m.entries() {
            data[i * n + j] = v;
        }
        Ok(Self { n, data })
    }

    pub fn identity(n: usize) -> Self {
        let mut data = vec![0.0; n * n];
        for i in 0..n {
            data[i * n + i] = 1.0;
        }
        Self { n, data }
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.data[i * self.n + j]
    }

    pub fn column_sum(&self, j: usize) -> f64 {
        let mut s = 0.0;
        for i in 0..self.n {
            s += self.get(i, j);
        }
        s
    }

    /// `self * rhs`, plain triple loop.
    pub fn mul(&self, rhs: &DenseMatrix) -> Result<DenseMatrix, OracleError> {
        if rhs.n != self.n {
            return Err(OracleError::DimensionMismatch {
                expected: self.n,
                found: rhs.n,
            });
        }
        let n = self.n;
        let mut data = vec![0.0; n * n];
        for i in 0..n {
            for k in 0..n {
                let a = self.data[i * n + k];
                if a == 0.0 {
                    continue;
                }
                for j in 0..n {
                    data[i * n + j] += a * rhs.data[k * n + j];
                }
            }
        }
        Ok(DenseMatrix { n, data })
    }
}

/// `y_i = sum_j F[i][j] x_j`, summed in index order.
pub fn dense_step(f: &DenseMatrix, x: &[f64]) -> Result<Vec<f64>, OracleError> {
    if f.n > ORACLE_NMAX {
        return Err(OracleError::TooLarge {
            n: f.n,
            limit: ORACLE_NMAX,
        });
    }
    if x.len() != f.n {
        return Err(OracleError::DimensionMismatch {
            expected: f.n,
            found: x.len(),
        });
    }
    let n = f.n;
    let mut y = vec![0.0; n];
    for (i, yi) in y.iter_mut().enumerate() {
        let mut s = 0.0;
        for (j, xj) in x.iter().enumerate() {
            s += f.data[i * n + j] * xj;
        }
        *yi = s;
    }
    Ok(y)
}

/// Applies `factors` in chronological order.
pub fn dense_chain(factors: &[DenseMatrix], x0: &[f64]) -> Result<Vec<f64>, OracleError> {
    let mut x = x0.to_vec();
    for f in factors {
        x = dense_step(f, &x)?;
    }
    Ok(x)
}

/// `F^(2^k)` by `k` squarings.
pub fn dense_power(f: &DenseMatrix, k: u32) -> Result<DenseMatrix, OracleError> {
    if f.n > POWER_NMAX {
        return Err(OracleError::TooLarge {
            n: f.n,
            limit: POWER_NMAX,
        });
    }
    if k > POWER_KMAX {
        return Err(OracleError::ExponentTooLarge {
            k,
            limit: POWER_KMAX,
        });
    }
    let mut p = f.clone();
    for _ in 0..k {
        p = p.mul(&p)?;
    }
    Ok(p)
}

/// Discrepancy between two result vectors.
#[derive(Debug, Clone, PartialEq)]
pub struct EquivalenceReport {
    pub max_abs: f64,
    pub l1: f64,
    /// Index of the largest absolute difference.
    pub worst_index: Option<usize>,
    pub tolerance: f64,
    pub passed: bool,
}

/// Passes iff the largest absolute difference is at most `tolerance`.
pub fn equivalence_check(
    sparse: &[f64],
    dense: &[f64],
    tolerance: f64,
) -> Result<EquivalenceReport, OracleError> {
    if sparse.len() != dense.len() {
        return Err(OracleError::DimensionMismatch {
            expected: dense.len(),
            found: sparse.len(),
        });
    }
    let mut max_abs = 0.0;
    let mut worst_index = None;
    let mut l1 = 0.0;
    for (i, (a, b)) in sparse.iter().zip(dense).enumerate() {
        let d = (a - b).abs();
        l1 += d;
        if d > max_abs || d.is_nan() {
            max_abs = d;
            worst_index = Some(i);
        }
    }
    Ok(EquivalenceReport {
        max_abs,
        l1,
        worst_index,
        tolerance,
        passed: max_abs <= tolerance,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn worked() -> DenseMatrix {
        DenseMatrix::from_rows(vec![
            vec![0.5, 0.2, 0.4],
            vec![0.3, 0.7, 0.0],
            vec![0.2, 0.1, 0.6],
        ])
        .unwrap()
    }

    #[test]
    fn steps() {
        let x = [100.0, 200.0, 300.0];
        assert_eq!(dense_step(&DenseMatrix::identity(3), &x).unwrap(), x.to_vec());
        assert_eq!(dense_step(&worked(), &x).unwrap(), vec![210.0, 170.0, 220.0]);
        assert_eq!(dense_step(&worked(), &[0.0; 3]).unwrap(), vec![0.0; 3]);
        assert!(dense_step(&worked(), &[1.0]).is_err());
    }

    #[test]
    fn powers() {
        assert_eq!(dense_power(&worked(), 0).unwrap(), worked());
        let id = dense_power(&DenseMatrix::identity(5), 20).unwrap();
        assert_eq!(id, DenseMatrix::identity(5));
        assert!(matches!(
            dense_power(&worked(), 31),
            Err(OracleError::ExponentTooLarge { .. })
        ));
        assert!(matches!(
            dense_power(&DenseMatrix::identity(257), 1),
            Err(OracleError::TooLarge { .. })
        ));
        // worked matrix is positive enough to be primitive: rank-one limit
        let p = dense_power(&worked(), 20).unwrap();
        for i in 0..3 {
            assert!((p.get(i, 0) - p.get(i, 2)).abs() < 1e-8);
        }
    }

    #[test]
    fn equivalence() {
        let a = [1.0, 2.0, 3.0];
        let r = equivalence_check(&a, &a, 0.0).unwrap();
        assert!(r.passed && r.max_abs == 0.0);

        let b = [1.0, 2.0 + 1e-15, 3.0];
        let r = equivalence_check(&b, &a, 1e-12).unwrap();
        assert!(r.passed);
        assert!(r.max_abs > 0.0 && r.max_abs < 1e-14);

        let c = [1.0, 2.0, 3.001];
        let r = equivalence_check(&c, &a, 1e-12).unwrap();
        assert!(!r.passed);
        assert_eq!(r.worst_index, Some(2));
    }

    #[test]
    fn rejects_non_stochastic_rows() {
        assert!(matches!(
            DenseMatrix::from_rows(vec![vec![0.5, 0.5], vec![0.4, 0.5]]),
            Err(OracleError::NotStochastic { column: 0, .. })
        ));
    }
}
