//! Sparse column-stochastic circulation matrices.
//!
//! Entry `(i, j)` is the fraction of agent `j`'s wealth paid to agent `i`
//! during one step. Column `j` therefore describes one buyer: the
//! off-diagonal entries are its spending and the diagonal is what it saves.
//! Storage is column-major (CSC) with the diagonal always present. A
//! row-major copy of the same entries is kept for the step kernel, which
//! reduces each output agent independently.

use std::fmt;

use crate::sum::NeumaierSum;
use crate::wealth::WealthVector;
use crate::ModelError;

/// Column-sum tolerance applied when validating matrices.
pub const COLTOL: f64 = 1e-9;

/// Column-sum precision the generators guarantee.
pub const GENERATOR_TOL: f64 = 1e-12;

/// A (possibly invalid) circulation matrix `F_t`.
///
/// Construction only rejects structural problems (out-of-range or duplicate
/// entries, non-finite values). Whether the matrix is column-stochastic is
/// decided by [`validate`](Self::validate) and recorded at construction;
/// stepping with an invalid matrix is an error.
#[derive(Debug, Clone)]
pub struct CirculationMatrix {
    n: usize,
    col_ptr: Vec<usize>,
    rows: Vec<u32>,
    values: Vec<f64>,
    diag_pos: Vec<usize>,
    row_ptr: Vec<usize>,
    row_cols: Vec<u32>,
    row_vals: Vec<f64>,
    row_src: Vec<usize>,
    valid: bool,
}

impl PartialEq for CirculationMatrix {
    fn eq(&self, other: &Self) -> bool {
        self.n == other.n
            && self.col_ptr == other.col_ptr
            && self.rows == other.rows
            && self.values == other.values
    }
}

impl CirculationMatrix {
    /// Builds a matrix from 0-based `(row, col, fraction)` triplets in any
    /// order. A column without a diagonal triplet gets the implied savings
    /// `1 - sum of its off-diagonal entries`; an implied value within
    /// [`COLTOL`] below zero is rounding noise and is stored as 0.
    pub fn from_triplets<I>(n: usize, triplets: I) -> Result<Self, ModelError>
    where
        I: IntoIterator<Item = (usize, usize, f64)>,
    {
        check_dimension(n)?;
        let mut columns: Vec<Vec<(u32, f64)>> = vec![Vec::new(); n];
        for (row, col, value) in triplets {
            if row >= n || col >= n {
                return Err(ModelError::EntryOutOfRange { row, col, n });
            }
            if !value.is_finite() {
                return Err(ModelError::NonFiniteEntry { row, col });
            }
            columns[col].push((row as u32, value));
        }
        let mut col_ptr = Vec::with_capacity(n + 1);
        let mut rows = Vec::new();
        let mut values = Vec::new();
        col_ptr.push(0);
        for (j, mut column) in columns.into_iter().enumerate() {
            column.sort_unstable_by_key(|&(r, _)| r);
            if let Some(w) = column.windows(2).find(|w| w[0].0 == w[1].0) {
                return Err(ModelError::DuplicateEntry {
                    row: w[0].0 as usize,
                    col: j,
                });
            }
            if let Err(at) = column.binary_search_by_key(&(j as u32), |&(r, _)| r) {
                let off: NeumaierSum = column.iter().map(|&(_, v)| v).collect();
                let mut implied = 1.0 - off.value();
                if (-COLTOL..0.0).contains(&implied) {
                    implied = 0.0;
                }
                column.insert(at, (j as u32, implied));
            }
            for (r, v) in column {
                rows.push(r);
                values.push(v);
            }
            col_ptr.push(rows.len());
        }
        Ok(Self::from_sorted_columns(n, col_ptr, rows, values))
    }

    /// [`from_triplets`](Self::from_triplets) followed by
    /// [`into_valid`](Self::into_valid).
    pub fn checked_from_triplets<I>(n: usize, triplets: I) -> Result<Self, ModelError>
    where
        I: IntoIterator<Item = (usize, usize, f64)>,
    {
        Self::from_triplets(n, triplets)?.into_valid()
    }

    /// Builds a matrix from dense columns: `columns[j][i]` is `f_ij`. Zero
    /// off-diagonal entries are not stored.
    pub fn from_dense_columns(columns: &[Vec<f64>]) -> Result<Self, ModelError> {
        let n = columns.len();
        let mut triplets = Vec::new();
        for (j, column) in columns.iter().enumerate() {
            if column.len() != n {
                return Err(ModelError::DimensionMismatch {
                    expected: n,
                    found: column.len(),
                });
            }
            for (i, &v) in column.iter().enumerate() {
                if i == j || v != 0.0 {
                    triplets.push((i, j, v));
                }
            }
        }
        Self::from_triplets(n, triplets)
    }

    pub fn identity(n: usize) -> Result<Self, ModelError> {
        check_dimension(n)?;
        Ok(Self::from_sorted_columns(
            n,
            (0..=n).collect(),
            (0..n as u32).collect(),
            vec![1.0; n],
        ))
    }

    /// Assembles the matrix from CSC arrays whose columns are sorted by row
    /// and each contain their diagonal.
    pub(crate) fn from_sorted_columns(
        n: usize,
        col_ptr: Vec<usize>,
        rows: Vec<u32>,
        values: Vec<f64>,
    ) -> Self {
        debug_assert_eq!(col_ptr.len(), n + 1);
        let diag_pos = (0..n)
            .map(|j| {
                let range = col_ptr[j]..col_ptr[j + 1];
                let local = rows[range.clone()]
                    .binary_search(&(j as u32))
                    .expect("every column stores its diagonal");
                range.start + local
            })
            .collect();

        // Counting sort into row-major order. Columns are visited in
        // ascending order, so every row lists its columns ascending.
        let nnz = rows.len();
        let mut row_ptr = vec![0usize; n + 1];
        for &r in &rows {
            row_ptr[r as usize + 1] += 1;
        }
        for i in 0..n {
            row_ptr[i + 1] += row_ptr[i];
        }
        let mut next = row_ptr[..n].to_vec();
        let mut row_cols = vec![0u32; nnz];
        let mut row_vals = vec![0f64; nnz];
        let mut row_src = vec![0usize; nnz];
        for j in 0..n {
            for k in col_ptr[j]..col_ptr[j + 1] {
                let r = rows[k] as usize;
                let slot = next[r];
                next[r] += 1;
                row_cols[slot] = j as u32;
                row_vals[slot] = values[k];
                row_src[slot] = k;
            }
        }

        let mut m = Self {
            n,
            col_ptr,
            rows,
            values,
            diag_pos,
            row_ptr,
            row_cols,
            row_vals,
            row_src,
            valid: false,
        };
        m.valid = m.validate().is_valid();
        m
    }

    /// Returns the matrix if it passes validation, the report otherwise.
    pub fn into_valid(self) -> Result<Self, ModelError> {
        if self.valid {
            Ok(self)
        } else {
            Err(ModelError::InvalidMatrix(Box::new(self.validate())))
        }
    }

    pub fn is_valid(&self) -> bool {
        self.valid
    }

    pub fn n(&self) -> usize {
        self.n
    }

    /// Stored entries, diagonal included.
    pub fn nnz(&self) -> usize {
        self.values.len()
    }

    /// Stored entries `(row, value)` of column `j`, ascending by row.
    pub fn column(&self, j: usize) -> impl Iterator<Item = (usize, f64)> + '_ {
        let range = self.col_ptr[j]..self.col_ptr[j + 1];
        self.rows[range.clone()]
            .iter()
            .zip(&self.values[range])
            .map(|(&r, &v)| (r as usize, v))
    }

    /// All stored entries `(row, col, value)` in column-major order.
    pub fn entries(&self) -> impl Iterator<Item = (usize, usize, f64)> + '_ {
        (0..self.n).flat_map(move |j| self.column(j).map(move |(i, v)| (i, j, v)))
    }

    pub fn diagonal(&self, j: usize) -> f64 {
        self.values[self.diag_pos[j]]
    }

    /// `f_ij`, zero when not stored.
    pub fn get(&self, i: usize, j: usize) -> f64 {
        let range = self.col_ptr[j]..self.col_ptr[j + 1];
        match self.rows[range.clone()].binary_search(&(i as u32)) {
            Ok(local) => self.values[range.start + local],
            Err(_) => 0.0,
        }
    }

    pub fn is_identity(&self) -> bool {
        self.nnz() == self.n && self.values.iter().all(|&v| v == 1.0)
    }

    /// Compensated sum of the off-diagonal entries of column `j`.
    pub fn off_diagonal_sum(&self, j: usize) -> f64 {
        self.column(j)
            .filter(|&(i, _)| i != j)
            .map(|(_, v)| v)
            .collect::<NeumaierSum>()
            .value()
    }

    /// Fraction of its wealth agent `j` (0-based) keeps over the step:
    /// `s_j = 1 - sum_{i != j} f_ij`, clamped to `[0, 1]`. Agrees with the
    /// stored diagonal within [`COLTOL`] for valid matrices.
    pub fn savings_fraction(&self, agent: usize) -> Result<f64, ModelError> {
        self.check_agent(agent)?;
        Ok((1.0 - self.off_diagonal_sum(agent)).clamp(0.0, 1.0))
    }

    /// Amount agent `j` pays to all other agents over the step:
    /// `x_j * sum_{i != j} f_ij`, within `[0, x_j]`.
    pub fn total_expenses(&self, x: &WealthVector, agent: usize) -> Result<f64, ModelError> {
        if x.len() != self.n {
            return Err(ModelError::DimensionMismatch {
                expected: self.n,
                found: x.len(),
            });
        }
        self.check_agent(agent)?;
        let xj = x.as_slice()[agent];
        Ok((xj * self.off_diagonal_sum(agent)).clamp(0.0, xj))
    }

    /// Checks every column: the sum must be within [`COLTOL`] of 1, entries
    /// must lie in `[0, 1]`, and the diagonal must be non-negative.
    pub fn validate(&self) -> ValidationReport {
        let mut deviations = Vec::with_capacity(self.n);
        let mut violations = Vec::new();
        for j in 0..self.n {
            let mut sum = NeumaierSum::new();
            for (i, v) in self.column(j) {
                sum.add(v);
                if v < 0.0 {
                    if i == j {
                        violations.push(Violation::NegativeDiagonal { column: j, value: v });
                    } else {
                        violations.push(Violation::NegativeEntry {
                            row: i,
                            column: j,
                            value: v,
                        });
                    }
                } else if v > 1.0 + COLTOL {
                    violations.push(Violation::EntryAboveOne {
                        row: i,
                        column: j,
                        value: v,
                    });
                }
            }
            let deviation = sum.value() - 1.0;
            if deviation.abs() > COLTOL {
                violations.push(Violation::ColumnSum {
                    column: j,
                    sum: sum.value(),
                    deviation,
                });
            }
            deviations.push(deviation);
        }
        ValidationReport {
            n: self.n,
            deviations,
            violations,
        }
    }

    fn check_agent(&self, agent: usize) -> Result<(), ModelError> {
        if agent >= self.n {
            return Err(ModelError::AgentOutOfRange {
                index: agent,
                n: self.n,
            });
        }
        Ok(())
    }

    pub(crate) fn col_ptr(&self) -> &[usize] {
        &self.col_ptr
    }

    pub(crate) fn csc_values(&self) -> &[f64] {
        &self.values
    }

    pub(crate) fn diag_positions(&self) -> &[usize] {
        &self.diag_pos
    }

    pub(crate) fn row_ptr(&self) -> &[usize] {
        &self.row_ptr
    }

    pub(crate) fn row_cols(&self) -> &[u32] {
        &self.row_cols
    }

    pub(crate) fn row_vals(&self) -> &[f64] {
        &self.row_vals
    }

    pub(crate) fn row_src(&self) -> &[usize] {
        &self.row_src
    }
}

fn check_dimension(n: usize) -> Result<(), ModelError> {
    if n == 0 {
        return Err(ModelError::EmptyEconomy);
    }
    if n > u32::MAX as usize {
        return Err(ModelError::DimensionTooLarge { n });
    }
    Ok(())
}

/// One problem found by [`CirculationMatrix::validate`]. Indices are
/// 0-based; `Display` prints them 1-based like the triplet file format.
#[derive(Debug, Clone, PartialEq)]
pub enum Violation {
    ColumnSum { column: usize, sum: f64, deviation: f64 },
    NegativeEntry { row: usize, column: usize, value: f64 },
    EntryAboveOne { row: usize, column: usize, value: f64 },
    NegativeDiagonal { column: usize, value: f64 },
}

impl Violation {
    pub fn column(&self) -> usize {
        match *self {
            Violation::ColumnSum { column, .. }
            | Violation::NegativeEntry { column, .. }
            | Violation::EntryAboveOne { column, .. }
            | Violation::NegativeDiagonal { column, .. } => column,
        }
    }
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match *self {
            Violation::ColumnSum {
                column,
                sum,
                deviation,
            } => write!(
                f,
                "column {}: sum {sum} deviates from 1 by {deviation:e}",
                column + 1
            ),
            Violation::NegativeEntry { row, column, value } => write!(
                f,
                "column {}: negative entry {value} at row {}",
                column + 1,
                row + 1
            ),
            Violation::EntryAboveOne { row, column, value } => write!(
                f,
                "column {}: entry {value} at row {} exceeds 1",
                column + 1,
                row + 1
            ),
            Violation::NegativeDiagonal { column, value } => write!(
                f,
                "column {}: negative savings (diagonal) {value}; spending exceeds wealth",
                column + 1
            ),
        }
    }
}

/// Outcome of [`CirculationMatrix::validate`].
#[derive(Debug, Clone, PartialEq)]
pub struct ValidationReport {
    pub n: usize,
    /// Signed `column sum - 1` for every column.
    pub deviations: Vec<f64>,
    pub violations: Vec<Violation>,
}

impl ValidationReport {
    pub fn is_valid(&self) -> bool {
        self.violations.is_empty()
    }

    pub fn max_abs_deviation(&self) -> f64 {
        self.deviations.iter().fold(0.0, |m, d| m.max(d.abs()))
    }

    /// Columns with at least one violation, ascending and deduplicated.
    pub fn offending_columns(&self) -> Vec<usize> {
        let mut cols: Vec<usize> = self.violations.iter().map(Violation::column).collect();
        cols.sort_unstable();
        cols.dedup();
        cols
    }
}

impl fmt::Display for ValidationReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_valid() {
            return write!(
                f,
                "valid (n = {}, max column deviation {:e})",
                self.n,
                self.max_abs_deviation()
            );
        }
        const SHOWN: usize = 5;
        for (k, v) in self.violations.iter().take(SHOWN).enumerate() {
            if k > 0 {
                f.write_str("; ")?;
            }
            write!(f, "{v}")?;
        }
        if self.violations.len() > SHOWN {
            write!(f, "; and {} more", self.violations.len() - SHOWN)?;
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn worked() -> CirculationMatrix {
        CirculationMatrix::from_dense_columns(&[
            vec![0.5, 0.3, 0.2],
            vec![0.2, 0.7, 0.1],
            vec![0.4, 0.0, 0.6],
        ])
        .unwrap()
    }

    #[test]
    fn single_agent_saving_everything_is_valid() {
        let m = CirculationMatrix::from_triplets(1, [(0, 0, 1.0)]).unwrap();
        assert!(m.validate().is_valid());
        assert!(m.is_identity());
    }

    #[test]
    fn short_column_is_reported() {
        let m = CirculationMatrix::from_dense_columns(&[vec![0.5, 0.5], vec![0.3, 0.6]]).unwrap();
        let report = m.validate();
        assert!(!report.is_valid());
        assert_eq!(report.offending_columns(), vec![1]);
        assert!((report.deviations[1] + 0.1).abs() < 1e-15);
        assert!(report.to_string().contains("column 2"));
        assert!(!m.is_valid());
        assert!(matches!(m.into_valid(), Err(ModelError::InvalidMatrix(_))));
    }

    #[test]
    fn worked_matrix_is_valid() {
        // direct summation of the columns
        for col in [[0.5, 0.3, 0.2], [0.2, 0.7, 0.1], [0.4, 0.0, 0.6]] {
            assert!((col.iter().sum::<f64>() - 1.0).abs() <= COLTOL);
        }
        let m = worked();
        assert!(m.validate().is_valid());
        assert_eq!(m.nnz(), 8);
        assert_eq!(m.get(1, 2), 0.0);
        assert_eq!(m.diagonal(1), 0.7);
    }

    #[test]
    fn range_violations() {
        let m = CirculationMatrix::from_triplets(2, [(0, 0, 1.5), (1, 0, -0.5), (1, 1, 1.0)])
            .unwrap();
        let report = m.validate();
        assert!(report
            .violations
            .iter()
            .any(|v| matches!(v, Violation::EntryAboveOne { row: 0, column: 0, .. })));
        assert!(report
            .violations
            .iter()
            .any(|v| matches!(v, Violation::NegativeEntry { row: 1, column: 0, .. })));
    }

    #[test]
    fn overspending_column_gets_negative_implied_diagonal() {
        let m = CirculationMatrix::from_triplets(3, [(1, 0, 0.7), (2, 0, 0.6)]).unwrap();
        assert!((m.diagonal(0) + 0.3).abs() < 1e-15);
        let report = m.validate();
        assert!(report
            .violations
            .iter()
            .any(|v| matches!(v, Violation::NegativeDiagonal { column: 0, .. })));
        // the other columns got implied diagonal 1
        assert_eq!(m.diagonal(1), 1.0);
        assert_eq!(m.diagonal(2), 1.0);
    }

    #[test]
    fn implied_diagonal_rounding_noise_is_zeroed() {
        let m = CirculationMatrix::from_triplets(2, [(1, 0, 1.0 + 1e-12)]).unwrap();
        assert_eq!(m.diagonal(0), 0.0);
        assert!(m.is_valid());
    }

    #[test]
    fn structural_errors() {
        assert!(matches!(
            CirculationMatrix::from_triplets(0, []),
            Err(ModelError::EmptyEconomy)
        ));
        assert!(matches!(
            CirculationMatrix::from_triplets(2, [(2, 0, 0.1)]),
            Err(ModelError::EntryOutOfRange { .. })
        ));
        assert!(matches!(
            CirculationMatrix::from_triplets(2, [(1, 0, 0.1), (1, 0, 0.2)]),
            Err(ModelError::DuplicateEntry { row: 1, col: 0 })
        ));
        assert!(matches!(
            CirculationMatrix::from_triplets(2, [(1, 0, f64::NAN)]),
            Err(ModelError::NonFiniteEntry { .. })
        ));
    }

    #[test]
    fn row_view_matches_columns() {
        let m = worked();
        for i in 0..3 {
            let range = m.row_ptr()[i]..m.row_ptr()[i + 1];
            let cols = &m.row_cols()[range.clone()];
            assert!(cols.windows(2).all(|w| w[0] < w[1]));
            for k in range {
                let j = m.row_cols()[k] as usize;
                assert_eq!(m.row_vals()[k], m.get(i, j));
                assert_eq!(m.csc_values()[m.row_src()[k]], m.get(i, j));
            }
        }
    }

    #[test]
    fn expenses_and_savings() {
        let m = worked();
        let x = WealthVector::new(vec![100.0, 200.0, 300.0]).unwrap();
        // off-diagonal sum of column 1 is 0.3 + 0.2 = 0.5
        assert!((m.total_expenses(&x, 0).unwrap() - 50.0).abs() < 1e-12);
        assert!((m.savings_fraction(0).unwrap() - 0.5).abs() < 1e-15);
        let id = CirculationMatrix::identity(3).unwrap();
        for j in 0..3 {
            assert_eq!(id.total_expenses(&x, j).unwrap(), 0.0);
            assert_eq!(id.savings_fraction(j).unwrap(), 1.0);
        }
        let zero = WealthVector::new(vec![0.0, 200.0, 300.0]).unwrap();
        assert_eq!(m.total_expenses(&zero, 0).unwrap(), 0.0);
        assert!(matches!(
            m.savings_fraction(3),
            Err(ModelError::AgentOutOfRange { index: 3, n: 3 })
        ));
        assert!(m.total_expenses(&x, 5).is_err());
    }

    #[test]
    fn full_spender_saves_nothing() {
        let m = CirculationMatrix::from_dense_columns(&[vec![0.0, 1.0], vec![0.0, 1.0]]).unwrap();
        assert_eq!(m.savings_fraction(0).unwrap(), 0.0);
    }
}
