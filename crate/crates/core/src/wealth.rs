//! Wealth vectors in the two numeric modes.

use std::borrow::Cow;
use std::fmt;
use std::io::{self, Write};

use crate::matrix::CirculationMatrix;
use crate::par::Execution;
use crate::step;
use crate::sum::fixed_shape_total;
use crate::ModelError;

/// Arithmetic used to evolve the wealth vector.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum NumericMode {
    /// 64-bit floats with compensated accumulation.
    Float,
    /// Integer minor units; every step conserves the total exactly.
    Integer,
}

impl NumericMode {
    pub fn as_str(self) -> &'static str {
        match self {
            NumericMode::Float => "float",
            NumericMode::Integer => "integer",
        }
    }
}

impl fmt::Display for NumericMode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

/// Per-agent wealth `x_i(t)` in monetary units.
#[derive(Debug, Clone, PartialEq)]
pub struct WealthVector {
    values: Vec<f64>,
}

impl WealthVector {
    pub fn new(values: Vec<f64>) -> Result<Self, ModelError> {
        if values.is_empty() {
            return Err(ModelError::EmptyEconomy);
        }
        if let Some((index, &value)) = values
            .iter()
            .enumerate()
            .find(|(_, v)| !v.is_finite() || **v < 0.0)
        {
            return Err(ModelError::InvalidWealth { index, value });
        }
        if !fixed_shape_total(&values).is_finite() {
            return Err(ModelError::TotalOverflow);
        }
        Ok(Self { values })
    }

    /// Every agent holds `amount`.
    pub fn equal(n: usize, amount: f64) -> Result<Self, ModelError> {
        Self::new(vec![amount; n])
    }

    pub(crate) fn from_raw(values: Vec<f64>) -> Self {
        Self { values }
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.values
    }

    pub fn into_inner(self) -> Vec<f64> {
        self.values
    }

    /// Compensated total; the monetary base when taken at `t = 0`.
    pub fn total(&self) -> f64 {
        fixed_shape_total(&self.values)
    }
}

/// Per-agent wealth in integer minor units (for example cents).
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct UnitWealth {
    units: Vec<u64>,
}

impl UnitWealth {
    /// Fails when the total does not fit in a `u64`, which would make the
    /// per-agent sums of a step overflow.
    pub fn new(units: Vec<u64>) -> Result<Self, ModelError> {
        if units.is_empty() {
            return Err(ModelError::EmptyEconomy);
        }
        let total: u128 = units.iter().map(|&u| u as u128).sum();
        if total > u64::MAX as u128 {
            return Err(ModelError::TotalOverflow);
        }
        Ok(Self { units })
    }

    pub(crate) fn from_raw(units: Vec<u64>) -> Self {
        Self { units }
    }

    pub fn len(&self) -> usize {
        self.units.len()
    }

    pub fn is_empty(&self) -> bool {
        self.units.is_empty()
    }

    pub fn as_slice(&self) -> &[u64] {
        &self.units
    }

    pub fn into_inner(self) -> Vec<u64> {
        self.units
    }

    pub fn total(&self) -> u64 {
        self.units.iter().sum()
    }

    pub fn to_f64(&self) -> WealthVector {
        WealthVector::from_raw(self.units.iter().map(|&u| u as f64).collect())
    }
}

/// State that can be driven through a schedule by
/// [`run_simulation`](crate::run_simulation).
pub trait WealthState: Clone + Send + Sync + fmt::Debug {
    type Total: Copy + PartialEq + fmt::Debug + fmt::Display;

    const MODE: NumericMode;

    fn agents(&self) -> usize;

    fn total(&self) -> Self::Total;

    fn total_f64(total: Self::Total) -> f64;

    /// `|total - base|`, exact for integer totals.
    fn abs_drift(total: Self::Total, base: Self::Total) -> f64;

    /// Writes `F x` into `out`, reusing its allocation.
    fn step_into(
        &self,
        matrix: &CirculationMatrix,
        out: &mut Self,
        exec: Execution,
    ) -> Result<(), ModelError>;

    /// Float view for the analytics.
    fn values_f64(&self) -> Cow<'_, [f64]>;

    /// Writes `,x_1,...,x_n` with shortest round-trip formatting.
    fn write_csv_values(&self, w: &mut dyn Write) -> io::Result<()>;
}

impl WealthState for WealthVector {
    type Total = f64;
    const MODE: NumericMode = NumericMode::Float;

    fn agents(&self) -> usize {
        self.len()
    }

    fn total(&self) -> f64 {
        WealthVector::total(self)
    }

    fn total_f64(total: f64) -> f64 {
        total
    }

    fn abs_drift(total: f64, base: f64) -> f64 {
        (total - base).abs()
    }

    fn step_into(
        &self,
        matrix: &CirculationMatrix,
        out: &mut Self,
        exec: Execution,
    ) -> Result<(), ModelError> {
        step::check_step(matrix, self.len())?;
        out.values.resize(self.len(), 0.0);
        step::float_kernel(matrix, &self.values, &mut out.values, exec);
        Ok(())
    }

    fn values_f64(&self) -> Cow<'_, [f64]> {
        Cow::Borrowed(&self.values)
    }

    fn write_csv_values(&self, w: &mut dyn Write) -> io::Result<()> {
        for v in &self.values {
            write!(w, ",{v}")?;
        }
        Ok(())
    }
}

impl WealthState for UnitWealth {
    type Total = u64;
    const MODE: NumericMode = NumericMode::Integer;

    fn agents(&self) -> usize {
        self.len()
    }

    fn total(&self) -> u64 {
        UnitWealth::total(self)
    }

    fn total_f64(total: u64) -> f64 {
        total as f64
    }

    fn abs_drift(total: u64, base: u64) -> f64 {
        total.abs_diff(base) as f64
    }

    fn step_into(
        &self,
        matrix: &CirculationMatrix,
        out: &mut Self,
        exec: Execution,
    ) -> Result<(), ModelError> {
        step::check_step(matrix, self.len())?;
        out.units.resize(self.len(), 0);
        step::unit_kernel(matrix, &self.units, &mut out.units, exec);
        Ok(())
    }

    fn values_f64(&self) -> Cow<'_, [f64]> {
        Cow::Owned(self.units.iter().map(|&u| u as f64).collect())
    }

    fn write_csv_values(&self, w: &mut dyn Write) -> io::Result<()> {
        for v in &self.units {
            write!(w, ",{v}")?;
        }
        Ok(())
    }
}
