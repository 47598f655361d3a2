//! Compensated summation.
//!
//! Everything in the engine that adds floats (row reductions in the step
//! kernel, column sums during validation, wealth totals) goes through
//! [`NeumaierSum`]. Totals over long vectors use [`fixed_shape_total`], whose
//! reduction tree depends only on the input length.

use std::iter::FromIterator;

use crate::par;

/// Neumaier's variant of Kahan summation. It stays accurate when a term is
/// larger in magnitude than the running sum.
#[derive(Debug, Clone, Copy, Default)]
pub struct NeumaierSum {
    sum: f64,
    comp: f64,
}

impl NeumaierSum {
    pub const fn new() -> Self {
        Self { sum: 0.0, comp: 0.0 }
    }

    #[inline]
    pub fn add(&mut self, value: f64) {
        let t = self.sum + value;
        if self.sum.abs() >= value.abs() {
            self.comp += (self.sum - t) + value;
        } else {
            self.comp += (value - t) + self.sum;
        }
        self.sum = t;
    }

    #[inline]
    pub fn value(&self) -> f64 {
        self.sum + self.comp
    }
}

impl Extend<f64> for NeumaierSum {
    fn extend<I: IntoIterator<Item = f64>>(&mut self, iter: I) {
        for v in iter {
            self.add(v);
        }
    }
}

impl FromIterator<f64> for NeumaierSum {
    fn from_iter<I: IntoIterator<Item = f64>>(iter: I) -> Self {
        let mut s = Self::new();
        s.extend(iter);
        s
    }
}

/// Compensated sum of a slice, in index order.
pub fn compensated_sum(values: &[f64]) -> f64 {
    values.iter().copied().collect::<NeumaierSum>().value()
}

/// Chunk length of the fixed-shape reduction.
pub const TOTAL_CHUNK: usize = 4096;

/// Compensated total whose summation order depends only on `values.len()`:
/// each chunk of [`TOTAL_CHUNK`] entries is summed in index order, then the
/// chunk sums are summed in chunk order. Chunks may be reduced in parallel.
pub fn fixed_shape_total(values: &[f64]) -> f64 {
    if values.len() <= TOTAL_CHUNK {
        return compensated_sum(values);
    }
    let partials = par::map_chunks(values, TOTAL_CHUNK, compensated_sum);
    compensated_sum(&partials)
}
