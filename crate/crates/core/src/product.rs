//! Explicit in-homogeneous products for small economies.

use crate::matrix::CirculationMatrix;
use crate::par::{self, Execution};
use crate::step::float_kernel;
use crate::ModelError;

/// Largest dimension accepted by [`matrix_product`].
pub const PRODUCT_NMAX: usize = 1024;

/// Product of `factors` given in chronological order `F_0, F_1, ...`:
/// returns `F_{k-1} ... F_1 F_0`, so that applying the result to `x(0)`
/// equals stepping through the factors one by one. An empty list gives the
/// identity of dimension `n`.
///
/// Column `j` of the product is obtained by stepping the unit vector `e_j`
/// through the factors. Exact zeros off the diagonal are not stored.
pub fn matrix_product<'a, I>(n: usize, factors: I) -> Result<CirculationMatrix, ModelError>
where
    I: IntoIterator<Item = &'a CirculationMatrix>,
{
    if n > PRODUCT_NMAX {
        return Err(ModelError::ProductTooLarge {
            n,
            limit: PRODUCT_NMAX,
        });
    }
    let factors: Vec<&CirculationMatrix> = factors.into_iter().collect();
    for f in &factors {
        if f.n() != n {
            return Err(ModelError::DimensionMismatch {
                expected: n,
                found: f.n(),
            });
        }
        if !f.is_valid() {
            return Err(ModelError::InvalidMatrix(Box::new(f.validate())));
        }
    }
    if factors.is_empty() {
        return CirculationMatrix::identity(n);
    }

    let columns: Vec<Vec<(u32, f64)>> = par::map_ranges(Execution::default(), n, 1, |r| {
        let j = r.start;
        let mut v = vec![0.0; n];
        let mut w = vec![0.0; n];
        v[j] = 1.0;
        for f in &factors {
            float_kernel(f, &v, &mut w, Execution::Sequential);
            std::mem::swap(&mut v, &mut w);
        }
        v.into_iter()
            .enumerate()
            .filter(|&(i, x)| i == j || x != 0.0)
            .map(|(i, x)| (i as u32, x))
            .collect()
    });

    let mut col_ptr = Vec::with_capacity(n + 1);
    let mut rows = Vec::new();
    let mut values = Vec::new();
    col_ptr.push(0);
    for column in columns {
        for (i, x) in column {
            rows.push(i);
            values.push(x);
        }
        col_ptr.push(rows.len());
    }
    Ok(CirculationMatrix::from_sorted_columns(n, col_ptr, rows, values))
}
