//! One step of the dynamics, `x(t + 1) = F_t x(t)`.
//!
//! The float kernel gathers each output agent's income over its row with a
//! compensated sum, columns in ascending order. The integer kernel first
//! splits every buyer's units among its sellers (largest-remainder
//! apportionment, residual kept as savings) and then gathers the payouts per
//! row. Both kernels give the same bits for any worker count.

use crate::matrix::CirculationMatrix;
use crate::par::{self, Execution};
use crate::sum::NeumaierSum;
use crate::wealth::{UnitWealth, WealthState, WealthVector};
use crate::ModelError;

/// Output rows per parallel block.
pub const ROW_BLOCK: usize = 4096;
/// Buyer columns per parallel block in the integer kernel.
pub const COL_BLOCK: usize = 4096;

/// `F x` in float mode.
pub fn apply_step(matrix: &CirculationMatrix, x: &WealthVector) -> Result<WealthVector, ModelError> {
    apply_step_with(matrix, x, Execution::default())
}

pub fn apply_step_with(
    matrix: &CirculationMatrix,
    x: &WealthVector,
    exec: Execution,
) -> Result<WealthVector, ModelError> {
    let mut out = WealthVector::from_raw(Vec::new());
    x.step_into(matrix, &mut out, exec)?;
    Ok(out)
}

/// `F x` in integer mode; the total is conserved exactly.
pub fn apply_step_units(matrix: &CirculationMatrix, x: &UnitWealth) -> Result<UnitWealth, ModelError> {
    apply_step_units_with(matrix, x, Execution::default())
}

pub fn apply_step_units_with(
    matrix: &CirculationMatrix,
    x: &UnitWealth,
    exec: Execution,
) -> Result<UnitWealth, ModelError> {
    let mut out = UnitWealth::from_raw(Vec::new());
    x.step_into(matrix, &mut out, exec)?;
    Ok(out)
}

pub(crate) fn check_step(matrix: &CirculationMatrix, len: usize) -> Result<(), ModelError> {
    if matrix.n() != len {
        return Err(ModelError::DimensionMismatch {
            expected: matrix.n(),
            found: len,
        });
    }
    if !matrix.is_valid() {
        return Err(ModelError::InvalidMatrix(Box::new(matrix.validate())));
    }
    Ok(())
}

/// `y_i = sum_j f_ij x_j` over the row view.
pub(crate) fn float_kernel(m: &CirculationMatrix, x: &[f64], y: &mut [f64], exec: Execution) {
    let row_ptr = m.row_ptr();
    let cols = m.row_cols();
    let vals = m.row_vals();
    par::for_each_block(exec, y, ROW_BLOCK, |start, block| {
        for (offset, out) in block.iter_mut().enumerate() {
            let i = start + offset;
            let mut acc = NeumaierSum::new();
            for k in row_ptr[i]..row_ptr[i + 1] {
                acc.add(vals[k] * x[cols[k] as usize]);
            }
            *out = acc.value();
        }
    });
}

pub(crate) fn unit_kernel(m: &CirculationMatrix, x: &[u64], y: &mut [u64], exec: Execution) {
    let n = m.n();
    let col_ptr = m.col_ptr();
    let mut payouts = vec![0u64; m.nnz()];

    // Cut the payout buffer at column-block boundaries so blocks can be
    // filled independently.
    let mut tasks = Vec::with_capacity(n.div_ceil(COL_BLOCK));
    let mut rest: &mut [u64] = &mut payouts;
    let mut col = 0;
    while col < n {
        let end = (col + COL_BLOCK).min(n);
        let (head, tail) = rest.split_at_mut(col_ptr[end] - col_ptr[col]);
        tasks.push((col, end, head));
        rest = tail;
        col = end;
    }
    par::for_each_task(exec, tasks, |(first, end, buf)| {
        let base = col_ptr[first];
        let mut scratch = Vec::new();
        for j in first..end {
            let range = col_ptr[j]..col_ptr[j + 1];
            let out = &mut buf[range.start - base..range.end - base];
            apportion_column(
                x[j],
                &m.csc_values()[range.clone()],
                m.diag_positions()[j] - range.start,
                out,
                &mut scratch,
            );
        }
    });

    let row_ptr = m.row_ptr();
    let src = m.row_src();
    par::for_each_block(exec, y, ROW_BLOCK, |start, block| {
        for (offset, out) in block.iter_mut().enumerate() {
            let i = start + offset;
            *out = (row_ptr[i]..row_ptr[i + 1]).map(|k| payouts[src[k]]).sum();
        }
    });
}

/// Splits `units` of one buyer among the entries of its column.
///
/// The off-diagonal quotas `f_k * units` are floored, the total payout is
/// `round(sum of quotas)` capped at `units`, and the floors are adjusted one
/// unit at a time by largest (or, when over, smallest) remainder, ties going
/// to the earlier entry. The diagonal receives `units - payout`, so the
/// column always distributes exactly `units`.
pub(crate) fn apportion_column(
    units: u64,
    fracs: &[f64],
    diag: usize,
    out: &mut [u64],
    scratch: &mut Vec<(f64, usize)>,
) {
    out.fill(0);
    if units == 0 {
        return;
    }
    let amount = units as f64;
    scratch.clear();
    let mut quota_sum = NeumaierSum::new();
    let mut floors: u128 = 0;
    for (k, &f) in fracs.iter().enumerate() {
        if k == diag || f <= 0.0 {
            continue;
        }
        let q = f * amount;
        quota_sum.add(q);
        let fl = q.floor();
        out[k] = fl as u64;
        floors += out[k] as u128;
        scratch.push((q - fl, k));
    }
    let target = (quota_sum.value().round().max(0.0) as u128).min(units as u128);
    if floors < target {
        scratch.sort_by(|a, b| b.0.total_cmp(&a.0).then(a.1.cmp(&b.1)));
        let mut missing = target - floors;
        'fill: loop {
            for &(_, k) in scratch.iter() {
                if missing == 0 {
                    break 'fill;
                }
                out[k] += 1;
                missing -= 1;
            }
        }
    } else if floors > target {
        scratch.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1)));
        let mut surplus = floors - target;
        while surplus > 0 {
            for &(_, k) in scratch.iter() {
                if surplus == 0 {
                    break;
                }
                if out[k] > 0 {
                    out[k] -= 1;
                    surplus -= 1;
                }
            }
        }
    }
    out[diag] = units - target as u64;
}
