use log::info;

use super::spending::SpendingSampler;
use super::topology::Realized;
use super::{GeneratorError, SpendingSpec, TopologySpec};
use crate::matrix::CirculationMatrix;
use crate::par::{self, Execution};
use crate::rng::stream_rng;
use crate::sum::NeumaierSum;

/// Columns per generation block.
const GEN_BLOCK: usize = 1024;

/// Side information from [`generate_matrix_with`].
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct GenerationStats {
    /// Buyers without any seller; they save everything.
    pub isolated_buyers: usize,
    /// Stored off-diagonal entries.
    pub trade_entries: usize,
}

/// Draws a circulation matrix. Column `j` uses random stream `j` of `seed`:
/// the sellers (random topology only), then `sigma_j`, then the allocation
/// weights. Off-diagonal entries are `sigma_j * w_i` and the diagonal is
/// `1 -` their compensated sum, so every column sums to 1 within a few ulps.
pub fn generate_matrix(
    topology: &TopologySpec,
    spending: &SpendingSpec,
    seed: u64,
) -> Result<CirculationMatrix, GeneratorError> {
    generate_matrix_with(topology, spending, seed, Execution::default()).map(|(m, _)| m)
}

pub fn generate_matrix_with(
    topology: &TopologySpec,
    spending: &SpendingSpec,
    seed: u64,
    exec: Execution,
) -> Result<(CirculationMatrix, GenerationStats), GeneratorError> {
    topology.validate()?;
    let sampler = spending.sampler()?;
    let n = topology.n;
    let realized = topology.realize(seed);

    let blocks = par::map_ranges(exec, n, GEN_BLOCK, |cols| {
        generate_block(&realized, &sampler, n, seed, cols)
    });

    let nnz: usize = blocks.iter().map(|b| b.rows.len()).sum();
    let mut col_ptr = Vec::with_capacity(n + 1);
    let mut rows = Vec::with_capacity(nnz);
    let mut values = Vec::with_capacity(nnz);
    col_ptr.push(0);
    let mut isolated = Vec::new();
    for b in blocks {
        for len in b.lens {
            col_ptr.push(col_ptr.last().unwrap() + len);
        }
        rows.extend(b.rows);
        values.extend(b.values);
        isolated.extend(b.isolated);
    }
    if !isolated.is_empty() {
        let shown: Vec<String> = isolated.iter().take(5).map(|j| (j + 1).to_string()).collect();
        info!(
            "{} buyer(s) have no sellers and save everything (agents {}{})",
            isolated.len(),
            shown.join(", "),
            if isolated.len() > 5 { ", ..." } else { "" }
        );
    }
    let stats = GenerationStats {
        isolated_buyers: isolated.len(),
        trade_entries: nnz - n,
    };
    let m = CirculationMatrix::from_sorted_columns(n, col_ptr, rows, values);
    Ok((m.into_valid()?, stats))
}

#[derive(Default)]
struct ColumnBlock {
    lens: Vec<usize>,
    rows: Vec<u32>,
    values: Vec<f64>,
    isolated: Vec<usize>,
}

fn generate_block(
    realized: &Realized,
    sampler: &SpendingSampler,
    n: usize,
    seed: u64,
    cols: std::ops::Range<usize>,
) -> ColumnBlock {
    let mut block = ColumnBlock::default();
    let mut sellers = Vec::new();
    let mut weights = Vec::new();
    for j in cols {
        let mut rng = stream_rng(seed, j as u64);
        realized.sellers(n, j, &mut rng, &mut sellers);
        let start = block.rows.len();
        let mut spent = NeumaierSum::new();
        let mut diag_at = None;
        if sellers.is_empty() {
            block.isolated.push(j);
        } else {
            let sigma = sampler.sigma(&mut rng);
            weights.resize(sellers.len(), 0.0);
            sampler.weights(&mut rng, &mut weights);
            for (&i, &w) in sellers.iter().zip(&weights) {
                if diag_at.is_none() && i as usize > j {
                    diag_at = Some(block.rows.len());
                    block.rows.push(j as u32);
                    block.values.push(0.0);
                }
                let f = sigma * w;
                if f > 0.0 {
                    spent.add(f);
                    block.rows.push(i);
                    block.values.push(f);
                }
            }
        }
        let at = diag_at.unwrap_or_else(|| {
            block.rows.push(j as u32);
            block.values.push(0.0);
            block.rows.len() - 1
        });
        block.values[at] = (1.0 - spent.value()).max(0.0);
        block.lens.push(block.rows.len() - start);
    }
    block
}
