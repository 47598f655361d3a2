//! Data-parallel helpers with a sequential fallback.
//!
//! With the `parallel` feature the helpers dispatch to rayon; without it they
//! run the same closures in a plain loop. Work is always split into blocks
//! whose boundaries depend only on the data length, never on the number of
//! workers.

/// How a kernel distributes its blocks.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Execution {
    Sequential,
    /// Rayon work stealing; identical to `Sequential` when the crate is built
    /// without the `parallel` feature.
    Parallel,
}

impl Default for Execution {
    fn default() -> Self {
        if cfg!(feature = "parallel") {
            Execution::Parallel
        } else {
            Execution::Sequential
        }
    }
}

/// Calls `f(start, block)` for every `block_len`-sized block of `out`.
pub fn for_each_block<T, F>(exec: Execution, out: &mut [T], block_len: usize, f: F)
where
    T: Send,
    F: Fn(usize, &mut [T]) + Sync + Send,
{
    match exec {
        #[cfg(feature = "parallel")]
        Execution::Parallel => {
            use rayon::prelude::*;
            out.par_chunks_mut(block_len)
                .enumerate()
                .for_each(|(b, chunk)| f(b * block_len, chunk));
        }
        _ => {
            for (b, chunk) in out.chunks_mut(block_len).enumerate() {
                f(b * block_len, chunk);
            }
        }
    }
}

/// Runs `f` on every task; task order only matters for side effects, which
/// callers must keep disjoint.
pub fn for_each_task<T, F>(exec: Execution, tasks: Vec<T>, f: F)
where
    T: Send,
    F: Fn(T) + Sync + Send,
{
    match exec {
        #[cfg(feature = "parallel")]
        Execution::Parallel => {
            use rayon::prelude::*;
            tasks.into_par_iter().for_each(f);
        }
        _ => tasks.into_iter().for_each(f),
    }
}

/// Maps each index range `[k*block, (k+1)*block) ∩ [0, len)` and collects
/// the results in range order.
pub fn map_ranges<R, F>(exec: Execution, len: usize, block: usize, f: F) -> Vec<R>
where
    R: Send,
    F: Fn(std::ops::Range<usize>) -> R + Sync + Send,
{
    let blocks = len.div_ceil(block);
    let range = |b: usize| b * block..((b + 1) * block).min(len);
    match exec {
        #[cfg(feature = "parallel")]
        Execution::Parallel => {
            use rayon::prelude::*;
            (0..blocks).into_par_iter().map(|b| f(range(b))).collect()
        }
        _ => (0..blocks).map(|b| f(range(b))).collect(),
    }
}

/// Maps every `chunk`-sized slice of `values`, results in chunk order.
pub fn map_chunks<T, R, F>(values: &[T], chunk: usize, f: F) -> Vec<R>
where
    T: Sync,
    R: Send,
    F: Fn(&[T]) -> R + Sync + Send,
{
    map_ranges(Execution::default(), values.len(), chunk, |r| f(&values[r]))
}
