//! Sequential or data-parallel execution of row-independent work.
//!
//! With the `parallel` feature disabled every strategy runs sequentially.

#[cfg(feature = "parallel")]
use rayon::prelude::*;

/// How row-independent loops are scheduled.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Exec {
    Sequential,
    /// Rayon work-stealing over rows. Falls back to sequential when the
    /// crate is built without the `parallel` feature.
    Parallel,
}

impl Default for Exec {
    fn default() -> Self {
        if cfg!(feature = "parallel") {
            Exec::Parallel
        } else {
            Exec::Sequential
        }
    }
}

impl Exec {
    /// Calls `f(row_index, row)` on each `row_len`-sized chunk of `data`.
    pub(crate) fn for_each_row<F>(self, data: &mut [f64], row_len: usize, f: F)
    where
        F: Fn(usize, &mut [f64]) + Send + Sync,
    {
        match self {
            #[cfg(feature = "parallel")]
            Exec::Parallel => data
                .par_chunks_mut(row_len)
                .enumerate()
                .for_each(|(y, row)| f(y, row)),
            _ => data
                .chunks_mut(row_len)
                .enumerate()
                .for_each(|(y, row)| f(y, row)),
        }
    }

    /// Maps `0..n` through `f`, preserving order.
    pub(crate) fn map_range<T, F>(self, n: usize, f: F) -> Vec<T>
    where
        T: Send,
        F: Fn(usize) -> T + Send + Sync,
    {
        match self {
            #[cfg(feature = "parallel")]
            Exec::Parallel => (0..n).into_par_iter().map(f).collect(),
            _ => (0..n).map(f).collect(),
        }
    }
}
