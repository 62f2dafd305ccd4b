//! Execution strategy for the data-parallel loops.
//!
//! Every parallel loop in the crate goes through [`map_indexed`], which
//! preserves input order in its output. Reductions are then performed
//! sequentially by the caller, so results never depend on the thread count.
//! Without the `parallel` feature, [`Execution::Parallel`] falls back to the
//! sequential path.

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Execution {
    Sequential,
    #[default]
    Parallel,
}

impl Execution {
    pub fn is_parallel(self) -> bool {
        cfg!(feature = "parallel") && self == Execution::Parallel
    }
}

/// Applies `f` to `0..len` and returns the results in index order.
pub fn map_indexed<R, F>(exec: Execution, len: usize, f: F) -> Vec<R>
where
    R: Send,
    F: Fn(usize) -> R + Send + Sync,
{
    #[cfg(feature = "parallel")]
    if exec.is_parallel() {
        use rayon::prelude::*;
        return (0..len).into_par_iter().map(f).collect();
    }
    let _ = exec;
    (0..len).map(f).collect()
}

/// Fixed-size chunking of `0..total`, independent of the thread count.
pub(crate) fn chunks(total: usize, chunk: usize) -> Vec<std::ops::Range<usize>> {
    let chunk = chunk.max(1);
    (0..total.div_ceil(chunk))
        .map(|c| c * chunk..((c + 1) * chunk).min(total))
        .collect()
}
