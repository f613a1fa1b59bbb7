//! Chunked map/reduce that runs on rayon when the `parallel` feature is on
//! and sequentially otherwise. Reductions used in this crate are associative
//! and commutative, so the result never depends on how chunks are scheduled.

/// Execution strategy for the data-parallel kernels.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Exec {
    Sequential,
    /// Falls back to sequential when built without the `parallel` feature.
    #[default]
    Parallel,
}

impl Exec {
    pub fn is_parallel(self) -> bool {
        cfg!(feature = "parallel") && self == Exec::Parallel
    }
}

/// Maps every index in `0..n` and folds the results with `reduce`.
pub fn map_reduce<T, M, R>(exec: Exec, n: usize, identity: T, map: M, reduce: R) -> T
where
    T: Send + Sync + Clone,
    M: Fn(usize) -> T + Send + Sync,
    R: Fn(T, T) -> T + Send + Sync,
{
    #[cfg(feature = "parallel")]
    if exec.is_parallel() {
        use rayon::prelude::*;
        return (0..n)
            .into_par_iter()
            .map(map)
            .reduce(|| identity.clone(), reduce);
    }
    let _ = exec;
    (0..n).map(map).fold(identity, reduce)
}

/// Number of chunks of `chunk` items needed to cover `n` items.
pub fn chunk_count(n: usize, chunk: usize) -> usize {
    n.div_ceil(chunk)
}
