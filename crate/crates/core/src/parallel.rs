//! Data-parallel helpers with a sequential fallback.
//!
//! With the `parallel` feature (default) [`ExecPolicy::Parallel`] fans work out
//! over the rayon pool; without it every policy runs sequentially. Results are
//! always returned in input order, and float reductions sum fixed-size chunks
//! in order, so outputs do not depend on the thread count.

#[cfg(feature = "parallel")]
use rayon::prelude::*;

/// Chunk length for ordered float reductions.
pub const REDUCTION_CHUNK: usize = 4096;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ExecPolicy {
    Sequential,
    Parallel,
}

impl Default for ExecPolicy {
    fn default() -> Self {
        if cfg!(feature = "parallel") {
            ExecPolicy::Parallel
        } else {
            ExecPolicy::Sequential
        }
    }
}

/// `items.map(f)` preserving order.
pub fn map_ordered<T, R, F>(items: &[T], policy: ExecPolicy, f: F) -> Vec<R>
where
    T: Sync,
    R: Send,
    F: Fn(&T) -> R + Sync + Send,
{
    match policy {
        #[cfg(feature = "parallel")]
        ExecPolicy::Parallel => items.par_iter().map(f).collect(),
        _ => items.iter().map(f).collect(),
    }
}

/// Sum of `f(i)` for `i in 0..len` over fixed chunks, reduced in chunk order.
pub fn chunked_sum<F>(len: usize, policy: ExecPolicy, f: F) -> f64
where
    F: Fn(usize) -> f64 + Sync + Send,
{
    let chunks: Vec<(usize, usize)> = (0..len)
        .step_by(REDUCTION_CHUNK)
        .map(|s| (s, (s + REDUCTION_CHUNK).min(len)))
        .collect();
    let partial = map_ordered(&chunks, policy, |&(a, b)| (a..b).map(&f).sum::<f64>());
    partial.into_iter().sum()
}

/// Configures the global pool size; a no-op without the `parallel` feature or
/// when the pool already exists.
pub fn init_workers(workers: Option<usize>) {
    #[cfg(feature = "parallel")]
    if let Some(n) = workers {
        let _ = rayon::ThreadPoolBuilder::new().num_threads(n.max(1)).build_global();
    }
    #[cfg(not(feature = "parallel"))]
    let _ = workers;
}

pub fn available_parallelism() -> usize {
    #[cfg(feature = "parallel")]
    {
        rayon::current_num_threads()
    }
    #[cfg(not(feature = "parallel"))]
    {
        1
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn policies_agree() {
        let xs: Vec<u64> = (0..1000).collect();
        let a = map_ordered(&xs, ExecPolicy::Sequential, |x| x * x);
        let b = map_ordered(&xs, ExecPolicy::Parallel, |x| x * x);
        assert_eq!(a, b);
        let s1 = chunked_sum(10_000, ExecPolicy::Sequential, |i| (i as f64).sqrt());
        let s2 = chunked_sum(10_000, ExecPolicy::Parallel, |i| (i as f64).sqrt());
        assert_eq!(s1.to_bits(), s2.to_bits());
    }
}
