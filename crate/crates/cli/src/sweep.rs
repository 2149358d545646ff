//! Parallel sweeps over independent work items.

use rayon::prelude::*;

pub const THREADS_ENV: &str = "SELFISH_CC_THREADS";

/// Worker count from `SELFISH_CC_THREADS`, else the available parallelism.
pub fn thread_count() -> usize {
    std::env::var(THREADS_ENV)
        .ok()
        .and_then(|v| v.trim().parse::<usize>().ok())
        .filter(|&n| n > 0)
        .unwrap_or_else(|| std::thread::available_parallelism().map_or(1, |n| n.get()))
}

/// Maps `f` over contiguous chunks of `items` on a dedicated pool. Results
/// come back in chunk order whatever the completion order.
pub fn par_chunks<T, R, F>(items: &[T], f: F) -> Vec<R>
where
    T: Sync,
    R: Send,
    F: Fn(&[T]) -> R + Sync + Send,
{
    let threads = thread_count();
    let chunk = items.len().div_ceil(threads * 4).max(1);
    let pool = rayon::ThreadPoolBuilder::new().num_threads(threads).build().expect("thread pool");
    pool.install(|| items.par_chunks(chunk).map(&f).collect())
}
