//! Execution of independent runs.
//!
//! Runs share nothing mutable, so a batch is an ordered map: results come
//! back in input order regardless of which worker finished first. With the
//! `parallel` feature the map fans out over a rayon pool; without it every
//! entry point falls back to [`map_sequential`].

/// Ordered map on the calling thread.
pub fn map_sequential<T, R, F>(items: &[T], f: F) -> Vec<R>
where
    F: Fn(&T) -> R,
{
    items.iter().map(f).collect()
}

/// Ordered map over a dedicated pool of `workers` threads (0 = available
/// parallelism).
#[cfg(feature = "parallel")]
pub fn map_parallel<T, R, F>(items: &[T], workers: usize, f: F) -> Vec<R>
where
    T: Sync,
    R: Send,
    F: Fn(&T) -> R + Sync + Send,
{
    use rayon::prelude::*;

    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(workers)
        .build()
        .expect("failed to start worker pool");
    pool.install(|| items.par_iter().map(&f).collect())
}

/// Dispatches to the parallel map when available and `workers != 1`.
pub fn map_runs<T, R, F>(items: &[T], workers: usize, f: F) -> Vec<R>
where
    T: Sync,
    R: Send,
    F: Fn(&T) -> R + Sync + Send,
{
    #[cfg(feature = "parallel")]
    {
        if workers != 1 {
            return map_parallel(items, workers, f);
        }
    }
    let _ = workers;
    map_sequential(items, f)
}

/// Whether this build can run batches in parallel.
pub const fn parallel_enabled() -> bool {
    cfg!(feature = "parallel")
}

/// Worker count used for `workers = 0`.
pub fn available_workers() -> usize {
    std::thread::available_parallelism().map_or(1, |n| n.get())
}
