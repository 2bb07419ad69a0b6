//! Order-preserving map over a slice, optionally spread across worker threads.

/// Applies `f` to every item and returns results in input order.
/// With `workers <= 1` (or without the `parallel` feature) this runs inline.
pub fn map_ordered<T, R, F>(items: &[T], workers: usize, f: F) -> Vec<R>
where
    T: Sync,
    R: Send,
    F: Fn(&T) -> R + Sync + Send,
{
    #[cfg(feature = "parallel")]
    if workers > 1 && items.len() > 1 {
        use rayon::prelude::*;
        if let Ok(pool) = rayon::ThreadPoolBuilder::new().num_threads(workers).build() {
            return pool.install(|| items.par_iter().map(&f).collect());
        }
    }
    let _ = workers;
    items.iter().map(f).collect()
}

/// Default worker count: available parallelism, or 1 without the `parallel` feature.
pub fn default_workers() -> usize {
    if cfg!(feature = "parallel") {
        std::thread::available_parallelism().map_or(1, |n| n.get())
    } else {
        1
    }
}
