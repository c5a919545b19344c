use rayon::ThreadPoolBuilder;

/// Runs `f` on a pool of `workers` threads, or on the global pool when `None`.
///
/// Every parallel routine in this crate writes per-task results into fixed
/// slots and reduces them in index order, so output never depends on `workers`.
pub fn with_workers<R, F>(workers: Option<usize>, f: F) -> R
where
    R: Send,
    F: FnOnce() -> R + Send,
{
    match workers {
        Some(n) => match ThreadPoolBuilder::new().num_threads(n.max(1)).build() {
            Ok(pool) => pool.install(f),
            Err(_) => f(),
        },
        None => f(),
    }
}
