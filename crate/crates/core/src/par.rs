//! Data-parallel helpers with a sequential fallback.
//!
//! Every helper preserves input order in its output, and callers reduce
//! floating-point results in that order, so the thread count never changes
//! a result. Without the `parallel` feature everything runs on the caller's
//! thread.

/// Environment variable capping worker threads.
pub const THREADS_ENV: &str = "QUADCODE_THREADS";

/// Order-preserving map over a slice.
#[cfg(feature = "parallel")]
pub fn map<T, R, F>(items: &[T], f: F) -> Vec<R>
where
    T: Sync,
    R: Send,
    F: Fn(&T) -> R + Sync + Send,
{
    use rayon::prelude::*;
    items.par_iter().map(f).collect()
}

#[cfg(not(feature = "parallel"))]
pub fn map<T, R, F>(items: &[T], f: F) -> Vec<R>
where
    T: Sync,
    R: Send,
    F: Fn(&T) -> R + Sync + Send,
{
    items.iter().map(f).collect()
}

/// Order-preserving map over fixed-size chunks. The chunk boundaries depend
/// only on `chunk`, never on the number of threads.
#[cfg(feature = "parallel")]
pub fn map_chunks<T, R, F>(items: &[T], chunk: usize, f: F) -> Vec<R>
where
    T: Sync,
    R: Send,
    F: Fn(usize, &[T]) -> R + Sync + Send,
{
    use rayon::prelude::*;
    items
        .par_chunks(chunk.max(1))
        .enumerate()
        .map(|(i, c)| f(i * chunk.max(1), c))
        .collect()
}

#[cfg(not(feature = "parallel"))]
pub fn map_chunks<T, R, F>(items: &[T], chunk: usize, f: F) -> Vec<R>
where
    T: Sync,
    R: Send,
    F: Fn(usize, &[T]) -> R + Sync + Send,
{
    items
        .chunks(chunk.max(1))
        .enumerate()
        .map(|(i, c)| f(i * chunk.max(1), c))
        .collect()
}

/// Runs `f` on a pool of `threads` workers (`None` = all cores).
#[cfg(feature = "parallel")]
pub fn install<R: Send>(threads: Option<usize>, f: impl FnOnce() -> R + Send) -> R {
    let mut builder = rayon::ThreadPoolBuilder::new();
    if let Some(n) = threads {
        builder = builder.num_threads(n.max(1));
    }
    match builder.build() {
        Ok(pool) => pool.install(f),
        Err(_) => f(),
    }
}

#[cfg(not(feature = "parallel"))]
pub fn install<R: Send>(_threads: Option<usize>, f: impl FnOnce() -> R + Send) -> R {
    f()
}

/// Reads [`THREADS_ENV`]; unset, empty, zero or unparsable means "all cores".
pub fn threads_from_env() -> Option<usize> {
    std::env::var(THREADS_ENV)
        .ok()
        .and_then(|v| v.trim().parse::<usize>().ok())
        .filter(|&n| n > 0)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn chunks_preserve_order() {
        let xs: Vec<u32> = (0..103).collect();
        let sums = install(Some(3), || map_chunks(&xs, 10, |start, c| (start, c.iter().sum::<u32>())));
        assert_eq!(sums.len(), 11);
        assert_eq!(sums[0], (0, 45));
        assert_eq!(sums[10], (100, 303));
        let doubled = map(&xs, |x| x * 2);
        assert_eq!(doubled[102], 204);
    }
}
