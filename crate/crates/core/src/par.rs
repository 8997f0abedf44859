//! Index-keyed map over replicate jobs.
//!
//! `map_indexed(n, workers, f)` returns `[f(0), f(1), ..., f(n-1)]`. With the
//! `parallel` feature the calls are spread over a rayon pool of `workers`
//! threads (0 = rayon's default); otherwise, or when `workers == 1`, they run
//! in order on the calling thread. Each call must derive its randomness from
//! its index alone, which makes the output independent of scheduling.

#[cfg(feature = "parallel")]
pub fn map_indexed<T, F>(n: usize, workers: usize, f: F) -> Vec<T>
where
    T: Send,
    F: Fn(usize) -> T + Sync + Send,
{
    use rayon::prelude::*;

    if workers == 1 || n <= 1 {
        return map_sequential(n, f);
    }
    let run = || (0..n).into_par_iter().map(&f).collect::<Vec<T>>();
    if workers == 0 {
        return run();
    }
    match rayon::ThreadPoolBuilder::new().num_threads(workers).build() {
        Ok(pool) => pool.install(run),
        Err(_) => run(),
    }
}

#[cfg(not(feature = "parallel"))]
pub fn map_indexed<T, F>(n: usize, _workers: usize, f: F) -> Vec<T>
where
    T: Send,
    F: Fn(usize) -> T + Sync + Send,
{
    map_sequential(n, f)
}

/// Plain in-order map; the fallback path and the baseline in benchmarks.
pub fn map_sequential<T, F>(n: usize, f: F) -> Vec<T>
where
    F: Fn(usize) -> T,
{
    (0..n).map(f).collect()
}

/// Whether this build can actually run replicates concurrently.
pub const fn is_parallel() -> bool {
    cfg!(feature = "parallel")
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn output_is_keyed_by_index() {
        for workers in [0, 1, 2, 4] {
            let v = map_indexed(100, workers, |i| i * i);
            assert_eq!(v, (0..100).map(|i| i * i).collect::<Vec<_>>());
        }
    }

    #[test]
    fn empty_input() {
        let v: Vec<usize> = map_indexed(0, 3, |i| i);
        assert!(v.is_empty());
    }
}
