//! Data-parallel helpers. With the `parallel` feature (default) batch work
//! runs on a rayon pool; without it every helper degrades to a plain loop.
//! The `*_seq` variants are always sequential so both paths can be
//! benchmarked side by side.

#[cfg(feature = "parallel")]
use rayon::prelude::*;

/// Order-preserving map over a slice, parallel when the feature is enabled.
pub fn map<T, R, F>(items: &[T], f: F) -> Vec<R>
where
    T: Sync,
    R: Send,
    F: Fn(&T) -> R + Sync + Send,
{
    #[cfg(feature = "parallel")]
    {
        items.par_iter().map(f).collect()
    }
    #[cfg(not(feature = "parallel"))]
    {
        map_seq(items, f)
    }
}

pub fn map_seq<T, R, F>(items: &[T], f: F) -> Vec<R>
where
    F: Fn(&T) -> R,
{
    items.iter().map(f).collect()
}

/// Like [`map`] but with at most `jobs` workers. `jobs == 0` means the
/// global pool's default width.
pub fn map_bounded<T, R, F>(items: &[T], jobs: usize, f: F) -> Vec<R>
where
    T: Sync,
    R: Send,
    F: Fn(&T) -> R + Sync + Send,
{
    #[cfg(feature = "parallel")]
    {
        if jobs == 1 || items.len() <= 1 {
            return map_seq(items, f);
        }
        if jobs == 0 {
            return map(items, f);
        }
        match rayon::ThreadPoolBuilder::new().num_threads(jobs).build() {
            Ok(pool) => pool.install(|| items.par_iter().map(f).collect()),
            Err(_) => map_seq(items, f),
        }
    }
    #[cfg(not(feature = "parallel"))]
    {
        let _ = jobs;
        map_seq(items, f)
    }
}

/// Order-preserving map over an index range.
pub fn map_range<R, F>(n: usize, f: F) -> Vec<R>
where
    R: Send,
    F: Fn(usize) -> R + Sync + Send,
{
    #[cfg(feature = "parallel")]
    {
        (0..n).into_par_iter().map(f).collect()
    }
    #[cfg(not(feature = "parallel"))]
    {
        map_range_seq(n, f)
    }
}

pub fn map_range_seq<R, F>(n: usize, f: F) -> Vec<R>
where
    F: Fn(usize) -> R,
{
    (0..n).map(f).collect()
}
