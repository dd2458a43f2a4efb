//! Data-parallel helpers with a sequential fallback.
//!
//! With the `parallel` feature the helpers run on rayon; `jobs == Some(1)`
//! always takes the sequential path. Every helper returns results in input
//! order, so callers see the same output at any thread count.

#[cfg(feature = "parallel")]
use rayon::prelude::*;

/// `items.iter().map(f).collect()`, possibly on a pool of `jobs` threads.
pub(crate) fn map_ordered<I, O, F>(items: &[I], jobs: Option<usize>, f: F) -> Vec<O>
where
    I: Sync,
    O: Send,
    F: Fn(&I) -> O + Sync + Send,
{
    #[cfg(feature = "parallel")]
    {
        match jobs {
            Some(1) => items.iter().map(f).collect(),
            Some(k) => match rayon::ThreadPoolBuilder::new().num_threads(k).build() {
                Ok(pool) => pool.install(|| items.par_iter().map(&f).collect()),
                Err(_) => items.par_iter().map(&f).collect(),
            },
            None => items.par_iter().map(&f).collect(),
        }
    }
    #[cfg(not(feature = "parallel"))]
    {
        let _ = jobs;
        items.iter().map(f).collect()
    }
}

/// Calls `f(chunk_index, chunk)` on consecutive `chunk`-sized pieces of `data`.
pub(crate) fn for_each_chunk_mut<T, F>(data: &mut [T], chunk: usize, f: F)
where
    T: Send,
    F: Fn(usize, &mut [T]) + Sync + Send,
{
    #[cfg(feature = "parallel")]
    data.par_chunks_mut(chunk)
        .enumerate()
        .for_each(|(i, c)| f(i, c));
    #[cfg(not(feature = "parallel"))]
    data.chunks_mut(chunk).enumerate().for_each(|(i, c)| f(i, c));
}

/// `(0..len).map(f).collect()`, in parallel when available.
pub(crate) fn map_range<O, F>(len: usize, f: F) -> Vec<O>
where
    O: Send,
    F: Fn(usize) -> O + Sync + Send,
{
    #[cfg(feature = "parallel")]
    {
        (0..len).into_par_iter().map(f).collect()
    }
    #[cfg(not(feature = "parallel"))]
    {
        (0..len).map(f).collect()
    }
}

/// Number of worker threads the default pool would use.
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
