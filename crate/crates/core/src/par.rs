//! Optional data parallelism.
//!
//! Work is spread over rayon only when the caller is already running inside a
//! rayon pool (`ThreadPool::install`). Outside of a pool every helper runs
//! sequentially, which is the reference mode for bit-level regression tests.
//! Each index writes exactly one output, so both modes produce identical values.

#[cfg(feature = "parallel")]
fn in_pool() -> bool {
    rayon::current_thread_index().is_some()
}

pub(crate) fn map_indexed<T, F>(n: usize, f: F) -> Vec<T>
where
    T: Send,
    F: Fn(usize) -> T + Send + Sync,
{
    #[cfg(feature = "parallel")]
    if in_pool() {
        use rayon::prelude::*;
        return (0..n).into_par_iter().map(f).collect();
    }
    (0..n).map(f).collect()
}

pub(crate) fn for_each_chunk<T, F>(data: &mut [T], chunk: usize, f: F)
where
    T: Send,
    F: Fn(usize, &mut [T]) + Send + Sync,
{
    if chunk == 0 {
        return;
    }
    #[cfg(feature = "parallel")]
    if in_pool() {
        use rayon::prelude::*;
        data.par_chunks_mut(chunk)
            .enumerate()
            .for_each(|(i, c)| f(i, c));
        return;
    }
    data.chunks_mut(chunk).enumerate().for_each(|(i, c)| f(i, c));
}
