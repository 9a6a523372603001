//! Element-level execution: rayon when the `parallel` feature is enabled and
//! requested, a plain loop otherwise. Results are always returned in element
//! order so reductions are reproducible.

/// Evaluates `f` for every index in `0..n`.
pub fn map_indexed<T, F>(n: usize, parallel: bool, f: F) -> Vec<T>
where
    T: Send,
    F: Fn(usize) -> T + Sync + Send,
{
    #[cfg(feature = "parallel")]
    if parallel {
        use rayon::prelude::*;
        return (0..n).into_par_iter().map(f).collect();
    }
    let _ = parallel;
    (0..n).map(f).collect()
}

/// Calls `f(k, chunk)` on consecutive chunks of `out` of length `chunk`.
pub fn for_each_chunk<T, F>(out: &mut [f64], chunk: usize, parallel: bool, f: F) -> Vec<T>
where
    T: Send,
    F: Fn(usize, &mut [f64]) -> T + Sync + Send,
{
    #[cfg(feature = "parallel")]
    if parallel {
        use rayon::prelude::*;
        return out.par_chunks_mut(chunk).enumerate().map(|(k, c)| f(k, c)).collect();
    }
    let _ = parallel;
    out.chunks_mut(chunk).enumerate().map(|(k, c)| f(k, c)).collect()
}

/// Whether this build can run element loops in parallel.
pub fn parallel_available() -> bool {
    cfg!(feature = "parallel")
}
