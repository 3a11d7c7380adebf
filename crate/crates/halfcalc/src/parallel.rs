//! Data-parallel helpers. With the `parallel` feature (default) the inner
//! loops fan out over rayon; without it the same call sites run sequentially.
//! Reductions keep a fixed order either way, so results are deterministic.

#[cfg(feature = "parallel")]
use rayon::prelude::*;

/// Map over an index range, collecting results in index order.
pub fn map_indexed<T, F>(n: usize, f: F) -> Vec<T>
where
    T: Send,
    F: Fn(usize) -> T + Sync + Send,
{
    #[cfg(feature = "parallel")]
    {
        (0..n).into_par_iter().map(f).collect()
    }
    #[cfg(not(feature = "parallel"))]
    {
        (0..n).map(f).collect()
    }
}

/// Map over a slice, collecting results in input order.
pub fn map_slice<I, T, F>(items: &[I], f: F) -> Vec<T>
where
    I: Sync,
    T: Send,
    F: Fn(&I) -> T + Sync + Send,
{
    #[cfg(feature = "parallel")]
    {
        items.par_iter().map(f).collect()
    }
    #[cfg(not(feature = "parallel"))]
    {
        items.iter().map(f).collect()
    }
}

/// Cap the rayon pool from the HALFCALC_THREADS environment variable.
/// No-op without the `parallel` feature or if the pool is already built.
pub fn init_thread_cap() {
    #[cfg(feature = "parallel")]
    {
        if let Ok(v) = std::env::var("HALFCALC_THREADS") {
            if let Ok(n) = v.parse::<usize>() {
                if n >= 1 {
                    let _ = rayon::ThreadPoolBuilder::new().num_threads(n).build_global();
                }
            }
        }
    }
}
