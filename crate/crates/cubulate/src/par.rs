//! Data-parallel helpers with a sequential fallback.
//!
//! With the `parallel` feature (default) work is spread over the rayon
//! global pool, whose size honours `CUBULATE_THREADS`. Without it, or with
//! [`Exec::Sequential`], everything runs on the calling thread.

use std::sync::Once;

/// Runtime choice of execution strategy.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Default)]
pub enum Exec {
    #[default]
    Parallel,
    Sequential,
}

static INIT: Once = Once::new();

/// Number of worker threads requested through `CUBULATE_THREADS`, if set.
pub fn requested_threads() -> Option<usize> {
    std::env::var("CUBULATE_THREADS").ok()?.trim().parse().ok().filter(|&n| n > 0)
}

/// Configures the global pool once. Later calls are no-ops.
pub fn init() {
    INIT.call_once(|| {
        #[cfg(feature = "parallel")]
        if let Some(n) = requested_threads() {
            // another library may have built the pool first; that is fine
            let _ = rayon::ThreadPoolBuilder::new().num_threads(n).build_global();
        }
    });
}

pub fn current_threads() -> usize {
    #[cfg(feature = "parallel")]
    {
        init();
        rayon::current_num_threads()
    }
    #[cfg(not(feature = "parallel"))]
    {
        1
    }
}

/// Maps `f` over `items`, preserving order.
pub fn map<T, R, F>(exec: Exec, items: &[T], f: F) -> Vec<R>
where
    T: Sync,
    R: Send,
    F: Fn(&T) -> R + Sync + Send,
{
    #[cfg(feature = "parallel")]
    if exec == Exec::Parallel {
        use rayon::prelude::*;
        init();
        return items.par_iter().map(f).collect();
    }
    let _ = exec;
    items.iter().map(f).collect()
}

/// Maps `f` over `0..n`, preserving order.
pub fn map_range<R, F>(exec: Exec, n: usize, f: F) -> Vec<R>
where
    R: Send,
    F: Fn(usize) -> R + Sync + Send,
{
    #[cfg(feature = "parallel")]
    if exec == Exec::Parallel {
        use rayon::prelude::*;
        init();
        return (0..n).into_par_iter().map(f).collect();
    }
    let _ = exec;
    (0..n).map(f).collect()
}
