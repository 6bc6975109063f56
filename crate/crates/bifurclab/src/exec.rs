//! Rayon-backed executor.

use bifurclab_core::Executor;
use rayon::prelude::*;

/// Environment fallback for `--threads`.
pub const THREADS_ENV: &str = "BIFURCLAB_THREADS";

/// Runs index-ordered maps on a dedicated rayon pool. `collect` on an
/// indexed parallel iterator keeps index order, so results do not depend on
/// the number of workers.
pub struct Parallel {
    pool: rayon::ThreadPool,
}

impl Parallel {
    /// `threads = 0` lets rayon pick the number of workers.
    pub fn new(threads: usize) -> Result<Self, rayon::ThreadPoolBuildError> {
        let pool = rayon::ThreadPoolBuilder::new().num_threads(threads).build()?;
        Ok(Parallel { pool })
    }

    pub fn threads(&self) -> usize {
        self.pool.current_num_threads()
    }
}

impl Executor for Parallel {
    fn map<T, F>(&self, len: usize, f: F) -> Vec<T>
    where
        T: Send,
        F: Fn(usize) -> T + Sync + Send,
    {
        self.pool.install(|| (0..len).into_par_iter().map(f).collect())
    }
}
