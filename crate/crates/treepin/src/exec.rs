use rayon::prelude::*;
use treepin_core::montecarlo::Executor;

/// Executor backed by a private rayon pool. Results come back in index
/// order, so the thread count never changes an output.
pub struct RayonExecutor {
    pool: rayon::ThreadPool,
}

impl RayonExecutor {
    /// `threads = 0` lets rayon pick the number of workers.
    pub fn new(threads: usize) -> Result<Self, rayon::ThreadPoolBuildError> {
        let pool = rayon::ThreadPoolBuilder::new()
            .num_threads(threads)
            .build()?;
        Ok(RayonExecutor { pool })
    }

    pub fn threads(&self) -> usize {
        self.pool.current_num_threads()
    }
}

impl Executor for RayonExecutor {
    fn map_indexed<T, F>(&self, len: usize, job: F) -> Vec<T>
    where
        T: Send,
        F: Fn(usize) -> T + Sync + Send,
    {
        self.pool
            .install(|| (0..len).into_par_iter().map(&job).collect())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use treepin_core::montecarlo::Sequential;

    #[test]
    fn matches_sequential_order() {
        let job = |i: usize| (i as f64).sqrt() * 3.0;
        let want = Sequential.map_indexed(1000, job);
        for threads in [1, 3, 8] {
            let exec = RayonExecutor::new(threads).unwrap();
            assert_eq!(exec.threads(), threads);
            assert_eq!(exec.map_indexed(1000, job), want);
        }
    }
}
