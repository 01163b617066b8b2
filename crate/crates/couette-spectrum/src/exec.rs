use couette_core::exec::Executor;
use rayon::prelude::*;

/// Executor backed by the current rayon thread pool; results keep index order.
#[derive(Debug, Clone, Copy, Default)]
pub struct RayonExec;

impl Executor for RayonExec {
    fn map<T, F>(&self, n: usize, f: F) -> Vec<T>
    where
        T: Send,
        F: Fn(usize) -> T + Sync + Send,
    {
        (0..n).into_par_iter().map(f).collect()
    }
}
