//! Data-parallel execution hook for batch gradient computation.
//!
//! The core crate never spawns threads; callers with a thread pool supply
//! their own [`BatchExecutor`]. Results come back in index order so that
//! reductions are independent of the worker count.

use alloc::vec::Vec;

pub trait BatchExecutor: Sync {
    /// Evaluates `f(0..n)` and returns the results in index order.
    fn map<T, F>(&self, n: usize, f: F) -> Vec<T>
    where
        T: Send,
        F: Fn(usize) -> T + Sync + Send;
}

/// Runs everything on the calling thread.
#[derive(Debug, Clone, Copy, Default)]
pub struct Sequential;

impl BatchExecutor for Sequential {
    fn map<T, F>(&self, n: usize, f: F) -> Vec<T>
    where
        T: Send,
        F: Fn(usize) -> T + Sync + Send,
    {
        (0..n).map(f).collect()
    }
}
