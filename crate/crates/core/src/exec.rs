//! Trial scheduling.
//!
//! Harness functions hand an [`Executor`] a trial count and a pure closure of
//! the trial index. The returned vector is always ordered by index, so any
//! aggregation over it is independent of the worker count.

use alloc::vec::Vec;

pub trait Executor: Sync {
    fn map<T, F>(&self, count: usize, f: F) -> Vec<T>
    where
        T: Send,
        F: Fn(usize) -> T + Sync + Send;
}

/// Runs trials in index order on the calling thread.
#[derive(Debug, Clone, Copy, Default)]
pub struct Sequential;

impl Executor for Sequential {
    fn map<T, F>(&self, count: usize, f: F) -> Vec<T>
    where
        T: Send,
        F: Fn(usize) -> T + Sync + Send,
    {
        (0..count).map(f).collect()
    }
}
