//! Execution policy for the data-parallel kernels.
//!
//! With the `parallel` feature disabled every call runs sequentially and
//! `Exec::Parallel` silently degrades to `Exec::Sequential`. Results never
//! depend on the policy: work is split by index and merged in index order.

use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "lowercase")]
pub enum Exec {
    Sequential,
    #[default]
    Parallel,
}

impl Exec {
    pub fn is_parallel(self) -> bool {
        cfg!(feature = "parallel") && self == Exec::Parallel
    }
}

/// Evaluate `f(0..n)` and collect in index order.
pub fn map_range<T, F>(exec: Exec, n: usize, f: F) -> Vec<T>
where
    T: Send,
    F: Fn(usize) -> T + Sync + Send,
{
    #[cfg(feature = "parallel")]
    if exec.is_parallel() {
        use rayon::prelude::*;
        return (0..n).into_par_iter().map(f).collect();
    }
    let _ = exec;
    (0..n).map(f).collect()
}

/// Map over a slice, preserving order.
pub fn map_slice<S, T, F>(exec: Exec, items: &[S], f: F) -> Vec<T>
where
    S: Sync,
    T: Send,
    F: Fn(&S) -> T + Sync + Send,
{
    map_range(exec, items.len(), |i| f(&items[i]))
}

/// Sort floats ascending (NaNs last).
pub fn sort_f64(exec: Exec, v: &mut [f64]) {
    #[cfg(feature = "parallel")]
    if exec.is_parallel() {
        use rayon::prelude::*;
        v.par_sort_unstable_by(|a, b| a.total_cmp(b));
        return;
    }
    let _ = exec;
    v.sort_unstable_by(|a, b| a.total_cmp(b));
}

/// Fallible map; returns the first error in index order.
pub fn try_map_range<T, E, F>(exec: Exec, n: usize, f: F) -> Result<Vec<T>, E>
where
    T: Send,
    E: Send,
    F: Fn(usize) -> Result<T, E> + Sync + Send,
{
    map_range(exec, n, f).into_iter().collect()
}

/// Apply `f(i, &mut items[i])` to every element; returns the first error in index order.
pub fn try_for_each_mut<T, E, F>(exec: Exec, items: &mut [T], f: F) -> Result<(), E>
where
    T: Send,
    E: Send,
    F: Fn(usize, &mut T) -> Result<(), E> + Sync + Send,
{
    #[cfg(feature = "parallel")]
    if exec.is_parallel() {
        use rayon::prelude::*;
        let outcomes: Vec<Result<(), E>> = items.par_iter_mut().enumerate().map(|(i, x)| f(i, x)).collect();
        return outcomes.into_iter().collect();
    }
    let _ = exec;
    items.iter_mut().enumerate().try_for_each(|(i, x)| f(i, x))
}
