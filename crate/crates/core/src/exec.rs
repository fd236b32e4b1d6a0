//! Execution policy and deterministic reductions.
//!
//! Every O(N^2) kernel in the crate is written as "compute one row per
//! index, then merge rows in index order". Rows are summed sequentially with
//! [`KahanSum`], so the only thing parallelism changes is which thread
//! computes a row, never the floating-point result.
//!
//! With the `parallel` feature (default) rows are distributed with rayon.
//! Without it, or when [`set_parallelism`] selects
//! [`Parallelism::Sequential`], everything runs on the calling thread.

use std::sync::atomic::{AtomicU8, Ordering};

use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Parallelism {
    Sequential,
    Parallel,
}

static POLICY: AtomicU8 = AtomicU8::new(1);

/// Below this many items `map_indices` stays on the calling thread; the
/// scheduling cost would exceed the work.
pub const PARALLEL_MIN_ITEMS: usize = 64;

/// Select the process-wide execution policy.
pub fn set_parallelism(p: Parallelism) {
    POLICY.store(
        match p {
            Parallelism::Sequential => 0,
            Parallelism::Parallel => 1,
        },
        Ordering::Relaxed,
    );
}

/// Currently effective policy. Always `Sequential` when the crate is built
/// without the `parallel` feature.
pub fn parallelism() -> Parallelism {
    if cfg!(feature = "parallel") && POLICY.load(Ordering::Relaxed) == 1 {
        Parallelism::Parallel
    } else {
        Parallelism::Sequential
    }
}

/// `(0..n).map(f).collect()`, possibly in parallel. Output order is the
/// index order regardless of policy.
pub fn map_indices<T, F>(n: usize, f: F) -> Vec<T>
where
    T: Send,
    F: Fn(usize) -> T + Sync + Send,
{
    match parallelism() {
        #[cfg(feature = "parallel")]
        Parallelism::Parallel if n >= PARALLEL_MIN_ITEMS => {
            use rayon::prelude::*;
            (0..n).into_par_iter().map(f).collect()
        }
        _ => (0..n).map(f).collect(),
    }
}

/// Map over a slice, possibly in parallel, preserving order.
pub fn map_slice<S, T, F>(items: &[S], f: F) -> Vec<T>
where
    S: Sync,
    T: Send,
    F: Fn(&S) -> T + Sync + Send,
{
    map_indices(items.len(), |i| f(&items[i]))
}

/// Neumaier-compensated running sum.
#[derive(Debug, Clone, Copy, Default)]
pub struct KahanSum {
    sum: f64,
    compensation: f64,
}

impl KahanSum {
    pub fn new() -> Self {
        Self::default()
    }

    #[inline]
    pub fn add(&mut self, value: f64) {
        let t = self.sum + value;
        if self.sum.abs() >= value.abs() {
            self.compensation += (self.sum - t) + value;
        } else {
            self.compensation += (value - t) + self.sum;
        }
        self.sum = t;
    }

    #[inline]
    pub fn value(&self) -> f64 {
        self.sum + self.compensation
    }
}

impl FromIterator<f64> for KahanSum {
    fn from_iter<I: IntoIterator<Item = f64>>(iter: I) -> Self {
        let mut k = KahanSum::new();
        for v in iter {
            k.add(v);
        }
        k
    }
}

/// Compensated sum in iteration order.
pub fn ksum<I: IntoIterator<Item = f64>>(iter: I) -> f64 {
    iter.into_iter().collect::<KahanSum>().value()
}

/// Sum of `row(i)` over `0..n`: rows possibly computed in parallel, merged
/// sequentially in index order.
pub fn sum_rows<F>(n: usize, row: F) -> f64
where
    F: Fn(usize) -> f64 + Sync + Send,
{
    ksum(map_indices(n, row))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn kahan_recovers_small_terms() {
        let mut k = KahanSum::new();
        k.add(1.0);
        for _ in 0..10_000 {
            k.add(1e-16);
        }
        k.add(-1.0);
        assert!((k.value() - 1e-12).abs() < 1e-20);
    }

    #[test]
    fn policies_agree_bitwise() {
        let row = |i: usize| (i as f64 + 0.1).sqrt().sin() * 1e-3;
        set_parallelism(Parallelism::Sequential);
        let a = sum_rows(5000, row);
        set_parallelism(Parallelism::Parallel);
        let b = sum_rows(5000, row);
        assert_eq!(a.to_bits(), b.to_bits());
    }
}
