//! Data-parallel execution of sampling loops.
//!
//! Estimator inner loops fold over 64-sample blocks. With the `parallel`
//! feature (the default) the fold runs on rayon; without it, or inside
//! [`run_sequential`], it runs on the calling thread. Accumulators are
//! integer counts merged by addition, so the result is bit-identical for
//! every thread count and schedule.

use std::cell::Cell;

/// Minimum blocks per rayon task; amortizes fold-state setup.
#[cfg(feature = "parallel")]
const MIN_BLOCKS_PER_TASK: usize = 64;

thread_local! {
    static FORCE_SEQUENTIAL: Cell<bool> = const { Cell::new(false) };
}

/// Run `f` with all estimator loops on the calling thread.
///
/// Used by the benchmark suite to compare the parallel and sequential
/// paths within one build, and by tests asserting that both paths agree.
pub fn run_sequential<R>(f: impl FnOnce() -> R) -> R {
    FORCE_SEQUENTIAL.with(|flag| {
        let prev = flag.replace(true);
        let out = f();
        flag.set(prev);
        out
    })
}

pub(crate) fn sequential_forced() -> bool {
    FORCE_SEQUENTIAL.with(|flag| flag.get())
}

/// Accumulators that can be merged; merging must be commutative and
/// associative so the fold is schedule-independent.
pub trait Merge: Send {
    fn merge(self, other: Self) -> Self;
}

impl Merge for u64 {
    fn merge(self, other: Self) -> Self {
        self + other
    }
}

impl Merge for (u64, Vec<u64>, Vec<u64>) {
    fn merge(mut self, other: Self) -> Self {
        self.0 += other.0;
        for (a, b) in self.1.iter_mut().zip(other.1) {
            *a += b;
        }
        for (a, b) in self.2.iter_mut().zip(other.2) {
            *a += b;
        }
        self
    }
}

/// Fold `step` over block indices `0..blocks` and merge the results.
///
/// `scratch` builds per-task reusable state (plane buffers).
pub(crate) fn fold_blocks<A, S, FI, FS, FP>(
    blocks: u64,
    init: FI,
    scratch: FP,
    step: FS,
) -> A
where
    A: Merge,
    FI: Fn() -> A + Send + Sync,
    FP: Fn() -> S + Send + Sync,
    FS: Fn(&mut A, &mut S, u64) + Send + Sync,
    S: Send,
{
    #[cfg(feature = "parallel")]
    {
        if !sequential_forced() {
            use rayon::prelude::*;
            return (0..blocks as usize)
                .into_par_iter()
                .with_min_len(MIN_BLOCKS_PER_TASK)
                .fold(
                    || (init(), scratch()),
                    |(mut acc, mut s), b| {
                        step(&mut acc, &mut s, b as u64);
                        (acc, s)
                    },
                )
                .map(|(acc, _)| acc)
                .reduce(&init, |a, b| a.merge(b));
        }
    }
    let mut acc = init();
    let mut s = scratch();
    for b in 0..blocks {
        step(&mut acc, &mut s, b);
    }
    acc
}

/// Map trials `0..trials` to values, preserving trial order in the output.
pub(crate) fn map_trials<T, F>(trials: u64, f: F) -> Vec<T>
where
    T: Send,
    F: Fn(u64) -> T + Send + Sync,
{
    #[cfg(feature = "parallel")]
    {
        if !sequential_forced() {
            use rayon::prelude::*;
            return (0..trials as usize)
                .into_par_iter()
                .map(|t| f(t as u64))
                .collect();
        }
    }
    (0..trials).map(f).collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn fold_matches_sequential() {
        let par = fold_blocks(1000, || 0u64, || (), |acc, _, b| *acc += b * b);
        let seq = run_sequential(|| {
            fold_blocks(1000, || 0u64, || (), |acc, _, b| *acc += b * b)
        });
        assert_eq!(par, seq);
        assert_eq!(seq, (0..1000u64).map(|b| b * b).sum::<u64>());
    }
}
