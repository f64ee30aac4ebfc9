//! Trial-level parallelism with bit-stable results.
//!
//! Trials are indexed; workers map indices to values and the collected vector
//! is always in trial order, so any reduction downstream sees the same
//! sequence no matter the thread count. With the `parallel` feature disabled
//! everything runs on the calling thread.

#[cfg(feature = "parallel")]
use rayon::prelude::*;

/// Map trial indices `0..n` to values, in trial order.
pub fn run_trials<T, F>(n: u64, f: F) -> Vec<T>
where
    T: Send,
    F: Fn(u64) -> T + Sync + Send,
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

/// Like [`run_trials`] but with per-worker scratch state. The scratch must be
/// pure workspace: trial outputs may not depend on what earlier trials left in
/// it.
pub fn run_trials_with<S, T, I, F>(n: u64, init: I, f: F) -> Vec<T>
where
    S: Send,
    T: Send,
    I: Fn() -> S + Sync + Send,
    F: Fn(&mut S, u64) -> T + Sync + Send,
{
    #[cfg(feature = "parallel")]
    {
        (0..n).into_par_iter().map_init(&init, |s, i| f(s, i)).collect()
    }
    #[cfg(not(feature = "parallel"))]
    {
        let mut s = init();
        (0..n).map(|i| f(&mut s, i)).collect()
    }
}

/// Sequential reference path, kept available in every build for the
/// parallel-vs-sequential benchmarks and for determinism checks.
pub fn run_trials_seq_with<S, T, I, F>(n: u64, init: I, mut f: F) -> Vec<T>
where
    I: Fn() -> S,
    F: FnMut(&mut S, u64) -> T,
{
    let mut s = init();
    (0..n).map(|i| f(&mut s, i)).collect()
}

/// Kahan-compensated sum in slice order.
pub fn kahan_sum(values: &[f64]) -> f64 {
    let mut sum = 0.0f64;
    let mut c = 0.0f64;
    for &v in values {
        let y = v - c;
        let t = sum + y;
        c = (t - sum) - y;
        sum = t;
    }
    sum
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn trial_order_is_stable() {
        let a = run_trials(1000, |i| i * i);
        let b = run_trials_seq_with(1000, || (), |_, i| i * i);
        assert_eq!(a, b);
    }

    #[test]
    fn kahan_handles_cancellation() {
        let mut v = vec![1e16, 1.0, -1e16];
        v.extend(std::iter::repeat(0.0).take(10));
        assert_eq!(kahan_sum(&v), 1.0);
    }
}
