//! Replica-parallel execution with results in replica order.
//!
//! Replica r always receives index r, and each sampler derives its stream from
//! that index, so output does not depend on the worker count.

use rayon::prelude::*;

use crate::error::Result;

/// Evaluates `f(0), …, f(reps − 1)` on `workers` threads (0 = rayon default,
/// 1 = current thread) and returns them in index order.
pub fn run_replicas<T, F>(reps: usize, workers: usize, f: F) -> Vec<T>
where
    T: Send,
    F: Fn(u64) -> T + Sync + Send,
{
    if workers == 1 || reps <= 1 {
        return (0..reps as u64).map(&f).collect();
    }
    let run = || (0..reps as u64).into_par_iter().map(&f).collect();
    if workers == 0 {
        return run();
    }
    match rayon::ThreadPoolBuilder::new().num_threads(workers).build() {
        Ok(pool) => pool.install(run),
        Err(_) => (0..reps as u64).map(&f).collect(),
    }
}

/// Like [`run_replicas`] for fallible work; reports the error of the
/// lowest-indexed failing replica.
pub fn try_run_replicas<T, F>(reps: usize, workers: usize, f: F) -> Result<Vec<T>>
where
    T: Send,
    F: Fn(u64) -> Result<T> + Sync + Send,
{
    run_replicas(reps, workers, f).into_iter().collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::SeedSpec;

    #[test]
    fn order_and_values_do_not_depend_on_workers() {
        let f = |r: u64| SeedSpec::new(9, r).stream().gaussian().to_bits();
        let one = run_replicas(200, 1, f);
        let four = run_replicas(200, 4, f);
        let dflt = run_replicas(200, 0, f);
        assert_eq!(one, four);
        assert_eq!(one, dflt);
    }

    #[test]
    fn first_error_wins() {
        let r: Result<Vec<u64>> = try_run_replicas(50, 3, |i| {
            if i >= 10 {
                Err(crate::Error::param("i", format!("{i}")))
            } else {
                Ok(i)
            }
        });
        assert_eq!(r, Err(crate::Error::param("i", "10")));
    }

    #[test]
    fn zero_replicas() {
        assert!(run_replicas(0, 4, |r| r).is_empty());
    }
}
