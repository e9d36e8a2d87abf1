//! Deterministic work partitioning.
//!
//! Grid sweeps and Monte Carlo loops split their work into *fixed* chunks
//! whose boundaries do not depend on the number of worker threads; chunk
//! results are combined in chunk order. Output is therefore bitwise
//! identical whatever the thread cap is.

use std::sync::atomic::{AtomicUsize, Ordering};
use std::sync::Mutex;
use std::thread;

static THREAD_CAP: AtomicUsize = AtomicUsize::new(0);

/// Cap the number of worker threads used by chunked loops.
/// `0` restores the default (machine parallelism).
pub fn set_thread_cap(n: usize) {
    THREAD_CAP.store(n, Ordering::Relaxed);
}

/// Effective worker count: the cap if set, otherwise available parallelism.
pub fn effective_threads() -> usize {
    let cap = THREAD_CAP.load(Ordering::Relaxed);
    if cap > 0 {
        cap
    } else {
        thread::available_parallelism().map(|n| n.get()).unwrap_or(1)
    }
}

/// Map `f` over the index ranges `[k*chunk, min((k+1)*chunk, n))` and return
/// the per-chunk results in chunk order. The chunk size is fixed by the
/// caller, so the result is independent of the thread count.
pub fn map_chunks<T, F>(n: usize, chunk: usize, f: F) -> Vec<T>
where
    T: Send,
    F: Fn(std::ops::Range<usize>) -> T + Sync,
{
    assert!(chunk > 0, "chunk size must be positive");
    let ranges: Vec<_> = (0..n)
        .step_by(chunk)
        .map(|lo| lo..(lo + chunk).min(n))
        .collect();
    let workers = effective_threads().min(ranges.len()).max(1);
    if workers <= 1 {
        return ranges.into_iter().map(f).collect();
    }
    let next = AtomicUsize::new(0);
    let collected = Mutex::new(Vec::with_capacity(ranges.len()));
    thread::scope(|scope| {
        for _ in 0..workers {
            scope.spawn(|| {
                let mut local = Vec::new();
                loop {
                    let i = next.fetch_add(1, Ordering::Relaxed);
                    if i >= ranges.len() {
                        break;
                    }
                    local.push((i, f(ranges[i].clone())));
                }
                collected.lock().unwrap().append(&mut local);
            });
        }
    });
    let mut pairs = collected.into_inner().unwrap();
    pairs.sort_by_key(|(i, _)| *i);
    pairs.into_iter().map(|(_, v)| v).collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn chunk_results_in_order() {
        let sums = map_chunks(10, 3, |r| r.sum::<usize>());
        assert_eq!(sums, vec![1 + 2, 3 + 4 + 5, 6 + 7 + 8, 9]);
    }

    #[test]
    fn independent_of_thread_cap() {
        let f = |r: std::ops::Range<usize>| r.map(|i| (i as f64).sin()).sum::<f64>();
        set_thread_cap(1);
        let a = map_chunks(1000, 64, f);
        set_thread_cap(7);
        let b = map_chunks(1000, 64, f);
        set_thread_cap(0);
        let c = map_chunks(1000, 64, f);
        assert_eq!(a, b);
        assert_eq!(a, c);
    }
}
