//! Deterministic parallel sweeps over independent work items.
//!
//! Results are merged by item index, never by completion order, so the
//! output is identical for any thread count. `HILBVOL_THREADS` caps the
//! worker count.

/// Worker count: `HILBVOL_THREADS` if set, otherwise the available
/// parallelism.
pub fn thread_cap() -> usize {
    if let Ok(v) = std::env::var("HILBVOL_THREADS") {
        if let Ok(n) = v.trim().parse::<usize>() {
            return n.max(1);
        }
    }
    std::thread::available_parallelism().map(|n| n.get()).unwrap_or(1)
}

/// Maps `f` over `0..count`, preserving index order in the output.
pub fn map_indexed<R, F>(count: usize, f: F) -> Vec<R>
where
    R: Send,
    F: Fn(usize) -> R + Sync,
{
    let threads = thread_cap().min(count.max(1));
    if threads <= 1 || count <= 1 {
        return (0..count).map(f).collect();
    }
    let mut slots: Vec<Option<R>> = (0..count).map(|_| None).collect();
    let chunk = count.div_ceil(threads);
    std::thread::scope(|scope| {
        for (t, slice) in slots.chunks_mut(chunk).enumerate() {
            let f = &f;
            scope.spawn(move || {
                for (off, slot) in slice.iter_mut().enumerate() {
                    *slot = Some(f(t * chunk + off));
                }
            });
        }
    });
    slots.into_iter().map(|s| s.expect("worker filled every slot")).collect()
}

/// Sums `f(i)` over `0..count` with the same static chunking as
/// [`map_indexed`]; integer sums are order-independent.
pub fn sum_over_indices<F>(count: usize, f: F) -> usize
where
    F: Fn(usize) -> usize + Sync,
{
    let threads = thread_cap().min(count.max(1));
    if threads <= 1 || count <= 1 {
        return (0..count).map(f).sum();
    }
    let chunk = count.div_ceil(threads);
    let mut totals = vec![0usize; threads.min(count)];
    std::thread::scope(|scope| {
        for (t, total) in totals.iter_mut().enumerate() {
            let f = &f;
            scope.spawn(move || {
                let lo = t * chunk;
                let hi = ((t + 1) * chunk).min(count);
                *total = (lo..hi).map(f).sum();
            });
        }
    });
    totals.into_iter().sum()
}
