//! Worker-pool execution with deterministic reductions.
//!
//! Work is described as contiguous index ranges handed to scoped threads.
//! Callers arrange that each unit of work touches only its own output, so
//! the layer never needs locks. In deterministic mode every combining step
//! runs in a fixed order that does not depend on how many workers executed
//! the partitions, which makes whole-pipeline outputs bit-identical across
//! worker counts.

use std::ops::Range;
use std::sync::atomic::{AtomicUsize, Ordering};
use std::sync::mpsc;

use crate::error::{Error, Result};

/// How partial results may be combined.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ExecMode {
    /// Fixed-shape reductions; outputs are independent of worker count.
    Deterministic,
    /// Combine in completion order; faster, reproducible only within
    /// floating-point tolerance.
    Fast,
}

/// Execution plan shared by all parallel operations.
#[derive(Debug, Clone)]
pub struct ExecPlan {
    pub workers: usize,
    pub mode: ExecMode,
    /// Optional partition granularity hint (elements per chunk).
    pub chunk: Option<usize>,
}

impl ExecPlan {
    pub fn new(workers: usize, mode: ExecMode) -> Result<Self> {
        if workers == 0 {
            return Err(Error::invalid("worker count must be at least 1"));
        }
        Ok(ExecPlan {
            workers,
            mode,
            chunk: None,
        })
    }

    /// Single worker, deterministic.
    pub fn serial() -> Self {
        ExecPlan {
            workers: 1,
            mode: ExecMode::Deterministic,
            chunk: None,
        }
    }

    /// All available hardware threads, deterministic mode.
    pub fn default_parallel() -> Self {
        let workers = std::thread::available_parallelism()
            .map(|n| n.get())
            .unwrap_or(1);
        ExecPlan {
            workers,
            mode: ExecMode::Deterministic,
            chunk: None,
        }
    }
}

impl Default for ExecPlan {
    fn default() -> Self {
        ExecPlan::default_parallel()
    }
}

/// The index spaces the pipeline partitions over.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PartitionKind {
    ByBand,
    ByPixelChunk,
    ByTriangleEntry,
    RotationBatch,
}

/// A disjoint, exhaustive split of `0..total` into per-worker ranges.
#[derive(Debug, Clone)]
pub struct PartitionSchedule {
    pub kind: PartitionKind,
    ranges: Vec<Range<usize>>,
}

impl PartitionSchedule {
    pub fn ranges(&self) -> &[Range<usize>] {
        &self.ranges
    }
}

/// Splits `0..total` into `workers` contiguous ranges whose sizes differ by
/// at most one; earlier workers receive the longer ranges.
pub fn partition(kind: PartitionKind, total: usize, workers: usize) -> PartitionSchedule {
    let workers = workers.max(1);
    let base = total / workers;
    let rem = total % workers;
    let mut ranges = Vec::with_capacity(workers);
    let mut start = 0;
    for w in 0..workers {
        let len = base + usize::from(w < rem);
        ranges.push(start..start + len);
        start += len;
    }
    PartitionSchedule { kind, ranges }
}

/// Runs `task` once per scheduled range and returns the results in range
/// order. Each range is processed serially by a single worker, so results
/// depend only on the schedule, not on thread interleaving.
pub fn run_tasks<T, F>(plan: &ExecPlan, schedule: &PartitionSchedule, task: F) -> Vec<T>
where
    T: Send,
    F: Fn(usize, Range<usize>) -> T + Sync,
{
    let ranges = schedule.ranges();
    let live = ranges.iter().filter(|r| !r.is_empty()).count();
    if plan.workers <= 1 || live <= 1 {
        return ranges
            .iter()
            .cloned()
            .enumerate()
            .map(|(w, r)| task(w, r))
            .collect();
    }
    let mut out: Vec<Option<T>> = Vec::new();
    out.resize_with(ranges.len(), || None);
    std::thread::scope(|scope| {
        for ((w, r), slot) in ranges.iter().cloned().enumerate().zip(out.iter_mut()) {
            let task = &task;
            scope.spawn(move || {
                *slot = Some(task(w, r));
            });
        }
    });
    out.into_iter()
        .map(|v| v.expect("worker finished"))
        .collect()
}

/// Splits `data` into consecutive chunks of `chunk_len` elements (the last
/// chunk may be short), distributes whole chunks over the plan's workers and
/// calls `f(chunk_index, chunk)` for each. Chunk contents are processed
/// serially, so output bits do not depend on the worker count.
pub fn for_each_chunk_mut<T, F>(
    plan: &ExecPlan,
    kind: PartitionKind,
    data: &mut [T],
    chunk_len: usize,
    f: F,
) where
    T: Send,
    F: Fn(usize, &mut [T]) + Sync,
{
    assert!(chunk_len > 0, "chunk_len must be positive");
    let n_chunks = data.len().div_ceil(chunk_len);
    if plan.workers <= 1 || n_chunks <= 1 {
        for (k, chunk) in data.chunks_mut(chunk_len).enumerate() {
            f(k, chunk);
        }
        return;
    }
    let schedule = partition(kind, n_chunks, plan.workers);
    std::thread::scope(|scope| {
        let mut rest = data;
        for r in schedule.ranges() {
            let elems = (r.len() * chunk_len).min(rest.len());
            let (mine, tail) = rest.split_at_mut(elems);
            rest = tail;
            if mine.is_empty() {
                continue;
            }
            let f = &f;
            let first_chunk = r.start;
            scope.spawn(move || {
                for (k, chunk) in mine.chunks_mut(chunk_len).enumerate() {
                    f(first_chunk + k, chunk);
                }
            });
        }
    });
}

/// Combines partial accumulators with a caller-supplied associative `combine`.
///
/// Deterministic mode reduces adjacent pairs in index order, level by level
/// (a fixed left-to-right pairwise tree), so the result depends only on the
/// input order. Fast mode folds items in completion order across workers.
/// Returns `None` for an empty input.
pub fn parallel_reduce<T, F>(plan: &ExecPlan, items: Vec<T>, combine: F) -> Option<T>
where
    T: Send,
    F: Fn(T, T) -> T + Sync,
{
    if items.is_empty() {
        return None;
    }
    match plan.mode {
        ExecMode::Deterministic => Some(reduce_pairwise(items, &combine)),
        ExecMode::Fast => Some(reduce_completion_order(plan, items, &combine)),
    }
}

fn reduce_pairwise<T, F: Fn(T, T) -> T>(mut items: Vec<T>, combine: &F) -> T {
    while items.len() > 1 {
        let mut next = Vec::with_capacity(items.len().div_ceil(2));
        let mut iter = items.into_iter();
        while let Some(a) = iter.next() {
            match iter.next() {
                Some(b) => next.push(combine(a, b)),
                None => next.push(a),
            }
        }
        items = next;
    }
    items.into_iter().next().expect("nonempty")
}

fn reduce_completion_order<T, F>(plan: &ExecPlan, items: Vec<T>, combine: &F) -> T
where
    T: Send,
    F: Fn(T, T) -> T + Sync,
{
    let workers = plan.workers.min(items.len()).max(1);
    if workers == 1 {
        let mut iter = items.into_iter();
        let first = iter.next().expect("nonempty");
        return iter.fold(first, combine);
    }
    // Items are pulled through per-slot options so workers can claim them
    // by index without cloning.
    let slots: Vec<std::sync::Mutex<Option<T>>> = items
        .into_iter()
        .map(|v| std::sync::Mutex::new(Some(v)))
        .collect();
    let cursor = AtomicUsize::new(0);
    let (tx, rx) = mpsc::channel::<T>();
    std::thread::scope(|scope| {
        for _ in 0..workers {
            let tx = tx.clone();
            let slots = &slots;
            let cursor = &cursor;
            scope.spawn(move || {
                let mut local: Option<T> = None;
                loop {
                    let k = cursor.fetch_add(1, Ordering::Relaxed);
                    if k >= slots.len() {
                        break;
                    }
                    let item = slots[k].lock().unwrap().take().expect("claimed once");
                    local = Some(match local.take() {
                        None => item,
                        Some(acc) => combine(acc, item),
                    });
                }
                if let Some(acc) = local {
                    let _ = tx.send(acc);
                }
            });
        }
        drop(tx);
    });
    let mut acc: Option<T> = None;
    for part in rx.iter() {
        acc = Some(match acc.take() {
            None => part,
            Some(a) => combine(a, part),
        });
    }
    acc.expect("at least one worker produced a partial")
}
