//! Throughput microbenchmarks (`c[j] = a[j] * b[j] + c[j]`) and search probes.

use std::alloc::{self, Layout};
use std::hint::black_box;
use std::ptr::NonNull;
use std::sync::Barrier;
use std::time::Instant;

use serde::Serialize;
use treepar_core::{AffinityPolicy, Board, Budget, Move, Point, SearchConfig, SearchError, SearchStats};

use crate::parallel::{run_parallel_search, worker_cpus};
use crate::pinning::pin_current_thread;

const CACHE_LINE: usize = 64;

/// Compute-bound default: fits in L1/L2.
pub const COMPUTE_LENGTH: usize = 1 << 14;
/// Bandwidth default: well past any last-level cache.
pub const BANDWIDTH_LENGTH: usize = 1 << 26;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum ElementType {
    Float64,
    Int32,
}

impl ElementType {
    pub fn name(self) -> &'static str {
        match self {
            ElementType::Float64 => "float64",
            ElementType::Int32 => "int32",
        }
    }

    pub fn size(self) -> usize {
        match self {
            ElementType::Float64 => 8,
            ElementType::Int32 => 4,
        }
    }
}

impl std::str::FromStr for ElementType {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.to_ascii_lowercase().as_str() {
            "float64" | "f64" | "double" => Ok(ElementType::Float64),
            "int32" | "i32" | "int" => Ok(ElementType::Int32),
            _ => Err(format!("unknown element type `{s}`")),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum Benchmark {
    Kernel,
    Bandwidth,
}

impl Benchmark {
    pub fn name(self) -> &'static str {
        match self {
            Benchmark::Kernel => "kernel",
            Benchmark::Bandwidth => "bandwidth",
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub struct KernelSpec {
    pub element_type: ElementType,
    /// Total elements per array, split across threads.
    pub array_length: usize,
    pub repetitions: u64,
    pub threads: usize,
    #[serde(serialize_with = "ser_policy")]
    pub affinity: AffinityPolicy,
}

fn ser_policy<S: serde::Serializer>(p: &AffinityPolicy, s: S) -> Result<S::Ok, S::Error> {
    s.serialize_str(p.name())
}

impl KernelSpec {
    pub fn compute(element_type: ElementType, threads: usize) -> KernelSpec {
        KernelSpec {
            element_type,
            array_length: COMPUTE_LENGTH,
            repetitions: 20_000,
            threads,
            affinity: AffinityPolicy::None,
        }
    }

    pub fn bandwidth(threads: usize) -> KernelSpec {
        KernelSpec {
            element_type: ElementType::Float64,
            array_length: BANDWIDTH_LENGTH,
            repetitions: 5,
            threads,
            affinity: AffinityPolicy::None,
        }
    }
}

#[derive(Debug, thiserror::Error, PartialEq, Eq)]
pub enum BenchError {
    #[error("invalid kernel spec: {0}")]
    InvalidSpec(&'static str),
    #[error("kernel miscompiled/raced")]
    ChecksumMismatch,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct BenchResult {
    pub benchmark: &'static str,
    pub spec: KernelSpec,
    pub elapsed_secs: f64,
    /// Multiply-add operations performed across all threads.
    pub ops: u64,
    pub ops_per_sec: f64,
    pub bytes_per_sec: f64,
    /// Sum of `c[j]` after the run.
    pub checksum: f64,
    pub checksum_ok: bool,
    pub pinned: bool,
}

pub const BENCH_CSV_HEADER: &str = "benchmark,threads,policy,element_type,ops_per_sec,bytes_per_sec,checksum_ok";

impl BenchResult {
    pub fn csv_row(&self) -> String {
        format!(
            "{},{},{},{},{:.6e},{:.6e},{}",
            self.benchmark,
            self.spec.threads,
            self.spec.affinity.name(),
            self.spec.element_type.name(),
            self.ops_per_sec,
            self.bytes_per_sec,
            self.checksum_ok
        )
    }
}

pub fn bench_csv(results: &[BenchResult]) -> String {
    let mut out = String::from(BENCH_CSV_HEADER);
    out.push('\n');
    for r in results {
        out.push_str(&r.csv_row());
        out.push('\n');
    }
    out
}

trait Element: Copy + Send + Sync + 'static {
    const ZERO: Self;
    const ONE: Self;
    const TWO: Self;
    fn madd(a: Self, b: Self, c: Self) -> Self;
    fn to_f64(self) -> f64;
}

impl Element for f64 {
    const ZERO: f64 = 0.0;
    const ONE: f64 = 1.0;
    const TWO: f64 = 2.0;
    #[inline(always)]
    fn madd(a: f64, b: f64, c: f64) -> f64 {
        a * b + c
    }
    fn to_f64(self) -> f64 {
        self
    }
}

impl Element for i32 {
    const ZERO: i32 = 0;
    const ONE: i32 = 1;
    const TWO: i32 = 2;
    #[inline(always)]
    fn madd(a: i32, b: i32, c: i32) -> i32 {
        a.wrapping_mul(b).wrapping_add(c)
    }
    fn to_f64(self) -> f64 {
        self as f64
    }
}

/// Cache-line aligned buffer whose capacity is a whole number of lines.
struct LineBuf<T: Element> {
    ptr: NonNull<T>,
    len: usize,
    layout: Layout,
}

// SAFETY: LineBuf uniquely owns its allocation.
unsafe impl<T: Element> Send for LineBuf<T> {}

impl<T: Element> LineBuf<T> {
    fn filled(len: usize, value: T) -> LineBuf<T> {
        let bytes = (len * std::mem::size_of::<T>()).div_ceil(CACHE_LINE).max(1) * CACHE_LINE;
        let layout = Layout::from_size_align(bytes, CACHE_LINE).expect("kernel buffer layout");
        // SAFETY: layout has non-zero size.
        let raw = unsafe { alloc::alloc(layout) } as *mut T;
        let Some(ptr) = NonNull::new(raw) else {
            alloc::handle_alloc_error(layout);
        };
        let cap = bytes / std::mem::size_of::<T>();
        for i in 0..cap {
            // SAFETY: i < cap and the allocation holds cap elements.
            unsafe { ptr.as_ptr().add(i).write(value) };
        }
        LineBuf { ptr, len, layout }
    }

    fn as_slice(&self) -> &[T] {
        // SAFETY: len ≤ capacity and all elements are initialized.
        unsafe { std::slice::from_raw_parts(self.ptr.as_ptr(), self.len) }
    }

    fn as_mut_slice(&mut self) -> &mut [T] {
        // SAFETY: as above, with unique access through &mut self.
        unsafe { std::slice::from_raw_parts_mut(self.ptr.as_ptr(), self.len) }
    }
}

impl<T: Element> Drop for LineBuf<T> {
    fn drop(&mut self) {
        // SAFETY: allocated in `filled` with this layout.
        unsafe { alloc::dealloc(self.ptr.as_ptr() as *mut u8, self.layout) };
    }
}

#[inline(never)]
fn madd_pass<T: Element>(a: &[T], b: &[T], c: &mut [T]) {
    for ((c, &a), &b) in c.iter_mut().zip(a).zip(b) {
        *c = T::madd(a, b, *c);
    }
}

struct ChunkOutcome {
    sum: f64,
    ok: bool,
    pinned: bool,
}

fn chunk_worker<T: Element>(
    len: usize,
    reps: u64,
    cpu: Option<usize>,
    barrier: &Barrier,
    verify: impl Fn(T) -> bool,
) -> ChunkOutcome {
    let pinned = match cpu {
        Some(c) => pin_current_thread(c)
            .map_err(|e| log::warn!("pin to cpu {c} failed: {e}"))
            .is_ok(),
        None => false,
    };
    // First touch happens on the (possibly pinned) worker thread.
    let a = LineBuf::filled(len, T::ONE);
    let b = LineBuf::filled(len, T::TWO);
    let mut c = LineBuf::filled(len, T::ZERO);
    barrier.wait();
    for _ in 0..reps {
        madd_pass(black_box(a.as_slice()), black_box(b.as_slice()), c.as_mut_slice());
        black_box(c.as_mut_slice());
    }
    barrier.wait();
    let c = c.as_slice();
    ChunkOutcome {
        sum: c.iter().map(|v| v.to_f64()).sum(),
        ok: c.iter().all(|&v| verify(v)),
        pinned,
    }
}

fn run<T: Element>(
    benchmark: Benchmark,
    spec: &KernelSpec,
    verify: impl Fn(T) -> bool + Sync,
) -> Result<BenchResult, BenchError> {
    let threads = spec.threads;
    let cpus = worker_cpus(threads, spec.affinity);
    let barrier = Barrier::new(threads + 1);
    let (elapsed, outcomes) = std::thread::scope(|s| {
        let handles: Vec<_> = (0..threads)
            .map(|t| {
                let len = spec.array_length * (t + 1) / threads - spec.array_length * t / threads;
                let cpu = cpus.as_ref().map(|c| c[t]);
                let (barrier, verify) = (&barrier, &verify);
                s.spawn(move || chunk_worker::<T>(len, spec.repetitions, cpu, barrier, verify))
            })
            .collect();
        barrier.wait();
        let start = Instant::now();
        barrier.wait();
        let elapsed = start.elapsed().as_secs_f64();
        let outcomes: Vec<ChunkOutcome> = handles
            .into_iter()
            .map(|h| h.join().expect("kernel worker panicked"))
            .collect();
        (elapsed, outcomes)
    });
    if !outcomes.iter().all(|o| o.ok) {
        return Err(BenchError::ChecksumMismatch);
    }
    let ops = spec.array_length as u64 * spec.repetitions;
    let bytes = 4.0 * spec.element_type.size() as f64 * ops as f64;
    let rate = |x: f64| if elapsed > 0.0 { x / elapsed } else { 0.0 };
    Ok(BenchResult {
        benchmark: benchmark.name(),
        spec: *spec,
        elapsed_secs: elapsed,
        ops,
        ops_per_sec: rate(ops as f64),
        bytes_per_sec: rate(bytes),
        checksum: outcomes.iter().map(|o| o.sum).sum(),
        checksum_ok: true,
        pinned: !outcomes.is_empty() && outcomes.iter().all(|o| o.pinned),
    })
}

fn run_spec(benchmark: Benchmark, spec: &KernelSpec) -> Result<BenchResult, BenchError> {
    if spec.array_length == 0 {
        return Err(BenchError::InvalidSpec("array_length must be at least 1"));
    }
    if spec.threads == 0 {
        return Err(BenchError::InvalidSpec("threads must be at least 1"));
    }
    let reps = spec.repetitions;
    match spec.element_type {
        ElementType::Int32 => {
            if reps > (i32::MAX / 2) as u64 {
                return Err(BenchError::InvalidSpec("repetitions overflow int32 accumulators"));
            }
            let expected = 2 * reps as i32;
            run::<i32>(benchmark, spec, move |v| v == expected)
        }
        ElementType::Float64 => {
            let expected = 2.0 * reps as f64;
            let tolerance = reps as f64 * ulp(expected);
            run::<f64>(benchmark, spec, move |v| (v - expected).abs() <= tolerance)
        }
    }
}

fn ulp(x: f64) -> f64 {
    if x == 0.0 {
        0.0
    } else {
        f64::from_bits(x.abs().to_bits() + 1) - x.abs()
    }
}

/// Arithmetic throughput of the multiply-add loop.
pub fn run_kernel(spec: &KernelSpec) -> Result<BenchResult, BenchError> {
    run_spec(Benchmark::Kernel, spec)
}

/// Same loop, reported as memory bandwidth (three reads and one write per element).
pub fn run_bandwidth(spec: &KernelSpec) -> Result<BenchResult, BenchError> {
    run_spec(Benchmark::Bandwidth, spec)
}

/// Every thread count in `threads` under every policy in `policies`.
pub fn affinity_sweep(
    benchmark: Benchmark,
    base: &KernelSpec,
    threads: &[usize],
    policies: &[AffinityPolicy],
) -> Result<Vec<BenchResult>, BenchError> {
    let mut out = Vec::with_capacity(threads.len() * policies.len());
    for &t in threads {
        for &policy in policies {
            let spec = KernelSpec {
                threads: t,
                affinity: policy,
                ..*base
            };
            out.push(run_spec(benchmark, &spec)?);
        }
    }
    Ok(out)
}

/// Sample standard deviation over mean.
pub fn coefficient_of_variation(samples: &[f64]) -> f64 {
    let n = samples.len();
    if n < 2 {
        return 0.0;
    }
    let mean = samples.iter().sum::<f64>() / n as f64;
    if mean == 0.0 {
        return 0.0;
    }
    let var = samples.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1) as f64;
    var.sqrt() / mean
}

/// Board after Black's first move at the center point.
pub fn second_move_position(size: usize) -> Result<Board, treepar_core::GoError> {
    let mut board = Board::new(size)?;
    let c = (size / 2) as u8;
    board.play(Move::Play(Point::new(c, c)))?;
    Ok(board)
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ProbeResult {
    pub playouts: u64,
    pub elapsed_secs: f64,
    /// Playouts per second.
    pub rate: f64,
    pub nodes: u64,
    /// Node count from walking the finished tree.
    pub walked_nodes: u64,
    pub max_depth: u32,
    pub chosen_move: String,
}

/// Timed probes report throughput; playout-budget probes report only
/// quantities that a fixed seed reproduces.
pub fn probe_csv_header(budget: Budget) -> &'static str {
    match budget {
        Budget::WallTime(_) => "threads,budget_ms,playouts,elapsed_ms,games_per_sec,nodes",
        Budget::Playouts(_) => "threads,budget_playouts,playouts,nodes,max_depth,chosen_move",
    }
}

impl ProbeResult {
    fn from_search(stats: &SearchStats, walked_nodes: u64) -> ProbeResult {
        let elapsed_secs = stats.elapsed_micros as f64 / 1e6;
        ProbeResult {
            playouts: stats.playouts,
            elapsed_secs,
            rate: if elapsed_secs > 0.0 {
                stats.playouts as f64 / elapsed_secs
            } else {
                0.0
            },
            nodes: stats.nodes,
            walked_nodes,
            max_depth: stats.max_depth,
            chosen_move: stats.chosen_move.to_gtp(),
        }
    }

    pub fn csv_row(&self, config: &SearchConfig) -> String {
        match config.budget {
            Budget::WallTime(ms) => format!(
                "{},{ms},{},{:.3},{:.3},{}",
                config.threads,
                self.playouts,
                self.elapsed_secs * 1e3,
                self.rate,
                self.nodes
            ),
            Budget::Playouts(n) => format!(
                "{},{n},{},{},{},{}",
                config.threads, self.playouts, self.nodes, self.max_depth, self.chosen_move
            ),
        }
    }
}

fn probe(config: &SearchConfig, position: &Board) -> Result<ProbeResult, SearchError> {
    let outcome = run_parallel_search(position, config)?;
    let walked = outcome.tree.walk_count();
    Ok(ProbeResult::from_search(&outcome.stats, walked))
}

/// Playouts per second while searching `position`.
pub fn games_per_second_probe(config: &SearchConfig, position: &Board) -> Result<ProbeResult, SearchError> {
    probe(config, position)
}

/// Search tree size after searching `position`.
pub fn tree_size_probe(config: &SearchConfig, position: &Board) -> Result<ProbeResult, SearchError> {
    probe(config, position)
}
