//! Tree-parallel Monte Carlo Tree Search for small-board Go, with the
//! experiment harness around it: self-play matches, GTP serving, thread
//! placement, and throughput microbenchmarks.

pub mod bench;
pub mod cli;
pub mod gtp;
pub mod parallel;
pub mod pinning;
pub mod tournament;

pub use parallel::{parallel_search, run_parallel_search, sequential_search, ParallelOutcome, RunMetadata, SharedTree};
pub use treepar_core as core;
