//! Allocation-only building blocks for tree-parallel Go search.
//!
//! Everything here is deterministic and free of IO: the Go rules engine,
//! sequential UCT search, thread-placement policies, and match statistics.
//! Threads, clocks and files live in the `treepar` crate.

#![no_std]

extern crate alloc;

pub mod affinity;
pub mod go;
pub mod mcts;
pub mod stats;
mod zobrist;

pub use affinity::{compute_affinity_map, AffinityError, AffinityMap, AffinityPolicy, Topology};
pub use go::{format_record, Board, Cell, Color, GameResult, GoError, Move, Point, Winner};
pub use mcts::{
    playout, search, select_child, Budget, Clock, LockMode, NodeStats, Reward, SearchConfig, SearchError, SearchStats,
};
pub use stats::{confidence_interval, Interval, MatchStats, StatsError, Z_95};
pub use zobrist::mix_seed;
