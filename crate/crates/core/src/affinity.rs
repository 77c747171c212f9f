//! Thread-to-processor placement policies.
//!
//! Logical processor ids are `core * smt_ways + slot`, where `slot` is the
//! hardware thread within the core. The mapping is a pure function of the
//! topology so layouts for machines we do not have can still be checked.

use alloc::vec::Vec;
use core::fmt;
use core::str::FromStr;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum AffinityPolicy {
    /// Fill each core's hardware threads before moving to the next core.
    Compact,
    /// Spread threads evenly, keeping consecutive threads on the same core.
    Balanced,
    /// Round-robin across cores.
    Scatter,
    /// No pinning.
    None,
}

impl AffinityPolicy {
    pub const PINNED: [AffinityPolicy; 3] = [
        AffinityPolicy::Compact,
        AffinityPolicy::Balanced,
        AffinityPolicy::Scatter,
    ];

    pub fn name(self) -> &'static str {
        match self {
            AffinityPolicy::Compact => "compact",
            AffinityPolicy::Balanced => "balanced",
            AffinityPolicy::Scatter => "scatter",
            AffinityPolicy::None => "none",
        }
    }
}

impl fmt::Display for AffinityPolicy {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for AffinityPolicy {
    type Err = AffinityError;

    fn from_str(s: &str) -> Result<AffinityPolicy, AffinityError> {
        match s.trim().to_ascii_lowercase().as_str() {
            "compact" => Ok(AffinityPolicy::Compact),
            "balanced" => Ok(AffinityPolicy::Balanced),
            "scatter" => Ok(AffinityPolicy::Scatter),
            "none" => Ok(AffinityPolicy::None),
            _ => Err(AffinityError::UnknownPolicy),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct Topology {
    pub cores: usize,
    pub smt_ways: usize,
}

impl Topology {
    pub fn logical_processors(&self) -> usize {
        self.cores * self.smt_ways
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum AffinityError {
    Oversubscribed { threads: usize, capacity: usize },
    EmptyTopology,
    UnknownPolicy,
}

impl fmt::Display for AffinityError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            AffinityError::Oversubscribed { threads, capacity } => {
                write!(f, "oversubscribed: {threads} threads for {capacity} logical processors")
            }
            AffinityError::EmptyTopology => f.write_str("topology needs at least one core and one hardware thread"),
            AffinityError::UnknownPolicy => f.write_str("unknown affinity policy"),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct AffinityMap {
    pub policy: AffinityPolicy,
    pub topology: Topology,
    /// Logical processor of each thread, indexed by thread.
    pub assignments: Vec<usize>,
}

impl AffinityMap {
    pub fn threads(&self) -> usize {
        self.assignments.len()
    }

    pub fn core_of(&self, thread: usize) -> usize {
        self.assignments[thread] / self.topology.smt_ways
    }

    /// Threads placed on `core`, ascending.
    pub fn threads_on_core(&self, core: usize) -> Vec<usize> {
        (0..self.threads()).filter(|&t| self.core_of(t) == core).collect()
    }

    pub fn per_core_counts(&self) -> Vec<usize> {
        let mut counts = alloc::vec![0; self.topology.cores];
        for t in 0..self.threads() {
            counts[self.core_of(t)] += 1;
        }
        counts
    }

    /// Whether threads should actually be pinned.
    pub fn pins(&self) -> bool {
        self.policy != AffinityPolicy::None
    }
}

/// Places `threads` software threads on a `cores` x `smt_ways` machine.
///
/// `None` never fails: it reports a nominal compact layout (wrapping when
/// oversubscribed) but [`AffinityMap::pins`] is false.
pub fn compute_affinity_map(
    threads: usize,
    cores: usize,
    smt_ways: usize,
    policy: AffinityPolicy,
) -> Result<AffinityMap, AffinityError> {
    if cores == 0 || smt_ways == 0 {
        return Err(AffinityError::EmptyTopology);
    }
    let topology = Topology { cores, smt_ways };
    let capacity = topology.logical_processors();
    if threads > capacity && policy != AffinityPolicy::None {
        return Err(AffinityError::Oversubscribed { threads, capacity });
    }
    let assignments = match policy {
        AffinityPolicy::Compact => (0..threads).collect(),
        AffinityPolicy::None => (0..threads).map(|t| t % capacity).collect(),
        AffinityPolicy::Scatter => (0..threads).map(|t| (t % cores) * smt_ways + t / cores).collect(),
        AffinityPolicy::Balanced => {
            let mut slot_on_core = alloc::vec![0usize; cores];
            (0..threads)
                .map(|t| {
                    let core = t * cores / threads;
                    let slot = slot_on_core[core];
                    slot_on_core[core] += 1;
                    core * smt_ways + slot
                })
                .collect()
        }
    };
    Ok(AffinityMap {
        policy,
        topology,
        assignments,
    })
}
