//! Host topology discovery and OS thread pinning.

use std::collections::BTreeMap;
use std::fs;
use std::path::Path;

use treepar_core::{AffinityMap, Topology};

#[derive(Debug, thiserror::Error)]
pub enum PinError {
    #[error("processor id {0} out of range")]
    OutOfRange(usize),
    #[error("sched_setaffinity failed with OS error {0}")]
    Os(i32),
}

/// Logical CPUs grouped by physical core, as reported by the OS.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct HostTopology {
    /// OS cpu ids of each core's hardware threads, cores in ascending order.
    pub cores: Vec<Vec<usize>>,
}

impl HostTopology {
    pub fn detect() -> HostTopology {
        Self::from_sysfs(Path::new("/sys/devices/system/cpu")).unwrap_or_else(|| {
            let n = std::thread::available_parallelism().map_or(1, |n| n.get());
            HostTopology {
                cores: (0..n).map(|c| vec![c]).collect(),
            }
        })
    }

    fn from_sysfs(root: &Path) -> Option<HostTopology> {
        let mut by_core: BTreeMap<(u64, u64), Vec<usize>> = BTreeMap::new();
        for entry in fs::read_dir(root).ok()? {
            let entry = entry.ok()?;
            let name = entry.file_name();
            let Some(id) = name
                .to_str()
                .and_then(|n| n.strip_prefix("cpu"))
                .and_then(|n| n.parse::<usize>().ok())
            else {
                continue;
            };
            let topo = entry.path().join("topology");
            let read = |f: &str| -> Option<u64> { fs::read_to_string(topo.join(f)).ok()?.trim().parse().ok() };
            let (Some(pkg), Some(core)) = (read("physical_package_id"), read("core_id")) else {
                continue;
            };
            by_core.entry((pkg, core)).or_default().push(id);
        }
        if by_core.is_empty() {
            return None;
        }
        let mut cores: Vec<Vec<usize>> = by_core.into_values().collect();
        for c in &mut cores {
            c.sort_unstable();
        }
        cores.sort_by_key(|c| c[0]);
        Some(HostTopology { cores })
    }

    pub fn physical_cores(&self) -> usize {
        self.cores.len()
    }

    pub fn logical_processors(&self) -> usize {
        self.cores.iter().map(Vec::len).sum()
    }

    /// Uniform view: core count and the smallest SMT width across cores.
    pub fn topology(&self) -> Topology {
        Topology {
            cores: self.cores.len().max(1),
            smt_ways: self.cores.iter().map(Vec::len).min().unwrap_or(1).max(1),
        }
    }

    /// OS cpu for a logical processor id of a map built on [`Self::topology`].
    pub fn os_cpu(&self, topology: Topology, logical: usize) -> Option<usize> {
        let core = logical / topology.smt_ways;
        let slot = logical % topology.smt_ways;
        self.cores.get(core)?.get(slot).copied()
    }

    /// OS cpu per thread, or `None` if the map cannot be realized here.
    pub fn realize(&self, map: &AffinityMap) -> Option<Vec<usize>> {
        if !map.pins() {
            return None;
        }
        map.assignments.iter().map(|&l| self.os_cpu(map.topology, l)).collect()
    }
}

/// Frequency governor of cpu0, when the OS exposes it.
pub fn frequency_governor() -> Option<String> {
    fs::read_to_string("/sys/devices/system/cpu/cpu0/cpufreq/scaling_governor")
        .ok()
        .map(|s| s.trim().to_string())
}

#[cfg(target_os = "linux")]
pub fn pin_current_thread(cpu: usize) -> Result<(), PinError> {
    if cpu >= libc::CPU_SETSIZE as usize {
        return Err(PinError::OutOfRange(cpu));
    }
    // SAFETY: cpu_set_t is plain data; CPU_SET is bounds-checked above.
    unsafe {
        let mut set: libc::cpu_set_t = std::mem::zeroed();
        libc::CPU_SET(cpu, &mut set);
        if libc::sched_setaffinity(0, std::mem::size_of::<libc::cpu_set_t>(), &set) != 0 {
            return Err(PinError::Os(
                std::io::Error::last_os_error().raw_os_error().unwrap_or(-1),
            ));
        }
    }
    Ok(())
}

/// CPUs the calling thread may run on.
#[cfg(target_os = "linux")]
pub fn current_affinity() -> Result<Vec<usize>, PinError> {
    // SAFETY: as above; the kernel fills the set.
    unsafe {
        let mut set: libc::cpu_set_t = std::mem::zeroed();
        if libc::sched_getaffinity(0, std::mem::size_of::<libc::cpu_set_t>(), &mut set) != 0 {
            return Err(PinError::Os(
                std::io::Error::last_os_error().raw_os_error().unwrap_or(-1),
            ));
        }
        Ok((0..libc::CPU_SETSIZE as usize)
            .filter(|&c| libc::CPU_ISSET(c, &set))
            .collect())
    }
}

#[cfg(not(target_os = "linux"))]
pub fn pin_current_thread(cpu: usize) -> Result<(), PinError> {
    log::warn!("thread pinning unsupported on this platform; cpu {cpu} ignored");
    Ok(())
}

#[cfg(not(target_os = "linux"))]
pub fn current_affinity() -> Result<Vec<usize>, PinError> {
    Ok((0..std::thread::available_parallelism().map_or(1, |n| n.get())).collect())
}

/// Whether [`pin_current_thread`] has an effect on this platform.
pub fn pinning_supported() -> bool {
    cfg!(target_os = "linux")
}
