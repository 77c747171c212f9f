//! Tree parallelization: every worker descends the same tree.
//!
//! Counters are atomic read-modify-write; selection may read them mid-update.
//! A worker adds `virtual_loss_size` to each node it enters below the root and
//! removes it during backpropagation. Child lists are published once and never
//! freed before the tree is dropped.
//!
//! Two expansion disciplines are supported:
//! * [`LockMode::LocalLock`]: a per-node mutex guards child creation.
//! * [`LockMode::LockFree`]: racing workers each build a candidate child block;
//!   the one that wins the `Unexpanded -> Expanding` compare-exchange publishes
//!   it, the others retire theirs into a thread-private arena.

use std::ptr;
use std::sync::atomic::{AtomicI64, AtomicPtr, AtomicU32, AtomicU64, AtomicU8, Ordering};
use std::sync::{Mutex, OnceLock};
use std::time::{Duration, Instant};

use serde::Serialize;
use treepar_core::mcts::{reward_for_root, rng_from_seed, ExpansionState};
use treepar_core::{
    compute_affinity_map, playout, select_child, AffinityPolicy, Board, Budget, Clock, GoError, LockMode, Move,
    NodeStats, Reward, SearchConfig, SearchError, SearchStats,
};

use crate::pinning::{self, HostTopology};

const UNEXPANDED: u8 = 0;
const EXPANDING: u8 = 1;
const EXPANDED: u8 = 2;

/// `Clock` backed by `Instant`.
pub struct WallClock(Instant);

impl WallClock {
    pub fn start() -> WallClock {
        WallClock(Instant::now())
    }
}

impl Clock for WallClock {
    fn elapsed_micros(&self) -> u64 {
        self.0.elapsed().as_micros() as u64
    }
}

/// Runs the sequential search with a wall clock.
pub fn sequential_search(board: &Board, config: &SearchConfig) -> Result<(Move, SearchStats), SearchError> {
    treepar_core::search(board, config, &WallClock::start())
}

pub struct Node {
    mv: Move,
    visits: AtomicU32,
    reward_halves: AtomicU32,
    virtual_loss: AtomicU32,
    state: AtomicU8,
    children: AtomicPtr<ChildBlock>,
    lock: Mutex<()>,
}

pub struct ChildBlock {
    nodes: Box<[Node]>,
}

impl ChildBlock {
    fn for_moves(moves: &[Move]) -> Box<ChildBlock> {
        Box::new(ChildBlock {
            nodes: moves.iter().map(|&m| Node::new(m)).collect(),
        })
    }
}

impl Node {
    fn new(mv: Move) -> Node {
        Node {
            mv,
            visits: AtomicU32::new(0),
            reward_halves: AtomicU32::new(0),
            virtual_loss: AtomicU32::new(0),
            state: AtomicU8::new(UNEXPANDED),
            children: AtomicPtr::new(ptr::null_mut()),
            lock: Mutex::new(()),
        }
    }

    pub fn mv(&self) -> Move {
        self.mv
    }

    pub fn expansion_state(&self) -> ExpansionState {
        match self.state.load(Ordering::Acquire) {
            UNEXPANDED => ExpansionState::Unexpanded,
            EXPANDING => ExpansionState::Expanding,
            _ => ExpansionState::Expanded,
        }
    }

    /// Published children, or an empty slice.
    pub fn children(&self) -> &[Node] {
        if self.state.load(Ordering::Acquire) != EXPANDED {
            return &[];
        }
        let block = self.children.load(Ordering::Acquire);
        // SAFETY: a block is published exactly once, before `state` becomes
        // EXPANDED (release/acquire), and is owned by this node until drop.
        unsafe { block.as_ref().map_or(&[], |b| &b.nodes[..]) }
    }

    fn publish(&self, block: Box<ChildBlock>) {
        self.children.store(Box::into_raw(block), Ordering::Release);
        self.state.store(EXPANDED, Ordering::Release);
    }
}

impl Drop for Node {
    fn drop(&mut self) {
        let block = *self.children.get_mut();
        if !block.is_null() {
            // SAFETY: the pointer came from Box::into_raw in `publish`.
            drop(unsafe { Box::from_raw(block) });
        }
    }
}

impl NodeStats for Node {
    fn visits(&self) -> u64 {
        self.visits.load(Ordering::Relaxed) as u64
    }
    fn reward_halves(&self) -> u64 {
        self.reward_halves.load(Ordering::Relaxed) as u64
    }
    fn virtual_loss(&self) -> u64 {
        self.virtual_loss.load(Ordering::Relaxed) as u64
    }
}

/// Candidate child blocks that lost a publication race. Kept until the
/// owning worker finishes.
#[derive(Default)]
pub struct Arena {
    retired: Vec<ChildBlock>,
}

impl Arena {
    pub fn retired(&self) -> usize {
        self.retired.len()
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Expansion {
    /// This call published the children.
    Published,
    /// Someone else already finished expanding.
    AlreadyExpanded,
    /// Another worker holds the `Expanding` state right now.
    InProgress,
}

pub struct SharedTree {
    root: Node,
    board: Board,
    publications: AtomicU64,
    nodes: AtomicU64,
}

impl SharedTree {
    /// A tree whose root is expanded with every legal move of `board`.
    pub fn new(board: &Board) -> Result<SharedTree, GoError> {
        let tree = SharedTree::with_unexpanded_root(board);
        tree.expand_locked(&tree.root, board)?;
        Ok(tree)
    }

    pub fn with_unexpanded_root(board: &Board) -> SharedTree {
        SharedTree {
            root: Node::new(Move::Pass),
            board: board.clone(),
            publications: AtomicU64::new(0),
            nodes: AtomicU64::new(1),
        }
    }

    pub fn root(&self) -> &Node {
        &self.root
    }

    pub fn root_board(&self) -> &Board {
        &self.board
    }

    /// Successful child-list publications so far.
    pub fn publications(&self) -> u64 {
        self.publications.load(Ordering::Acquire)
    }

    /// Nodes reachable from the root (maintained incrementally).
    pub fn node_count(&self) -> u64 {
        self.nodes.load(Ordering::Acquire)
    }

    fn note_publication(&self, children: usize) {
        self.publications.fetch_add(1, Ordering::AcqRel);
        self.nodes.fetch_add(children as u64, Ordering::AcqRel);
    }

    /// Expands `node` under its mutex. `board` is the position at `node`.
    pub fn expand_locked(&self, node: &Node, board: &Board) -> Result<Expansion, GoError> {
        self.expand_locked_timed(node, board).map(|(e, _)| e)
    }

    fn expand_locked_timed(&self, node: &Node, board: &Board) -> Result<(Expansion, u64), GoError> {
        let (guard, waited) = match node.lock.try_lock() {
            Ok(g) => (g, 0),
            Err(_) => {
                let t = Instant::now();
                let g = node.lock.lock().unwrap_or_else(|p| p.into_inner());
                (g, t.elapsed().as_nanos() as u64)
            }
        };
        if node.state.load(Ordering::Acquire) == EXPANDED {
            return Ok((Expansion::AlreadyExpanded, waited));
        }
        let moves = board.legal_moves()?;
        node.state.store(EXPANDING, Ordering::Release);
        node.publish(ChildBlock::for_moves(&moves));
        self.note_publication(moves.len());
        drop(guard);
        Ok((Expansion::Published, waited))
    }

    /// Optimistic expansion: build first, then race one compare-exchange.
    pub fn expand_lockfree(&self, node: &Node, board: &Board, arena: &mut Arena) -> Result<Expansion, GoError> {
        match node.state.load(Ordering::Acquire) {
            EXPANDED => return Ok(Expansion::AlreadyExpanded),
            EXPANDING => return Ok(Expansion::InProgress),
            _ => {}
        }
        let moves = board.legal_moves()?;
        let candidate = ChildBlock::for_moves(&moves);
        match node
            .state
            .compare_exchange(UNEXPANDED, EXPANDING, Ordering::AcqRel, Ordering::Acquire)
        {
            Ok(_) => {
                node.publish(candidate);
                self.note_publication(moves.len());
                Ok(Expansion::Published)
            }
            Err(seen) => {
                arena.retired.push(*candidate);
                Ok(if seen == EXPANDED {
                    Expansion::AlreadyExpanded
                } else {
                    Expansion::InProgress
                })
            }
        }
    }

    /// Most visited root child; ties go to the lowest index.
    pub fn best_root_move(&self) -> Option<Move> {
        let mut best: Option<&Node> = None;
        for child in self.root.children() {
            if best.is_none_or(|b| child.visits() > b.visits()) {
                best = Some(child);
            }
        }
        best.map(|n| n.mv)
    }

    /// Counts reachable nodes by walking the published tree.
    pub fn walk_count(&self) -> u64 {
        let mut count = 0;
        let mut stack = vec![&self.root];
        while let Some(node) = stack.pop() {
            count += 1;
            stack.extend(node.children());
        }
        count
    }

    /// Walks the published tree, replaying moves from the root position.
    /// Must only be called at quiescence.
    pub fn validate(&self, expansion_threshold: u32, exact_leaf_visits: bool) -> Result<TreeReport, TreeViolation> {
        let mut report = TreeReport::default();
        let mut stack: Vec<(&Node, Board, u32)> = vec![(&self.root, self.board.clone(), 0)];
        while let Some((node, board, depth)) = stack.pop() {
            report.nodes += 1;
            report.max_depth = report.max_depth.max(depth);
            report.virtual_loss_sum += node.virtual_loss();
            if node.reward_halves() > 2 * node.visits() {
                return Err(TreeViolation::RewardExceedsVisits);
            }
            let children = node.children();
            let state = node.expansion_state();
            if state == ExpansionState::Expanding {
                return Err(TreeViolation::StuckExpanding);
            }
            if state != ExpansionState::Expanded {
                continue;
            }
            report.expanded += 1;
            let legal = board.legal_moves().map_err(|_| TreeViolation::ExpandedTerminal)?;
            if children.len() != legal.len() {
                return Err(TreeViolation::ChildCount {
                    expected: legal.len(),
                    found: children.len(),
                });
            }
            let child_visits: u64 = children.iter().map(NodeStats::visits).sum();
            let own = node.visits() - child_visits.min(node.visits());
            if child_visits > node.visits() {
                return Err(TreeViolation::VisitIdentity);
            }
            if depth == 0 {
                if own != 0 {
                    return Err(TreeViolation::VisitIdentity);
                }
            } else if own < expansion_threshold as u64 || (exact_leaf_visits && own != expansion_threshold as u64) {
                return Err(TreeViolation::VisitIdentity);
            }
            for (child, expected) in children.iter().zip(&legal) {
                if child.mv != *expected {
                    return Err(TreeViolation::IllegalChild(child.mv));
                }
                let mut next = board.clone();
                next.play(child.mv).map_err(|_| TreeViolation::IllegalChild(child.mv))?;
                stack.push((child, next, depth + 1));
            }
        }
        if report.nodes != self.node_count() {
            return Err(TreeViolation::NodeCountMismatch {
                walked: report.nodes,
                counted: self.node_count(),
            });
        }
        if report.expanded != self.publications() {
            return Err(TreeViolation::PublicationMismatch);
        }
        Ok(report)
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct TreeReport {
    pub nodes: u64,
    pub expanded: u64,
    pub max_depth: u32,
    pub virtual_loss_sum: u64,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, thiserror::Error)]
pub enum TreeViolation {
    #[error("node reward exceeds its visit count")]
    RewardExceedsVisits,
    #[error("node left in the Expanding state")]
    StuckExpanding,
    #[error("terminal position was expanded")]
    ExpandedTerminal,
    #[error("expected {expected} children, found {found}")]
    ChildCount { expected: usize, found: usize },
    #[error("child {0} is not the expected legal move")]
    IllegalChild(Move),
    #[error("visit counts do not add up")]
    VisitIdentity,
    #[error("walked {walked} nodes but counted {counted}")]
    NodeCountMismatch { walked: u64, counted: u64 },
    #[error("publication count differs from expanded node count")]
    PublicationMismatch,
}

enum Gate {
    Playouts(AtomicI64),
    Deadline(Instant),
}

impl Gate {
    #[inline]
    fn claim(&self) -> bool {
        match self {
            Gate::Playouts(left) => left.fetch_sub(1, Ordering::AcqRel) > 0,
            Gate::Deadline(t) => Instant::now() < *t,
        }
    }
}

#[derive(Default)]
struct WorkerReport {
    playouts: u64,
    max_depth: u32,
    lock_wait_nanos: u64,
    pinned: bool,
}

fn worker(tree: &SharedTree, config: &SearchConfig, gate: &Gate, index: usize, cpu: Option<usize>) -> WorkerReport {
    let mut report = WorkerReport::default();
    if let Some(cpu) = cpu {
        match pinning::pin_current_thread(cpu) {
            Ok(()) => report.pinned = pinning::pinning_supported(),
            Err(e) => log::warn!("worker {index}: pinning to cpu {cpu} failed: {e}"),
        }
    }
    let mut rng = rng_from_seed(config.seed ^ index as u64);
    let mut arena = Arena::default();
    let mut path: Vec<&Node> = Vec::with_capacity(64);
    let vl = config.virtual_loss_size;
    let threshold = config.expansion_threshold as u64;
    while gate.claim() {
        let mut board = tree.board.clone();
        path.clear();
        path.push(&tree.root);
        let mut node = &tree.root;
        loop {
            if node.state.load(Ordering::Acquire) != EXPANDED {
                if board.is_over() || node.visits() < threshold {
                    break;
                }
                let outcome = match config.lock_mode {
                    LockMode::LocalLock => tree.expand_locked_timed(node, &board).map(|(e, waited)| {
                        report.lock_wait_nanos += waited;
                        e
                    }),
                    LockMode::LockFree => tree.expand_lockfree(node, &board, &mut arena),
                };
                if outcome.expect("expanding a live position") == Expansion::InProgress {
                    break;
                }
            }
            let children = node.children();
            let i = select_child(node, children, config.exploration_c).expect("expanded nodes have children");
            node = &children[i];
            node.virtual_loss.fetch_add(vl, Ordering::AcqRel);
            board.play(node.mv).expect("tree moves are legal on their own path");
            path.push(node);
        }
        report.max_depth = report.max_depth.max((path.len() - 1) as u32);
        let outcome = playout(&mut board, config.komi, &mut rng);
        let mut r: Reward = reward_for_root(path.len(), outcome);
        for (depth, n) in path.iter().enumerate() {
            n.visits.fetch_add(1, Ordering::AcqRel);
            n.reward_halves.fetch_add(r.halves() as u32, Ordering::AcqRel);
            if depth > 0 {
                n.virtual_loss.fetch_sub(vl, Ordering::AcqRel);
            }
            r = r.complement();
        }
        report.playouts += 1;
    }
    report
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct TopologyMeta {
    pub cores: usize,
    pub smt: usize,
}

/// Per-search provenance, serialized as the run metadata JSON.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct RunMetadata {
    pub threads: usize,
    pub lock_mode: &'static str,
    pub affinity: &'static str,
    pub topology: TopologyMeta,
    pub pinning_effective: bool,
    pub per_thread_playouts: Vec<u64>,
}

pub struct ParallelOutcome {
    pub chosen: Move,
    pub stats: SearchStats,
    pub tree: SharedTree,
    pub metadata: RunMetadata,
}

pub fn host_topology() -> &'static HostTopology {
    static HOST: OnceLock<HostTopology> = OnceLock::new();
    HOST.get_or_init(HostTopology::detect)
}

/// OS cpu per worker for `policy`, when the host can honour it.
pub fn worker_cpus(threads: usize, policy: AffinityPolicy) -> Option<Vec<usize>> {
    if policy == AffinityPolicy::None {
        return None;
    }
    let host = host_topology();
    let topo = host.topology();
    match compute_affinity_map(threads, topo.cores, topo.smt_ways, policy) {
        Ok(map) => host.realize(&map),
        Err(e) => {
            log::warn!("affinity {policy} not applied: {e}");
            None
        }
    }
}

/// Tree-parallel search keeping the tree and run metadata.
pub fn run_parallel_search(board: &Board, config: &SearchConfig) -> Result<ParallelOutcome, SearchError> {
    config.validate()?;
    if board.is_over() {
        return Err(GoError::Finished.into());
    }
    let start = Instant::now();
    let tree = SharedTree::new(board)?;
    let gate = match config.budget {
        Budget::Playouts(n) => Gate::Playouts(AtomicI64::new(n as i64)),
        Budget::WallTime(ms) => Gate::Deadline(start + Duration::from_millis(ms)),
    };
    let cpus = worker_cpus(config.threads, config.affinity);
    let reports: Vec<WorkerReport> = std::thread::scope(|s| {
        let handles: Vec<_> = (0..config.threads)
            .map(|i| {
                let cpu = cpus.as_ref().map(|c| c[i]);
                let (tree, gate) = (&tree, &gate);
                s.spawn(move || worker(tree, config, gate, i, cpu))
            })
            .collect();
        handles
            .into_iter()
            .map(|h| h.join().expect("search worker panicked"))
            .collect()
    });
    let elapsed_micros = start.elapsed().as_micros() as u64;
    let per_thread_playouts: Vec<u64> = reports.iter().map(|r| r.playouts).collect();
    let chosen = tree.best_root_move().unwrap_or(Move::Pass);
    let stats = SearchStats {
        playouts: per_thread_playouts.iter().sum(),
        elapsed_micros,
        nodes: tree.node_count(),
        max_depth: reports.iter().map(|r| r.max_depth).max().unwrap_or(0),
        chosen_move: chosen,
        per_thread_playouts: per_thread_playouts.clone(),
        lock_wait_nanos: reports.iter().map(|r| r.lock_wait_nanos).collect(),
    };
    let topo = host_topology().topology();
    let metadata = RunMetadata {
        threads: config.threads,
        lock_mode: config.lock_mode.name(),
        affinity: config.affinity.name(),
        topology: TopologyMeta {
            cores: topo.cores,
            smt: topo.smt_ways,
        },
        pinning_effective: !reports.is_empty() && reports.iter().all(|r| r.pinned),
        per_thread_playouts,
    };
    Ok(ParallelOutcome {
        chosen,
        stats,
        tree,
        metadata,
    })
}

pub fn parallel_search(board: &Board, config: &SearchConfig) -> Result<(Move, SearchStats), SearchError> {
    run_parallel_search(board, config).map(|o| (o.chosen, o.stats))
}
