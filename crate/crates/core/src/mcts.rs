//! Sequential UCT search.
//!
//! Node statistics are kept as integers: visit counts and rewards in half
//! points (loss 0, draw 1, win 2). The parallel tree stores the same numbers in
//! atomics and selects with the same [`select_child`], so a one-thread
//! parallel search walks the same tree as [`search`].

use alloc::vec;
use alloc::vec::Vec;
use core::fmt;

use rand::Rng;
use rand::SeedableRng;
use rand_pcg::Pcg64Mcg;

use crate::affinity::AffinityPolicy;
use crate::go::{Board, Cell, Color, GoError, Move, MAX_POINTS};

/// Search-thread RNG. Portable and cheap to seed.
pub type SearchRng = Pcg64Mcg;

pub fn rng_from_seed(seed: u64) -> SearchRng {
    Pcg64Mcg::seed_from_u64(seed)
}

/// Playout outcome in half points from one player's perspective.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Reward(u8);

impl Reward {
    pub const LOSS: Reward = Reward(0);
    pub const DRAW: Reward = Reward(1);
    pub const WIN: Reward = Reward(2);

    #[inline]
    pub fn halves(self) -> u64 {
        self.0 as u64
    }

    /// The same outcome seen by the other player.
    #[inline]
    pub fn complement(self) -> Reward {
        Reward(2 - self.0)
    }

    pub fn as_f64(self) -> f64 {
        self.0 as f64 / 2.0
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Budget {
    Playouts(u64),
    /// Milliseconds of wall time.
    WallTime(u64),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum LockMode {
    LocalLock,
    LockFree,
}

impl LockMode {
    pub fn name(self) -> &'static str {
        match self {
            LockMode::LocalLock => "local",
            LockMode::LockFree => "free",
        }
    }
}

impl core::str::FromStr for LockMode {
    type Err = SearchError;

    fn from_str(s: &str) -> Result<LockMode, SearchError> {
        match s.trim().to_ascii_lowercase().as_str() {
            "local" | "locallock" => Ok(LockMode::LocalLock),
            "free" | "lockfree" => Ok(LockMode::LockFree),
            _ => Err(SearchError::InvalidConfig("lock mode must be `local` or `free`")),
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct SearchConfig {
    pub threads: usize,
    pub budget: Budget,
    pub lock_mode: LockMode,
    pub affinity: AffinityPolicy,
    pub exploration_c: f64,
    pub virtual_loss_size: u32,
    /// Visits a leaf needs before it is expanded.
    pub expansion_threshold: u32,
    pub seed: u64,
    pub komi: f64,
}

impl Default for SearchConfig {
    fn default() -> SearchConfig {
        SearchConfig {
            threads: 1,
            budget: Budget::Playouts(1000),
            lock_mode: LockMode::LockFree,
            affinity: AffinityPolicy::None,
            exploration_c: 0.7,
            virtual_loss_size: 1,
            expansion_threshold: 1,
            seed: 0,
            komi: 6.0,
        }
    }
}

impl SearchConfig {
    pub fn validate(&self) -> Result<(), SearchError> {
        if !(1..=1024).contains(&self.threads) {
            return Err(SearchError::InvalidConfig("threads must be in 1..=1024"));
        }
        if !(self.exploration_c > 0.0 && self.exploration_c.is_finite()) {
            return Err(SearchError::InvalidConfig("exploration constant must be positive"));
        }
        if self.virtual_loss_size == 0 {
            return Err(SearchError::InvalidConfig("virtual loss size must be at least 1"));
        }
        if self.expansion_threshold == 0 {
            return Err(SearchError::InvalidConfig("expansion threshold must be at least 1"));
        }
        if !self.komi.is_finite() {
            return Err(SearchError::InvalidConfig("komi must be finite"));
        }
        match self.budget {
            Budget::Playouts(0) | Budget::WallTime(0) => Err(SearchError::EmptyBudget),
            _ => Ok(()),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum SearchError {
    EmptyBudget,
    SelectOnLeaf,
    InvalidConfig(&'static str),
    Rules(GoError),
}

impl fmt::Display for SearchError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            SearchError::EmptyBudget => f.write_str("empty budget"),
            SearchError::SelectOnLeaf => f.write_str("select on leaf"),
            SearchError::InvalidConfig(msg) => write!(f, "invalid search config: {msg}"),
            SearchError::Rules(e) => write!(f, "{e}"),
        }
    }
}

impl From<GoError> for SearchError {
    fn from(e: GoError) -> SearchError {
        SearchError::Rules(e)
    }
}

/// Read access to the statistics UCT selection needs.
pub trait NodeStats {
    fn visits(&self) -> u64;
    /// Accumulated reward in half points.
    fn reward_halves(&self) -> u64;
    fn virtual_loss(&self) -> u64;

    fn total_reward(&self) -> f64 {
        self.reward_halves() as f64 / 2.0
    }

    /// Visits plus in-flight virtual losses.
    fn effective_visits(&self) -> u64 {
        self.visits() + self.virtual_loss()
    }
}

/// UCB1 value of a child; `None` means unvisited (infinitely urgent).
#[inline]
pub fn ucb_value<S: NodeStats + ?Sized>(parent_effective: u64, child: &S, c: f64) -> Option<f64> {
    let n = child.effective_visits();
    if n == 0 {
        return None;
    }
    let n = n as f64;
    let mean = child.total_reward() / n;
    let log_parent = if parent_effective > 0 {
        libm::log(parent_effective as f64)
    } else {
        0.0
    };
    Some(mean + c * libm::sqrt(log_parent / n))
}

/// Index of the child maximizing the UCB1 score. Unvisited children win,
/// and ties go to the lowest index.
pub fn select_child<'a, P, C, I>(parent: &P, children: I, c: f64) -> Result<usize, SearchError>
where
    P: NodeStats + ?Sized,
    C: NodeStats + 'a,
    I: IntoIterator<Item = &'a C>,
{
    let parent_effective = parent.effective_visits();
    let mut best: Option<(usize, f64)> = None;
    for (i, child) in children.into_iter().enumerate() {
        match ucb_value(parent_effective, child, c) {
            None => return Ok(i),
            Some(v) => {
                if best.is_none_or(|(_, b)| v > b) {
                    best = Some((i, v));
                }
            }
        }
    }
    best.map(|(i, _)| i).ok_or(SearchError::SelectOnLeaf)
}

/// Random playout to the end of the game.
///
/// Moves are uniform over legal plays that do not fill the mover's own
/// single-point eye; a player with no such move passes. Stops after two
/// passes or `3 * size^2` moves. The reward is for the player to move when
/// the playout starts.
pub fn playout<R: Rng + ?Sized>(board: &mut Board, komi: f64, rng: &mut R) -> Reward {
    let start = board.to_move();
    let cap = 3 * board.points();
    let mut empties = EmptyPoints::new(board);
    let mut candidates = [0u16; MAX_POINTS];
    for _ in 0..cap {
        if board.is_over() {
            break;
        }
        let mover = board.to_move();
        let mut len = empties.len;
        candidates[..len].copy_from_slice(&empties.items[..len]);
        let mut played = false;
        while len > 0 {
            let pick = rng.gen_range(0..len);
            let index = candidates[pick] as usize;
            if !board.is_eye(index, mover) {
                if let Some(captured) = board.try_play_index(index) {
                    if captured > 0 {
                        empties = EmptyPoints::new(board);
                    } else {
                        empties.remove(index);
                    }
                    played = true;
                    break;
                }
            }
            len -= 1;
            candidates[pick] = candidates[len];
        }
        if !played {
            let _ = board.play(Move::Pass);
        }
    }
    let result = board.score(komi);
    match result.winner_color() {
        Some(c) if c == start => Reward::WIN,
        Some(_) => Reward::LOSS,
        None => Reward::DRAW,
    }
}

/// Empty points of a board in a swap-remove list.
struct EmptyPoints {
    items: [u16; MAX_POINTS],
    slot: [u16; MAX_POINTS],
    len: usize,
}

impl EmptyPoints {
    fn new(board: &Board) -> EmptyPoints {
        let mut e = EmptyPoints {
            items: [0; MAX_POINTS],
            slot: [0; MAX_POINTS],
            len: 0,
        };
        for i in 0..board.points() {
            if board.cell_at(i) == Cell::Empty {
                e.items[e.len] = i as u16;
                e.slot[i] = e.len as u16;
                e.len += 1;
            }
        }
        e
    }

    fn remove(&mut self, index: usize) {
        let at = self.slot[index] as usize;
        self.len -= 1;
        let last = self.items[self.len];
        self.items[at] = last;
        self.slot[last as usize] = at as u16;
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum ExpansionState {
    Unexpanded,
    Expanding,
    Expanded,
}

/// One node of the sequential tree.
#[derive(Clone, Debug)]
pub struct SearchNode {
    pub mv: Move,
    pub visits: u64,
    pub reward_halves: u64,
    pub virtual_loss: u64,
    pub first_child: u32,
    pub child_count: u32,
    pub expansion_state: ExpansionState,
}

impl SearchNode {
    pub fn new(mv: Move) -> SearchNode {
        SearchNode {
            mv,
            visits: 0,
            reward_halves: 0,
            virtual_loss: 0,
            first_child: 0,
            child_count: 0,
            expansion_state: ExpansionState::Unexpanded,
        }
    }

    /// A node with preset statistics; `reward` is rounded to half points.
    pub fn with_stats(mv: Move, visits: u64, reward: f64) -> SearchNode {
        SearchNode {
            visits,
            reward_halves: libm::round(reward * 2.0) as u64,
            ..SearchNode::new(mv)
        }
    }
}

impl NodeStats for SearchNode {
    fn visits(&self) -> u64 {
        self.visits
    }
    fn reward_halves(&self) -> u64 {
        self.reward_halves
    }
    fn virtual_loss(&self) -> u64 {
        self.virtual_loss
    }
}

pub type NodeId = usize;

/// Arena-backed sequential search tree. Node 0 is the root; children of a
/// node are contiguous.
#[derive(Clone, Debug)]
pub struct SearchTree {
    nodes: Vec<SearchNode>,
}

impl SearchTree {
    pub fn new(root_move: Move) -> SearchTree {
        SearchTree {
            nodes: vec![SearchNode::new(root_move)],
        }
    }

    pub const ROOT: NodeId = 0;

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn node(&self, id: NodeId) -> &SearchNode {
        &self.nodes[id]
    }

    pub fn node_mut(&mut self, id: NodeId) -> &mut SearchNode {
        &mut self.nodes[id]
    }

    pub fn children(&self, id: NodeId) -> core::ops::Range<NodeId> {
        let n = &self.nodes[id];
        n.first_child as usize..(n.first_child + n.child_count) as usize
    }

    /// Appends `moves` as the children of `id`.
    pub fn add_children(&mut self, id: NodeId, moves: &[Move]) {
        let first = self.nodes.len() as u32;
        self.nodes.extend(moves.iter().map(|&m| SearchNode::new(m)));
        let node = &mut self.nodes[id];
        node.first_child = first;
        node.child_count = moves.len() as u32;
        node.expansion_state = ExpansionState::Expanded;
    }

    /// Expands `id` with every legal move of `board`.
    pub fn expand(&mut self, id: NodeId, board: &Board) -> Result<(), GoError> {
        debug_assert_ne!(self.nodes[id].expansion_state, ExpansionState::Expanded);
        let moves = board.legal_moves()?;
        self.add_children(id, &moves);
        Ok(())
    }

    pub fn select(&self, id: NodeId, c: f64) -> Result<NodeId, SearchError> {
        let range = self.children(id);
        let first = range.start;
        select_child(&self.nodes[id], &self.nodes[range], c).map(|i| first + i)
    }

    /// Adds one visit along `path` (root first). `reward` is from the
    /// perspective of `path[0]` and alternates down the path.
    pub fn backpropagate(&mut self, path: &[NodeId], reward: Reward) {
        let mut r = reward;
        for &id in path {
            let node = &mut self.nodes[id];
            node.visits += 1;
            node.reward_halves += r.halves();
            r = r.complement();
        }
    }

    /// Root child with the most visits; ties go to the lowest index.
    pub fn best_root_move(&self) -> Option<Move> {
        let mut best: Option<&SearchNode> = None;
        for child in &self.nodes[self.children(Self::ROOT)] {
            if best.is_none_or(|b| child.visits > b.visits) {
                best = Some(child);
            }
        }
        best.map(|n| n.mv)
    }
}

/// Elapsed-time source; the std crate supplies one backed by `Instant`.
pub trait Clock {
    fn elapsed_micros(&self) -> u64;
}

/// A clock that never advances. Only meaningful with playout budgets.
pub struct FrozenClock;

impl Clock for FrozenClock {
    fn elapsed_micros(&self) -> u64 {
        0
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SearchStats {
    pub playouts: u64,
    pub elapsed_micros: u64,
    pub nodes: u64,
    pub max_depth: u32,
    pub chosen_move: Move,
    pub per_thread_playouts: Vec<u64>,
    pub lock_wait_nanos: Vec<u64>,
}

impl SearchStats {
    pub const CSV_HEADER: &'static str = "playouts,elapsed_ms,nodes,max_depth,chosen_move";

    pub fn elapsed_ms(&self) -> u64 {
        self.elapsed_micros / 1000
    }

    pub fn playouts_per_sec(&self) -> f64 {
        if self.elapsed_micros == 0 {
            0.0
        } else {
            self.playouts as f64 * 1e6 / self.elapsed_micros as f64
        }
    }

    pub fn csv_row(&self) -> alloc::string::String {
        alloc::format!(
            "{},{},{},{},{}",
            self.playouts,
            self.elapsed_ms(),
            self.nodes,
            self.max_depth,
            self.chosen_move
        )
    }
}

/// Converts a playout result at the end of `path` into the reward credited
/// to `path[0]`.
///
/// The playout reports for the player to move at the leaf; the leaf node
/// stores results for the player who moved into it.
#[inline]
pub fn reward_for_root(path_len: usize, playout_reward: Reward) -> Reward {
    let leaf = playout_reward.complement();
    if (path_len - 1).is_multiple_of(2) {
        leaf
    } else {
        leaf.complement()
    }
}

/// Sequential search result, keeping the tree for inspection.
pub struct SequentialSearch {
    pub chosen: Move,
    pub stats: SearchStats,
    pub tree: SearchTree,
}

/// Single-threaded UCT. `config.threads` is ignored.
pub fn search<C: Clock + ?Sized>(
    board: &Board,
    config: &SearchConfig,
    clock: &C,
) -> Result<(Move, SearchStats), SearchError> {
    search_tree(board, config, clock).map(|s| (s.chosen, s.stats))
}

pub fn search_tree<C: Clock + ?Sized>(
    board: &Board,
    config: &SearchConfig,
    clock: &C,
) -> Result<SequentialSearch, SearchError> {
    config.validate()?;
    if board.is_over() {
        return Err(GoError::Finished.into());
    }
    let start = clock.elapsed_micros();
    let mut tree = SearchTree::new(Move::Pass);
    tree.expand(SearchTree::ROOT, board)?;
    let mut rng = rng_from_seed(config.seed);
    let mut path: Vec<NodeId> = Vec::with_capacity(64);
    let mut playouts = 0u64;
    let mut max_depth = 0u32;
    loop {
        match config.budget {
            Budget::Playouts(n) if playouts >= n => break,
            Budget::WallTime(ms) if clock.elapsed_micros() - start >= ms * 1000 => break,
            _ => {}
        }
        let mut scratch = board.clone();
        path.clear();
        path.push(SearchTree::ROOT);
        let mut node = SearchTree::ROOT;
        loop {
            let state = tree.node(node).expansion_state;
            if state != ExpansionState::Expanded {
                if scratch.is_over() || tree.node(node).visits < config.expansion_threshold as u64 {
                    break;
                }
                tree.expand(node, &scratch)?;
            }
            node = tree.select(node, config.exploration_c)?;
            scratch
                .play(tree.node(node).mv)
                .expect("tree moves are legal on their own path");
            path.push(node);
        }
        max_depth = max_depth.max((path.len() - 1) as u32);
        let outcome = playout(&mut scratch, config.komi, &mut rng);
        tree.backpropagate(&path, reward_for_root(path.len(), outcome));
        playouts += 1;
    }
    let chosen = tree.best_root_move().unwrap_or(Move::Pass);
    let stats = SearchStats {
        playouts,
        elapsed_micros: clock.elapsed_micros() - start,
        nodes: tree.len() as u64,
        max_depth,
        chosen_move: chosen,
        per_thread_playouts: vec![playouts],
        lock_wait_nanos: vec![0],
    };
    Ok(SequentialSearch { chosen, stats, tree })
}

/// Side that benefits from a reward stored at a node reached by `moves`
/// plies from a position where `root_to_move` is to play.
pub fn node_player(root_to_move: Color, depth: usize) -> Color {
    if depth % 2 == 1 {
        root_to_move
    } else {
        root_to_move.opponent()
    }
}
