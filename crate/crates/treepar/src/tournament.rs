//! Self-play referee: paired engine configurations, alternating colors,
//! win rates with confidence bounds, and the n-vs-n/2 thread doubling sweep.

use std::fmt::Write as _;
use std::sync::atomic::{AtomicUsize, Ordering};
use std::sync::Mutex;

use serde::Serialize;
use treepar_core::{
    format_record, mix_seed, Board, Budget, Color, GameResult, GoError, MatchStats, Move, SearchConfig, SearchError,
    SearchStats, StatsError, Z_95,
};

use crate::parallel::parallel_search;

#[derive(Debug, thiserror::Error)]
pub enum TournamentError {
    #[error("search failed: {0}")]
    Search(SearchError),
    #[error("rules: {0}")]
    Rules(GoError),
    #[error("statistics: {0}")]
    Stats(StatsError),
    #[error("invalid pairing: {0}")]
    InvalidPairing(String),
}

impl From<SearchError> for TournamentError {
    fn from(e: SearchError) -> Self {
        TournamentError::Search(e)
    }
}

impl From<GoError> for TournamentError {
    fn from(e: GoError) -> Self {
        TournamentError::Rules(e)
    }
}

impl From<StatsError> for TournamentError {
    fn from(e: StatsError) -> Self {
        TournamentError::Stats(e)
    }
}

/// How much search each engine gets per move.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum MoveBudget {
    /// Use each engine's own `SearchConfig::budget`.
    AsConfigured,
    /// Same total playouts for both engines.
    Playouts(u64),
    /// Playouts scaled by the engine's thread count.
    PlayoutsPerThread(u64),
    /// Same wall time for both engines, in milliseconds.
    WallTime(u64),
}

impl MoveBudget {
    pub fn resolve(self, config: &SearchConfig) -> Budget {
        match self {
            MoveBudget::AsConfigured => config.budget,
            MoveBudget::Playouts(n) => Budget::Playouts(n),
            MoveBudget::PlayoutsPerThread(n) => Budget::Playouts(n * config.threads as u64),
            MoveBudget::WallTime(ms) => Budget::WallTime(ms),
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct EnginePairing {
    pub engine_a: SearchConfig,
    pub engine_b: SearchConfig,
    pub games: u32,
    pub komi: f64,
    pub board_size: usize,
    pub move_budget: MoveBudget,
    pub alternate_colors: bool,
}

impl EnginePairing {
    pub fn new(engine_a: SearchConfig, engine_b: SearchConfig, games: u32) -> EnginePairing {
        EnginePairing {
            engine_a,
            engine_b,
            games,
            komi: 6.0,
            board_size: 9,
            move_budget: MoveBudget::AsConfigured,
            alternate_colors: true,
        }
    }

    pub fn validate(&self) -> Result<(), TournamentError> {
        if self.games == 0 {
            return Err(TournamentError::InvalidPairing("games must be at least 1".into()));
        }
        Board::new(self.board_size)?;
        for c in [&self.engine_a, &self.engine_b] {
            self.resolved(c).validate()?;
        }
        Ok(())
    }

    /// Engine config with the pairing's komi and budget applied.
    pub fn resolved(&self, config: &SearchConfig) -> SearchConfig {
        SearchConfig {
            komi: self.komi,
            budget: self.move_budget.resolve(config),
            ..config.clone()
        }
    }

    /// Color engine A takes in game `index`.
    pub fn a_color(&self, index: u32) -> Color {
        if self.alternate_colors && index % 2 == 1 {
            Color::White
        } else {
            Color::Black
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum Side {
    A,
    B,
}

impl Side {
    pub fn other(self) -> Side {
        match self {
            Side::A => Side::B,
            Side::B => Side::A,
        }
    }
}

/// Something that picks moves for the referee.
pub trait Engine {
    fn genmove(&mut self, board: &Board, seed: u64) -> Result<(Move, SearchStats), SearchError>;
}

/// The tree-parallel searcher as a referee engine.
pub struct SearchEngine {
    pub config: SearchConfig,
}

impl Engine for SearchEngine {
    fn genmove(&mut self, board: &Board, seed: u64) -> Result<(Move, SearchStats), SearchError> {
        let config = SearchConfig {
            seed,
            ..self.config.clone()
        };
        parallel_search(board, &config)
    }
}

#[derive(Clone, Debug, PartialEq)]
pub enum GameEnd {
    Scored(GameResult),
    Forfeit { loser: Side, color: Color, reason: String },
}

#[derive(Clone, Debug)]
pub struct GameRecord {
    pub board_size: usize,
    pub komi: f64,
    pub a_color: Color,
    pub moves: Vec<(Color, Move)>,
    pub end: GameEnd,
    pub stats_a: Vec<SearchStats>,
    pub stats_b: Vec<SearchStats>,
    pub final_hash: u64,
}

impl GameRecord {
    pub fn side_of(&self, color: Color) -> Side {
        if color == self.a_color {
            Side::A
        } else {
            Side::B
        }
    }

    /// `None` for a draw.
    pub fn winner(&self) -> Option<Side> {
        match &self.end {
            GameEnd::Scored(r) => r.winner_color().map(|c| self.side_of(c)),
            GameEnd::Forfeit { loser, .. } => Some(loser.other()),
        }
    }

    /// Game record text: one `B E5` line per move and a final `RE` line.
    pub fn to_text(&self) -> String {
        match &self.end {
            GameEnd::Scored(r) => format_record(&self.moves, r),
            GameEnd::Forfeit { color, .. } => {
                let mut out = String::new();
                for (c, m) in &self.moves {
                    let _ = writeln!(out, "{} {}", c.letter(), m);
                }
                let _ = writeln!(out, "RE {}+F", color.opponent().letter());
                out
            }
        }
    }
}

/// Plays one game between two engines; engine A takes `a_color`.
pub fn play_game_with(
    pairing: &EnginePairing,
    a: &mut dyn Engine,
    b: &mut dyn Engine,
    a_color: Color,
    seed: u64,
) -> Result<GameRecord, TournamentError> {
    let mut board = Board::new(pairing.board_size)?;
    let mut record = GameRecord {
        board_size: pairing.board_size,
        komi: pairing.komi,
        a_color,
        moves: Vec::new(),
        end: GameEnd::Scored(board.score(pairing.komi)),
        stats_a: Vec::new(),
        stats_b: Vec::new(),
        final_hash: board.hash(),
    };
    let cap = 3 * board.points();
    let a_seed = mix_seed(seed, 0xA);
    let b_seed = mix_seed(seed, 0xB);
    for ply in 0..cap as u64 {
        if board.is_over() {
            break;
        }
        let color = board.to_move();
        let side = record.side_of(color);
        let (mv, s) = match side {
            Side::A => a.genmove(&board, mix_seed(a_seed, ply))?,
            Side::B => b.genmove(&board, mix_seed(b_seed, ply))?,
        };
        match side {
            Side::A => record.stats_a.push(s),
            Side::B => record.stats_b.push(s),
        }
        if let Err(e) = board.play(mv) {
            log::error!("engine {side:?} ({color:?}) produced illegal move {mv}: {e}");
            record.moves.push((color, mv));
            record.end = GameEnd::Forfeit {
                loser: side,
                color,
                reason: e.to_string(),
            };
            record.final_hash = board.hash();
            return Ok(record);
        }
        record.moves.push((color, mv));
    }
    record.end = GameEnd::Scored(board.score(pairing.komi));
    record.final_hash = board.hash();
    Ok(record)
}

/// Plays one game between the pairing's search engines.
pub fn play_game(pairing: &EnginePairing, a_color: Color, seed: u64) -> Result<GameRecord, TournamentError> {
    let mut a = SearchEngine {
        config: pairing.resolved(&pairing.engine_a),
    };
    let mut b = SearchEngine {
        config: pairing.resolved(&pairing.engine_b),
    };
    play_game_with(pairing, &mut a, &mut b, a_color, seed)
}

#[derive(Clone, Debug)]
pub struct MatchReport {
    pub stats: MatchStats,
    pub records: Vec<GameRecord>,
    pub a_black_games: u32,
    pub a_white_games: u32,
}

fn summarize(records: Vec<GameRecord>) -> Result<MatchReport, TournamentError> {
    let (mut wins, mut losses, mut draws) = (0, 0, 0);
    let (mut black, mut white) = (0, 0);
    for r in &records {
        match r.winner() {
            Some(Side::A) => wins += 1,
            Some(Side::B) => losses += 1,
            None => draws += 1,
        }
        match r.a_color {
            Color::Black => black += 1,
            Color::White => white += 1,
        }
    }
    Ok(MatchReport {
        stats: MatchStats::from_counts(wins, losses, draws, Z_95)?,
        records,
        a_black_games: black,
        a_white_games: white,
    })
}

/// Plays `pairing.games` games sequentially. Game `i` uses seed
/// `mix_seed(seed, i)`.
pub fn run_match(pairing: &EnginePairing, seed: u64) -> Result<MatchReport, TournamentError> {
    run_match_parallel(pairing, seed, 1)
}

/// Runs independent games on up to `workers` referee threads. Each game's
/// engines spawn their own search threads; trees are never shared.
pub fn run_match_parallel(pairing: &EnginePairing, seed: u64, workers: usize) -> Result<MatchReport, TournamentError> {
    pairing.validate()?;
    let games = pairing.games as usize;
    let next = AtomicUsize::new(0);
    let slots: Mutex<Vec<Option<Result<GameRecord, TournamentError>>>> = Mutex::new((0..games).map(|_| None).collect());
    let run = || loop {
        let i = next.fetch_add(1, Ordering::AcqRel);
        if i >= games {
            break;
        }
        let result = play_game(pairing, pairing.a_color(i as u32), mix_seed(seed, i as u64));
        slots.lock().expect("result slots")[i] = Some(result);
    };
    if workers <= 1 {
        run();
    } else {
        std::thread::scope(|s| {
            for _ in 0..workers.min(games) {
                s.spawn(run);
            }
        });
    }
    let records = slots
        .into_inner()
        .expect("result slots")
        .into_iter()
        .map(|r| r.expect("every game slot filled"))
        .collect::<Result<Vec<_>, _>>()?;
    summarize(records)
}

#[derive(Clone, Debug, PartialEq)]
pub struct SweepSpec {
    /// Thread counts of the stronger engine; each must be even.
    pub points: Vec<usize>,
    pub games: u32,
    pub move_budget: MoveBudget,
    pub base: SearchConfig,
    pub board_size: usize,
    pub komi: f64,
    /// Give both sides n/2 threads (a null experiment).
    pub null_experiment: bool,
    pub seed: u64,
    pub workers: usize,
}

#[derive(Clone, Debug)]
pub struct SweepPoint {
    pub n_threads: usize,
    pub stats: MatchStats,
    pub report: MatchReport,
}

pub const SWEEP_CSV_HEADER: &str = "n_threads,games,wins,losses,draws,w,ci_low,ci_high";

impl SweepPoint {
    pub fn csv_row(&self) -> String {
        match_csv_row(self.n_threads, &self.stats)
    }
}

pub fn match_csv_row(n_threads: usize, s: &MatchStats) -> String {
    format!(
        "{},{},{},{},{},{:.6},{:.6},{:.6}",
        n_threads, s.games, s.wins_a, s.losses_a, s.draws, s.win_rate, s.ci_low, s.ci_high
    )
}

impl SweepSpec {
    pub fn pairing(&self, n: usize) -> EnginePairing {
        let half = n / 2;
        let engine_a = SearchConfig {
            threads: if self.null_experiment { half } else { n },
            ..self.base.clone()
        };
        let engine_b = SearchConfig {
            threads: half,
            seed: mix_seed(self.base.seed, 0xB0B),
            ..self.base.clone()
        };
        EnginePairing {
            engine_a,
            engine_b,
            games: self.games,
            komi: self.komi,
            board_size: self.board_size,
            move_budget: self.move_budget,
            alternate_colors: true,
        }
    }
}

/// n-thread engine against n/2-thread engine for every n in `spec.points`.
pub fn doubling_sweep(spec: &SweepSpec) -> Result<Vec<SweepPoint>, TournamentError> {
    for &n in &spec.points {
        if n < 2 || n % 2 != 0 {
            return Err(TournamentError::InvalidPairing(format!(
                "sweep point {n} must be even and at least 2"
            )));
        }
    }
    spec.points
        .iter()
        .map(|&n| {
            let report = run_match_parallel(&spec.pairing(n), mix_seed(spec.seed, n as u64), spec.workers)?;
            log::info!(
                "sweep n={n}: w={:.3} [{:.3}, {:.3}] over {} games",
                report.stats.win_rate,
                report.stats.ci_low,
                report.stats.ci_high,
                report.stats.games
            );
            Ok(SweepPoint {
                n_threads: n,
                stats: report.stats,
                report,
            })
        })
        .collect()
}

/// CSV table with one row per sweep point.
pub fn sweep_csv(points: &[SweepPoint]) -> String {
    let mut out = String::from(SWEEP_CSV_HEADER);
    out.push('\n');
    for p in points {
        out.push_str(&p.csv_row());
        out.push('\n');
    }
    out
}
