//! Go rules for square boards up to 19x19.
//!
//! The ruleset is Tromp-Taylor area scoring with suicide forbidden and
//! positional superko. A [`Board`] is a value: search threads clone it and
//! mutate their private copy.
//!
//! Coordinates follow GTP: `row` 0 is the bottom edge (vertex row `1`) and
//! `col` 0 is column `A`; the letter `I` is skipped.

use alloc::string::String;
use alloc::vec::Vec;
use core::fmt::{self, Write as _};

use crate::zobrist::stone_key;

pub const MAX_SIZE: usize = 19;
pub const MAX_POINTS: usize = MAX_SIZE * MAX_SIZE;
pub const DEFAULT_SIZE: usize = 9;

const COLUMNS: &[u8; 19] = b"ABCDEFGHJKLMNOPQRST";
const FILTER_WORDS: usize = 16;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Color {
    Black,
    White,
}

impl Color {
    #[inline]
    pub fn opponent(self) -> Color {
        match self {
            Color::Black => Color::White,
            Color::White => Color::Black,
        }
    }

    #[inline]
    pub fn index(self) -> usize {
        self as usize
    }

    pub fn letter(self) -> char {
        match self {
            Color::Black => 'B',
            Color::White => 'W',
        }
    }
}

/// Contents of one intersection.
#[repr(u8)]
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Cell {
    Empty = 0,
    Black = 1,
    White = 2,
}

impl Cell {
    #[inline]
    pub fn color(self) -> Option<Color> {
        match self {
            Cell::Empty => None,
            Cell::Black => Some(Color::Black),
            Cell::White => Some(Color::White),
        }
    }
}

impl From<Color> for Cell {
    #[inline]
    fn from(color: Color) -> Cell {
        match color {
            Color::Black => Cell::Black,
            Color::White => Cell::White,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Point {
    pub row: u8,
    pub col: u8,
}

impl Point {
    pub const fn new(row: u8, col: u8) -> Point {
        Point { row, col }
    }

    /// GTP vertex such as `E5`.
    pub fn to_vertex(self) -> String {
        let mut s = String::new();
        s.push(COLUMNS[self.col as usize] as char);
        let _ = write!(s, "{}", self.row as u32 + 1);
        s
    }

    /// Parses a GTP vertex (case-insensitive) on a board of edge `size`.
    pub fn from_vertex(vertex: &str, size: usize) -> Result<Point, GoError> {
        let bytes = vertex.as_bytes();
        if bytes.len() < 2 {
            return Err(GoError::BadVertex);
        }
        let letter = bytes[0].to_ascii_uppercase();
        let col = COLUMNS.iter().position(|&c| c == letter).ok_or(GoError::BadVertex)?;
        let row: usize = vertex[1..].parse().map_err(|_| GoError::BadVertex)?;
        if row == 0 || row > size || col >= size {
            return Err(GoError::BadVertex);
        }
        Ok(Point::new((row - 1) as u8, col as u8))
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Move {
    Play(Point),
    Pass,
}

impl Move {
    pub fn point(self) -> Option<Point> {
        match self {
            Move::Play(p) => Some(p),
            Move::Pass => None,
        }
    }

    /// GTP text: a vertex or `pass`.
    pub fn to_gtp(self) -> String {
        match self {
            Move::Play(p) => p.to_vertex(),
            Move::Pass => String::from("pass"),
        }
    }

    pub fn from_gtp(text: &str, size: usize) -> Result<Move, GoError> {
        if text.eq_ignore_ascii_case("pass") {
            Ok(Move::Pass)
        } else {
            Point::from_vertex(text, size).map(Move::Play)
        }
    }
}

impl fmt::Display for Move {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Move::Play(p) => f.write_str(&p.to_vertex()),
            Move::Pass => f.write_str("pass"),
        }
    }
}

/// Rule violations and malformed input.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum GoError {
    InvalidSize(usize),
    OffBoard(Point),
    Occupied(Point),
    Suicide(Point),
    Superko(Point),
    Finished,
    BadVertex,
    /// A position handed to [`Board::from_rows`] that could not arise in play.
    InvalidPosition,
}

impl fmt::Display for GoError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            GoError::InvalidSize(n) => write!(f, "invalid board size {n}"),
            GoError::OffBoard(p) => write!(f, "point ({}, {}) is off the board", p.row, p.col),
            GoError::Occupied(p) => write!(f, "occupied: {}", p.to_vertex()),
            GoError::Suicide(p) => write!(f, "suicide: {}", p.to_vertex()),
            GoError::Superko(p) => write!(f, "superko: {}", p.to_vertex()),
            GoError::Finished => f.write_str("game finished"),
            GoError::BadVertex => f.write_str("bad vertex"),
            GoError::InvalidPosition => f.write_str("invalid position"),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Winner {
    Black,
    White,
    Draw,
}

/// Area-scored outcome. `margin` is `black_area - white_area - komi`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct GameResult {
    pub winner: Winner,
    pub margin: f64,
    pub komi: f64,
    pub black_area: u32,
    pub white_area: u32,
}

impl GameResult {
    pub fn winner_color(&self) -> Option<Color> {
        match self.winner {
            Winner::Black => Some(Color::Black),
            Winner::White => Some(Color::White),
            Winner::Draw => None,
        }
    }
}

impl fmt::Display for GameResult {
    /// `B+3`, `W+6.5` or `0` for a draw.
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.winner {
            Winner::Black => write!(f, "B+{}", self.margin),
            Winner::White => write!(f, "W+{}", -self.margin),
            Winner::Draw => f.write_str("0"),
        }
    }
}

/// Visited-point bitset for flood fills.
#[derive(Clone, Copy)]
struct Marks([u64; MAX_POINTS.div_ceil(64)]);

impl Marks {
    #[inline]
    fn new() -> Marks {
        Marks([0; MAX_POINTS.div_ceil(64)])
    }

    #[inline]
    fn test_and_set(&mut self, i: usize) -> bool {
        let (w, b) = (i >> 6, 1u64 << (i & 63));
        let was = self.0[w] & b != 0;
        self.0[w] |= b;
        was
    }

    #[inline]
    fn get(&self, i: usize) -> bool {
        self.0[i >> 6] & (1u64 << (i & 63)) != 0
    }

    #[inline]
    fn merge(&mut self, other: &Marks) {
        for (a, b) in self.0.iter_mut().zip(other.0) {
            *a |= b;
        }
    }
}

/// Result of scanning one group for liberties.
struct GroupScan {
    has_liberty: bool,
    key_xor: u64,
    stones: u32,
}

/// Outcome of a legality check, ready to be committed.
struct Placement {
    index: usize,
    captured_roots: [u16; 4],
    roots: usize,
    captured: u32,
    hash: u64,
}

/// A complete Go position plus the rules state needed to continue the game.
#[derive(Clone)]
pub struct Board {
    size: u8,
    cells: [Cell; MAX_POINTS],
    to_move: Color,
    consecutive_passes: u8,
    prisoners: [u32; 2],
    hash: u64,
    history: Vec<u64>,
    // Bloom-style prefilter over `history`.
    filter: [u64; FILTER_WORDS],
}

impl fmt::Debug for Board {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(
            f,
            "Board {}x{} to_move={:?} passes={} prisoners={:?}",
            self.size, self.size, self.to_move, self.consecutive_passes, self.prisoners
        )?;
        let n = self.size();
        for row in (0..n).rev() {
            for col in 0..n {
                let c = match self.cells[row * n + col] {
                    Cell::Empty => '.',
                    Cell::Black => 'X',
                    Cell::White => 'O',
                };
                f.write_char(c)?;
            }
            f.write_char('\n')?;
        }
        Ok(())
    }
}

/// Text diagram with row numbers and column letters, top row first.
impl fmt::Display for Board {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let n = self.size();
        for row in (0..n).rev() {
            write!(f, "{:>2} ", row + 1)?;
            for col in 0..n {
                let c = match self.cells[row * n + col] {
                    Cell::Empty => '.',
                    Cell::Black => 'X',
                    Cell::White => 'O',
                };
                f.write_char(c)?;
            }
            f.write_char('\n')?;
        }
        f.write_str("   ")?;
        for &c in &COLUMNS[..n] {
            f.write_char(c as char)?;
        }
        Ok(())
    }
}

impl PartialEq for Board {
    fn eq(&self, other: &Board) -> bool {
        self.size == other.size
            && self.cells[..self.points()] == other.cells[..other.points()]
            && self.to_move == other.to_move
            && self.consecutive_passes == other.consecutive_passes
            && self.prisoners == other.prisoners
            && self.history == other.history
    }
}

impl Board {
    pub fn new(size: usize) -> Result<Board, GoError> {
        if !(2..=MAX_SIZE).contains(&size) {
            return Err(GoError::InvalidSize(size));
        }
        let mut board = Board {
            size: size as u8,
            cells: [Cell::Empty; MAX_POINTS],
            to_move: Color::Black,
            consecutive_passes: 0,
            prisoners: [0; 2],
            hash: 0,
            history: Vec::with_capacity(3 * size * size),
            filter: [0; FILTER_WORDS],
        };
        board.record_position();
        Ok(board)
    }

    /// Builds a position from text rows, top row first. `X` is black, `O`
    /// white, `.` empty. History holds only the resulting position.
    pub fn from_rows(rows: &[&str], to_move: Color) -> Result<Board, GoError> {
        let size = rows.len();
        let mut board = Board::new(size)?;
        for (i, line) in rows.iter().enumerate() {
            let row = size - 1 - i;
            if line.len() != size {
                return Err(GoError::InvalidPosition);
            }
            for (col, ch) in line.bytes().enumerate() {
                let cell = match ch {
                    b'.' => Cell::Empty,
                    b'X' | b'x' | b'B' => Cell::Black,
                    b'O' | b'o' | b'W' => Cell::White,
                    _ => return Err(GoError::InvalidPosition),
                };
                let idx = row * size + col;
                board.cells[idx] = cell;
                if let Some(color) = cell.color() {
                    board.hash ^= stone_key(color.index(), idx);
                }
            }
        }
        for idx in 0..board.points() {
            if board.cells[idx] != Cell::Empty && !board.group_has_liberty(idx, usize::MAX, &mut Marks::new()) {
                return Err(GoError::InvalidPosition);
            }
        }
        board.to_move = to_move;
        board.history.clear();
        board.filter = [0; FILTER_WORDS];
        board.record_position();
        Ok(board)
    }

    #[inline]
    pub fn size(&self) -> usize {
        self.size as usize
    }

    #[inline]
    pub fn points(&self) -> usize {
        self.size() * self.size()
    }

    #[inline]
    pub fn to_move(&self) -> Color {
        self.to_move
    }

    /// Overrides the side to move (GTP lets a controller play either color).
    pub fn set_to_move(&mut self, color: Color) {
        self.to_move = color;
    }

    #[inline]
    pub fn consecutive_passes(&self) -> u8 {
        self.consecutive_passes
    }

    #[inline]
    pub fn is_over(&self) -> bool {
        self.consecutive_passes >= 2
    }

    /// Stones captured *by* `color`.
    pub fn prisoners(&self, color: Color) -> u32 {
        self.prisoners[color.index()]
    }

    /// Zobrist hash of the stone arrangement (side to move excluded).
    #[inline]
    pub fn hash(&self) -> u64 {
        self.hash
    }

    /// Hashes of every position since the game started, current one last.
    pub fn history(&self) -> &[u64] {
        &self.history
    }

    #[inline]
    pub fn index(&self, p: Point) -> usize {
        p.row as usize * self.size() + p.col as usize
    }

    #[inline]
    pub fn point(&self, index: usize) -> Point {
        Point::new((index / self.size()) as u8, (index % self.size()) as u8)
    }

    pub fn contains(&self, p: Point) -> bool {
        (p.row as usize) < self.size() && (p.col as usize) < self.size()
    }

    pub fn cell(&self, p: Point) -> Cell {
        self.cells[self.index(p)]
    }

    #[inline]
    pub fn cell_at(&self, index: usize) -> Cell {
        self.cells[index]
    }

    pub fn stone_count(&self) -> usize {
        self.cells[..self.points()]
            .iter()
            .filter(|&&c| c != Cell::Empty)
            .count()
    }

    #[inline]
    fn neighbors(&self, index: usize) -> Neighbors {
        let n = self.size();
        let (row, col) = (index / n, index % n);
        let mut out = Neighbors { items: [0; 4], len: 0 };
        if row > 0 {
            out.push(index - n);
        }
        if row + 1 < n {
            out.push(index + n);
        }
        if col > 0 {
            out.push(index - 1);
        }
        if col + 1 < n {
            out.push(index + 1);
        }
        out
    }

    /// Flood-fills the group at `start`, marking it in `seen`, until a
    /// liberty other than `except` turns up.
    fn scan_group(&self, start: usize, except: usize, seen: &mut Marks) -> GroupScan {
        let color = self.cells[start];
        let key_color = if color == Cell::Black { 0 } else { 1 };
        let mut stack = [0u16; MAX_POINTS];
        let mut top = 1;
        stack[0] = start as u16;
        seen.test_and_set(start);
        let mut scan = GroupScan {
            has_liberty: false,
            key_xor: 0,
            stones: 0,
        };
        while top > 0 {
            top -= 1;
            let cur = stack[top] as usize;
            scan.key_xor ^= stone_key(key_color, cur);
            scan.stones += 1;
            for nb in self.neighbors(cur) {
                let c = self.cells[nb];
                if c == Cell::Empty {
                    if nb != except {
                        scan.has_liberty = true;
                        return scan;
                    }
                } else if c == color && !seen.test_and_set(nb) {
                    stack[top] = nb as u16;
                    top += 1;
                }
            }
        }
        scan
    }

    #[inline]
    fn group_has_liberty(&self, start: usize, except: usize, seen: &mut Marks) -> bool {
        self.scan_group(start, except, seen).has_liberty
    }

    /// Whether the stone at `at` touches an empty point other than `except`.
    #[inline]
    fn has_direct_liberty(&self, at: usize, except: usize) -> bool {
        self.neighbors(at)
            .into_iter()
            .any(|nb| nb != except && self.cells[nb] == Cell::Empty)
    }

    /// Clears the group containing `start`.
    fn remove_group(&mut self, start: usize) {
        let color = self.cells[start];
        let mut stack = [0u16; MAX_POINTS];
        let mut top = 1;
        stack[0] = start as u16;
        self.cells[start] = Cell::Empty;
        while top > 0 {
            top -= 1;
            let cur = stack[top] as usize;
            for nb in self.neighbors(cur) {
                if self.cells[nb] == color {
                    self.cells[nb] = Cell::Empty;
                    stack[top] = nb as u16;
                    top += 1;
                }
            }
        }
    }

    fn filter_bits(hash: u64) -> [(usize, u64); 2] {
        let a = (hash & 1023) as usize;
        let b = ((hash >> 20) & 1023) as usize;
        [(a >> 6, 1u64 << (a & 63)), (b >> 6, 1u64 << (b & 63))]
    }

    fn record_position(&mut self) {
        self.history.push(self.hash);
        for (word, bit) in Self::filter_bits(self.hash) {
            self.filter[word] |= bit;
        }
    }

    /// True when `hash` has occurred earlier in this game.
    pub fn seen_position(&self, hash: u64) -> bool {
        let maybe = Self::filter_bits(hash)
            .iter()
            .all(|&(word, bit)| self.filter[word] & bit != 0);
        maybe && self.history.contains(&hash)
    }

    fn evaluate(&self, color: Color, index: usize) -> Result<Placement, GoError> {
        if self.cells[index] != Cell::Empty {
            return Err(GoError::Occupied(self.point(index)));
        }
        let own = Cell::from(color);
        let enemy = Cell::from(color.opponent());
        let mut placement = Placement {
            index,
            captured_roots: [0; 4],
            roots: 0,
            captured: 0,
            hash: self.hash ^ stone_key(color.index(), index),
        };
        // Stones of groups already scanned; each scan walks with fresh marks.
        let mut resolved = Marks::new();
        let mut has_liberty = false;
        let neighbors = self.neighbors(index);
        for nb in neighbors {
            let c = self.cells[nb];
            if c == Cell::Empty {
                has_liberty = true;
            } else if c == enemy && !resolved.get(nb) {
                if self.has_direct_liberty(nb, index) {
                    continue;
                }
                let mut seen = Marks::new();
                let scan = self.scan_group(nb, index, &mut seen);
                resolved.merge(&seen);
                if !scan.has_liberty {
                    placement.captured_roots[placement.roots] = nb as u16;
                    placement.roots += 1;
                    placement.captured += scan.stones;
                    placement.hash ^= scan.key_xor;
                }
            }
        }
        if placement.roots == 0 && !has_liberty {
            let mut own_seen = Marks::new();
            let alive = neighbors.into_iter().any(|nb| {
                self.cells[nb] == own && !own_seen.get(nb) && self.group_has_liberty(nb, index, &mut own_seen)
            });
            if !alive {
                return Err(GoError::Suicide(self.point(index)));
            }
        }
        if self.seen_position(placement.hash) {
            return Err(GoError::Superko(self.point(index)));
        }
        Ok(placement)
    }

    fn commit(&mut self, color: Color, placement: &Placement) {
        self.cells[placement.index] = Cell::from(color);
        let enemy = Cell::from(color.opponent());
        for &root in &placement.captured_roots[..placement.roots] {
            if self.cells[root as usize] == enemy {
                self.remove_group(root as usize);
            }
        }
        self.prisoners[color.index()] += placement.captured;
        self.hash = placement.hash;
        self.record_position();
        self.consecutive_passes = 0;
        self.to_move = color.opponent();
    }

    /// Checks `mv` for the side to move without changing the board.
    pub fn check_move(&self, mv: Move) -> Result<(), GoError> {
        self.check_move_as(self.to_move, mv)
    }

    pub fn check_move_as(&self, color: Color, mv: Move) -> Result<(), GoError> {
        if self.is_over() {
            return Err(GoError::Finished);
        }
        match mv {
            Move::Pass => Ok(()),
            Move::Play(p) => {
                if !self.contains(p) {
                    return Err(GoError::OffBoard(p));
                }
                self.evaluate(color, self.index(p)).map(|_| ())
            }
        }
    }

    /// Plays `mv` for the side to move. Returns the number of captured stones.
    pub fn play(&mut self, mv: Move) -> Result<u32, GoError> {
        self.play_as(self.to_move, mv)
    }

    /// Plays `mv` for `color`, regardless of whose turn it was.
    pub fn play_as(&mut self, color: Color, mv: Move) -> Result<u32, GoError> {
        if self.is_over() {
            return Err(GoError::Finished);
        }
        match mv {
            Move::Pass => {
                self.consecutive_passes += 1;
                self.to_move = color.opponent();
                Ok(0)
            }
            Move::Play(p) => {
                if !self.contains(p) {
                    return Err(GoError::OffBoard(p));
                }
                let placement = self.evaluate(color, self.index(p))?;
                self.commit(color, &placement);
                Ok(placement.captured)
            }
        }
    }

    /// Plays the stone at `index` if legal, returning the capture count.
    /// The fast path used by playouts.
    #[inline]
    pub(crate) fn try_play_index(&mut self, index: usize) -> Option<u32> {
        let color = self.to_move;
        let placement = self.evaluate(color, index).ok()?;
        self.commit(color, &placement);
        Some(placement.captured)
    }

    /// Functional form of [`Board::play`].
    pub fn apply_move(&self, mv: Move) -> Result<Board, GoError> {
        let mut next = self.clone();
        next.play(mv)?;
        Ok(next)
    }

    /// Every legal move for the side to move, row-major, with `Pass` last.
    pub fn legal_moves(&self) -> Result<Vec<Move>, GoError> {
        if self.is_over() {
            return Err(GoError::Finished);
        }
        let mut moves = Vec::with_capacity(self.points() + 1);
        for index in 0..self.points() {
            if self.cells[index] == Cell::Empty && self.evaluate(self.to_move, index).is_ok() {
                moves.push(Move::Play(self.point(index)));
            }
        }
        moves.push(Move::Pass);
        Ok(moves)
    }

    /// Single-point eye of `color`: every orthogonal neighbor is `color`
    /// and the diagonals hold at most one enemy stone (none on the edge).
    pub fn is_eye(&self, index: usize, color: Color) -> bool {
        if self.cells[index] != Cell::Empty {
            return false;
        }
        let own = Cell::from(color);
        if self.neighbors(index).into_iter().any(|nb| self.cells[nb] != own) {
            return false;
        }
        let n = self.size() as isize;
        let (row, col) = ((index as isize) / n, (index as isize) % n);
        let mut on_board = 0;
        let mut enemy = 0;
        let enemy_cell = Cell::from(color.opponent());
        for (dr, dc) in [(-1, -1), (-1, 1), (1, -1), (1, 1)] {
            let (r, c) = (row + dr, col + dc);
            if r >= 0 && r < n && c >= 0 && c < n {
                on_board += 1;
                if self.cells[(r * n + c) as usize] == enemy_cell {
                    enemy += 1;
                }
            }
        }
        if on_board < 4 {
            enemy == 0
        } else {
            enemy <= 1
        }
    }

    /// Tromp-Taylor area score.
    pub fn score(&self, komi: f64) -> GameResult {
        let n = self.points();
        let mut black = 0u32;
        let mut white = 0u32;
        let mut seen = [false; MAX_POINTS];
        let mut stack = [0u16; MAX_POINTS];
        for start in 0..n {
            match self.cells[start] {
                Cell::Black => black += 1,
                Cell::White => white += 1,
                Cell::Empty if !seen[start] => {
                    let mut region = 0u32;
                    let (mut touches_black, mut touches_white) = (false, false);
                    let mut top = 1;
                    stack[0] = start as u16;
                    seen[start] = true;
                    while top > 0 {
                        top -= 1;
                        let cur = stack[top] as usize;
                        region += 1;
                        for nb in self.neighbors(cur) {
                            match self.cells[nb] {
                                Cell::Black => touches_black = true,
                                Cell::White => touches_white = true,
                                Cell::Empty => {
                                    if !seen[nb] {
                                        seen[nb] = true;
                                        stack[top] = nb as u16;
                                        top += 1;
                                    }
                                }
                            }
                        }
                    }
                    match (touches_black, touches_white) {
                        (true, false) => black += region,
                        (false, true) => white += region,
                        _ => {}
                    }
                }
                Cell::Empty => {}
            }
        }
        let margin = black as f64 - white as f64 - komi;
        let winner = if margin > 0.0 {
            Winner::Black
        } else if margin < 0.0 {
            Winner::White
        } else {
            Winner::Draw
        };
        GameResult {
            winner,
            margin,
            komi,
            black_area: black,
            white_area: white,
        }
    }
}

#[derive(Clone, Copy)]
struct Neighbors {
    items: [usize; 4],
    len: usize,
}

impl Neighbors {
    #[inline]
    fn push(&mut self, v: usize) {
        self.items[self.len] = v;
        self.len += 1;
    }
}

impl IntoIterator for Neighbors {
    type Item = usize;
    type IntoIter = core::iter::Take<core::array::IntoIter<usize, 4>>;

    #[inline]
    fn into_iter(self) -> Self::IntoIter {
        self.items.into_iter().take(self.len)
    }
}

/// Plain-text game record: one `B E5` / `W pass` line per move, then `RE <result>`.
pub fn format_record(moves: &[(Color, Move)], result: &GameResult) -> String {
    let mut out = String::new();
    for (color, mv) in moves {
        let _ = writeln!(out, "{} {}", color.letter(), mv);
    }
    let _ = writeln!(out, "RE {result}");
    out
}
