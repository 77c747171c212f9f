//! Brute-force Go rules written against plain grids: flood fills with hash
//! sets, full-grid snapshots for superko, no incremental state.

#![allow(dead_code)]

use std::collections::{HashSet, VecDeque};

pub const EMPTY: u8 = 0;
pub const BLACK: u8 = 1;
pub const WHITE: u8 = 2;

/// `None` is a pass.
pub type OMove = Option<(usize, usize)>;

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct OracleGame {
    pub n: usize,
    /// Row-major, row 0 first.
    pub grid: Vec<u8>,
    pub to_move: u8,
    pub passes: u8,
    pub seen: Vec<Vec<u8>>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Illegal {
    Finished,
    Occupied,
    Suicide,
    Superko,
}

fn neighbours(n: usize, i: usize) -> Vec<usize> {
    let (r, c) = (i / n, i % n);
    let mut v = Vec::new();
    if r > 0 {
        v.push(i - n);
    }
    if r + 1 < n {
        v.push(i + n);
    }
    if c > 0 {
        v.push(i - 1);
    }
    if c + 1 < n {
        v.push(i + 1);
    }
    v
}

/// Stones of the group at `start` and its liberty count.
pub fn group(n: usize, grid: &[u8], start: usize) -> (HashSet<usize>, usize) {
    let color = grid[start];
    let mut stones = HashSet::from([start]);
    let mut libs = HashSet::new();
    let mut queue = VecDeque::from([start]);
    while let Some(i) = queue.pop_front() {
        for nb in neighbours(n, i) {
            if grid[nb] == EMPTY {
                libs.insert(nb);
            } else if grid[nb] == color && stones.insert(nb) {
                queue.push_back(nb);
            }
        }
    }
    (stones, libs.len())
}

pub fn opponent(c: u8) -> u8 {
    3 - c
}

impl OracleGame {
    pub fn new(n: usize) -> OracleGame {
        OracleGame {
            n,
            grid: vec![EMPTY; n * n],
            to_move: BLACK,
            passes: 0,
            seen: vec![vec![EMPTY; n * n]],
        }
    }

    pub fn over(&self) -> bool {
        self.passes >= 2
    }

    pub fn play(&self, mv: OMove) -> Result<OracleGame, Illegal> {
        if self.over() {
            return Err(Illegal::Finished);
        }
        let mut next = self.clone();
        next.to_move = opponent(self.to_move);
        let Some((r, c)) = mv else {
            next.passes += 1;
            return Ok(next);
        };
        let n = self.n;
        let i = r * n + c;
        if self.grid[i] != EMPTY {
            return Err(Illegal::Occupied);
        }
        next.passes = 0;
        next.grid[i] = self.to_move;
        let enemy = opponent(self.to_move);
        for nb in neighbours(n, i) {
            if next.grid[nb] == enemy {
                let (stones, libs) = group(n, &next.grid, nb);
                if libs == 0 {
                    for s in stones {
                        next.grid[s] = EMPTY;
                    }
                }
            }
        }
        if group(n, &next.grid, i).1 == 0 {
            return Err(Illegal::Suicide);
        }
        if self.seen.contains(&next.grid) {
            return Err(Illegal::Superko);
        }
        next.seen.push(next.grid.clone());
        Ok(next)
    }

    /// Row-major plays, then pass; `None` once the game is over.
    pub fn legal(&self) -> Option<Vec<OMove>> {
        if self.over() {
            return None;
        }
        let mut v: Vec<OMove> = (0..self.n * self.n)
            .map(|i| Some((i / self.n, i % self.n)))
            .filter(|&m| self.play(m).is_ok())
            .collect();
        v.push(None);
        Some(v)
    }

    /// Stones plus empty regions reaching only that color.
    pub fn area(&self) -> (u32, u32) {
        let n = self.n;
        let mut black = self.grid.iter().filter(|&&c| c == BLACK).count() as u32;
        let mut white = self.grid.iter().filter(|&&c| c == WHITE).count() as u32;
        let mut done = HashSet::new();
        for start in 0..n * n {
            if self.grid[start] != EMPTY || done.contains(&start) {
                continue;
            }
            let mut region = vec![start];
            let mut borders = HashSet::new();
            done.insert(start);
            let mut k = 0;
            while k < region.len() {
                for nb in neighbours(n, region[k]) {
                    match self.grid[nb] {
                        EMPTY => {
                            if done.insert(nb) {
                                region.push(nb);
                            }
                        }
                        c => {
                            borders.insert(c);
                        }
                    }
                }
                k += 1;
            }
            if borders.len() == 1 {
                if borders.contains(&BLACK) {
                    black += region.len() as u32;
                } else {
                    white += region.len() as u32;
                }
            }
        }
        (black, white)
    }

    /// Single-point eye of `color` for the playout policy.
    pub fn is_eye(&self, i: usize, color: u8) -> bool {
        let n = self.n as isize;
        if self.grid[i] != EMPTY || neighbours(self.n, i).iter().any(|&nb| self.grid[nb] != color) {
            return false;
        }
        let (r, c) = (i as isize / n, i as isize % n);
        let diagonals: Vec<u8> = [(-1, -1), (-1, 1), (1, -1), (1, 1)]
            .iter()
            .map(|(dr, dc)| (r + dr, c + dc))
            .filter(|&(a, b)| a >= 0 && a < n && b >= 0 && b < n)
            .map(|(a, b)| self.grid[(a * n + b) as usize])
            .collect();
        let enemies = diagonals.iter().filter(|&&d| d == opponent(color)).count();
        if diagonals.len() < 4 {
            enemies == 0
        } else {
            enemies <= 1
        }
    }

    /// Uniform random non-eye-filling play until two passes or the cap.
    /// Returns the area difference `black - white`.
    pub fn random_game<F: FnMut(usize) -> usize>(&self, mut pick: F) -> i64 {
        let mut g = self.clone();
        for _ in 0..3 * self.n * self.n {
            if g.over() {
                break;
            }
            let options: Vec<OMove> = g
                .legal()
                .unwrap()
                .into_iter()
                .filter(|m| matches!(m, Some((r, c)) if !g.is_eye(r * g.n + c, g.to_move)))
                .collect();
            let mv = if options.is_empty() {
                None
            } else {
                options[pick(options.len())]
            };
            g = g.play(mv).unwrap();
        }
        let (b, w) = g.area();
        b as i64 - w as i64
    }
}
