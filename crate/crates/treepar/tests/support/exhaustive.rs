//! Walks every move sequence from a position, comparing the rules engine
//! with the grid oracle at each node.

#![allow(dead_code)]

use std::collections::HashSet;

use super::go_oracle::{Illegal, OMove, OracleGame, BLACK, EMPTY, WHITE};
use treepar::core::{Board, Cell, Color, GoError, Move, Point};

pub fn to_move(m: OMove) -> Move {
    match m {
        Some((r, c)) => Move::Play(Point::new(r as u8, c as u8)),
        None => Move::Pass,
    }
}

fn same_error(e: GoError, i: Illegal) -> bool {
    matches!(
        (e, i),
        (GoError::Finished, Illegal::Finished)
            | (GoError::Occupied(_), Illegal::Occupied)
            | (GoError::Suicide(_), Illegal::Suicide)
            | (GoError::Superko(_), Illegal::Superko)
    )
}

pub fn compare_state(board: &Board, game: &OracleGame) -> Result<(), String> {
    let n = game.n;
    for r in 0..n {
        for c in 0..n {
            let want = match game.grid[r * n + c] {
                EMPTY => Cell::Empty,
                BLACK => Cell::Black,
                WHITE => Cell::White,
                _ => unreachable!(),
            };
            if board.cell(Point::new(r as u8, c as u8)) != want {
                return Err(format!("grid differs at ({r},{c})\n{board:?}"));
            }
        }
    }
    let to_move = if game.to_move == BLACK {
        Color::Black
    } else {
        Color::White
    };
    if board.to_move() != to_move || board.consecutive_passes() != game.passes || board.is_over() != game.over() {
        return Err(format!("turn state differs\n{board:?}"));
    }
    let result = board.score(0.0);
    if (result.black_area, result.white_area) != game.area() {
        return Err(format!(
            "area {:?} vs oracle {:?}\n{board:?}",
            (result.black_area, result.white_area),
            game.area()
        ));
    }
    let history = board.history();
    if history.iter().collect::<HashSet<_>>().len() != history.len() || history.last() != Some(&board.hash()) {
        return Err(format!("history repeats or misses current position\n{board:?}"));
    }
    Ok(())
}

/// Depth-first comparison to `depth` plies; returns the number of nodes.
pub fn compare_tree(board: &Board, game: &OracleGame, depth: usize) -> Result<u64, String> {
    compare_state(board, game)?;
    let mut nodes = 1;
    match (board.legal_moves(), game.legal()) {
        (Err(GoError::Finished), None) => {}
        (Ok(ours), Some(theirs)) => {
            let theirs: Vec<Move> = theirs.into_iter().map(to_move).collect();
            if ours != theirs {
                return Err(format!("legal moves {ours:?} vs oracle {theirs:?}\n{board:?}"));
            }
        }
        (a, b) => return Err(format!("terminal state differs: {a:?} vs {b:?}")),
    }
    let n = game.n;
    let candidates = (0..n * n).map(|i| Some((i / n, i % n))).chain([None]);
    for m in candidates {
        match (board.apply_move(to_move(m)), game.play(m)) {
            (Ok(next), Ok(next_game)) => {
                if depth > 0 {
                    nodes += compare_tree(&next, &next_game, depth - 1)?;
                } else {
                    compare_state(&next, &next_game)?;
                }
            }
            (Err(e), Err(i)) if same_error(e, i) => {}
            (a, b) => {
                return Err(format!(
                    "move {m:?}: engine {:?} vs oracle {:?}\n{board:?}",
                    a.map(|_| ()),
                    b.map(|_| ())
                ))
            }
        }
    }
    Ok(nodes)
}
