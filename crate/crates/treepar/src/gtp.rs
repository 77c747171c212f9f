//! Go Text Protocol front end (protocol version 2, core command subset).

use std::fmt;
use std::io::{self, BufRead, Write};

use treepar_core::{mix_seed, Board, Color, Move, SearchConfig, SearchStats};

use crate::parallel::parallel_search;

pub const ENGINE_NAME: &str = "treepar";

const COMMANDS: &[&str] = &[
    "protocol_version",
    "name",
    "version",
    "known_command",
    "list_commands",
    "boardsize",
    "clear_board",
    "komi",
    "play",
    "genmove",
    "final_score",
    "showboard",
    "quit",
];

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct GtpResponse {
    pub id: Option<u32>,
    pub success: bool,
    pub text: String,
    pub quit: bool,
}

impl fmt::Display for GtpResponse {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(if self.success { "=" } else { "?" })?;
        if let Some(id) = self.id {
            write!(f, "{id}")?;
        }
        write!(f, " {}\n\n", self.text)
    }
}

pub struct GtpEngine {
    board: Board,
    size: usize,
    komi: f64,
    config: SearchConfig,
    generated: u64,
    last_stats: Option<SearchStats>,
}

impl GtpEngine {
    pub fn new(config: SearchConfig, size: usize) -> Result<GtpEngine, treepar_core::GoError> {
        Ok(GtpEngine {
            board: Board::new(size)?,
            size,
            komi: config.komi,
            config,
            generated: 0,
            last_stats: None,
        })
    }

    pub fn board(&self) -> &Board {
        &self.board
    }

    pub fn komi(&self) -> f64 {
        self.komi
    }

    pub fn last_stats(&self) -> Option<&SearchStats> {
        self.last_stats.as_ref()
    }

    /// Handles one input line. Blank and comment-only lines yield `None`.
    pub fn execute(&mut self, line: &str) -> Option<GtpResponse> {
        let line = line.split('#').next().unwrap_or("");
        let cleaned: String = line
            .chars()
            .filter(|&c| c == '\t' || c == ' ' || !c.is_control())
            .map(|c| if c == '\t' { ' ' } else { c })
            .collect();
        let mut words = cleaned.split_whitespace().peekable();
        let first = words.peek()?;
        let id = first.parse::<u32>().ok();
        if id.is_some() {
            words.next();
        }
        let Some(command) = words.next() else {
            return Some(self.reply(id, Err("missing command".into())));
        };
        let args: Vec<&str> = words.collect();
        let quit = command == "quit";
        let result = self.dispatch(command, &args);
        let mut response = self.reply(id, result);
        response.quit = quit;
        Some(response)
    }

    fn reply(&self, id: Option<u32>, result: Result<String, String>) -> GtpResponse {
        let (success, text) = match result {
            Ok(t) => (true, t),
            Err(t) => (false, t),
        };
        GtpResponse {
            id,
            success,
            text,
            quit: false,
        }
    }

    fn dispatch(&mut self, command: &str, args: &[&str]) -> Result<String, String> {
        match command {
            "protocol_version" => Ok("2".into()),
            "name" => Ok(ENGINE_NAME.into()),
            "version" => Ok(env!("CARGO_PKG_VERSION").into()),
            "known_command" => {
                let name = args.first().ok_or("syntax error")?;
                Ok(COMMANDS.contains(name).to_string())
            }
            "list_commands" => Ok(COMMANDS.join("\n")),
            "boardsize" => {
                let size = args
                    .first()
                    .and_then(|s| s.parse::<usize>().ok())
                    .ok_or("syntax error")?;
                self.board = Board::new(size).map_err(|_| "unacceptable size")?;
                self.size = size;
                Ok(String::new())
            }
            "clear_board" => {
                self.board = Board::new(self.size).expect("size validated earlier");
                Ok(String::new())
            }
            "komi" => {
                let komi = args
                    .first()
                    .and_then(|s| s.parse::<f64>().ok())
                    .filter(|k| k.is_finite())
                    .ok_or("syntax error")?;
                self.komi = komi;
                Ok(String::new())
            }
            "play" => {
                let [color, vertex] = args else {
                    return Err("syntax error".into());
                };
                let color = parse_color(color).ok_or("syntax error")?;
                let mv = Move::from_gtp(vertex, self.size).map_err(|_| "syntax error")?;
                self.board.play_as(color, mv).map_err(|_| "illegal move")?;
                Ok(String::new())
            }
            "genmove" => {
                let color = args.first().and_then(|c| parse_color(c)).ok_or("syntax error")?;
                self.genmove(color)
            }
            "final_score" => Ok(self.board.score(self.komi).to_string()),
            "showboard" => Ok(format!("\n{}", self.board)),
            "quit" => Ok(String::new()),
            _ => Err("unknown command".into()),
        }
    }

    fn genmove(&mut self, color: Color) -> Result<String, String> {
        if self.board.is_over() {
            return Ok("pass".into());
        }
        self.board.set_to_move(color);
        let config = SearchConfig {
            komi: self.komi,
            seed: mix_seed(self.config.seed, self.generated),
            ..self.config.clone()
        };
        self.generated += 1;
        let (mv, stats) = parallel_search(&self.board, &config).map_err(|e| e.to_string())?;
        log::debug!("genmove {mv}: {} playouts in {} ms", stats.playouts, stats.elapsed_ms());
        self.board.play(mv).map_err(|e| e.to_string())?;
        self.last_stats = Some(stats);
        Ok(mv.to_gtp())
    }
}

fn parse_color(s: &str) -> Option<Color> {
    match s.to_ascii_lowercase().as_str() {
        "b" | "black" => Some(Color::Black),
        "w" | "white" => Some(Color::White),
        _ => None,
    }
}

/// Reads commands until `quit` or end of input.
pub fn serve<R: BufRead, W: Write>(engine: &mut GtpEngine, input: R, mut output: W) -> io::Result<()> {
    for line in input.lines() {
        let line = line?;
        let Some(response) = engine.execute(&line) else {
            continue;
        };
        write!(output, "{response}")?;
        output.flush()?;
        if response.quit {
            break;
        }
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use treepar_core::Budget;

    fn engine() -> GtpEngine {
        let config = SearchConfig {
            budget: Budget::Playouts(20),
            ..SearchConfig::default()
        };
        GtpEngine::new(config, 9).unwrap()
    }

    fn run(e: &mut GtpEngine, line: &str) -> String {
        e.execute(line).unwrap().to_string()
    }

    #[test]
    fn protocol_version_is_two() {
        assert_eq!(run(&mut engine(), "protocol_version"), "= 2\n\n");
    }

    #[test]
    fn unknown_command() {
        assert_eq!(run(&mut engine(), "frobnicate"), "? unknown command\n\n");
    }

    #[test]
    fn ids_are_echoed() {
        let mut e = engine();
        assert_eq!(run(&mut e, "7 name"), "=7 treepar\n\n");
        assert_eq!(run(&mut e, "8 bogus"), "?8 unknown command\n\n");
    }

    #[test]
    fn blank_and_comment_lines_ignored() {
        let mut e = engine();
        assert!(e.execute("").is_none());
        assert!(e.execute("   # just a comment").is_none());
    }

    #[test]
    fn play_and_illegal() {
        let mut e = engine();
        assert_eq!(run(&mut e, "play b e5"), "= \n\n");
        assert_eq!(run(&mut e, "play w E5"), "? illegal move\n\n");
        assert_eq!(run(&mut e, "play w Z5"), "? syntax error\n\n");
        assert_eq!(e.board().stone_count(), 1);
    }

    #[test]
    fn genmove_plays_on_board() {
        let mut e = engine();
        let r = e.execute("genmove b").unwrap();
        assert!(r.success);
        let mv = Move::from_gtp(&r.text, 9).unwrap();
        assert!(mv.point().is_some() || mv == Move::Pass);
        assert_eq!(e.board().to_move(), Color::White);
    }

    #[test]
    fn boardsize_validation() {
        let mut e = engine();
        assert_eq!(run(&mut e, "boardsize 25"), "? unacceptable size\n\n");
        assert_eq!(run(&mut e, "boardsize 5"), "= \n\n");
        assert_eq!(e.board().size(), 5);
    }

    #[test]
    fn serve_stops_at_quit() {
        let mut e = engine();
        let input = b"protocol_version\nquit\nname\n";
        let mut out = Vec::new();
        serve(&mut e, &input[..], &mut out).unwrap();
        assert_eq!(String::from_utf8(out).unwrap(), "= 2\n\n= \n\n");
    }
}
