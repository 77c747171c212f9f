use treepar::core::{mix_seed, Board, Budget, Color, Move, SearchConfig};
use treepar::gtp::{serve, GtpEngine};
use treepar::parallel::parallel_search;

fn config() -> SearchConfig {
    SearchConfig {
        budget: Budget::Playouts(200),
        seed: 77,
        ..SearchConfig::default()
    }
}

fn talk(script: &str) -> String {
    let mut engine = GtpEngine::new(config(), 9).unwrap();
    let mut out = Vec::new();
    serve(&mut engine, script.as_bytes(), &mut out).unwrap();
    String::from_utf8(out).unwrap()
}

#[test]
fn administrative_dialogue_is_byte_exact() {
    let script = "protocol_version\n1 name\n# comment only\n\n2 known_command genmove\nknown_command frobnicate\n\
                  boardsize 25\nboardsize 5\nkomi 0.5\nplay b C3\nplay w C3\nplay w Z9\nplay x C3\n7 undo\n\
                  play w B2\nshowboard\nfinal_score\nquit\nname\n";
    let expected = "= 2\n\n\
                    =1 treepar\n\n\
                    =2 true\n\n\
                    = false\n\n\
                    ? unacceptable size\n\n\
                    = \n\n\
                    = \n\n\
                    = \n\n\
                    ? illegal move\n\n\
                    ? syntax error\n\n\
                    ? syntax error\n\n\
                    ?7 unknown command\n\n\
                    = \n\n\
                    = \n 5 .....\n 4 .....\n 3 ..X..\n 2 .O...\n 1 .....\n   ABCDE\n\n\
                    = W+0.5\n\n\
                    = \n\n";
    assert_eq!(talk(script), expected);
}

#[test]
fn generated_moves_match_direct_search() {
    let mut script = String::from("boardsize 5\nkomi 6\n");
    for i in 0..10 {
        script.push_str(if i % 2 == 0 { "genmove b\n" } else { "genmove w\n" });
    }
    let mut engine = GtpEngine::new(config(), 9).unwrap();
    let mut replies = Vec::new();
    for line in script.lines() {
        replies.push(engine.execute(line).unwrap());
    }
    // Drive the same searches directly.
    let mut board = Board::new(5).unwrap();
    for (k, reply) in replies[2..].iter().enumerate() {
        assert!(reply.success);
        let color = if k % 2 == 0 { Color::Black } else { Color::White };
        let mv = if board.is_over() {
            Move::Pass
        } else {
            let c = SearchConfig {
                komi: 6.0,
                seed: mix_seed(77, k as u64),
                ..config()
            };
            parallel_search(&board, &c).unwrap().0
        };
        assert_eq!(reply.text, mv.to_gtp());
        if !board.is_over() {
            board.play_as(color, mv).unwrap();
        }
    }
    assert_eq!(engine.board().hash(), board.hash());
    assert_eq!(engine.board(), &board);
}
