use treepar::core::{Board, Budget, Color, SearchConfig};
use treepar::tournament::{
    doubling_sweep, play_game, run_match, run_match_parallel, sweep_csv, EnginePairing, GameEnd, MoveBudget, Side,
    SweepSpec, SWEEP_CSV_HEADER,
};

fn engine(playouts: u64, seed: u64) -> SearchConfig {
    SearchConfig {
        budget: Budget::Playouts(playouts),
        seed,
        ..SearchConfig::default()
    }
}

fn small(a: SearchConfig, b: SearchConfig, games: u32) -> EnginePairing {
    EnginePairing {
        board_size: 5,
        ..EnginePairing::new(a, b, games)
    }
}

#[test]
fn identical_engines_are_even() {
    let report = run_match(&small(engine(50, 1), engine(50, 2), 200), 3).unwrap();
    let s = report.stats;
    assert_eq!(s.games, 200);
    assert_eq!((report.a_black_games, report.a_white_games), (100, 100));
    assert!(s.ci_low <= 0.5 && 0.5 <= s.ci_high, "{s:?}");
}

#[test]
fn more_playouts_win() {
    let report = run_match(&small(engine(2000, 1), engine(50, 2), 50), 4).unwrap();
    assert!(report.stats.wins_a > 25, "{:?}", report.stats);
}

#[test]
fn games_are_complete_and_reproducible() {
    let pairing = small(engine(30, 1), engine(30, 2), 1);
    let a = play_game(&pairing, Color::White, 9).unwrap();
    let b = play_game(&pairing, Color::White, 9).unwrap();
    assert_eq!(a.to_text(), b.to_text());
    let GameEnd::Scored(result) = &a.end else {
        panic!("forfeit: {:?}", a.end)
    };
    // Replaying the record reaches the scored position.
    let mut board = Board::new(5).unwrap();
    for &(color, mv) in &a.moves {
        board.play_as(color, mv).unwrap();
    }
    assert_eq!(board.score(6.0), *result);
    assert!(a.moves.len() <= 75);
    assert_eq!(a.side_of(Color::White), Side::A);
}

#[test]
fn referee_workers_do_not_change_results() {
    let pairing = small(engine(40, 5), engine(40, 6), 12);
    let one = run_match(&pairing, 8).unwrap();
    let many = run_match_parallel(&pairing, 8, 4).unwrap();
    let texts = |r: &treepar::tournament::MatchReport| r.records.iter().map(|g| g.to_text()).collect::<Vec<_>>();
    assert_eq!(texts(&one), texts(&many));
    assert_eq!(one.stats, many.stats);
}

#[test]
fn null_sweep_writes_one_row_per_point() {
    let spec = SweepSpec {
        points: vec![2, 4],
        games: 20,
        move_budget: MoveBudget::PlayoutsPerThread(20),
        base: engine(20, 11),
        board_size: 5,
        komi: 6.0,
        null_experiment: true,
        seed: 12,
        workers: 1,
    };
    let points = doubling_sweep(&spec).unwrap();
    let csv = sweep_csv(&points);
    let lines: Vec<&str> = csv.lines().collect();
    assert_eq!(lines[0], SWEEP_CSV_HEADER);
    assert_eq!(lines.len(), 3);
    for (p, n) in points.iter().zip([2, 4]) {
        assert_eq!(p.n_threads, n);
        assert_eq!(p.stats.games, 20);
        let pairing = spec.pairing(n);
        assert_eq!(pairing.engine_a.threads, pairing.engine_b.threads);
    }
    let bad = SweepSpec {
        points: vec![3],
        ..spec
    };
    assert!(doubling_sweep(&bad).is_err());
}
