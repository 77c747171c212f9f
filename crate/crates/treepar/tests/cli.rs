use std::fs;
use std::process::{Command, Output};

fn treepar(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_treepar"))
        .args(args)
        .env_remove("MCTS_AFFINITY")
        .output()
        .unwrap()
}

#[test]
fn bench_single_thread_succeeds() {
    let out = treepar(&["bench", "--threads", "1"]);
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    let text = String::from_utf8(out.stdout).unwrap();
    assert_eq!(text.lines().count(), 2, "{text}");
}

#[test]
fn sweep_writes_csv_and_metadata() {
    let dir = tempfile::tempdir().unwrap();
    let csv = dir.path().join("sweep.csv");
    let out = treepar(&[
        "sweep",
        "--threads",
        "2,4",
        "--games",
        "4",
        "--budget-playouts",
        "10",
        "--board-size",
        "5",
        "--seed",
        "3",
        "--out",
        csv.to_str().unwrap(),
    ]);
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    let body = fs::read_to_string(&csv).unwrap();
    let lines: Vec<&str> = body.lines().collect();
    assert_eq!(lines[0], "n_threads,games,wins,losses,draws,w,ci_low,ci_high");
    assert!(lines[1].starts_with("2,4,") && lines[2].starts_with("4,4,"), "{body}");
    let meta: serde_json::Value =
        serde_json::from_str(&fs::read_to_string(dir.path().join("sweep.csv.meta.json")).unwrap()).unwrap();
    assert!(meta.get("seed").is_some(), "{meta}");
    assert!(String::from_utf8_lossy(&out.stderr).contains("sweep: 2 points, 8 games total"));
    // No temporary files left behind.
    assert_eq!(fs::read_dir(dir.path()).unwrap().count(), 2);
}

#[test]
fn usage_errors_exit_one() {
    for args in [
        &["sweep", "--threads", "x"][..],
        &["gtp", "--lock", "maybe"],
        &["selfplay", "--budget-ms", "5", "--budget-playouts", "5"],
        &["frobnicate"],
    ] {
        let out = treepar(args);
        assert_eq!(out.status.code(), Some(1), "{args:?}");
        assert!(!out.stderr.is_empty());
    }
    assert_eq!(treepar(&["--help"]).status.code(), Some(0));
}

#[test]
fn selfplay_is_reproducible() {
    let args = [
        "selfplay",
        "--games",
        "4",
        "--budget-playouts",
        "20",
        "--board-size",
        "5",
        "--seed",
        "9",
    ];
    let a = treepar(&args);
    let b = treepar(&args);
    assert_eq!(a.status.code(), Some(0), "{}", String::from_utf8_lossy(&a.stderr));
    assert_eq!(a.stdout, b.stdout);
    let text = String::from_utf8(a.stdout).unwrap();
    assert!(text.lines().nth(1).unwrap().starts_with("1,4,"), "{text}");
}

#[test]
fn unwritable_output_exits_two() {
    let dir = tempfile::tempdir().unwrap();
    let target = dir.path().join("missing").join("out.csv");
    let out = treepar(&[
        "probe",
        "--budget-playouts",
        "10",
        "--board-size",
        "5",
        "--out",
        target.to_str().unwrap(),
    ]);
    assert_eq!(out.status.code(), Some(2));
    assert!(!target.exists());
}

#[test]
fn gtp_over_pipes() {
    use std::io::Write;
    use std::process::Stdio;
    let mut child = Command::new(env!("CARGO_BIN_EXE_treepar"))
        .args(["gtp", "--board-size", "5", "--budget-playouts", "50"])
        .stdin(Stdio::piped())
        .stdout(Stdio::piped())
        .spawn()
        .unwrap();
    child
        .stdin
        .take()
        .unwrap()
        .write_all(b"1 name\n2 genmove b\nquit\n")
        .unwrap();
    let out = child.wait_with_output().unwrap();
    let text = String::from_utf8(out.stdout).unwrap();
    assert!(text.starts_with("=1 treepar\n\n=2 "), "{text}");
    assert!(text.ends_with("= \n\n"));
}

#[test]
fn config_file_and_environment_layers() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("run.conf");
    fs::write(&cfg, "# defaults\nboard_size = 5\nbudget-playouts = 10\nthreads = 1\n").unwrap();
    let out = Command::new(env!("CARGO_BIN_EXE_treepar"))
        .args(["probe", "--config", cfg.to_str().unwrap()])
        .env("MCTS_AFFINITY", "compact")
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    let text = String::from_utf8(out.stdout).unwrap();
    assert!(text.lines().nth(1).unwrap().starts_with("1,10,10,"), "{text}");
}
