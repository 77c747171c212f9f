//! Command-line front end: flag/config-file/env merging, dispatch, and
//! atomic CSV/JSON output.

use std::collections::BTreeMap;
use std::fs;
use std::io::{self, BufRead, Write};
use std::path::{Path, PathBuf};

use clap::{Parser, Subcommand};
use serde_json::json;
use treepar_core::{AffinityPolicy, Budget, SearchConfig};

use crate::bench::{self, Benchmark, ElementType, KernelSpec};
use crate::gtp::{serve, GtpEngine};
use crate::parallel::host_topology;
use crate::pinning::frequency_governor;
use crate::tournament::{self, EnginePairing, MoveBudget, SweepSpec};

pub const AFFINITY_ENV: &str = "MCTS_AFFINITY";

#[derive(Parser, Debug)]
#[command(
    name = "treepar",
    version,
    about = "Tree-parallel MCTS Go engine and experiment harness"
)]
struct Cli {
    #[command(subcommand)]
    command: CommandArg,
    #[command(flatten)]
    flags: Flags,
}

#[derive(Subcommand, Debug, Clone, Copy)]
enum CommandArg {
    /// Serve the Go Text Protocol on stdin/stdout.
    Gtp,
    /// Play a match between two engine configurations.
    Selfplay,
    /// n-thread vs n/2-thread doubling sweep.
    Sweep,
    /// Multiply-add throughput and bandwidth microbenchmarks.
    Bench,
    /// Games-per-second and tree-size probes at the second move.
    Probe,
}

#[derive(clap::Args, Debug, Default)]
struct Flags {
    /// Thread count, or a comma-separated list for sweep/bench/probe.
    #[arg(long, global = true)]
    threads: Option<String>,
    /// Wall-time budget per move in milliseconds.
    #[arg(long, global = true)]
    budget_ms: Option<String>,
    /// Playout budget per move (per thread for sweep/selfplay).
    #[arg(long, global = true)]
    budget_playouts: Option<String>,
    /// How playout budgets scale with threads: `thread` or `move`.
    #[arg(long, global = true)]
    budget_scope: Option<String>,
    /// Tree synchronization: `local` or `free`.
    #[arg(long, global = true)]
    lock: Option<String>,
    /// compact, balanced, scatter or none (comma list for bench).
    #[arg(long, global = true)]
    affinity: Option<String>,
    #[arg(long, global = true)]
    board_size: Option<String>,
    #[arg(long, global = true)]
    komi: Option<String>,
    #[arg(long, global = true)]
    games: Option<String>,
    #[arg(long, global = true)]
    seed: Option<String>,
    /// Output file; a `.meta.json` sidecar is written next to it.
    #[arg(long, global = true)]
    out: Option<String>,
    /// key=value file providing defaults for any flag.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    #[arg(long, global = true)]
    log_level: Option<String>,
    /// Thread count of engine B in selfplay.
    #[arg(long, global = true)]
    opponent_threads: Option<String>,
    /// Games played concurrently by the referee.
    #[arg(long, global = true)]
    workers: Option<String>,
    /// Give both sweep engines n/2 threads.
    #[arg(long, global = true)]
    null_experiment: bool,
    #[arg(long, global = true)]
    exploration: Option<String>,
    #[arg(long, global = true)]
    virtual_loss: Option<String>,
    #[arg(long, global = true)]
    expansion_threshold: Option<String>,
    /// kernel or bandwidth.
    #[arg(long, global = true)]
    benchmark: Option<String>,
    /// int32 or float64.
    #[arg(long, global = true)]
    element_type: Option<String>,
    #[arg(long, global = true)]
    array_length: Option<String>,
    #[arg(long, global = true)]
    repetitions: Option<String>,
}

const KEYS: &[&str] = &[
    "threads",
    "budget-ms",
    "budget-playouts",
    "budget-scope",
    "lock",
    "affinity",
    "board-size",
    "komi",
    "games",
    "seed",
    "out",
    "log-level",
    "opponent-threads",
    "workers",
    "null-experiment",
    "exploration",
    "virtual-loss",
    "expansion-threshold",
    "benchmark",
    "element-type",
    "array-length",
    "repetitions",
];

impl Flags {
    fn pairs(&self) -> BTreeMap<&'static str, String> {
        let fields: [(&'static str, &Option<String>); 21] = [
            ("threads", &self.threads),
            ("budget-ms", &self.budget_ms),
            ("budget-playouts", &self.budget_playouts),
            ("budget-scope", &self.budget_scope),
            ("lock", &self.lock),
            ("affinity", &self.affinity),
            ("board-size", &self.board_size),
            ("komi", &self.komi),
            ("games", &self.games),
            ("seed", &self.seed),
            ("out", &self.out),
            ("log-level", &self.log_level),
            ("opponent-threads", &self.opponent_threads),
            ("workers", &self.workers),
            ("exploration", &self.exploration),
            ("virtual-loss", &self.virtual_loss),
            ("expansion-threshold", &self.expansion_threshold),
            ("benchmark", &self.benchmark),
            ("element-type", &self.element_type),
            ("array-length", &self.array_length),
            ("repetitions", &self.repetitions),
        ];
        let mut map: BTreeMap<&'static str, String> = fields
            .into_iter()
            .filter_map(|(k, v)| v.clone().map(|v| (k, v)))
            .collect();
        if self.null_experiment {
            map.insert("null-experiment", "true".into());
        }
        map
    }
}

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    /// Help or version text; not a failure.
    #[error("{0}")]
    Info(String),
    #[error("{0}")]
    Usage(String),
    #[error("{0}")]
    Runtime(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Info(_) => 0,
            CliError::Usage(_) => 1,
            CliError::Runtime(_) => 2,
        }
    }
}

fn usage(msg: impl Into<String>) -> CliError {
    CliError::Usage(msg.into())
}

fn runtime(context: &str, e: impl std::fmt::Display) -> CliError {
    CliError::Runtime(format!("{context}: {e}"))
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Command {
    Gtp,
    Selfplay,
    Sweep,
    Bench,
    Probe,
}

impl Command {
    pub fn name(self) -> &'static str {
        match self {
            Command::Gtp => "gtp",
            Command::Selfplay => "selfplay",
            Command::Sweep => "sweep",
            Command::Bench => "bench",
            Command::Probe => "probe",
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct BenchPlan {
    pub benchmark: Benchmark,
    pub kernel: KernelSpec,
    pub threads: Vec<usize>,
    pub policies: Vec<AffinityPolicy>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct RunConfig {
    pub command: Command,
    pub search: SearchConfig,
    /// Thread counts for sweep points, bench rows and probe rows.
    pub thread_list: Vec<usize>,
    pub board_size: usize,
    pub pairing: Option<EnginePairing>,
    pub sweep: Option<SweepSpec>,
    pub bench: Option<BenchPlan>,
    pub workers: usize,
    pub output_path: Option<PathBuf>,
    pub log_level: log::LevelFilter,
    pub config_file: Option<PathBuf>,
    /// Merged key=value settings the config was built from.
    pub settings: BTreeMap<String, String>,
}

fn read_config_file(path: &Path) -> Result<BTreeMap<String, String>, CliError> {
    let text = fs::read_to_string(path).map_err(|e| usage(format!("cannot read config {}: {e}", path.display())))?;
    let mut map = BTreeMap::new();
    for (n, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let Some((key, value)) = line.split_once('=') else {
            return Err(usage(format!("{}:{}: expected key=value", path.display(), n + 1)));
        };
        let key = key.trim().trim_start_matches("--").replace('_', "-");
        if !KEYS.contains(&key.as_str()) {
            return Err(usage(format!("{}:{}: unknown key `{key}`", path.display(), n + 1)));
        }
        map.insert(key, value.trim().to_string());
    }
    Ok(map)
}

/// Later layers override earlier ones. The two budget keys form one slot,
/// and setting both within a layer is an error.
fn merge_layers(layers: &[BTreeMap<String, String>]) -> Result<BTreeMap<String, String>, CliError> {
    let mut merged = BTreeMap::new();
    for layer in layers {
        let ms = layer.contains_key("budget-ms");
        let playouts = layer.contains_key("budget-playouts");
        if ms && playouts {
            return Err(usage(
                "conflicting budgets: give either --budget-ms or --budget-playouts",
            ));
        }
        if ms || playouts {
            merged.remove("budget-ms");
            merged.remove("budget-playouts");
        }
        merged.extend(layer.iter().map(|(k, v)| (k.clone(), v.clone())));
    }
    Ok(merged)
}

struct Settings<'a>(&'a BTreeMap<String, String>);

impl Settings<'_> {
    fn get(&self, key: &str) -> Option<&str> {
        self.0.get(key).map(String::as_str)
    }

    fn parse<T: std::str::FromStr>(&self, key: &str) -> Result<Option<T>, CliError> {
        self.get(key)
            .map(|v| {
                v.parse::<T>()
                    .map_err(|_| usage(format!("invalid value `{v}` for --{key}")))
            })
            .transpose()
    }

    fn list<T: std::str::FromStr>(&self, key: &str) -> Result<Option<Vec<T>>, CliError> {
        self.get(key)
            .map(|v| {
                v.split(',')
                    .map(|x| {
                        x.trim()
                            .parse::<T>()
                            .map_err(|_| usage(format!("invalid value `{v}` for --{key}")))
                    })
                    .collect()
            })
            .transpose()
    }

    fn flag(&self, key: &str) -> Result<bool, CliError> {
        Ok(self.parse::<bool>(key)?.unwrap_or(false))
    }
}

pub fn parse_args<I, T>(argv: I) -> Result<RunConfig, CliError>
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    parse_args_with_env(argv, std::env::var(AFFINITY_ENV).ok())
}

/// Precedence: command line, then `MCTS_AFFINITY`, then the config file.
pub fn parse_args_with_env<I, T>(argv: I, env_affinity: Option<String>) -> Result<RunConfig, CliError>
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = Cli::try_parse_from(argv).map_err(|e| match e.kind() {
        clap::error::ErrorKind::DisplayHelp
        | clap::error::ErrorKind::DisplayVersion
        | clap::error::ErrorKind::DisplayHelpOnMissingArgumentOrSubcommand => CliError::Info(e.to_string()),
        _ => usage(e.to_string()),
    })?;
    let file = match &cli.flags.config {
        Some(path) => read_config_file(path)?,
        None => BTreeMap::new(),
    };
    let env: BTreeMap<String, String> = env_affinity
        .filter(|v| !v.trim().is_empty())
        .map(|v| ("affinity".to_string(), v))
        .into_iter()
        .collect();
    let cli_layer: BTreeMap<String, String> = cli.flags.pairs().into_iter().map(|(k, v)| (k.to_string(), v)).collect();
    let settings = merge_layers(&[file, env, cli_layer])?;
    let command = match cli.command {
        CommandArg::Gtp => Command::Gtp,
        CommandArg::Selfplay => Command::Selfplay,
        CommandArg::Sweep => Command::Sweep,
        CommandArg::Bench => Command::Bench,
        CommandArg::Probe => Command::Probe,
    };
    build(command, settings, cli.flags.config)
}

fn build(
    command: Command,
    settings: BTreeMap<String, String>,
    config_file: Option<PathBuf>,
) -> Result<RunConfig, CliError> {
    let s = Settings(&settings);
    let default_threads = if command == Command::Sweep { vec![2] } else { vec![1] };
    let thread_list: Vec<usize> = s.list("threads")?.unwrap_or(default_threads);
    if thread_list.is_empty() || thread_list.contains(&0) {
        return Err(usage("--threads values must be positive"));
    }
    if matches!(command, Command::Gtp | Command::Selfplay) && thread_list.len() > 1 {
        return Err(usage(format!("--threads takes a single value for {}", command.name())));
    }
    let policies: Vec<AffinityPolicy> = match s.get("affinity") {
        Some(v) => v
            .split(',')
            .map(|p| {
                p.parse::<AffinityPolicy>()
                    .map_err(|e| usage(format!("--affinity: {e}")))
            })
            .collect::<Result<_, _>>()?,
        None => vec![AffinityPolicy::None],
    };
    if command != Command::Bench && policies.len() > 1 {
        return Err(usage("--affinity takes a single policy outside bench"));
    }
    let defaults = SearchConfig::default();
    let budget = match (s.parse::<u64>("budget-ms")?, s.parse::<u64>("budget-playouts")?) {
        (Some(_), Some(_)) => return Err(usage("conflicting budgets")),
        (Some(ms), None) => Budget::WallTime(ms),
        (None, Some(p)) => Budget::Playouts(p),
        (None, None) => defaults.budget,
    };
    let search = SearchConfig {
        threads: thread_list[0],
        budget,
        lock_mode: match s.get("lock") {
            Some(v) => v
                .parse()
                .map_err(|_| usage(format!("invalid value `{v}` for --lock")))?,
            None => defaults.lock_mode,
        },
        affinity: policies[0],
        exploration_c: s.parse("exploration")?.unwrap_or(defaults.exploration_c),
        virtual_loss_size: s.parse("virtual-loss")?.unwrap_or(defaults.virtual_loss_size),
        expansion_threshold: s.parse("expansion-threshold")?.unwrap_or(defaults.expansion_threshold),
        seed: s.parse("seed")?.unwrap_or(defaults.seed),
        komi: s.parse("komi")?.unwrap_or(defaults.komi),
    };
    search
        .validate()
        .map_err(|e| usage(format!("invalid search settings: {e}")))?;
    let board_size: usize = s.parse("board-size")?.unwrap_or(9);
    treepar_core::Board::new(board_size).map_err(|e| usage(format!("--board-size: {e}")))?;
    let games: u32 = s.parse("games")?.unwrap_or(100);
    let workers: usize = s.parse("workers")?.unwrap_or(1).max(1);
    let per_thread = match s.get("budget-scope").unwrap_or("thread") {
        "thread" => true,
        "move" => false,
        other => return Err(usage(format!("invalid value `{other}` for --budget-scope"))),
    };
    let move_budget = match budget {
        Budget::Playouts(p) if per_thread => MoveBudget::PlayoutsPerThread(p),
        Budget::Playouts(p) => MoveBudget::Playouts(p),
        Budget::WallTime(ms) => MoveBudget::WallTime(ms),
    };
    let log_level = match s.get("log-level") {
        Some(v) => v
            .parse()
            .map_err(|_| usage(format!("invalid value `{v}` for --log-level")))?,
        None => log::LevelFilter::Warn,
    };

    let mut pairing = None;
    let mut sweep = None;
    let mut bench_plan = None;
    match command {
        Command::Selfplay => {
            let engine_b = SearchConfig {
                threads: s.parse("opponent-threads")?.unwrap_or(search.threads),
                seed: treepar_core::mix_seed(search.seed, 0xB0B),
                ..search.clone()
            };
            let p = EnginePairing {
                engine_a: search.clone(),
                engine_b,
                games,
                komi: search.komi,
                board_size,
                move_budget,
                alternate_colors: true,
            };
            p.validate().map_err(|e| usage(format!("invalid pairing: {e}")))?;
            pairing = Some(p);
        }
        Command::Sweep => {
            if let Some(&bad) = thread_list.iter().find(|&&n| n < 2 || n % 2 != 0) {
                return Err(usage(format!("sweep point {bad} must be even and at least 2")));
            }
            if games == 0 {
                return Err(usage("--games must be at least 1"));
            }
            sweep = Some(SweepSpec {
                points: thread_list.clone(),
                games,
                move_budget,
                base: search.clone(),
                board_size,
                komi: search.komi,
                null_experiment: s.flag("null-experiment")?,
                seed: search.seed,
                workers,
            });
        }
        Command::Bench => {
            let benchmark = match s.get("benchmark").unwrap_or("kernel") {
                "kernel" => Benchmark::Kernel,
                "bandwidth" => Benchmark::Bandwidth,
                other => return Err(usage(format!("invalid value `{other}` for --benchmark"))),
            };
            let element_type: Option<ElementType> = match s.get("element-type") {
                Some(v) => Some(v.parse().map_err(usage)?),
                None => None,
            };
            let mut kernel = match benchmark {
                Benchmark::Kernel => KernelSpec::compute(element_type.unwrap_or(ElementType::Float64), thread_list[0]),
                Benchmark::Bandwidth => KernelSpec::bandwidth(thread_list[0]),
            };
            if let Some(t) = element_type {
                kernel.element_type = t;
            }
            kernel.affinity = policies[0];
            kernel.array_length = s.parse("array-length")?.unwrap_or(kernel.array_length);
            kernel.repetitions = s.parse("repetitions")?.unwrap_or(kernel.repetitions);
            if kernel.array_length == 0 {
                return Err(usage("--array-length must be at least 1"));
            }
            bench_plan = Some(BenchPlan {
                benchmark,
                kernel,
                threads: thread_list.clone(),
                policies,
            });
        }
        Command::Gtp | Command::Probe => {}
    }

    Ok(RunConfig {
        command,
        search,
        thread_list,
        board_size,
        pairing,
        sweep,
        bench: bench_plan,
        workers,
        output_path: s.get("out").map(PathBuf::from),
        log_level,
        config_file,
        settings,
    })
}

/// Writes `contents` to a sibling temp file, syncs it, then renames it
/// over `path`.
pub fn write_atomic(path: &Path, contents: &[u8]) -> io::Result<()> {
    let dir = path
        .parent()
        .filter(|d| !d.as_os_str().is_empty())
        .unwrap_or(Path::new("."));
    let name = path
        .file_name()
        .ok_or_else(|| io::Error::new(io::ErrorKind::InvalidInput, "output path has no file name"))?;
    let tmp = dir.join(format!(".{}.tmp.{}", name.to_string_lossy(), std::process::id()));
    let result = (|| {
        let mut f = fs::File::create(&tmp)?;
        f.write_all(contents)?;
        f.sync_all()?;
        fs::rename(&tmp, path)
    })();
    if result.is_err() {
        let _ = fs::remove_file(&tmp);
    }
    result
}

pub fn metadata_path(out: &Path) -> PathBuf {
    let mut s = out.as_os_str().to_owned();
    s.push(".meta.json");
    PathBuf::from(s)
}

/// Provenance: config echo, seed, host, version and build.
pub fn run_metadata(config: &RunConfig) -> serde_json::Value {
    let host = host_topology();
    let topo = host.topology();
    let budget = match config.search.budget {
        Budget::Playouts(n) => json!({"playouts": n}),
        Budget::WallTime(ms) => json!({"wall_time_ms": ms}),
    };
    json!({
        "command": config.command.name(),
        "settings": config.settings,
        "config_file": config.config_file.as_ref().map(|p| p.display().to_string()),
        "search": {
            "threads": config.search.threads,
            "budget": budget,
            "lock_mode": config.search.lock_mode.name(),
            "affinity": config.search.affinity.name(),
            "exploration_c": config.search.exploration_c,
            "virtual_loss_size": config.search.virtual_loss_size,
            "expansion_threshold": config.search.expansion_threshold,
            "komi": config.search.komi,
        },
        "thread_list": config.thread_list,
        "board_size": config.board_size,
        "seed": config.search.seed,
        "bench": config.bench.as_ref().map(|b| json!({
            "benchmark": b.benchmark.name(),
            "kernel": b.kernel,
            "threads": b.threads,
            "policies": b.policies.iter().map(|p| p.name()).collect::<Vec<_>>(),
        })),
        "host": {
            "cores": topo.cores,
            "smt": topo.smt_ways,
            "logical_processors": host.logical_processors(),
            "cpu_groups": host.cores,
            "frequency_governor": frequency_governor(),
        },
        "version": env!("CARGO_PKG_VERSION"),
        "build": {
            "profile": if cfg!(debug_assertions) { "debug" } else { "release" },
            "target_arch": std::env::consts::ARCH,
            "target_os": std::env::consts::OS,
            "target_features": target_features(),
        },
    })
}

fn target_features() -> Vec<&'static str> {
    let mut f = Vec::new();
    if cfg!(target_feature = "sse2") {
        f.push("sse2");
    }
    if cfg!(target_feature = "avx") {
        f.push("avx");
    }
    if cfg!(target_feature = "avx2") {
        f.push("avx2");
    }
    if cfg!(target_feature = "fma") {
        f.push("fma");
    }
    if cfg!(target_feature = "neon") {
        f.push("neon");
    }
    f
}

/// Sends `body` to `--out` (with metadata sidecar) or to `stdout`.
fn emit(config: &RunConfig, body: &str, stdout: &mut dyn Write) -> Result<(), CliError> {
    match &config.output_path {
        Some(path) => {
            write_atomic(path, body.as_bytes()).map_err(|e| runtime(&format!("writing {}", path.display()), e))?;
            let meta = serde_json::to_string_pretty(&run_metadata(config)).expect("metadata serializes");
            let meta_path = metadata_path(path);
            write_atomic(&meta_path, meta.as_bytes())
                .map_err(|e| runtime(&format!("writing {}", meta_path.display()), e))?;
        }
        None => stdout
            .write_all(body.as_bytes())
            .map_err(|e| runtime("writing output", e))?,
    }
    Ok(())
}

pub fn execute(
    config: &RunConfig,
    stdin: &mut dyn BufRead,
    stdout: &mut dyn Write,
    stderr: &mut dyn Write,
) -> Result<(), CliError> {
    match config.command {
        Command::Gtp => {
            let mut engine = GtpEngine::new(config.search.clone(), config.board_size).map_err(|e| runtime("gtp", e))?;
            serve(&mut engine, stdin, stdout).map_err(|e| runtime("gtp", e))
        }
        Command::Selfplay => {
            let pairing = config.pairing.as_ref().expect("selfplay pairing");
            let report = tournament::run_match_parallel(pairing, config.search.seed, config.workers)
                .map_err(|e| runtime("selfplay", e))?;
            let mut body = format!("{}\n", tournament::SWEEP_CSV_HEADER);
            body.push_str(&tournament::match_csv_row(pairing.engine_a.threads, &report.stats));
            body.push('\n');
            emit(config, &body, stdout)?;
            if let Some(out) = &config.output_path {
                let records: Vec<String> = report.records.iter().map(|r| r.to_text()).collect();
                let mut path = out.as_os_str().to_owned();
                path.push(".games.txt");
                write_atomic(Path::new(&path), records.join("\n").as_bytes())
                    .map_err(|e| runtime("writing game records", e))?;
            }
            let _ = writeln!(
                stderr,
                "selfplay: {} games, A won {} lost {} drew {}, w={:.3} [{:.3}, {:.3}]",
                report.stats.games,
                report.stats.wins_a,
                report.stats.losses_a,
                report.stats.draws,
                report.stats.win_rate,
                report.stats.ci_low,
                report.stats.ci_high
            );
            Ok(())
        }
        Command::Sweep => {
            let spec = config.sweep.as_ref().expect("sweep spec");
            let points = tournament::doubling_sweep(spec).map_err(|e| runtime("sweep", e))?;
            emit(config, &tournament::sweep_csv(&points), stdout)?;
            let total: u64 = points.iter().map(|p| p.stats.games).sum();
            let _ = writeln!(stderr, "sweep: {} points, {} games total", points.len(), total);
            Ok(())
        }
        Command::Bench => {
            let plan = config.bench.as_ref().expect("bench plan");
            let results = bench::affinity_sweep(plan.benchmark, &plan.kernel, &plan.threads, &plan.policies)
                .map_err(|e| runtime("bench", e))?;
            emit(config, &bench::bench_csv(&results), stdout)
        }
        Command::Probe => {
            let position = bench::second_move_position(config.board_size).map_err(|e| runtime("probe", e))?;
            let mut body = format!("{}\n", bench::probe_csv_header(config.search.budget));
            for &threads in &config.thread_list {
                let search = SearchConfig {
                    threads,
                    ..config.search.clone()
                };
                let p = bench::games_per_second_probe(&search, &position).map_err(|e| runtime("probe", e))?;
                body.push_str(&p.csv_row(&search));
                body.push('\n');
            }
            emit(config, &body, stdout)
        }
    }
}

/// Full program: parse, set up logging, run. Returns the exit code.
pub fn run<I, T>(argv: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let config = match parse_args(argv) {
        Ok(c) => c,
        Err(e) => {
            let code = e.exit_code();
            if code == 0 {
                print!("{e}");
            } else {
                eprintln!("treepar: {}", e.to_string().trim_end());
            }
            return code;
        }
    };
    let _ = env_logger::Builder::new()
        .filter_level(config.log_level)
        .format_timestamp_millis()
        .try_init();
    let stdin = io::stdin();
    let stdout = io::stdout();
    let stderr = io::stderr();
    match execute(&config, &mut stdin.lock(), &mut stdout.lock(), &mut stderr.lock()) {
        Ok(()) => 0,
        Err(e) => {
            eprintln!("treepar: {e}");
            e.exit_code()
        }
    }
}
