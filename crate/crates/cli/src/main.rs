use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;

use lscbm::corrnet::{self, network_stats, NetworkStats, DEFAULT_ALPHA_LEVEL};
use lscbm::detect::{detect, DetectConfig, DEFAULT_MAX_SEEDS};
use lscbm::experiments::{self, AccuracyConfig, AccuracyReport, Regime, ScalingReport};
use lscbm::ingest::{load_prices, log_returns, CsvFormat};
use lscbm::io;
use lscbm::oracle::{self, MAX_ORACLE_NODES};
use lscbm::randgen::{self, GroundTruth, SignedModelParams};
use lscbm::signed::{to_signed, Module, DEFAULT_SIGMA};
use lscbm::{Error, ValidatedCorrMatrix};

const EXIT_USAGE: u8 = 2;
const EXIT_INPUT: u8 = 3;
const EXIT_BUDGET: u8 = 4;

#[derive(Parser, Debug)]
#[command(name = "lscbm", version, about = "Signed correlation networks and largest balanced module detection")]
struct Cli {
    /// Worker threads (default: all cores). Results do not depend on it.
    #[arg(long, global = true)]
    threads: Option<usize>,

    /// Output format for reports.
    #[arg(long, global = true, value_enum, default_value_t = Format::Json)]
    format: Format,

    #[command(subcommand)]
    command: Command,
}

#[derive(Copy, Clone, Debug, PartialEq, Eq, ValueEnum)]
enum Format {
    Json,
    Tsv,
    Csv,
}

impl Format {
    fn delim(self) -> char {
        if self == Format::Csv {
            ','
        } else {
            '\t'
        }
    }
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Build a validated correlation network from a wide price CSV.
    BuildNet(BuildNetArgs),
    /// Network summary: n, t_len, xi+, xi-, mu+, mu-, module size, varsigma.
    Stats(StatsArgs),
    /// Detect the largest balanced module.
    Detect(DetectArgs),
    /// Sample a random signed graph.
    GenRandom(GenRandomArgs),
    /// Generate a planted-module benchmark instance.
    Plant(PlantArgs),
    /// Exact largest balanced module by exhaustive search (N <= 22).
    Oracle(OracleArgs),
    /// Planted-recovery accuracy study.
    SimAccuracy(SimAccuracyArgs),
    /// Module size scaling study over a node grid.
    SimScaling(SimScalingArgs),
    /// Module size and varsigma over a range of thresholds.
    SigmaSweep(SigmaSweepArgs),
}

#[derive(Args, Debug)]
struct BuildNetArgs {
    /// Wide CSV: a date column then one column per ticker.
    #[arg(long = "in")]
    input: PathBuf,
    #[arg(long, default_value_t = DEFAULT_ALPHA_LEVEL)]
    alpha_level: f64,
    #[arg(long, default_value = ",")]
    delimiter: char,
    #[arg(long, default_value = "date")]
    date_column: String,
    /// Output network directory.
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args, Debug)]
struct StatsArgs {
    #[arg(long)]
    net: PathBuf,
    /// Module JSON from `detect`; detected on the fly when omitted.
    #[arg(long)]
    module: Option<PathBuf>,
    #[arg(long, default_value_t = DEFAULT_SIGMA)]
    sigma: f64,
    #[arg(long, default_value_t = DEFAULT_MAX_SEEDS)]
    max_seeds: usize,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args, Debug)]
struct DetectArgs {
    #[arg(long)]
    net: PathBuf,
    #[arg(long, default_value_t = DEFAULT_SIGMA)]
    sigma: f64,
    #[arg(long, default_value_t = DEFAULT_MAX_SEEDS)]
    max_seeds: usize,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args, Debug)]
struct GenRandomArgs {
    #[arg(long)]
    n: usize,
    #[arg(long)]
    alpha_edge: f64,
    #[arg(long)]
    beta_edge: f64,
    #[arg(long)]
    rng_seed: Option<u64>,
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args, Debug)]
struct PlantArgs {
    #[arg(long)]
    n: usize,
    #[arg(long)]
    n_a: usize,
    #[arg(long)]
    n_b: usize,
    #[arg(long, default_value_t = DEFAULT_SIGMA)]
    sigma: f64,
    #[arg(long)]
    rng_seed: Option<u64>,
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args, Debug)]
struct OracleArgs {
    #[arg(long)]
    net: PathBuf,
    #[arg(long, default_value_t = DEFAULT_SIGMA)]
    sigma: f64,
    /// Also count balanced modules of every size.
    #[arg(long)]
    counts: bool,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args, Debug)]
struct SimAccuracyArgs {
    #[arg(long, default_value_t = 1000)]
    n: usize,
    #[arg(long, default_value_t = 100)]
    n_a: usize,
    #[arg(long, default_value_t = 200)]
    n_b: usize,
    #[arg(long, default_value_t = DEFAULT_SIGMA)]
    sigma: f64,
    #[arg(long, default_value_t = experiments::DEFAULT_TRIALS)]
    trials: usize,
    #[arg(long, default_value_t = DEFAULT_MAX_SEEDS)]
    max_seeds: usize,
    #[arg(long)]
    rng_seed: Option<u64>,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Copy, Clone, Debug, PartialEq, Eq, ValueEnum)]
enum RegimeArg {
    General,
    Dense,
    Negative,
}

#[derive(Copy, Clone, Debug, PartialEq, Eq, ValueEnum)]
enum GridArg {
    /// 10, 20, ..., 200
    Small,
    /// 300, 600, ..., 6000
    Large,
}

#[derive(Args, Debug)]
struct SimScalingArgs {
    #[arg(long, value_enum)]
    regime: RegimeArg,
    #[arg(long, default_value_t = 0.6)]
    alpha_edge: f64,
    #[arg(long, default_value_t = 0.3)]
    beta_edge: f64,
    /// Dense-regime constant: alpha = 1 - b/N.
    #[arg(long, default_value_t = 2.0)]
    b: f64,
    #[arg(long, value_enum, default_value_t = GridArg::Large, conflicts_with = "n_list")]
    grid: GridArg,
    /// Explicit node counts, comma separated.
    #[arg(long, value_delimiter = ',')]
    n_list: Option<Vec<usize>>,
    #[arg(long, default_value_t = experiments::DEFAULT_TRIALS)]
    trials: usize,
    #[arg(long, default_value_t = DEFAULT_MAX_SEEDS)]
    max_seeds: usize,
    #[arg(long)]
    rng_seed: Option<u64>,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args, Debug)]
struct SigmaSweepArgs {
    #[arg(long)]
    net: PathBuf,
    #[arg(long, default_value_t = 0.4)]
    from: f64,
    #[arg(long, default_value_t = 0.9)]
    to: f64,
    #[arg(long, default_value_t = 0.05)]
    step: f64,
    #[arg(long, default_value_t = DEFAULT_MAX_SEEDS)]
    max_seeds: usize,
    #[arg(long)]
    out: Option<PathBuf>,
}

fn exit_code(e: &Error) -> u8 {
    match e {
        Error::InvalidParameter(_) => EXIT_USAGE,
        Error::BudgetExceeded { .. } => EXIT_BUDGET,
        _ => EXIT_INPUT,
    }
}

fn seed_or_random(seed: Option<u64>) -> u64 {
    seed.unwrap_or_else(rand::random)
}

/// Writes to `out` atomically, or to stdout.
fn emit(out: Option<&Path>, text: &str) -> lscbm::Result<()> {
    match out {
        Some(p) => io::write_atomic(p, text.as_bytes()),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

fn json<T: Serialize>(value: &T) -> String {
    let mut s = serde_json::to_string_pretty(value).expect("report serializes");
    s.push('\n');
    s
}

fn module_table(m: &Module, delim: char) -> String {
    let rows: Vec<Vec<String>> = m
        .faction_a()
        .iter()
        .map(|&u| vec![u.to_string(), "A".into()])
        .chain(m.faction_b().iter().map(|&u| vec![u.to_string(), "B".into()]))
        .collect();
    io::table(&["node", "faction"], &rows, delim)
}

fn stats_text(s: &NetworkStats, fmt: Format) -> String {
    match fmt {
        Format::Json => json(s),
        _ => io::table(&NetworkStats::COLUMNS, &[s.row()], fmt.delim()),
    }
}

fn load_net(dir: &Path) -> lscbm::Result<ValidatedCorrMatrix> {
    io::read_network(dir)
}

fn run(cli: Cli) -> lscbm::Result<()> {
    let fmt = cli.format;
    match cli.command {
        Command::BuildNet(a) => {
            let format = CsvFormat {
                delimiter: u8::try_from(a.delimiter)
                    .map_err(|_| Error::InvalidParameter("delimiter must be a single ASCII character".into()))?,
                date_column: a.date_column,
            };
            let loaded = load_prices(&a.input, &format)?;
            for d in &loaded.dropped {
                eprintln!("dropped {}: {}", d.ticker, d.reason);
            }
            let returns = log_returns(&loaded.table);
            let c = corrnet::pearson_matrix(&returns);
            let v = corrnet::validate(&c, returns.t_len(), a.alpha_level)?;
            io::write_network(&a.out, &v)?;
            eprintln!(
                "build-net: n={} t_len={} edges={} dropped={} -> {}",
                v.n(),
                returns.t_len(),
                v.support().len(),
                loaded.dropped.len(),
                a.out.display()
            );
        }
        Command::Stats(a) => {
            let v = load_net(&a.net)?;
            let module = match &a.module {
                Some(p) => io::read_module(p)?,
                None => {
                    let cfg = DetectConfig { sigma: a.sigma, max_seeds: a.max_seeds, ..DetectConfig::default() };
                    cfg.validate()?;
                    detect(&to_signed(&v, a.sigma)?, &cfg)?
                }
            };
            let s = network_stats(&v, &module)?;
            emit(a.out.as_deref(), &stats_text(&s, fmt))?;
            eprintln!("stats: n={} lscbm_size={} varsigma={}", s.n, s.lscbm_size, s.varsigma);
        }
        Command::Detect(a) => {
            let cfg = DetectConfig { sigma: a.sigma, max_seeds: a.max_seeds, ..DetectConfig::default() };
            cfg.validate()?;
            let v = load_net(&a.net)?;
            let m = detect(&to_signed(&v, a.sigma)?, &cfg)?;
            let text = match fmt {
                Format::Json => json(&m.report()),
                _ => module_table(&m, fmt.delim()),
            };
            emit(a.out.as_deref(), &text)?;
            eprintln!(
                "detect: size={} |A|={} |B|={} sigma={}",
                m.size(),
                m.faction_a().len(),
                m.faction_b().len(),
                a.sigma
            );
        }
        Command::GenRandom(a) => {
            let seed = seed_or_random(a.rng_seed);
            let p = SignedModelParams { n: a.n, alpha_edge: a.alpha_edge, beta_edge: a.beta_edge, seed };
            let g = randgen::sample_signed(&p)?;
            io::write_network(&a.out, &io::signed_as_matrix(&g)?)?;
            eprintln!(
                "gen-random: n={} positive={} negative={} seed={seed} -> {}",
                a.n,
                g.positive_edge_count(),
                g.negative_edge_count(),
                a.out.display()
            );
        }
        Command::Plant(a) => {
            let seed = seed_or_random(a.rng_seed);
            let inst = randgen::plant_lscbm(a.n, a.n_a, a.n_b, a.sigma, seed)?;
            io::write_network(&a.out, &inst.matrix)?;
            io::write_truth(&a.out, &GroundTruth { truth_a: inst.truth_a.clone(), truth_b: inst.truth_b.clone() })?;
            eprintln!(
                "plant: n={} n_a={} n_b={} sigma={} seed={seed} -> {}",
                a.n,
                a.n_a,
                a.n_b,
                a.sigma,
                a.out.display()
            );
        }
        Command::Oracle(a) => {
            let v = load_net(&a.net)?;
            if v.n() > MAX_ORACLE_NODES {
                return Err(Error::BudgetExceeded { n: v.n(), max: MAX_ORACLE_NODES });
            }
            let g = to_signed(&v, a.sigma)?;
            let r = oracle::solve(&g, a.sigma, a.counts)?;
            let text = match fmt {
                Format::Json => {
                    #[derive(Serialize)]
                    struct Out<'a> {
                        best: lscbm::signed::ModuleReport,
                        z_counts: &'a std::collections::BTreeMap<usize, u64>,
                    }
                    json(&Out { best: r.best.report(), z_counts: &r.z_counts })
                }
                _ if a.counts => {
                    let rows: Vec<Vec<String>> =
                        r.z_counts.iter().map(|(s, z)| vec![s.to_string(), z.to_string()]).collect();
                    io::table(&["size", "count"], &rows, fmt.delim())
                }
                _ => module_table(&r.best, fmt.delim()),
            };
            emit(a.out.as_deref(), &text)?;
            eprintln!("oracle: n={} size={}", v.n(), r.best.size());
        }
        Command::SimAccuracy(a) => {
            let seed = seed_or_random(a.rng_seed);
            let cfg = AccuracyConfig {
                n: a.n,
                n_a: a.n_a,
                n_b: a.n_b,
                sigma: a.sigma,
                trials: a.trials,
                seed,
                max_seeds: a.max_seeds,
            };
            let r = experiments::run_accuracy(&cfg)?;
            let text = match fmt {
                Format::Json => json(&r),
                _ => io::table(&AccuracyReport::COLUMNS, &[r.row()], fmt.delim()),
            };
            emit(a.out.as_deref(), &text)?;
            eprintln!(
                "sim-accuracy: accuracy={} ({}/{}) mean_runtime={:.3}s seed={seed}",
                r.accuracy, r.correct, a.trials, r.mean_runtime_secs
            );
        }
        Command::SimScaling(a) => {
            let seed = seed_or_random(a.rng_seed);
            let regime = match a.regime {
                RegimeArg::General => Regime::General { alpha_edge: a.alpha_edge, beta_edge: a.beta_edge },
                RegimeArg::Dense => Regime::Dense { b: a.b },
                RegimeArg::Negative => Regime::Negative,
            };
            let grid = match a.n_list {
                Some(list) => list,
                None => match a.grid {
                    GridArg::Small => experiments::small_grid(),
                    GridArg::Large => experiments::large_grid(),
                },
            };
            let r = experiments::run_scaling(&regime, &grid, a.trials, seed, a.max_seeds)?;
            let text = match fmt {
                Format::Json => json(&r),
                _ => io::table(&ScalingReport::COLUMNS, &r.table_rows(), fmt.delim()),
            };
            emit(a.out.as_deref(), &text)?;
            eprintln!(
                "sim-scaling: regime={} points={} trials={} seed={seed}",
                regime.tag(),
                r.rows.len(),
                a.trials
            );
        }
        Command::SigmaSweep(a) => {
            let v = load_net(&a.net)?;
            let sigmas = experiments::sigma_grid(a.from, a.to, a.step)?;
            let points = experiments::sigma_sweep(&v, &sigmas, a.max_seeds)?;
            let text = match fmt {
                Format::Json => json(&points),
                _ => {
                    let rows: Vec<Vec<String>> = points
                        .iter()
                        .map(|p| {
                            vec![
                                p.sigma.to_string(),
                                p.lscbm_size.to_string(),
                                p.varsigma.to_string(),
                                p.all_positive.to_string(),
                            ]
                        })
                        .collect();
                    io::table(&["sigma", "lscbm_size", "varsigma", "all_positive"], &rows, fmt.delim())
                }
            };
            emit(a.out.as_deref(), &text)?;
            eprintln!("sigma-sweep: n={} points={}", v.n(), points.len());
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { ExitCode::from(EXIT_USAGE) } else { ExitCode::SUCCESS };
        }
    };
    if let Some(t) = cli.threads {
        if t == 0 {
            eprintln!("error: --threads must be >= 1");
            return ExitCode::from(EXIT_USAGE);
        }
        if let Err(e) = rayon::ThreadPoolBuilder::new().num_threads(t).build_global() {
            eprintln!("error: {e}");
            return ExitCode::from(EXIT_USAGE);
        }
    }
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(exit_code(&e))
        }
    }
}
