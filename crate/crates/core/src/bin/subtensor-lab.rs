use std::io::Write;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use serde_json::json;

use subtensor_lab::algorithms::DEFAULT_BRUTE_BUDGET;
use subtensor_lab::harness::{
    constants_table, error_json, render_constants, run_config, Algorithm, ExperimentConfig,
    ExperimentKind, InitChoice, OutputPaths, ParamSpec, SchemeOverride,
};
use subtensor_lab::io::{export, ingest, Format};
use subtensor_lab::ogp::CoinMode;
use subtensor_lab::{make_source, Error, Result, StreamKey, Tensor};

/// Dense-subtensor experiments on Gaussian random tensors.
#[derive(Parser)]
#[command(name = "subtensor-lab", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Print the asymptotic constants for each order p.
    Constants {
        #[arg(long, default_value_t = 100_000)]
        n: usize,
        #[arg(long, default_value_t = 10)]
        k: usize,
        #[arg(long, value_delimiter = ',', default_value = "1,2,3")]
        p: Vec<usize>,
        #[arg(long, default_value_t = 0.1)]
        epsilon: f64,
        #[arg(long)]
        json: bool,
    },
    /// Write a seeded Gaussian tensor to disk.
    Generate {
        #[arg(long)]
        n: usize,
        #[arg(long, default_value_t = 2)]
        p: usize,
        #[arg(long)]
        seed: u64,
        #[arg(long)]
        out: PathBuf,
        #[arg(long, value_enum)]
        format: Option<Format>,
    },
    /// Greedy procedure over fresh instances.
    Igp(SearchArgs),
    /// Alternating search over fresh matrices.
    Las(SearchArgs),
    /// Exhaustive search over fresh instances.
    Brute {
        #[command(flatten)]
        search: SearchArgs,
        #[arg(long, default_value_t = DEFAULT_BRUTE_BUDGET)]
        budget: u128,
    },
    /// Replay the greedy procedure against resampled exteriors.
    CheckOnline(SearchArgs),
    /// Joint success of the greedy procedure across correlated instances.
    OgpJoint {
        #[command(flatten)]
        search: SearchArgs,
        /// Grid depth override.
        #[arg(long = "depth", short = 'N')]
        depth: Option<usize>,
        /// Branching factor override.
        #[arg(long = "branching", short = 'D')]
        branching: Option<usize>,
        #[arg(long, value_enum, default_value_t = CoinMode::Shared)]
        coins: CoinMode,
    },
    /// Load a tensor file; with --k, also run an algorithm on it.
    Ingest {
        input: PathBuf,
        #[arg(long, value_enum)]
        format: Option<Format>,
        #[arg(long)]
        k: Option<usize>,
        #[arg(long, default_value_t = 0.1)]
        epsilon: f64,
        #[arg(long, value_enum, default_value_t = Algorithm::Igp)]
        algorithm: Algorithm,
        #[arg(long)]
        seed: Option<u64>,
        #[arg(long, default_value_t = DEFAULT_BRUTE_BUDGET)]
        budget: u128,
        #[command(flatten)]
        output: OutputArgs,
    },
    /// Run an experiment described by a JSON config file.
    Run { config: PathBuf },
}

#[derive(Args)]
struct OutputArgs {
    /// Per-trial CSV path.
    #[arg(long)]
    csv: Option<PathBuf>,
    /// JSON summary path; printed to stdout when omitted.
    #[arg(long)]
    summary: Option<PathBuf>,
}

#[derive(Args)]
struct SearchArgs {
    #[arg(long)]
    n: usize,
    #[arg(long)]
    k: usize,
    #[arg(long, default_value_t = 2)]
    p: usize,
    #[arg(long, default_value_t = 0.1)]
    epsilon: f64,
    #[arg(long, default_value_t = 1)]
    trials: usize,
    #[arg(long)]
    seed: u64,
    #[arg(long, default_value_t = 1)]
    threads: usize,
    #[arg(long)]
    id: Option<String>,
    #[arg(long, value_enum, default_value_t = InitChoice::First)]
    init: InitChoice,
    /// Add a wall-clock column to the CSV.
    #[arg(long)]
    timing: bool,
    #[command(flatten)]
    output: OutputArgs,
}

impl SearchArgs {
    fn config(self, kind: ExperimentKind) -> ExperimentConfig {
        let params = ParamSpec {
            n: self.n,
            k: self.k,
            p: self.p,
            epsilon: self.epsilon,
        };
        let mut cfg = ExperimentConfig::new(kind, params, self.trials, self.seed);
        cfg.id = self.id;
        cfg.threads = self.threads;
        cfg.init = self.init;
        cfg.timing = self.timing;
        cfg.output = OutputPaths {
            csv: self.output.csv,
            summary: self.output.summary,
        };
        cfg
    }
}

/// Writes to stdout; a closed pipe is not an error.
fn emit(text: &str) -> Result<()> {
    match std::io::stdout().lock().write_all(text.as_bytes()) {
        Err(e) if e.kind() != std::io::ErrorKind::BrokenPipe => Err(e.into()),
        _ => Ok(()),
    }
}

fn run_experiment(cfg: ExperimentConfig) -> Result<()> {
    let out = run_config(&cfg)?;
    if cfg.output.summary.is_none() {
        emit(&format!("{}\n", serde_json::to_string_pretty(&out.summary)?))?;
    }
    Ok(())
}

fn dispatch(command: Command) -> Result<()> {
    match command {
        Command::Constants { n, k, p, epsilon, json } => {
            let rows = constants_table(n, k, &p, epsilon)?;
            if json {
                emit(&format!("{}\n", serde_json::to_string_pretty(&rows)?))?;
            } else {
                emit(&render_constants(&rows))?;
            }
            Ok(())
        }
        Command::Generate { n, p, seed, out, format } => {
            let entries = (n as u128).checked_pow(p as u32).unwrap_or(u128::MAX);
            if entries > 100_000_000 {
                return Err(Error::Capacity(format!("{n}^{p} entries is too many to write")));
            }
            let src = make_source(n, p, StreamKey::from_seed(seed))?;
            let format = format.unwrap_or_else(|| Format::from_path(&out));
            export(&src, &out, format)?;
            emit(&format!("{}\n", json!({ "path": out, "n": n, "p": p, "key": src.key().to_string() })))?;
            Ok(())
        }
        Command::Igp(args) => run_experiment(args.config(ExperimentKind::McIgp)),
        Command::Las(args) => run_experiment(args.config(ExperimentKind::McLas)),
        Command::Brute { search, budget } => {
            let mut cfg = search.config(ExperimentKind::Brute);
            cfg.budget = budget;
            run_experiment(cfg)
        }
        Command::CheckOnline(args) => run_experiment(args.config(ExperimentKind::OnlineCheck)),
        Command::OgpJoint { search, depth, branching, coins } => {
            let mut cfg = search.config(ExperimentKind::OgpJoint);
            cfg.coins = coins;
            cfg.scheme = match (depth, branching) {
                (Some(depth), Some(branching)) => Some(SchemeOverride { depth, branching }),
                (None, None) => None,
                _ => {
                    return Err(Error::InvalidArgument(
                        "--depth and --branching must be given together".into(),
                    ))
                }
            };
            run_experiment(cfg)
        }
        Command::Ingest { input, format, k, epsilon, algorithm, seed, budget, output } => {
            let Some(k) = k else {
                let t = ingest(&input, format.unwrap_or_else(|| Format::from_path(&input)))?;
                emit(&format!("{}\n", json!({ "path": input, "n": t.side(), "p": t.order() })))?;
                return Ok(());
            };
            let seed = seed.ok_or_else(|| {
                Error::InvalidArgument("--seed is required when running an algorithm".into())
            })?;
            let params = ParamSpec { n: 0, k, p: 0, epsilon };
            let mut cfg = ExperimentConfig::new(ExperimentKind::IngestRun, params, 1, seed);
            cfg.input = Some(input);
            cfg.format = format;
            cfg.algorithm = algorithm;
            cfg.budget = budget;
            cfg.output = OutputPaths {
                csv: output.csv,
                summary: output.summary,
            };
            run_experiment(cfg)
        }
        Command::Run { config } => run_experiment(ExperimentConfig::from_file(&config)?),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match dispatch(cli.command) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("{}", error_json(&e));
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
