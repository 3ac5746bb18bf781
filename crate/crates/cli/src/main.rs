//! `chanbench`: capacity measures, decompositions and verification
//! campaigns for unital qubit channels.

mod channel_arg;
mod config;
mod report;
mod runner;

use std::path::PathBuf;
use std::process::ExitCode;
use std::time::Instant;

use anyhow::{bail, Context, Result};
use chanbench::verification::replay;
use clap::{Args, Parser, Subcommand};

use crate::config::{AdditivityCheck, ChannelInput, Command, EntropyUnits, ExperimentConfig, Measure, SCHEMA};

/// Overrides the worker thread count.
const THREADS_ENV: &str = "CHANBENCH_THREADS";
/// Largest allowed `max_violation` drift on replay.
const REPLAY_DRIFT: f64 = 1e-12;

#[derive(Parser)]
#[command(name = "chanbench", version, about = "Unital qubit channel capacities and additivity checks")]
struct Cli {
    #[command(subcommand)]
    command: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Maximal p-norm, minimal output entropy and Holevo capacity of channels.
    Capacity(ExperimentArgs),
    /// Phase-damping decomposition of a unital qubit channel at a state.
    Decompose(ExperimentArgs),
    /// Half-noisy phase-damping norm bound on random states.
    VerifyThm2(ExperimentArgs),
    /// Unital reduction inequality with the constructed decomposition.
    VerifyThm3(ExperimentArgs),
    /// Multiplicativity and additivity for products with a unital qubit channel.
    VerifyAdditivity(ExperimentArgs),
    /// Concavity, factorization and entropy-derivative steps.
    VerifyProofSteps(ExperimentArgs),
    /// Closed-form maximal p-norm and agreement of three capacity methods.
    VerifyCapacity(ExperimentArgs),
    /// Decomposition invariants on random channel and state pairs.
    VerifyDecomposition(ExperimentArgs),
    /// Runs an experiment config file.
    Run {
        config: PathBuf,
        /// Overrides the config's output directory.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Lists every problem in a config file.
    Validate { config: PathBuf },
    /// Re-runs the checks recorded in JSON-lines report files.
    Replay {
        #[arg(required = true)]
        reports: Vec<PathBuf>,
    },
    /// Prints the JSON schema of experiment configs.
    Schema,
}

#[derive(Args, Clone)]
struct ExperimentArgs {
    /// Channel in the mini-language (repeatable): identity, depolarizing:λ, phase-damping:λ,
    /// two-pauli:λ, diagonal:λ1,λ2,λ3, corner:i,λ, amplitude-damping:γ, random-unital:seed,
    /// random:seed[,kraus] or @file.json.
    #[arg(long = "channel")]
    channels: Vec<String>,
    /// Explicit Ω channels for verify-additivity (repeatable).
    #[arg(long = "omega")]
    omegas: Vec<String>,
    /// Explicit unital Φ channels for verify-additivity (repeatable).
    #[arg(long = "phi")]
    phis: Vec<String>,
    /// Qubit state for decompose: random, maximally-mixed, bloch:x,y,z or @file.json.
    #[arg(long)]
    state: Option<String>,
    /// Exponents p (comma separated).
    #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
    p: Option<Vec<f64>>,
    /// λ grid step on [-1, 1].
    #[arg(long)]
    lambda_grid: Option<f64>,
    /// Environment dimensions K (comma separated).
    #[arg(long = "K", value_delimiter = ',')]
    k: Option<Vec<usize>>,
    #[arg(long)]
    trials: Option<u64>,
    /// Random joint inputs per channel pair.
    #[arg(long)]
    random_trials: Option<usize>,
    /// Size of the random Ω list when no --omega is given.
    #[arg(long)]
    random_omegas: Option<u64>,
    /// Size of the random Φ list when no --phi is given.
    #[arg(long)]
    random_phis: Option<u64>,
    #[arg(long, value_enum)]
    measure: Option<Measure>,
    #[arg(long, value_enum, value_delimiter = ',')]
    checks: Option<Vec<AdditivityCheck>>,
    /// Optimizer restarts.
    #[arg(long)]
    restarts: Option<usize>,
    #[arg(long)]
    max_iters: Option<usize>,
    /// Optimizer stopping tolerance.
    #[arg(long)]
    tolerance: Option<f64>,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Directory for JSON-lines reports and CSV summaries.
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long, value_enum, default_value_t = EntropyUnits::Nats)]
    entropy_units: EntropyUnits,
    /// Writes the equivalent config file and exits.
    #[arg(long)]
    save_config: Option<PathBuf>,
}

impl ExperimentArgs {
    fn into_config(self, command: Command) -> ExperimentConfig {
        let mut c = ExperimentConfig::new(command);
        c.channels = self.channels.into_iter().map(ChannelInput::Text).collect();
        c.omegas = self.omegas.into_iter().map(ChannelInput::Text).collect();
        c.phis = self.phis.into_iter().map(ChannelInput::Text).collect();
        c.state = self.state;
        c.seed = self.seed;
        c.output = self.out;
        c.entropy_units = self.entropy_units;
        let p = &mut c.parameters;
        p.p = self.p;
        p.lambda_grid = self.lambda_grid;
        p.k = self.k;
        p.trials = self.trials;
        p.random_trials = self.random_trials;
        p.random_omegas = self.random_omegas;
        p.random_phis = self.random_phis;
        p.measure = self.measure;
        p.checks = self.checks;
        p.restarts = self.restarts;
        p.max_iters = self.max_iters;
        p.tolerance = self.tolerance;
        c
    }
}

enum Status {
    Passed,
    Failed,
}

fn execute(config: &ExperimentConfig) -> Result<Status> {
    let diagnostics = config.validate();
    if !diagnostics.is_empty() {
        let lines: Vec<String> = diagnostics.iter().map(|d| d.to_string()).collect();
        bail!("invalid config:\n  {}", lines.join("\n  "));
    }
    let start = Instant::now();
    let outcome = runner::run(config)?;
    let wall_clock_ms = start.elapsed().as_millis() as u64;
    for (channel, rows) in &outcome.rows {
        report::print_measures(channel, rows);
    }
    for rec in outcome.records.iter().filter(|r| r.kind == "decompose") {
        println!("{}", serde_json::to_string_pretty(&rec.body)?);
    }
    report::print_checks(&outcome.checks);
    let hash = config.hash();
    if let Some(dir) = &config.output {
        report::write_outputs(dir, &outcome, config.seed, &hash, wall_clock_ms)?;
        println!("reports written to {} (config hash {})", dir.display(), &hash[..12]);
    }
    Ok(if outcome.checks.iter().all(|r| r.passed) { Status::Passed } else { Status::Failed })
}

fn load_config(path: &PathBuf) -> Result<ExperimentConfig> {
    let text = std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    ExperimentConfig::from_json(&text).with_context(|| format!("{}", path.display()))
}

fn replay_files(paths: &[PathBuf]) -> Result<Status> {
    let mut ok = true;
    println!("{:<28} {:>14} {:>14} {:>10}  result", "check", "recorded", "replayed", "drift");
    for path in paths {
        for rec in report::read_records(path)? {
            let (again, drift) = replay(&rec.report)?;
            let same = drift <= REPLAY_DRIFT && again.passed == rec.report.passed;
            ok &= same && again.passed;
            println!(
                "{:<28} {:>14.6e} {:>14.6e} {:>10.1e}  {}",
                again.check_name,
                rec.report.max_violation,
                again.max_violation,
                drift,
                match (same, again.passed) {
                    (true, true) => "identical, pass",
                    (true, false) => "identical, FAIL",
                    (false, _) => "DIVERGED",
                }
            );
        }
    }
    Ok(if ok { Status::Passed } else { Status::Failed })
}

fn configure_threads() -> Result<()> {
    if let Ok(v) = std::env::var(THREADS_ENV) {
        let n: usize = v.parse().with_context(|| format!("{THREADS_ENV} must be a positive integer"))?;
        rayon::ThreadPoolBuilder::new().num_threads(n).build_global()?;
    }
    Ok(())
}

fn dispatch(cli: Cli) -> Result<Status> {
    configure_threads()?;
    let (command, args) = match cli.command {
        Cmd::Capacity(a) => (Command::Capacity, a),
        Cmd::Decompose(a) => (Command::Decompose, a),
        Cmd::VerifyThm2(a) => (Command::VerifyThm2, a),
        Cmd::VerifyThm3(a) => (Command::VerifyThm3, a),
        Cmd::VerifyAdditivity(a) => (Command::VerifyAdditivity, a),
        Cmd::VerifyProofSteps(a) => (Command::VerifyProofSteps, a),
        Cmd::VerifyCapacity(a) => (Command::VerifyCapacity, a),
        Cmd::VerifyDecomposition(a) => (Command::VerifyDecomposition, a),
        Cmd::Run { config, out } => {
            let mut c = load_config(&config)?;
            if out.is_some() {
                c.output = out;
            }
            return execute(&c);
        }
        Cmd::Validate { config } => {
            let c = load_config(&config)?;
            let diagnostics = c.validate();
            if diagnostics.is_empty() {
                println!("{}: valid", config.display());
                return Ok(Status::Passed);
            }
            for d in &diagnostics {
                println!("{}: {d}", config.display());
            }
            return Ok(Status::Failed);
        }
        Cmd::Replay { reports } => return replay_files(&reports),
        Cmd::Schema => {
            print!("{SCHEMA}");
            return Ok(Status::Passed);
        }
    };
    let save = args.save_config.clone();
    let config = args.into_config(command);
    if let Some(path) = save {
        std::fs::write(&path, serde_json::to_string_pretty(&config)?)?;
        println!("config written to {}", path.display());
        return Ok(Status::Passed);
    }
    execute(&config)
}

fn main() -> ExitCode {
    match dispatch(Cli::parse()) {
        Ok(Status::Passed) => ExitCode::SUCCESS,
        Ok(Status::Failed) => ExitCode::from(1),
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(2)
        }
    }
}
