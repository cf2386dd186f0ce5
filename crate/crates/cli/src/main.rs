use std::fmt;
use std::io::Write;
use std::net::SocketAddr;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};

use crowd_collect::ServiceConfig;
use crowd_consensus::formats::{
    parse_ensemble, parse_labels, serialize_json, serialize_result, BaselineBlock, Format, ResultDocument,
};
use crowd_consensus::simulation::{simulate, SimulationConfig};
use crowd_consensus::{
    adjusted_rand_index, align_ensemble, compare, consensus, plurality_baseline, ConsensusConfig, Ensemble, Partition,
};

/// Consensus clustering for crowd-sourced partitions.
///
/// Exit codes: 0 success, 1 input error, 2 internal error.
/// Log verbosity is read from CONSENSUS_LOG (error, warn, info, debug).
#[derive(Debug, Parser)]
#[command(name = "crowdcons", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Compute the consensus partition of an ensemble file.
    Consensus(ConsensusArgs),
    /// Compare two label files with ARI, RI, MI and HI.
    Metrics(MetricsArgs),
    /// Run consensus on synthetic noisy crowds and report ARI to the truth.
    Simulate(SimulateArgs),
    /// Run the task collection HTTP service.
    Serve(ServeArgs),
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum InputFormat {
    Json,
    Csv,
}

#[derive(Debug, clap::Args)]
struct ConsensusArgs {
    /// Ensemble file.
    #[arg(long, value_name = "PATH")]
    input: PathBuf,
    #[arg(long, value_enum, default_value = "json")]
    format: InputFormat,
    /// Cluster count for CSV input; defaults to the largest label present.
    #[arg(long, value_name = "N")]
    clusters: Option<usize>,
    /// Power-iteration convergence threshold on the L1 change.
    #[arg(long, value_name = "R", default_value_t = ConsensusConfig::default().tolerance)]
    tol: f64,
    /// Power-iteration cap per object.
    #[arg(long = "max-iter", value_name = "N", default_value_t = ConsensusConfig::default().max_iterations)]
    max_iter: usize,
    /// Teleport probability mixed into every transition matrix, in [0, 1).
    #[arg(long, value_name = "R", default_value_t = ConsensusConfig::default().damping)]
    damping: f64,
    /// Lower clamp on raw worker weights before normalization.
    #[arg(long = "weight-floor", value_name = "R", default_value_t = ConsensusConfig::default().weight_floor)]
    weight_floor: f64,
    /// Ground-truth label file; adds a metrics block to the result.
    #[arg(long, value_name = "PATH")]
    truth: Option<PathBuf>,
    /// Also report the weighted plurality vote and mean ARI of both outputs.
    #[arg(long)]
    baseline: bool,
    /// Write the result here instead of standard output.
    #[arg(long, value_name = "PATH")]
    output: Option<PathBuf>,
}

#[derive(Debug, clap::Args)]
struct MetricsArgs {
    /// First label file (JSON array or separated integers).
    #[arg(long, value_name = "PATH")]
    a: PathBuf,
    /// Second label file.
    #[arg(long, value_name = "PATH")]
    b: PathBuf,
    /// Print a JSON object instead of a table.
    #[arg(long)]
    json: bool,
}

#[derive(Debug, clap::Args)]
struct SimulateArgs {
    #[arg(long, value_name = "N")]
    objects: usize,
    #[arg(long, value_name = "K")]
    clusters: usize,
    #[arg(long, value_name = "P")]
    workers: usize,
    /// Probability that a worker mislabels an object, in [0, 1].
    #[arg(long, value_name = "R")]
    noise: f64,
    #[arg(long, value_name = "S")]
    seed: u64,
    #[arg(long, value_name = "T", default_value_t = 1)]
    trials: usize,
}

#[derive(Debug, clap::Args)]
struct ServeArgs {
    /// Bind address; overrides COLLECT_ADDR.
    #[arg(long, value_name = "HOST:PORT")]
    addr: Option<SocketAddr>,
    /// Event log path; overrides COLLECT_DATA.
    #[arg(long, value_name = "PATH")]
    data: Option<PathBuf>,
    /// Directory of UI assets served at `/`; overrides COLLECT_UI.
    #[arg(long, value_name = "DIR")]
    ui: Option<PathBuf>,
}

#[derive(Debug)]
enum CliError {
    Input(String),
    Internal(String),
}

impl CliError {
    fn exit_code(&self) -> u8 {
        match self {
            CliError::Input(_) => 1,
            CliError::Internal(_) => 2,
        }
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CliError::Input(m) | CliError::Internal(m) => f.write_str(m),
        }
    }
}

type CliResult<T> = Result<T, CliError>;

fn input<E: fmt::Display>(context: impl fmt::Display) -> impl FnOnce(E) -> CliError {
    move |e| CliError::Input(format!("{context}: {e}"))
}

fn internal<E: fmt::Display>(context: impl fmt::Display) -> impl FnOnce(E) -> CliError {
    move |e| CliError::Internal(format!("{context}: {e}"))
}

fn read(path: &Path) -> CliResult<Vec<u8>> {
    std::fs::read(path).map_err(input(path.display()))
}

fn emit(bytes: &[u8], output: Option<&Path>) -> CliResult<()> {
    match output {
        Some(path) => std::fs::write(path, bytes).map_err(internal(path.display())),
        None => std::io::stdout().write_all(bytes).map_err(internal("stdout")),
    }
}

fn mean_ari(p: &Partition, e: &Ensemble) -> CliResult<f64> {
    let total = e
        .solutions()
        .iter()
        .map(|s| adjusted_rand_index(p, &s.labels))
        .sum::<crowd_consensus::Result<f64>>()
        .map_err(internal("mean ARI"))?;
    Ok(total / e.num_solutions() as f64)
}

fn run_consensus(args: &ConsensusArgs) -> CliResult<()> {
    let format = match args.format {
        InputFormat::Json => Format::Json,
        InputFormat::Csv => Format::Csv {
            num_clusters: args.clusters,
        },
    };
    let ensemble = parse_ensemble(&read(&args.input)?, format).map_err(input(args.input.display()))?;
    if args.clusters.is_some_and(|n| n != ensemble.num_clusters()) {
        return Err(CliError::Input(format!(
            "--clusters {} disagrees with the ensemble's {} clusters",
            args.clusters.unwrap_or_default(),
            ensemble.num_clusters()
        )));
    }
    let config = ConsensusConfig {
        tolerance: args.tol,
        max_iterations: args.max_iter,
        damping: args.damping,
        weight_floor: args.weight_floor,
    };
    config.validate().map_err(input("configuration"))?;
    log::info!(
        "{} workers, {} objects, {} clusters",
        ensemble.num_solutions(),
        ensemble.num_objects(),
        ensemble.num_clusters()
    );

    let result = consensus(&ensemble, &config).map_err(internal("consensus"))?;
    if let Some(y) = result.distributions.iter().position(|d| !d.converged) {
        log::warn!("power iteration hit the iteration cap at object {}", y + 1);
    }
    let mut doc = ResultDocument::from(&result);
    if let Some(path) = &args.truth {
        let truth = parse_labels(&read(path)?).map_err(input(path.display()))?;
        doc.metrics = Some(compare(&truth, &result.labels).map_err(input(path.display()))?);
    }
    if args.baseline {
        let (aligned, _) = align_ensemble(&ensemble).map_err(internal("alignment"))?;
        let plurality = plurality_baseline(&aligned, &result.weights);
        doc.baseline = Some(BaselineBlock {
            consensus_mean_ari: mean_ari(&result.labels, &ensemble)?,
            baseline_mean_ari: mean_ari(&plurality, &ensemble)?,
            labels: plurality.into_labels(),
        });
    }
    emit(&serialize_result(&doc), args.output.as_deref())
}

fn run_metrics(args: &MetricsArgs) -> CliResult<()> {
    let a = parse_labels(&read(&args.a)?).map_err(input(args.a.display()))?;
    let b = parse_labels(&read(&args.b)?).map_err(input(args.b.display()))?;
    let m = compare(&a, &b).map_err(input("comparison"))?;
    if args.json {
        return emit(&serialize_json(&m), None);
    }
    let name = args.b.file_name().map_or_else(|| "b".into(), |n| n.to_string_lossy().into_owned());
    let width = name.len().max(6);
    let table = format!(
        "{:<width$}  {:>7}  {:>7}  {:>7}  {:>7}\n{:<width$}  {:>7.4}  {:>7.4}  {:>7.4}  {:>7.4}\n",
        "Method", "ARI", "RI", "MI", "HI", name, m.ari, m.rand, m.mirkin, m.hubert
    );
    emit(table.as_bytes(), None)
}

fn run_simulate(args: &SimulateArgs) -> CliResult<()> {
    let sim = SimulationConfig {
        objects: args.objects,
        clusters: args.clusters,
        workers: args.workers,
        noise: args.noise,
        seed: args.seed,
        trials: args.trials,
    };
    let summary = simulate(&sim, &ConsensusConfig::default()).map_err(input("simulation"))?;
    emit(&serialize_json(&summary), None)
}

fn run_serve(args: &ServeArgs) -> CliResult<()> {
    let mut config = ServiceConfig::from_env().map_err(input("environment"))?;
    if let Some(addr) = args.addr {
        config.addr = addr;
    }
    if let Some(data) = &args.data {
        config.data = data.clone();
    }
    if let Some(ui) = &args.ui {
        config.ui_dir = Some(ui.clone());
    }
    let runtime = tokio::runtime::Runtime::new().map_err(internal("runtime"))?;
    runtime.block_on(crowd_collect::serve(config)).map_err(|e| match e {
        crowd_collect::CollectError::CorruptLog { .. } => CliError::Input(e.to_string()),
        other => CliError::Internal(other.to_string()),
    })
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::new().filter_or("CONSENSUS_LOG", "warn")).init();
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { ExitCode::from(1) } else { ExitCode::SUCCESS };
        }
    };
    let outcome = match &cli.command {
        Command::Consensus(args) => run_consensus(args),
        Command::Metrics(args) => run_metrics(args),
        Command::Simulate(args) => run_simulate(args),
        Command::Serve(args) => run_serve(args),
    };
    match outcome {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
