use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use ocl_core::{ErrorClass, InitMode, MissingPolicy, OrderMode, OrdinalPolicy, SweepAxis};

mod commands;
mod run;

use run::{CliError, Method};

#[derive(Parser)]
#[command(
    name = "ocl",
    version,
    about = "Order-learning clustering for categorical data"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Fit one method over several seeds and write a run report.
    Fit(FitArgs),
    /// Compare Hamming, semantic and random orders under a fixed-order fit.
    DemoOrders(DemoArgs),
    /// Run every dataset × method pair listed in a suite file.
    Bench(BenchArgs),
    /// Time fits on synthetic data along one size axis.
    BenchEfficiency(EfficiencyArgs),
    /// Run the full method and each of its ablations on one dataset.
    Ablate(AblateArgs),
    /// Check the fast paths against brute-force references.
    Verify(VerifyArgs),
    /// Fit once and write the sample × sample distance matrix.
    ExportDistances(ExportArgs),
}

#[derive(Args, Clone)]
struct DataArgs {
    /// CSV file with a header row.
    #[arg(long)]
    data: PathBuf,
    /// Column schema; defaults to the data path with a .toml extension.
    #[arg(long)]
    schema: Option<PathBuf>,
    /// Rows with missing cells are dropped unless this is `error`.
    #[arg(long, value_enum, default_value_t = MissingArg::Drop)]
    missing: MissingArg,
}

#[derive(Args, Clone)]
struct OutArgs {
    /// Output directory.
    #[arg(long, env = "OCL_OUTPUT_DIR", default_value = "ocl-out")]
    out: PathBuf,
}

#[derive(Args, Clone)]
struct FitOptions {
    /// Number of clusters; defaults to the number of label classes.
    #[arg(long)]
    k: Option<usize>,
    /// Seeds are base-seed, base-seed + 1, ...
    #[arg(long, default_value_t = 10)]
    runs: usize,
    #[arg(long, default_value_t = 0)]
    base_seed: u64,
    #[arg(long, value_enum, default_value_t = InitArg::Kmodes)]
    init: InitArg,
    #[arg(long, value_enum, default_value_t = OrdinalArg::LearnAll)]
    ordinal_policy: OrdinalArg,
    #[arg(long, default_value_t = 50)]
    max_outer: usize,
    #[arg(long, default_value_t = 200)]
    max_inner: usize,
}

#[derive(Args)]
struct FitArgs {
    #[command(flatten)]
    data: DataArgs,
    #[command(flatten)]
    out: OutArgs,
    #[command(flatten)]
    fit: FitOptions,
    #[arg(long, value_enum, default_value_t = Method::Ocl)]
    method: Method,
    /// Order source for the `ocl` method.
    #[arg(long, value_enum, default_value_t = OrderArg::Learned)]
    order_mode: OrderArg,
    /// Skip the per-run trace CSV files.
    #[arg(long)]
    no_trace: bool,
}

#[derive(Args)]
struct DemoArgs {
    #[command(flatten)]
    data: DataArgs,
    #[command(flatten)]
    out: OutArgs,
    #[command(flatten)]
    fit: FitOptions,
    /// Random-order draws.
    #[arg(long, default_value_t = 1000)]
    draws: usize,
    /// Seeds for the Hamming and semantic baselines.
    #[arg(long, default_value_t = 100)]
    baseline_runs: usize,
}

#[derive(Args)]
struct BenchArgs {
    /// Suite file (TOML).
    suite: PathBuf,
    #[command(flatten)]
    out: OutArgs,
}

#[derive(Args)]
struct EfficiencyArgs {
    #[command(flatten)]
    out: OutArgs,
    /// Sweep file (TOML); the flags below are ignored when given.
    #[arg(long)]
    spec: Option<PathBuf>,
    #[arg(long, value_enum, default_value_t = AxisArg::N)]
    axis: AxisArg,
    /// Comma-separated values for the swept axis.
    #[arg(long, value_delimiter = ',', default_value = "10000,20000,40000,80000")]
    values: Vec<usize>,
    #[arg(long, default_value_t = 2000)]
    n: usize,
    #[arg(long, default_value_t = 20)]
    s: usize,
    #[arg(long, default_value_t = 5)]
    k: usize,
    #[arg(long, default_value_t = 5)]
    values_per_attribute: usize,
    #[arg(long, default_value_t = 1)]
    repeats: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
}

#[derive(Args)]
struct AblateArgs {
    #[command(flatten)]
    data: DataArgs,
    #[command(flatten)]
    out: OutArgs,
    #[command(flatten)]
    fit: FitOptions,
}

#[derive(Args)]
struct VerifyArgs {
    #[arg(long, default_value_t = 200)]
    instances: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
}

#[derive(Args)]
struct ExportArgs {
    #[command(flatten)]
    data: DataArgs,
    #[command(flatten)]
    out: OutArgs,
    #[arg(long)]
    k: Option<usize>,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Write Hamming distances instead of fitting orders.
    #[arg(long)]
    hamming: bool,
}

#[derive(Clone, Copy, ValueEnum)]
enum MissingArg {
    Drop,
    Error,
}

#[derive(Clone, Copy, ValueEnum)]
enum InitArg {
    Kmodes,
    Random,
}

#[derive(Clone, Copy, ValueEnum)]
enum OrdinalArg {
    LearnAll,
    PreserveOrdinal,
    PreserveAll,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum OrderArg {
    Learned,
    Semantic,
    Random,
    Hamming,
}

#[derive(Clone, Copy, ValueEnum)]
enum AxisArg {
    N,
    S,
    K,
}

impl From<MissingArg> for MissingPolicy {
    fn from(a: MissingArg) -> Self {
        match a {
            MissingArg::Drop => MissingPolicy::DropRow,
            MissingArg::Error => MissingPolicy::Error,
        }
    }
}

impl From<InitArg> for InitMode {
    fn from(a: InitArg) -> Self {
        match a {
            InitArg::Kmodes => InitMode::KmodesOnce,
            InitArg::Random => InitMode::RandomPartition,
        }
    }
}

impl From<OrdinalArg> for OrdinalPolicy {
    fn from(a: OrdinalArg) -> Self {
        match a {
            OrdinalArg::LearnAll => OrdinalPolicy::LearnAll,
            OrdinalArg::PreserveOrdinal => OrdinalPolicy::PreserveOrdinal,
            OrdinalArg::PreserveAll => OrdinalPolicy::PreserveAll,
        }
    }
}

impl From<OrderArg> for OrderMode {
    fn from(a: OrderArg) -> Self {
        match a {
            OrderArg::Learned => OrderMode::Learned,
            OrderArg::Semantic => OrderMode::Semantic,
            OrderArg::Random => OrderMode::Random,
            OrderArg::Hamming => OrderMode::Hamming,
        }
    }
}

impl From<AxisArg> for SweepAxis {
    fn from(a: AxisArg) -> Self {
        match a {
            AxisArg::N => SweepAxis::N,
            AxisArg::S => SweepAxis::S,
            AxisArg::K => SweepAxis::K,
        }
    }
}

fn exit_code(err: &anyhow::Error) -> u8 {
    let class = err.chain().find_map(|e| {
        if let Some(e) = e.downcast_ref::<ocl_core::Error>() {
            return Some(e.class());
        }
        e.downcast_ref::<CliError>().map(CliError::class)
    });
    match class {
        Some(ErrorClass::Config) => 2,
        Some(ErrorClass::Data) => 3,
        _ => 4,
    }
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Fit(a) => commands::fit(a),
        Command::DemoOrders(a) => commands::demo_orders(a),
        Command::Bench(a) => commands::bench(a),
        Command::BenchEfficiency(a) => commands::bench_efficiency(a),
        Command::Ablate(a) => commands::ablate(a),
        Command::Verify(a) => commands::verify(a),
        Command::ExportDistances(a) => commands::export_distances(a),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(exit_code(&e))
        }
    }
}
