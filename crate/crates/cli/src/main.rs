//! `dea`: validate, screen, solve and rank market datasets from the shell.
//!
//! Exit codes: 0 success, 1 usage error, 2 data error, 3 solver failure.

mod commands;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{ArgAction, Args, Parser, Subcommand, ValueEnum};
use dea::efficiency::Frontier;
use dea::pipeline::SortOrder;

#[derive(Debug, Parser)]
#[command(name = "dea", version, about = "Output-oriented DEA market selection")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Load a dataset and schema, report preprocessing and DMU adequacy.
    Validate(ValidateArgs),
    /// Pearson screening of redundant same-role variables.
    Screen(ScreenArgs),
    /// Efficiency score, classification and peers for every DMU.
    Solve(SolveArgs),
    /// Efficient-market ranking for one product or a whole catalog.
    Rank(RankArgs),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Json,
    Csv,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum FrontierArg {
    Vrs,
    Crs,
}

impl From<FrontierArg> for Frontier {
    fn from(f: FrontierArg) -> Self {
        match f {
            FrontierArg::Vrs => Frontier::Vrs,
            FrontierArg::Crs => Frontier::Crs,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum OrderArg {
    Asc,
    Desc,
}

impl From<OrderArg> for SortOrder {
    fn from(o: OrderArg) -> Self {
        match o {
            OrderArg::Asc => SortOrder::Asc,
            OrderArg::Desc => SortOrder::Desc,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum MissingArg {
    Drop,
    Fail,
}

/// Flags shared by every subcommand.
#[derive(Debug, Args)]
pub struct Shared {
    /// Dataset CSV: `dmu_id` followed by the schema variables in order.
    #[arg(long)]
    pub dataset: Option<PathBuf>,
    /// Schema sidecar, one `id,role,name,units` line per variable.
    #[arg(long)]
    pub schema: Option<PathBuf>,
    /// Generate a synthetic market dataset from this seed instead of reading one.
    #[arg(long)]
    pub seed: Option<u64>,
    /// Number of countries in a generated dataset.
    #[arg(long, default_value_t = dea::fixture::DEFAULT_COUNTRIES)]
    pub countries: usize,
    /// Rows with empty cells: drop them (logged) or fail.
    #[arg(long, value_enum, default_value_t = MissingArg::Drop)]
    pub missing: MissingArg,
    /// Write machine output here instead of standard output.
    #[arg(long)]
    pub out: Option<PathBuf>,
    #[arg(long, value_enum, default_value_t = Format::Json)]
    pub format: Format,
    /// Worker threads for parallel solves (default: available parallelism).
    #[arg(long)]
    pub workers: Option<usize>,
    /// More diagnostics on standard error; repeat for debug and trace.
    #[arg(long, action = ArgAction::Count)]
    pub verbose: u8,
}

/// DEA model flags.
#[derive(Debug, Args)]
pub struct Model {
    #[arg(long, value_enum, default_value_t = FrontierArg::Vrs)]
    pub frontier: FrontierArg,
    /// A DMU is efficient when theta <= 1 + tolerance.
    #[arg(long, default_value_t = dea::efficiency::DEFAULT_CLASSIFICATION_TOLERANCE)]
    pub tolerance: f64,
    /// Run the second-stage slack maximization.
    #[arg(long)]
    pub slacks: bool,
}

#[derive(Debug, Args)]
pub struct ValidateArgs {
    #[command(flatten)]
    pub shared: Shared,
}

#[derive(Debug, Args)]
pub struct ScreenArgs {
    #[command(flatten)]
    pub shared: Shared,
    /// Same-role pairs with |r| at or above this are redundant.
    #[arg(long, default_value_t = dea::screening::DEFAULT_THRESHOLD)]
    pub threshold: f64,
    /// Never drop these variable ids (comma separated).
    #[arg(long, value_delimiter = ',')]
    pub protect: Vec<String>,
    /// Write the reduced dataset CSV here.
    #[arg(long)]
    pub reduced_dataset: Option<PathBuf>,
    /// Write the reduced schema here.
    #[arg(long)]
    pub reduced_schema: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct SolveArgs {
    #[command(flatten)]
    pub shared: Shared,
    #[command(flatten)]
    pub model: Model,
}

#[derive(Debug, Args)]
pub struct RankArgs {
    #[command(flatten)]
    pub shared: Shared,
    #[command(flatten)]
    pub model: Model,
    /// Number of markets to select.
    #[arg(long, default_value_t = 5)]
    pub k: usize,
    /// Sort efficient markets by import share.
    #[arg(long, value_enum, default_value_t = OrderArg::Desc)]
    pub order: OrderArg,
    /// Output variable holding import quantities.
    #[arg(long, default_value = dea::fixture::QUANTITY_VAR)]
    pub quantity_var: String,
    /// Screening threshold applied before solving.
    #[arg(long, default_value_t = dea::screening::DEFAULT_THRESHOLD, conflicts_with = "no_screening")]
    pub threshold: f64,
    /// Skip variable screening.
    #[arg(long)]
    pub no_screening: bool,
    /// Fail instead of warning when N misses an adequacy rule.
    #[arg(long)]
    pub strict: bool,
    /// HS code recorded for a single-product run.
    #[arg(long, default_value = "000000", conflicts_with = "batch")]
    pub product: String,
    /// Rank every product of the catalog.
    #[arg(long)]
    pub batch: bool,
    /// Product catalog CSV (`code,section,name`); defaults to the built-in 617 families.
    #[arg(long, requires = "batch")]
    pub catalog: Option<PathBuf>,
    /// Directory of `<hs_code>.csv` files for a batch.
    #[arg(long, requires = "batch", conflicts_with = "dataset")]
    pub dataset_dir: Option<PathBuf>,
    /// Write the one-row-per-product batch summary CSV here.
    #[arg(long, requires = "batch")]
    pub summary: Option<PathBuf>,
}

fn init_logging(verbose: u8) {
    let level = match verbose {
        0 => log::LevelFilter::Warn,
        1 => log::LevelFilter::Info,
        2 => log::LevelFilter::Debug,
        _ => log::LevelFilter::Trace,
    };
    env_logger::Builder::new()
        .filter_level(level)
        .format_timestamp(None)
        .parse_default_env()
        .init();
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    let shared = match &cli.command {
        Command::Validate(a) => &a.shared,
        Command::Screen(a) => &a.shared,
        Command::Solve(a) => &a.shared,
        Command::Rank(a) => &a.shared,
    };
    init_logging(shared.verbose);

    let result = commands::configure_workers(shared.workers).and_then(|()| match &cli.command {
        Command::Validate(a) => commands::validate(a),
        Command::Screen(a) => commands::screen(a),
        Command::Solve(a) => commands::solve(a),
        Command::Rank(a) => commands::rank(a),
    });
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
