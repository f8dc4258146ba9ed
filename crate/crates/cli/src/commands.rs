use std::fmt;
use std::fs::{self, File};
use std::io::Write;
use std::path::{Path, PathBuf};

use dea::data::{load_catalog, load_dataset, parse_schema, write_schema, DataError, Dataset, LoadOptions, MissingPolicy, ProductCatalog, VariableSpec};
use dea::efficiency::{solve_all, DeaError, DeaModelConfig};
use dea::fixture::{fixture_catalog, generate_fixture, market_schema};
use dea::pipeline::{format_number, run_batch, run_product, BatchReport, DatasetSource, DirectorySource, FixtureSource, PipelineConfig, PipelineError};
use dea::screening::{check_adequacy, screen_variables, ScreenOptions, ScreeningError};
use serde::Serialize;

use crate::{Format, MissingArg, Model, RankArgs, ScreenArgs, Shared, SolveArgs, ValidateArgs};

#[derive(Debug)]
pub struct CliError {
    code: u8,
    message: String,
}

impl CliError {
    fn usage(message: impl Into<String>) -> Self {
        Self { code: 1, message: message.into() }
    }

    fn data(message: impl fmt::Display) -> Self {
        Self { code: 2, message: message.to_string() }
    }

    fn solver(message: impl fmt::Display) -> Self {
        Self { code: 3, message: message.to_string() }
    }

    pub fn exit_code(&self) -> u8 {
        self.code
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.message)
    }
}

impl From<DataError> for CliError {
    fn from(e: DataError) -> Self {
        Self::data(e)
    }
}

impl From<ScreeningError> for CliError {
    fn from(e: ScreeningError) -> Self {
        Self::data(e)
    }
}

impl From<DeaError> for CliError {
    fn from(e: DeaError) -> Self {
        match e {
            DeaError::NonPositiveData { .. } => Self::data(e),
            DeaError::InvalidConfig(_) => Self::usage(e.to_string()),
            _ => Self::solver(e),
        }
    }
}

impl From<PipelineError> for CliError {
    fn from(e: PipelineError) -> Self {
        match e {
            PipelineError::Dea(e) => e.into(),
            PipelineError::NoEfficientDmus => Self::solver(e),
            _ => Self::data(e),
        }
    }
}

type Result<T> = std::result::Result<T, CliError>;

pub fn configure_workers(workers: Option<usize>) -> Result<()> {
    let Some(n) = workers else { return Ok(()) };
    if n == 0 {
        return Err(CliError::usage("--workers must be at least 1"));
    }
    rayon::ThreadPoolBuilder::new()
        .num_threads(n)
        .build_global()
        .map_err(|e| CliError::usage(e.to_string()))
}

fn existing(path: &Path, flag: &str) -> Result<File> {
    File::open(path).map_err(|e| CliError::usage(format!("{flag} {}: {e}", path.display())))
}

fn load_options(shared: &Shared) -> LoadOptions {
    LoadOptions {
        missing: match shared.missing {
            MissingArg::Drop => MissingPolicy::Drop,
            MissingArg::Fail => MissingPolicy::Fail,
        },
    }
}

/// Schema from `--schema`, or the built-in market schema when generating.
fn schema(shared: &Shared) -> Result<Vec<VariableSpec>> {
    match &shared.schema {
        Some(path) => Ok(parse_schema(existing(path, "--schema")?)?),
        None if shared.dataset.is_none() => Ok(market_schema()),
        None => Err(CliError::usage("--dataset needs --schema")),
    }
}

fn load(shared: &Shared) -> Result<Dataset> {
    match (&shared.dataset, shared.seed) {
        (Some(_), Some(_)) => Err(CliError::usage("--dataset and --seed are mutually exclusive")),
        (Some(path), None) => {
            let file = existing(path, "--dataset")?;
            Ok(load_dataset(file, &schema(shared)?, load_options(shared))?)
        }
        (None, Some(seed)) => Ok(generate_fixture(seed, shared.countries, &schema(shared)?)),
        (None, None) => Err(CliError::usage("give --dataset with --schema, or --seed")),
    }
}

fn write_file(path: &Path, text: &str) -> Result<()> {
    fs::write(path, text).map_err(|e| CliError::data(format!("{}: {e}", path.display())))
}

/// Machine output goes to `--out` or standard output, never both.
fn emit(shared: &Shared, text: &str) -> Result<()> {
    match &shared.out {
        Some(path) => write_file(path, text),
        None => {
            let mut stdout = std::io::stdout().lock();
            stdout
                .write_all(text.as_bytes())
                .and_then(|()| stdout.flush())
                .map_err(|e| CliError::data(format!("stdout: {e}")))
        }
    }
}

fn to_json<T: Serialize>(value: &T) -> String {
    let mut s = serde_json::to_string_pretty(value).expect("report serializes");
    s.push('\n');
    s
}

fn model_config(model: &Model) -> DeaModelConfig {
    DeaModelConfig {
        frontier: model.frontier.into(),
        classification_tolerance: model.tolerance,
        slacks: model.slacks,
        ..Default::default()
    }
}

#[derive(Serialize)]
struct ValidationReport<'a> {
    dmus: usize,
    inputs: Vec<&'a str>,
    outputs: Vec<&'a str>,
    strictly_positive: bool,
    log: &'a dea::data::PreprocessLog,
    adequacy: dea::screening::AdequacyReport,
    adequacy_summary: String,
}

pub fn validate(args: &ValidateArgs) -> Result<()> {
    let shared = &args.shared;
    let d = load(shared)?;
    let ids = |cols: Vec<usize>| cols.into_iter().map(|c| d.variables()[c].id.as_str()).collect::<Vec<_>>();
    let adequacy = check_adequacy(d.m(), d.s(), d.n());
    let report = ValidationReport {
        dmus: d.n(),
        inputs: ids(d.input_columns()),
        outputs: ids(d.output_columns()),
        strictly_positive: d.is_strictly_positive(),
        log: d.log(),
        adequacy,
        adequacy_summary: adequacy.summary(),
    };
    eprintln!(
        "{} DMUs, {} inputs, {} outputs, {} dropped rows; adequacy {}",
        d.n(),
        d.m(),
        d.s(),
        d.log().dropped_rows().count(),
        report.adequacy_summary
    );
    let text = match shared.format {
        Format::Json => to_json(&report),
        Format::Csv => {
            let mut out = String::from("field,value\n");
            out += &format!("dmus,{}\n", report.dmus);
            out += &format!("inputs,{}\n", report.inputs.join(";"));
            out += &format!("outputs,{}\n", report.outputs.join(";"));
            out += &format!("strictly_positive,{}\n", report.strictly_positive);
            out += &format!("dropped_rows,{}\n", d.log().dropped_rows().count());
            out += &format!("friedman_threshold,{}\n", adequacy.friedman_threshold());
            out += &format!("allen_threshold,{}\n", adequacy.allen_threshold());
            out += &format!("adequacy,{}\n", report.adequacy_summary);
            out
        }
    };
    emit(shared, &text)
}

pub fn screen(args: &ScreenArgs) -> Result<()> {
    let shared = &args.shared;
    let d = load(shared)?;
    let options = ScreenOptions {
        protected: args.protect.clone(),
    };
    let (report, reduced) = screen_variables(&d, args.threshold, &options)?;
    eprintln!(
        "kept {} of {} variables; {} flagged pairs",
        report.kept.len(),
        d.variables().len(),
        report.flagged.len()
    );
    for dropped in &report.dropped {
        eprintln!("dropped `{}`: {}", dropped.id, dropped.reason);
    }
    if let Some(path) = &args.reduced_dataset {
        write_file(path, &reduced.to_csv_string())?;
    }
    if let Some(path) = &args.reduced_schema {
        let mut buf = Vec::new();
        write_schema(reduced.variables(), &mut buf)?;
        write_file(path, &String::from_utf8(buf).expect("schema is utf-8"))?;
    }
    let text = match shared.format {
        Format::Json => to_json(&report),
        Format::Csv => {
            let mut out = String::from("variable,role,status,reason\n");
            for v in d.variables() {
                let (status, reason) = match report.dropped.iter().find(|x| x.id == v.id) {
                    Some(x) => ("dropped", x.reason.replace(',', ";")),
                    None => ("kept", String::new()),
                };
                out += &format!("{},{},{status},{reason}\n", v.id, v.role);
            }
            out
        }
    };
    emit(shared, &text)
}

pub fn solve(args: &SolveArgs) -> Result<()> {
    let shared = &args.shared;
    let d = load(shared)?;
    let cfg = model_config(&args.model);
    let solutions = solve_all(&d, &cfg)?;
    let efficient = solutions.iter().filter(|s| s.efficient).count();
    eprintln!("{efficient} of {} DMUs efficient ({:?})", solutions.len(), cfg.frontier);
    let text = match shared.format {
        Format::Json => to_json(&solutions),
        Format::Csv => {
            let mut out = String::from("dmu_id,theta,efficient,peers");
            if cfg.slacks {
                out += ",slack_total,strongly_efficient";
            }
            out.push('\n');
            for s in &solutions {
                let peers: Vec<String> = s
                    .peers
                    .iter()
                    .map(|p| format!("{}:{}", d.dmu_ids()[p.index], format_number(p.weight)))
                    .collect();
                out += &format!("{},{},{},{}", s.dmu_id, format_number(s.theta), s.efficient, peers.join(";"));
                if let Some(sl) = &s.slacks {
                    out += &format!(",{},{}", format_number(sl.total), sl.strongly_efficient);
                }
                out.push('\n');
            }
            out
        }
    };
    emit(shared, &text)
}

fn pipeline_config(args: &RankArgs) -> PipelineConfig {
    PipelineConfig {
        k: args.k,
        order: args.order.into(),
        quantity_var: args.quantity_var.clone(),
        model: model_config(&args.model),
        screening_threshold: (!args.no_screening).then_some(args.threshold),
        strict_adequacy: args.strict,
        ..Default::default()
    }
}

fn catalog(path: Option<&PathBuf>) -> Result<ProductCatalog> {
    match path {
        Some(p) => Ok(load_catalog(existing(p, "--catalog")?)?),
        None => Ok(fixture_catalog()),
    }
}

pub fn rank(args: &RankArgs) -> Result<()> {
    let shared = &args.shared;
    let cfg = pipeline_config(args);
    if cfg.k == 0 {
        return Err(CliError::usage("--k must be at least 1"));
    }
    if !args.batch {
        let d = load(shared)?;
        let mut ranking = run_product(&args.product, &d, &cfg)?;
        ranking.metadata.seed = shared.seed;
        let ids: Vec<&str> = ranking.selection.iter().map(|m| m.country.as_str()).collect();
        eprintln!("{} efficient; selected [{}]", ranking.efficient.len(), ids.join(", "));
        let text = match shared.format {
            Format::Json => to_json(&ranking),
            Format::Csv => BatchReport {
                rankings: vec![ranking],
                failures: Vec::new(),
            }
            .to_csv(),
        };
        return emit(shared, &text);
    }

    let catalog = catalog(args.catalog.as_ref())?;
    let source: Box<dyn DatasetSource> = match (&args.dataset_dir, shared.seed) {
        (Some(_), Some(_)) => return Err(CliError::usage("--dataset-dir and --seed are mutually exclusive")),
        (Some(dir), None) => {
            if !dir.is_dir() {
                return Err(CliError::usage(format!("--dataset-dir {}: not a directory", dir.display())));
            }
            let schema = schema(shared)?;
            Box::new(DirectorySource {
                dir: dir.clone(),
                schema,
                options: load_options(shared),
            })
        }
        (None, Some(seed)) => Box::new(FixtureSource {
            seed,
            n_countries: shared.countries,
            schema: schema(shared)?,
        }),
        (None, None) => return Err(CliError::usage("--batch needs --dataset-dir with --schema, or --seed")),
    };
    let report = run_batch(&catalog, source.as_ref(), &cfg);
    eprintln!("{} products ranked, {} failed", report.rankings.len(), report.failures.len());
    if let Some(path) = &args.summary {
        write_file(path, &report.summary_csv(&catalog))?;
    }
    let text = match shared.format {
        Format::Json => {
            let mut s = report.to_json();
            s.push('\n');
            s
        }
        Format::Csv => report.to_csv(),
    };
    emit(shared, &text)?;
    if report.rankings.is_empty() && !report.failures.is_empty() {
        return Err(CliError::data("every product failed"));
    }
    Ok(())
}
