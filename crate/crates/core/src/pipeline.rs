//! Per-product market selection: displace to positive, check adequacy,
//! screen variables, solve every country under output-oriented BCC, keep the
//! efficient ones and rank them by their share of world imports.

use std::fmt::Write as _;
use std::fs::File;
use std::path::PathBuf;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::data::{displace_to_positive, load_dataset, CatalogEntry, DataError, Dataset, LoadOptions, ProductCatalog, VariableSpec};
use crate::efficiency::{solve_all, DeaError, DeaModelConfig, Frontier};
use crate::fixture::{generate_fixture, product_seed, QUANTITY_VAR};
use crate::screening::{check_adequacy, screen_variables, AdequacyReport, ScreenOptions, ScreeningError, DEFAULT_THRESHOLD};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SortOrder {
    Asc,
    #[default]
    Desc,
}

impl std::str::FromStr for SortOrder {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.to_ascii_lowercase().as_str() {
            "asc" | "ascending" => Ok(SortOrder::Asc),
            "desc" | "descending" => Ok(SortOrder::Desc),
            other => Err(format!("unknown order `{other}` (expected asc or desc)")),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PipelineConfig {
    pub k: usize,
    /// Share order of the selection. Descending puts the largest efficient
    /// markets first.
    pub order: SortOrder,
    pub quantity_var: String,
    pub model: DeaModelConfig,
    /// `None` skips correlation screening.
    pub screening_threshold: Option<f64>,
    /// Fail a product whose dataset misses either adequacy rule.
    pub strict_adequacy: bool,
    pub displacement_minimum: f64,
    /// Exporting country; carried as a label only.
    pub origin: String,
}

impl Default for PipelineConfig {
    fn default() -> Self {
        Self {
            k: 5,
            order: SortOrder::Desc,
            quantity_var: QUANTITY_VAR.to_string(),
            model: DeaModelConfig::vrs(),
            screening_threshold: Some(DEFAULT_THRESHOLD),
            strict_adequacy: false,
            displacement_minimum: 1.0,
            origin: "ES".to_string(),
        }
    }
}

#[derive(Debug, Error)]
pub enum PipelineError {
    #[error("quantity variable `{0}` is not in the dataset")]
    UnknownQuantityVariable(String),
    #[error("negative import quantity {value} for `{country}`")]
    NegativeQuantity { country: String, value: f64 },
    #[error("world import total is zero; shares are undefined")]
    ZeroWorldTotal,
    #[error("no efficient DMUs found (internal error: positive data always has one)")]
    NoEfficientDmus,
    #[error("dataset fails the DMU adequacy rules: {0}")]
    Inadequate(String),
    #[error(transparent)]
    Dea(#[from] DeaError),
    #[error(transparent)]
    Screening(#[from] ScreeningError),
    #[error(transparent)]
    Data(#[from] DataError),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MarketEntry {
    pub country: String,
    pub theta: f64,
    pub share: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RankedMarket {
    pub rank: usize,
    pub country: String,
    pub theta: f64,
    pub share: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RunMetadata {
    pub origin: String,
    pub frontier: Frontier,
    pub classification_tolerance: f64,
    pub seed: Option<u64>,
    pub n_dmus: usize,
    pub variables: Vec<String>,
    pub dropped_variables: Vec<String>,
    pub adequacy: AdequacyReport,
    pub warnings: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MarketRanking {
    pub product_code: String,
    pub quantity_var: String,
    pub order: SortOrder,
    pub k: usize,
    /// Every efficient country, in selection order.
    pub efficient: Vec<MarketEntry>,
    /// The first `min(k, efficient.len())` entries of `efficient`.
    pub selection: Vec<RankedMarket>,
    pub metadata: RunMetadata,
}

/// Fixed ten-decimal rendering with trailing zeros trimmed, used for CSV
/// output so solver round-off below 1e-10 does not show.
pub fn format_number(v: f64) -> String {
    let s = format!("{v:.10}");
    let s = s.trim_end_matches('0').trim_end_matches('.');
    if s == "-0" {
        "0".to_string()
    } else {
        s.to_string()
    }
}

/// `quantity / sum(world)`.
pub fn import_share(quantity: f64, world: &[f64]) -> Result<f64, PipelineError> {
    let total: f64 = world.iter().sum();
    if total <= 0.0 {
        return Err(PipelineError::ZeroWorldTotal);
    }
    Ok(quantity / total)
}

/// Share of every country in `quantities`; the denominator is their sum.
pub fn import_shares(countries: &[String], quantities: &[f64]) -> Result<Vec<f64>, PipelineError> {
    if let Some((c, &q)) = countries.iter().zip(quantities).find(|(_, q)| **q < 0.0) {
        return Err(PipelineError::NegativeQuantity {
            country: c.clone(),
            value: q,
        });
    }
    quantities.iter().map(|&q| import_share(q, quantities)).collect()
}

/// Orders markets by share in `order`, breaking ties by ascending id.
fn sort_markets(markets: &mut [MarketEntry], order: SortOrder) {
    markets.sort_by(|a, b| {
        let by_share = match order {
            SortOrder::Asc => a.share.total_cmp(&b.share),
            SortOrder::Desc => b.share.total_cmp(&a.share),
        };
        by_share.then_with(|| a.country.cmp(&b.country))
    });
}

/// Solves all DMUs of a prepared dataset and ranks the efficient ones.
///
/// Shares use the quantity column with any positivity displacement removed,
/// over every country in the dataset.
pub fn rank_markets(product_code: &str, dataset: &Dataset, config: &PipelineConfig) -> Result<MarketRanking, PipelineError> {
    let col = dataset
        .column_index(&config.quantity_var)
        .ok_or_else(|| PipelineError::UnknownQuantityVariable(config.quantity_var.clone()))?;
    let quantities = dataset.raw_column(col);
    let shares = import_shares(dataset.dmu_ids(), &quantities)?;

    let solutions = solve_all(dataset, &config.model)?;
    let mut efficient: Vec<MarketEntry> = solutions
        .iter()
        .filter(|s| s.efficient)
        .map(|s| MarketEntry {
            country: s.dmu_id.clone(),
            theta: s.theta,
            share: shares[s.index],
        })
        .collect();
    if efficient.is_empty() {
        return Err(PipelineError::NoEfficientDmus);
    }
    sort_markets(&mut efficient, config.order);
    let selection = efficient
        .iter()
        .take(config.k)
        .enumerate()
        .map(|(i, e)| RankedMarket {
            rank: i + 1,
            country: e.country.clone(),
            theta: e.theta,
            share: e.share,
        })
        .collect();

    Ok(MarketRanking {
        product_code: product_code.to_string(),
        quantity_var: config.quantity_var.clone(),
        order: config.order,
        k: config.k,
        efficient,
        selection,
        metadata: RunMetadata {
            origin: config.origin.clone(),
            frontier: config.model.frontier,
            classification_tolerance: config.model.classification_tolerance,
            seed: None,
            n_dmus: dataset.n(),
            variables: dataset.variables().iter().map(|v| v.id.clone()).collect(),
            dropped_variables: Vec::new(),
            adequacy: check_adequacy(dataset.m(), dataset.s(), dataset.n()),
            warnings: Vec::new(),
        },
    })
}

/// Full per-product procedure on a raw (unprocessed) dataset.
pub fn run_product(product_code: &str, raw: &Dataset, config: &PipelineConfig) -> Result<MarketRanking, PipelineError> {
    let mut warnings = Vec::new();
    let dataset = displace_to_positive(raw, config.displacement_minimum);
    for id in dataset.log().displaced_outputs() {
        warnings.push(format!("output `{id}` was displaced to be positive; scores are not translation invariant in outputs"));
    }

    let (dataset, dropped) = match config.screening_threshold {
        Some(t) => {
            let opts = ScreenOptions {
                protected: vec![config.quantity_var.clone()],
            };
            let (report, reduced) = screen_variables(&dataset, t, &opts)?;
            warnings.extend(report.warnings);
            (reduced, report.dropped.into_iter().map(|d| d.id).collect())
        }
        None => (dataset, Vec::new()),
    };

    let adequacy = check_adequacy(dataset.m(), dataset.s(), dataset.n());
    if !adequacy.passed() {
        if config.strict_adequacy {
            return Err(PipelineError::Inadequate(adequacy.summary()));
        }
        let w = format!("N = {} misses an adequacy rule ({})", dataset.n(), adequacy.summary());
        log::warn!("{product_code}: {w}");
        warnings.push(w);
    }

    let mut ranking = rank_markets(product_code, &dataset, config)?;
    ranking.metadata.dropped_variables = dropped;
    ranking.metadata.warnings = warnings;
    Ok(ranking)
}

/// Where a product's dataset comes from.
pub trait DatasetSource: Sync {
    /// Returns the raw dataset and, for generated data, the seed used.
    fn load(&self, product: &CatalogEntry) -> Result<(Dataset, Option<u64>), PipelineError>;
}

/// Seeded synthetic datasets, one seed per product derived from the batch seed.
#[derive(Debug, Clone)]
pub struct FixtureSource {
    pub seed: u64,
    pub n_countries: usize,
    pub schema: Vec<VariableSpec>,
}

impl DatasetSource for FixtureSource {
    fn load(&self, product: &CatalogEntry) -> Result<(Dataset, Option<u64>), PipelineError> {
        let seed = product_seed(self.seed, &product.code);
        Ok((generate_fixture(seed, self.n_countries, &self.schema), Some(seed)))
    }
}

/// `<dir>/<hs_code>.csv` files sharing one schema.
#[derive(Debug, Clone)]
pub struct DirectorySource {
    pub dir: PathBuf,
    pub schema: Vec<VariableSpec>,
    pub options: LoadOptions,
}

impl DatasetSource for DirectorySource {
    fn load(&self, product: &CatalogEntry) -> Result<(Dataset, Option<u64>), PipelineError> {
        let path = self.dir.join(format!("{}.csv", product.code));
        let file = File::open(&path).map_err(DataError::from)?;
        Ok((load_dataset(file, &self.schema, self.options)?, None))
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct ProductFailure {
    pub product_code: String,
    pub error: String,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BatchReport {
    pub rankings: Vec<MarketRanking>,
    pub failures: Vec<ProductFailure>,
}

impl BatchReport {
    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serializes")
    }

    /// Flat `product_code,rank,country,theta,share` rows for every selection.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("product_code,rank,country,theta,share\n");
        for r in &self.rankings {
            for m in &r.selection {
                let _ = writeln!(
                    out,
                    "{},{},{},{},{}",
                    r.product_code,
                    m.rank,
                    m.country,
                    format_number(m.theta),
                    format_number(m.share)
                );
            }
        }
        out
    }

    /// One row per catalog product: efficient count, selected ids or the error.
    pub fn summary_csv(&self, catalog: &ProductCatalog) -> String {
        let mut out = String::from("product_code,status,efficient,selected\n");
        for e in catalog.entries() {
            if let Some(r) = self.rankings.iter().find(|r| r.product_code == e.code) {
                let ids: Vec<&str> = r.selection.iter().map(|m| m.country.as_str()).collect();
                let _ = writeln!(out, "{},ok,{},{}", e.code, r.efficient.len(), ids.join(";"));
            } else if self.failures.iter().any(|f| f.product_code == e.code) {
                let _ = writeln!(out, "{},failed,,", e.code);
            }
        }
        out
    }
}

fn run_entry(entry: &CatalogEntry, source: &dyn DatasetSource, config: &PipelineConfig) -> Result<MarketRanking, PipelineError> {
    let (raw, seed) = source.load(entry)?;
    let mut ranking = run_product(&entry.code, &raw, config)?;
    ranking.metadata.seed = seed;
    Ok(ranking)
}

/// Runs every catalog product; failures are collected, never fatal.
///
/// Products run in parallel on the current rayon pool when the `parallel`
/// feature is on; the report is always in catalog order.
pub fn run_batch(catalog: &ProductCatalog, source: &dyn DatasetSource, config: &PipelineConfig) -> BatchReport {
    let run = |e: &CatalogEntry| (e.code.clone(), run_entry(e, source, config));
    #[cfg(feature = "parallel")]
    let results: Vec<(String, Result<MarketRanking, PipelineError>)> = {
        use rayon::prelude::*;
        catalog.entries().par_iter().map(run).collect()
    };
    #[cfg(not(feature = "parallel"))]
    let results: Vec<(String, Result<MarketRanking, PipelineError>)> = catalog.entries().iter().map(run).collect();

    let mut report = BatchReport {
        rankings: Vec::new(),
        failures: Vec::new(),
    };
    for (code, r) in results {
        match r {
            Ok(ranking) => report.rankings.push(ranking),
            Err(e) => {
                log::warn!("product {code} failed: {e}");
                report.failures.push(ProductFailure {
                    product_code: code,
                    error: e.to_string(),
                });
            }
        }
    }
    report
}
