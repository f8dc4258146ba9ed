//! Output-oriented Data Envelopment Analysis and import-share market
//! selection.
//!
//! - [`lp`]: dense two-phase simplex used by every model solve.
//! - [`efficiency`]: BCC/CCR envelopment and multiplier models, slack stage.
//! - [`data`]: dataset schema, CSV ingestion, positivity displacement, HS catalog.
//! - [`screening`]: Pearson redundancy screening and DMU adequacy rules.
//! - [`pipeline`]: per-product ranking of efficient markets and batch runs.
//! - [`fixture`]: seeded synthetic datasets and the fixture catalog.

pub mod data;
pub mod efficiency;
pub mod fixture;
pub mod lp;
pub mod pipeline;
pub mod screening;

pub use data::{Dataset, ProductCatalog, Role, VariableSpec};
pub use efficiency::{DeaModelConfig, DeaSolution, Frontier, MultiplierSolution};
pub use lp::{LpProblem, LpSolution, LpStatus, SolverTolerances};
pub use pipeline::{format_number, BatchReport, MarketRanking, PipelineConfig, SortOrder};
