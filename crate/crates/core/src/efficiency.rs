//! Output-oriented DEA: envelopment and multiplier forms of the BCC (VRS)
//! and CCR (CRS) models, plus the optional second-stage slack program.
//!
//! Scores follow the output-expansion convention: `theta >= 1`, with 1 on the
//! frontier and larger values meaning more inefficient.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::data::Dataset;
use crate::lp::{solve_lp, LpError, LpProblem, LpStatus, Relation, SolverTolerances};

/// Default cutoff: a DMU is efficient when `theta <= 1 + 1e-6`.
pub const DEFAULT_CLASSIFICATION_TOLERANCE: f64 = 1e-6;

/// Intensity weights at or below this are numerical dust, not peers.
pub const PEER_TOLERANCE: f64 = 1e-7;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Frontier {
    /// Variable returns to scale (BCC): adds `sum(lambda) = 1`.
    #[default]
    Vrs,
    /// Constant returns to scale (CCR).
    Crs,
}

impl std::str::FromStr for Frontier {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.to_ascii_lowercase().as_str() {
            "vrs" | "bcc" => Ok(Frontier::Vrs),
            "crs" | "ccr" => Ok(Frontier::Crs),
            other => Err(format!("unknown frontier `{other}` (expected vrs or crs)")),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DeaModelConfig {
    pub frontier: Frontier,
    pub classification_tolerance: f64,
    /// Run the second-stage slack program for every DMU.
    pub slacks: bool,
    pub solver: SolverTolerances,
}

impl Default for DeaModelConfig {
    fn default() -> Self {
        Self {
            frontier: Frontier::Vrs,
            classification_tolerance: DEFAULT_CLASSIFICATION_TOLERANCE,
            slacks: false,
            solver: SolverTolerances::default(),
        }
    }
}

impl DeaModelConfig {
    pub fn vrs() -> Self {
        Self::default()
    }

    pub fn crs() -> Self {
        Self {
            frontier: Frontier::Crs,
            ..Self::default()
        }
    }

    pub fn validate(&self) -> Result<(), DeaError> {
        let t = self.classification_tolerance;
        if t.is_nan() || t <= 0.0 || t.is_infinite() {
            return Err(DeaError::InvalidConfig(format!(
                "classification tolerance must be positive, got {}",
                self.classification_tolerance
            )));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Peer {
    pub index: usize,
    pub weight: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SlackReport {
    /// Unused input per input variable, `X(i,k) − sum_j lambda_j X(i,j)`.
    pub input_slacks: Vec<f64>,
    /// Output shortfall beyond the radial expansion, per output variable.
    pub output_slacks: Vec<f64>,
    pub lambdas: Vec<f64>,
    pub total: f64,
    pub strongly_efficient: bool,
}

/// Envelopment-form result for one DMU.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DeaSolution {
    pub index: usize,
    pub dmu_id: String,
    pub theta: f64,
    pub lambdas: Vec<f64>,
    pub peers: Vec<Peer>,
    pub efficient: bool,
    pub status: LpStatus,
    pub slacks: Option<SlackReport>,
}

/// Multiplier-form (dual) result for one DMU.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MultiplierSolution {
    pub index: usize,
    /// Weight per input, `V(i) >= 0`.
    pub input_weights: Vec<f64>,
    /// Weight per output, `U(r) >= 0`.
    pub output_weights: Vec<f64>,
    /// Free variable of the convexity row; `None` under CRS.
    pub omega: Option<f64>,
    /// `(V·X_k + omega) / (U·Y_k)`, equal to the envelopment theta at optimum.
    pub ratio: f64,
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum DeaError {
    #[error("DMU index {index} out of range for {n} DMUs")]
    IndexOutOfRange { index: usize, n: usize },
    #[error("non-positive value {value} for DMU `{dmu_id}`, variable `{var_id}`")]
    NonPositiveData { dmu_id: String, var_id: String, value: f64 },
    #[error("invalid model config: {0}")]
    InvalidConfig(String),
    #[error("solver failed for DMU `{dmu_id}`: {reason}")]
    SolverFailure { dmu_id: String, reason: String },
    #[error("{} of {total} DMUs failed to solve", failures.len())]
    Incomplete {
        total: usize,
        failures: Vec<DeaError>,
        partial: Vec<Option<DeaSolution>>,
    },
}

impl DeaError {
    fn solver(dataset: &Dataset, k: usize, reason: impl ToString) -> Self {
        DeaError::SolverFailure {
            dmu_id: dataset.dmu_ids()[k].clone(),
            reason: reason.to_string(),
        }
    }
}

fn lp_failure(dataset: &Dataset, k: usize, err: LpError) -> DeaError {
    DeaError::solver(dataset, k, err)
}

/// Input/output matrices of a dataset after the positivity check.
fn check_positive(dataset: &Dataset) -> Result<(), DeaError> {
    for (row, id) in dataset.values().iter().zip(dataset.dmu_ids()) {
        if let Some(j) = row.iter().position(|&v| v <= 0.0) {
            return Err(DeaError::NonPositiveData {
                dmu_id: id.clone(),
                var_id: dataset.variables()[j].id.clone(),
                value: row[j],
            });
        }
    }
    Ok(())
}

struct Frame {
    x: Vec<Vec<f64>>,
    y: Vec<Vec<f64>>,
    n: usize,
}

impl Frame {
    fn new(dataset: &Dataset, k: usize) -> Result<Self, DeaError> {
        let n = dataset.n();
        if k >= n {
            return Err(DeaError::IndexOutOfRange { index: k, n });
        }
        check_positive(dataset)?;
        Ok(Self {
            x: dataset.inputs(),
            y: dataset.outputs(),
            n,
        })
    }
}

/// Builds the output-oriented envelopment LP for DMU `k`.
///
/// Variables are `lambda_1..lambda_N` followed by `theta`; rows are the S
/// output rows, the M input rows and, for VRS, the convexity row.
pub fn build_envelopment_lp(dataset: &Dataset, k: usize, config: &DeaModelConfig) -> Result<LpProblem, DeaError> {
    let frame = Frame::new(dataset, k)?;
    Ok(envelopment_lp(&frame, k, config.frontier))
}

fn envelopment_lp(frame: &Frame, k: usize, frontier: Frontier) -> LpProblem {
    let n = frame.n;
    let mut objective = vec![0.0; n + 1];
    objective[n] = 1.0;
    let mut lp = LpProblem::maximize(objective);
    // sum_j lambda_j Y(r,j) − theta Y(r,k) >= 0
    for yr in &frame.y {
        let mut row = yr.clone();
        row.push(-yr[k]);
        lp.constrain(row, Relation::Ge, 0.0);
    }
    // sum_j lambda_j X(i,j) <= X(i,k)
    for xi in &frame.x {
        let mut row = xi.clone();
        row.push(0.0);
        lp.constrain(row, Relation::Le, xi[k]);
    }
    if frontier == Frontier::Vrs {
        let mut row = vec![1.0; n];
        row.push(0.0);
        lp.constrain(row, Relation::Eq, 1.0);
    }
    lp
}

/// Solves the envelopment model for DMU `k` and classifies it.
pub fn solve_dmu(dataset: &Dataset, k: usize, config: &DeaModelConfig) -> Result<DeaSolution, DeaError> {
    config.validate()?;
    let frame = Frame::new(dataset, k)?;
    let lp = envelopment_lp(&frame, k, config.frontier);
    let sol = solve_lp(&lp, &config.solver).map_err(|e| lp_failure(dataset, k, e))?;
    if sol.status != LpStatus::Optimal {
        return Err(DeaError::solver(dataset, k, format!("envelopment LP reported {:?}", sol.status)));
    }
    let n = frame.n;
    let theta = sol.x[n];
    let lambdas: Vec<f64> = sol.x[..n].to_vec();
    let peers = lambdas
        .iter()
        .enumerate()
        .filter(|(_, &w)| w > PEER_TOLERANCE)
        .map(|(index, &weight)| Peer { index, weight })
        .collect();
    let efficient = theta <= 1.0 + config.classification_tolerance;
    let slacks = if config.slacks {
        Some(slack_stage(dataset, &frame, k, theta, config)?)
    } else {
        None
    };
    Ok(DeaSolution {
        index: k,
        dmu_id: dataset.dmu_ids()[k].clone(),
        theta,
        lambdas,
        peers,
        efficient,
        status: sol.status,
        slacks,
    })
}

/// Solves every DMU, returning results in dataset order.
///
/// A failing DMU does not stop the others; if any fail the error carries the
/// failures together with every solution that did succeed.
pub fn solve_all(dataset: &Dataset, config: &DeaModelConfig) -> Result<Vec<DeaSolution>, DeaError> {
    config.validate()?;
    check_positive(dataset)?;
    let solve = |k: usize| solve_dmu(dataset, k, config);
    #[cfg(feature = "parallel")]
    let results: Vec<Result<DeaSolution, DeaError>> = {
        use rayon::prelude::*;
        (0..dataset.n()).into_par_iter().map(solve).collect()
    };
    #[cfg(not(feature = "parallel"))]
    let results: Vec<Result<DeaSolution, DeaError>> = (0..dataset.n()).map(solve).collect();

    if results.iter().all(Result::is_ok) {
        return Ok(results.into_iter().map(Result::unwrap).collect());
    }
    let total = results.len();
    let mut failures = Vec::new();
    let mut partial = Vec::with_capacity(total);
    for r in results {
        match r {
            Ok(s) => partial.push(Some(s)),
            Err(e) => {
                failures.push(e);
                partial.push(None);
            }
        }
    }
    Err(DeaError::Incomplete {
        total,
        failures,
        partial,
    })
}

/// Solves the multiplier (dual) form for DMU `k`:
///
/// ```text
/// min  sum_i V(i) X(i,k) + omega
/// s.t. sum_r U(r) Y(r,k) = 1
///      sum_i V(i) X(i,j) + omega − sum_r U(r) Y(r,j) >= 0   for all j
///      U, V >= 0, omega free (VRS only)
/// ```
pub fn solve_multiplier(dataset: &Dataset, k: usize, config: &DeaModelConfig) -> Result<MultiplierSolution, DeaError> {
    config.validate()?;
    let frame = Frame::new(dataset, k)?;
    let m = frame.x.len();
    let s = frame.y.len();
    let vrs = config.frontier == Frontier::Vrs;
    let nvars = m + s + usize::from(vrs);

    let mut objective = vec![0.0; nvars];
    for (o, xi) in objective.iter_mut().zip(&frame.x) {
        *o = xi[k];
    }
    if vrs {
        objective[m + s] = 1.0;
    }
    let mut lp = LpProblem::minimize(objective);
    let mut norm = vec![0.0; nvars];
    for r in 0..s {
        norm[m + r] = frame.y[r][k];
    }
    lp.constrain(norm, Relation::Eq, 1.0);
    for j in 0..frame.n {
        let mut row = vec![0.0; nvars];
        for (v, xi) in row.iter_mut().zip(&frame.x) {
            *v = xi[j];
        }
        for r in 0..s {
            row[m + r] = -frame.y[r][j];
        }
        if vrs {
            row[m + s] = 1.0;
        }
        lp.constrain(row, Relation::Ge, 0.0);
    }
    if vrs {
        lp.set_free(m + s);
    }

    let sol = solve_lp(&lp, &config.solver).map_err(|e| lp_failure(dataset, k, e))?;
    if sol.status != LpStatus::Optimal {
        return Err(DeaError::solver(dataset, k, format!("multiplier LP reported {:?}", sol.status)));
    }
    let input_weights = sol.x[..m].to_vec();
    let output_weights = sol.x[m..m + s].to_vec();
    let omega = vrs.then(|| sol.x[m + s]);
    let numerator: f64 = input_weights.iter().zip(&frame.x).map(|(v, xi)| v * xi[k]).sum::<f64>() + omega.unwrap_or(0.0);
    let denominator: f64 = output_weights.iter().zip(&frame.y).map(|(u, yr)| u * yr[k]).sum();
    Ok(MultiplierSolution {
        index: k,
        input_weights,
        output_weights,
        omega,
        ratio: numerator / denominator,
    })
}

/// Second stage: maximizes total slack with outputs fixed at `theta · Y_k`.
///
/// A DMU is strongly efficient when `theta` is within the classification
/// tolerance of 1 and every slack is zero (relative to the DMU's own value).
pub fn maximize_slacks(dataset: &Dataset, k: usize, theta: f64, config: &DeaModelConfig) -> Result<SlackReport, DeaError> {
    config.validate()?;
    let frame = Frame::new(dataset, k)?;
    slack_stage(dataset, &frame, k, theta, config)
}

fn slack_stage(dataset: &Dataset, frame: &Frame, k: usize, theta: f64, config: &DeaModelConfig) -> Result<SlackReport, DeaError> {
    let n = frame.n;
    let m = frame.x.len();
    let s = frame.y.len();
    let nvars = n + m + s;
    let mut objective = vec![0.0; nvars];
    objective[n..].iter_mut().for_each(|c| *c = 1.0);
    let mut lp = LpProblem::maximize(objective);
    for (r, yr) in frame.y.iter().enumerate() {
        let mut row = vec![0.0; nvars];
        row[..n].copy_from_slice(yr);
        row[n + m + r] = -1.0;
        lp.constrain(row, Relation::Eq, theta * yr[k]);
    }
    for (i, xi) in frame.x.iter().enumerate() {
        let mut row = vec![0.0; nvars];
        row[..n].copy_from_slice(xi);
        row[n + i] = 1.0;
        lp.constrain(row, Relation::Eq, xi[k]);
    }
    if config.frontier == Frontier::Vrs {
        let mut row = vec![0.0; nvars];
        row[..n].iter_mut().for_each(|c| *c = 1.0);
        lp.constrain(row, Relation::Eq, 1.0);
    }
    let sol = solve_lp(&lp, &config.solver).map_err(|e| lp_failure(dataset, k, e))?;
    if sol.status != LpStatus::Optimal {
        return Err(DeaError::solver(dataset, k, format!("slack LP reported {:?}", sol.status)));
    }
    let lambdas = sol.x[..n].to_vec();
    let input_slacks = sol.x[n..n + m].to_vec();
    let output_slacks = sol.x[n + m..].to_vec();
    let tol = config.classification_tolerance;
    let zero_slacks = input_slacks
        .iter()
        .zip(&frame.x)
        .all(|(sl, xi)| *sl <= tol * xi[k].max(1.0))
        && output_slacks
            .iter()
            .zip(&frame.y)
            .all(|(sl, yr)| *sl <= tol * yr[k].max(1.0));
    Ok(SlackReport {
        total: sol.objective,
        strongly_efficient: theta <= 1.0 + tol && zero_slacks,
        input_slacks,
        output_slacks,
        lambdas,
    })
}
