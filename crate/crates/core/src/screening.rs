//! Variable redundancy screening by Pearson correlation, and the DMU-count
//! adequacy rules of thumb.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::data::{DataError, Dataset, Role};

pub const DEFAULT_THRESHOLD: f64 = 0.9;

#[derive(Debug, Error)]
pub enum ScreeningError {
    #[error("correlation needs at least 3 DMUs, got {0}")]
    TooFewRows(usize),
    #[error("threshold must lie in (0, 1], got {0}")]
    InvalidThreshold(f64),
    #[error("screening would leave no {role} variables (dropping {dropped:?})")]
    EmptiedRole { role: Role, dropped: Vec<String> },
    #[error("dataset has {n} DMUs, below the adequacy thresholds ({report})")]
    Inadequate { n: usize, report: String },
    #[error(transparent)]
    Data(#[from] DataError),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FlaggedPair {
    pub a: String,
    pub b: String,
    pub r: f64,
    pub same_role: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DroppedVariable {
    pub id: String,
    pub reason: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CorrelationReport {
    pub variable_ids: Vec<String>,
    /// Row-major Pearson matrix; `None` where a constant column makes r undefined.
    pub matrix: Vec<Vec<Option<f64>>>,
    pub threshold: Option<f64>,
    pub flagged: Vec<FlaggedPair>,
    pub kept: Vec<String>,
    pub dropped: Vec<DroppedVariable>,
    pub warnings: Vec<String>,
}

impl CorrelationReport {
    pub fn get(&self, a: &str, b: &str) -> Option<f64> {
        let i = self.variable_ids.iter().position(|v| v == a)?;
        let j = self.variable_ids.iter().position(|v| v == b)?;
        self.matrix[i][j]
    }

    pub fn constant_columns(&self) -> Vec<usize> {
        (0..self.matrix.len()).filter(|&i| self.matrix[i][i].is_none()).collect()
    }
}

fn centered(col: &[f64]) -> (Vec<f64>, f64) {
    let n = col.len() as f64;
    let mean = col.iter().sum::<f64>() / n;
    let dev: Vec<f64> = col.iter().map(|v| v - mean).collect();
    let ss = dev.iter().map(|d| d * d).sum::<f64>();
    (dev, ss)
}

/// Pearson correlation of every variable pair.
pub fn correlation_matrix(dataset: &Dataset) -> Result<CorrelationReport, ScreeningError> {
    let n = dataset.n();
    if n < 3 {
        return Err(ScreeningError::TooFewRows(n));
    }
    let p = dataset.variables().len();
    let cols: Vec<(Vec<f64>, f64, bool)> = (0..p)
        .map(|j| {
            let raw = dataset.column(j);
            let scale = raw.iter().fold(0.0f64, |a, v| a.max(v.abs()));
            let (dev, ss) = centered(&raw);
            let constant = ss <= n as f64 * (1e-12 * scale).powi(2) || ss == 0.0;
            (dev, ss, constant)
        })
        .collect();

    let mut matrix = vec![vec![None; p]; p];
    for a in 0..p {
        if cols[a].2 {
            continue;
        }
        matrix[a][a] = Some(1.0);
        for b in a + 1..p {
            if cols[b].2 {
                continue;
            }
            let sxy: f64 = cols[a].0.iter().zip(&cols[b].0).map(|(x, y)| x * y).sum();
            let r = (sxy / (cols[a].1.sqrt() * cols[b].1.sqrt())).clamp(-1.0, 1.0);
            matrix[a][b] = Some(r);
            matrix[b][a] = Some(r);
        }
    }

    let ids: Vec<String> = dataset.variables().iter().map(|v| v.id.clone()).collect();
    Ok(CorrelationReport {
        kept: ids.clone(),
        variable_ids: ids,
        matrix,
        threshold: None,
        flagged: Vec::new(),
        dropped: Vec::new(),
        warnings: Vec::new(),
    })
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct ScreenOptions {
    /// Variables that must survive screening (e.g. the ranking quantity).
    pub protected: Vec<String>,
}

/// Drops redundant same-role variables.
///
/// Constant columns are dropped first. Then, taking flagged same-role pairs
/// in order of decreasing |r|, the member with the larger mean |r| to all
/// other variables is dropped (ties drop the later column). Cross-role pairs
/// are reported as warnings only.
pub fn screen_variables(
    dataset: &Dataset,
    threshold: f64,
    options: &ScreenOptions,
) -> Result<(CorrelationReport, Dataset), ScreeningError> {
    if !(threshold > 0.0 && threshold <= 1.0) {
        return Err(ScreeningError::InvalidThreshold(threshold));
    }
    let mut report = correlation_matrix(dataset)?;
    report.threshold = Some(threshold);
    let vars = dataset.variables();
    let p = vars.len();
    let mut alive = vec![true; p];
    let protected = |j: usize| options.protected.contains(&vars[j].id);

    for j in report.constant_columns() {
        if protected(j) {
            report.warnings.push(format!("protected `{}` is constant; kept", vars[j].id));
            continue;
        }
        alive[j] = false;
        report.dropped.push(DroppedVariable {
            id: vars[j].id.clone(),
            reason: "constant column (correlation undefined)".into(),
        });
    }
    for role in [Role::Input, Role::Output] {
        if !(0..p).any(|j| alive[j] && vars[j].role == role) {
            return Err(ScreeningError::EmptiedRole {
                role,
                dropped: report.dropped.iter().map(|d| d.id.clone()).collect(),
            });
        }
    }

    let mean_abs: Vec<f64> = (0..p)
        .map(|a| {
            let others: Vec<f64> = (0..p)
                .filter(|&b| b != a)
                .filter_map(|b| report.matrix[a][b])
                .map(f64::abs)
                .collect();
            if others.is_empty() {
                0.0
            } else {
                others.iter().sum::<f64>() / others.len() as f64
            }
        })
        .collect();

    let mut pairs = Vec::new();
    for a in 0..p {
        for b in a + 1..p {
            if let Some(r) = report.matrix[a][b] {
                if r.abs() >= threshold {
                    pairs.push((a, b, r));
                }
            }
        }
    }
    pairs.sort_by(|x, y| y.2.abs().total_cmp(&x.2.abs()).then(x.0.cmp(&y.0)).then(x.1.cmp(&y.1)));

    for &(a, b, r) in &pairs {
        let same_role = vars[a].role == vars[b].role;
        report.flagged.push(FlaggedPair {
            a: vars[a].id.clone(),
            b: vars[b].id.clone(),
            r,
            same_role,
        });
        if !same_role {
            report.warnings.push(format!(
                "{} `{}` and {} `{}` correlate at r = {r:.4}; kept both",
                vars[a].role, vars[a].id, vars[b].role, vars[b].id
            ));
        }
    }

    for &(a, b, r) in &pairs {
        if vars[a].role != vars[b].role || !alive[a] || !alive[b] {
            continue;
        }
        let victim = match (protected(a), protected(b)) {
            (true, true) => {
                report.warnings.push(format!(
                    "`{}` and `{}` are both protected; kept despite r = {r:.4}",
                    vars[a].id, vars[b].id
                ));
                continue;
            }
            (true, false) => b,
            (false, true) => a,
            (false, false) => {
                if mean_abs[a] > mean_abs[b] {
                    a
                } else {
                    b
                }
            }
        };
        let survivor = if victim == a { b } else { a };
        alive[victim] = false;
        report.dropped.push(DroppedVariable {
            id: vars[victim].id.clone(),
            reason: format!(
                "|r| = {:.4} with `{}`; mean |r| {:.4} vs {:.4}",
                r.abs(),
                vars[survivor].id,
                mean_abs[victim],
                mean_abs[survivor]
            ),
        });
    }

    report.kept = (0..p).filter(|&j| alive[j]).map(|j| vars[j].id.clone()).collect();
    for w in &report.warnings {
        log::warn!("{w}");
    }
    let reduced = dataset.retain_variables(&report.kept, "screening")?;
    Ok((report, reduced))
}

/// DMU-count adequacy under the `N >= 3(M + S)` and `N >= 2·M·S` rules.
///
/// Thresholds are derived from `m` and `s` on every call.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct AdequacyReport {
    pub m: usize,
    pub s: usize,
    pub n: usize,
}

impl AdequacyReport {
    pub fn friedman_threshold(&self) -> usize {
        (self.m + self.s) * 3
    }

    pub fn allen_threshold(&self) -> usize {
        2 * self.m * self.s
    }

    pub fn friedman_pass(&self) -> bool {
        self.n >= self.friedman_threshold()
    }

    pub fn allen_pass(&self) -> bool {
        self.n >= self.allen_threshold()
    }

    pub fn passed(&self) -> bool {
        self.friedman_pass() && self.allen_pass()
    }

    pub fn summary(&self) -> String {
        let verdict = |p: bool| if p { "pass" } else { "fail" };
        format!(
            "{} {} / {} {}",
            self.friedman_threshold(),
            verdict(self.friedman_pass()),
            self.allen_threshold(),
            verdict(self.allen_pass())
        )
    }
}

#[derive(Serialize)]
struct AdequacyView {
    m: usize,
    s: usize,
    n: usize,
    friedman_threshold: usize,
    friedman_pass: bool,
    allen_threshold: usize,
    allen_pass: bool,
}

impl Serialize for AdequacyReport {
    fn serialize<S: serde::Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        AdequacyView {
            m: self.m,
            s: self.s,
            n: self.n,
            friedman_threshold: self.friedman_threshold(),
            friedman_pass: self.friedman_pass(),
            allen_threshold: self.allen_threshold(),
            allen_pass: self.allen_pass(),
        }
        .serialize(serializer)
    }
}

pub fn check_adequacy(m: usize, s: usize, n: usize) -> AdequacyReport {
    AdequacyReport { m, s, n }
}
