//! Dense two-phase simplex for the small linear programs built by the DEA models.
//!
//! Problems are stated in a general form (`<=`, `>=`, `=` rows, lower bounds,
//! free variables) and converted internally to a standard equality form with
//! non-negative right-hand sides. Phase I minimizes the sum of artificial
//! variables; Phase II optimizes the real objective with artificials barred
//! from re-entering the basis. Dantzig pricing is used until a run of
//! degenerate pivots exceeds the stall threshold, after which Bland's rule
//! takes over for the rest of the phase.

use std::fmt::Write as _;

use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Sense {
    Maximize,
    Minimize,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Relation {
    /// `a·x <= b`
    Le,
    /// `a·x >= b`
    Ge,
    /// `a·x = b`
    Eq,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Constraint {
    pub coefficients: Vec<f64>,
    pub relation: Relation,
    pub rhs: f64,
}

/// A linear program in general form.
///
/// Every variable has a finite lower bound (zero unless changed) or is
/// marked free.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LpProblem {
    pub sense: Sense,
    pub objective: Vec<f64>,
    pub constraints: Vec<Constraint>,
    pub lower_bounds: Vec<f64>,
    pub free: Vec<bool>,
}

impl LpProblem {
    pub fn new(sense: Sense, objective: Vec<f64>) -> Self {
        let n = objective.len();
        Self {
            sense,
            objective,
            constraints: Vec::new(),
            lower_bounds: vec![0.0; n],
            free: vec![false; n],
        }
    }

    pub fn maximize(objective: Vec<f64>) -> Self {
        Self::new(Sense::Maximize, objective)
    }

    pub fn minimize(objective: Vec<f64>) -> Self {
        Self::new(Sense::Minimize, objective)
    }

    pub fn num_variables(&self) -> usize {
        self.objective.len()
    }

    pub fn num_constraints(&self) -> usize {
        self.constraints.len()
    }

    pub fn constrain(&mut self, coefficients: Vec<f64>, relation: Relation, rhs: f64) -> &mut Self {
        self.constraints.push(Constraint {
            coefficients,
            relation,
            rhs,
        });
        self
    }

    pub fn with_constraint(mut self, coefficients: Vec<f64>, relation: Relation, rhs: f64) -> Self {
        self.constrain(coefficients, relation, rhs);
        self
    }

    pub fn set_free(&mut self, var: usize) -> &mut Self {
        self.free[var] = true;
        self
    }

    pub fn set_lower_bound(&mut self, var: usize, bound: f64) -> &mut Self {
        self.lower_bounds[var] = bound;
        self.free[var] = false;
        self
    }

    /// Checks the structural invariants the solver relies on.
    pub fn validate(&self) -> Result<(), LpError> {
        let n = self.objective.len();
        if n == 0 {
            return Err(LpError::Malformed("problem has no variables".into()));
        }
        if self.constraints.is_empty() {
            return Err(LpError::Malformed("problem has no constraints".into()));
        }
        if self.lower_bounds.len() != n || self.free.len() != n {
            return Err(LpError::Malformed(format!(
                "bound vectors have length {}/{} but there are {n} variables",
                self.lower_bounds.len(),
                self.free.len()
            )));
        }
        if let Some(j) = self.objective.iter().position(|c| !c.is_finite()) {
            return Err(LpError::Malformed(format!("objective coefficient {j} is not finite")));
        }
        if let Some(j) = self.lower_bounds.iter().position(|c| !c.is_finite()) {
            return Err(LpError::Malformed(format!("lower bound of variable {j} is not finite")));
        }
        for (i, row) in self.constraints.iter().enumerate() {
            if row.coefficients.len() != n {
                return Err(LpError::Malformed(format!(
                    "constraint {i} has {} coefficients, expected {n}",
                    row.coefficients.len()
                )));
            }
            if !row.rhs.is_finite() {
                return Err(LpError::Malformed(format!("right-hand side of constraint {i} is not finite")));
            }
            if let Some(j) = row.coefficients.iter().position(|c| !c.is_finite()) {
                return Err(LpError::Malformed(format!("coefficient ({i}, {j}) is not finite")));
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SolverTolerances {
    /// Smallest magnitude accepted as a pivot element.
    pub pivot: f64,
    /// Phase I residual and primal feasibility tolerance.
    pub feasibility: f64,
    /// Reduced-cost threshold for optimality.
    pub optimality: f64,
    /// Expected bound on |primal − dual| at an optimum; gaps above it are logged.
    pub duality_gap: f64,
    /// Consecutive degenerate pivots tolerated before switching to Bland's rule.
    pub stall_threshold: usize,
    pub max_iterations: usize,
}

impl Default for SolverTolerances {
    fn default() -> Self {
        Self {
            pivot: 1e-9,
            feasibility: 1e-9,
            optimality: 1e-9,
            duality_gap: 1e-7,
            stall_threshold: 50,
            max_iterations: 50_000,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum LpStatus {
    Optimal,
    Infeasible,
    Unbounded,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct SolverStats {
    pub phase_one_iterations: usize,
    pub phase_two_iterations: usize,
    pub degenerate_pivots: usize,
    pub bland_activated: bool,
    /// Final basis as standard-form column indices, one per row.
    pub basis: Vec<usize>,
    /// |primal objective − dual objective| for optimal solves.
    pub duality_gap: f64,
    /// Unbounded: a ray in the original variable space along which the
    /// objective improves without limit. Infeasible: Phase I multipliers
    /// per original constraint (a Farkas-style certificate).
    pub certificate: Option<Vec<f64>>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LpSolution {
    pub status: LpStatus,
    /// Objective value; NaN unless `status` is `Optimal`.
    pub objective: f64,
    /// Primal values of the original variables (empty unless optimal).
    pub x: Vec<f64>,
    /// Dual value per original constraint (empty unless optimal).
    pub duals: Vec<f64>,
    pub dual_objective: f64,
    pub iterations: usize,
    pub stats: SolverStats,
}

impl LpSolution {
    pub fn is_optimal(&self) -> bool {
        self.status == LpStatus::Optimal
    }

    fn non_optimal(status: LpStatus, iterations: usize, stats: SolverStats) -> Self {
        Self {
            status,
            objective: f64::NAN,
            x: Vec::new(),
            duals: Vec::new(),
            dual_objective: f64::NAN,
            iterations,
            stats,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum LpError {
    #[error("malformed problem: {0}")]
    Malformed(String),
    #[error("iteration limit of {limit} exceeded in phase {phase}")]
    IterationLimitExceeded { limit: usize, phase: u8 },
}

/// How an original variable maps onto standard-form columns.
#[derive(Debug, Clone, Copy)]
enum ColumnMap {
    Shifted { col: usize, lower: f64 },
    Split { pos: usize, neg: usize },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum ColumnKind {
    Structural,
    Slack,
    Artificial,
}

struct Tableau {
    rows: usize,
    cols: usize,
    /// Row-major `rows × (cols + 1)`; the last entry of each row is the rhs.
    data: Vec<f64>,
    /// Reduced costs `c_j − z_j` for the current phase, plus the negated
    /// objective value in the last slot.
    costs: Vec<f64>,
    basis: Vec<usize>,
    kinds: Vec<ColumnKind>,
}

impl Tableau {
    #[inline]
    fn width(&self) -> usize {
        self.cols + 1
    }

    #[inline]
    fn at(&self, r: usize, c: usize) -> f64 {
        self.data[r * self.width() + c]
    }

    #[inline]
    fn rhs(&self, r: usize) -> f64 {
        self.data[r * self.width() + self.cols]
    }

    fn pivot(&mut self, row: usize, col: usize) {
        let w = self.width();
        let p = self.data[row * w + col];
        let (before, rest) = self.data.split_at_mut(row * w);
        let (pivot_row, after) = rest.split_at_mut(w);
        for v in pivot_row.iter_mut() {
            *v /= p;
        }
        pivot_row[col] = 1.0;
        let eliminate = |target: &mut [f64]| {
            let factor = target[col];
            if factor != 0.0 {
                for (t, &pv) in target.iter_mut().zip(pivot_row.iter()) {
                    *t -= factor * pv;
                }
                target[col] = 0.0;
            }
        };
        for chunk in before.chunks_mut(w) {
            eliminate(chunk);
        }
        for chunk in after.chunks_mut(w) {
            eliminate(chunk);
        }
        eliminate(&mut self.costs);
        self.basis[row] = col;
    }

    /// Sets the phase objective and prices out the current basis.
    fn load_costs(&mut self, objective: &[f64]) {
        let w = self.width();
        self.costs.clear();
        self.costs.extend_from_slice(objective);
        self.costs.push(0.0);
        for r in 0..self.rows {
            let cb = objective[self.basis[r]];
            if cb != 0.0 {
                let row = &self.data[r * w..(r + 1) * w];
                for (c, &v) in self.costs.iter_mut().zip(row) {
                    *c -= cb * v;
                }
            }
        }
    }

    /// `c_B B⁻¹ e_r` for each row, read from the columns that formed the
    /// initial identity basis.
    fn multipliers(&self, objective: &[f64], identity_cols: &[usize]) -> Vec<f64> {
        identity_cols
            .iter()
            .map(|&col| {
                (0..self.rows)
                    .map(|r| objective[self.basis[r]] * self.at(r, col))
                    .sum()
            })
            .collect()
    }

    fn dump(&self) -> String {
        let mut out = String::new();
        let _ = writeln!(out, "basis {:?}", self.basis);
        for r in 0..self.rows {
            let row = &self.data[r * self.width()..(r + 1) * self.width()];
            let _ = writeln!(out, "{:>4} | {}", self.basis[r], fmt_row(row));
        }
        let _ = writeln!(out, "   z | {}", fmt_row(&self.costs));
        out
    }
}

fn fmt_row(row: &[f64]) -> String {
    row.iter()
        .map(|v| format!("{v:>10.4}"))
        .collect::<Vec<_>>()
        .join(" ")
}

enum PhaseOutcome {
    Optimal,
    Unbounded { entering: usize },
}

struct Simplex<'a> {
    tab: Tableau,
    tol: &'a SolverTolerances,
    stats: SolverStats,
}

impl Simplex<'_> {
    fn run_phase(&mut self, phase: u8) -> Result<PhaseOutcome, LpError> {
        let mut bland = false;
        let mut stalled = 0usize;
        let mut iterations = 0usize;
        loop {
            let Some(entering) = self.choose_entering(bland) else {
                return Ok(PhaseOutcome::Optimal);
            };
            let Some((leaving, step)) = self.choose_leaving(entering, bland) else {
                return Ok(PhaseOutcome::Unbounded { entering });
            };
            if iterations >= self.tol.max_iterations {
                return Err(LpError::IterationLimitExceeded {
                    limit: self.tol.max_iterations,
                    phase,
                });
            }
            if step <= self.tol.feasibility {
                self.stats.degenerate_pivots += 1;
                stalled += 1;
                if !bland && stalled >= self.tol.stall_threshold {
                    log::debug!("phase {phase}: {stalled} degenerate pivots, switching to Bland's rule");
                    bland = true;
                    self.stats.bland_activated = true;
                }
            } else {
                stalled = 0;
            }
            self.tab.pivot(leaving, entering);
            self.clean_rhs();
            iterations += 1;
            match phase {
                1 => self.stats.phase_one_iterations += 1,
                _ => self.stats.phase_two_iterations += 1,
            }
            if log::log_enabled!(log::Level::Trace) {
                log::trace!(
                    "phase {phase} pivot {iterations}: row {leaving}, column {entering}\n{}",
                    self.tab.dump()
                );
            }
        }
    }

    fn choose_entering(&self, bland: bool) -> Option<usize> {
        let tab = &self.tab;
        let mut best: Option<(usize, f64)> = None;
        for j in 0..tab.cols {
            if tab.kinds[j] == ColumnKind::Artificial {
                continue;
            }
            let d = tab.costs[j];
            if d <= self.tol.optimality {
                continue;
            }
            if bland {
                return Some(j);
            }
            if best.is_none_or(|(_, b)| d > b) {
                best = Some((j, d));
            }
        }
        best.map(|(j, _)| j)
    }

    fn choose_leaving(&self, entering: usize, bland: bool) -> Option<(usize, f64)> {
        let tab = &self.tab;
        let mut best: Option<(usize, f64, f64)> = None;
        for r in 0..tab.rows {
            let a = tab.at(r, entering);
            if a <= self.tol.pivot {
                continue;
            }
            let ratio = tab.rhs(r).max(0.0) / a;
            let replace = match best {
                None => true,
                Some((br, bratio, ba)) => {
                    let slack = 1e-12 * (1.0 + bratio.abs());
                    if ratio < bratio - slack {
                        true
                    } else if ratio <= bratio + slack {
                        if bland {
                            tab.basis[r] < tab.basis[br]
                        } else {
                            a > ba
                        }
                    } else {
                        false
                    }
                }
            };
            if replace {
                best = Some((r, ratio, a));
            }
        }
        best.map(|(r, ratio, _)| (r, ratio))
    }

    fn clean_rhs(&mut self) {
        let w = self.tab.width();
        let cols = self.tab.cols;
        for r in 0..self.tab.rows {
            let v = &mut self.tab.data[r * w + cols];
            if *v < 0.0 && *v > -self.tol.feasibility {
                *v = 0.0;
            }
        }
    }
}

/// Solves `problem` with the two-phase simplex method.
///
/// Identical inputs always produce identical outputs; there is no randomness
/// in pricing or tie-breaking.
pub fn solve_lp(problem: &LpProblem, tolerances: &SolverTolerances) -> Result<LpSolution, LpError> {
    problem.validate()?;

    let n = problem.num_variables();
    let m = problem.num_constraints();

    // Structural columns.
    let mut maps = Vec::with_capacity(n);
    let mut structural = 0usize;
    for j in 0..n {
        if problem.free[j] {
            maps.push(ColumnMap::Split {
                pos: structural,
                neg: structural + 1,
            });
            structural += 2;
        } else {
            maps.push(ColumnMap::Shifted {
                col: structural,
                lower: problem.lower_bounds[j],
            });
            structural += 1;
        }
    }

    // Normalized rows: non-negative rhs, `>= 0` rows flipped to `<= 0`.
    let mut row_sign = vec![1.0; m];
    let mut relations = Vec::with_capacity(m);
    let mut rows: Vec<Vec<f64>> = Vec::with_capacity(m);
    let mut rhs = Vec::with_capacity(m);
    for (i, c) in problem.constraints.iter().enumerate() {
        let mut row = vec![0.0; structural];
        let mut b = c.rhs;
        for (j, &a) in c.coefficients.iter().enumerate() {
            match maps[j] {
                ColumnMap::Shifted { col, lower } => {
                    row[col] = a;
                    b -= a * lower;
                }
                ColumnMap::Split { pos, neg } => {
                    row[pos] = a;
                    row[neg] = -a;
                }
            }
        }
        let mut rel = c.relation;
        if b < 0.0 || (b == 0.0 && rel == Relation::Ge) {
            row_sign[i] = -1.0;
            row.iter_mut().for_each(|v| *v = -*v);
            b = -b;
            rel = match rel {
                Relation::Le => Relation::Ge,
                Relation::Ge => Relation::Le,
                Relation::Eq => Relation::Eq,
            };
        }
        rows.push(row);
        rhs.push(b.abs());
        relations.push(rel);
    }

    // Slack, surplus and artificial columns.
    let mut kinds = vec![ColumnKind::Structural; structural];
    let mut extra: Vec<(usize, usize, f64)> = Vec::new(); // (row, col, coeff)
    let mut identity_cols = vec![0usize; m];
    let mut next = structural;
    for (i, rel) in relations.iter().enumerate() {
        match rel {
            Relation::Le => {
                extra.push((i, next, 1.0));
                kinds.push(ColumnKind::Slack);
                identity_cols[i] = next;
                next += 1;
            }
            Relation::Ge => {
                extra.push((i, next, -1.0));
                kinds.push(ColumnKind::Slack);
                next += 1;
                extra.push((i, next, 1.0));
                kinds.push(ColumnKind::Artificial);
                identity_cols[i] = next;
                next += 1;
            }
            Relation::Eq => {
                extra.push((i, next, 1.0));
                kinds.push(ColumnKind::Artificial);
                identity_cols[i] = next;
                next += 1;
            }
        }
    }
    let cols = next;
    let width = cols + 1;
    let mut data = vec![0.0; m * width];
    for (i, row) in rows.iter().enumerate() {
        data[i * width..i * width + structural].copy_from_slice(row);
        data[i * width + cols] = rhs[i];
    }
    for &(i, col, v) in &extra {
        data[i * width + col] = v;
    }

    let mut simplex = Simplex {
        tab: Tableau {
            rows: m,
            cols,
            data,
            costs: Vec::with_capacity(width),
            basis: identity_cols.clone(),
            kinds,
        },
        tol: tolerances,
        stats: SolverStats::default(),
    };

    // Phase I.
    let has_artificials = simplex.tab.kinds.contains(&ColumnKind::Artificial);
    if has_artificials {
        let phase_one: Vec<f64> = simplex
            .tab
            .kinds
            .iter()
            .map(|k| if *k == ColumnKind::Artificial { -1.0 } else { 0.0 })
            .collect();
        simplex.tab.load_costs(&phase_one);
        simplex.run_phase(1)?;

        let residual: f64 = (0..m)
            .filter(|&r| simplex.tab.kinds[simplex.tab.basis[r]] == ColumnKind::Artificial)
            .map(|r| simplex.tab.rhs(r).max(0.0))
            .sum();
        let scale = rhs.iter().fold(1.0f64, |acc, b| acc.max(b.abs()));
        if residual > tolerances.feasibility * scale {
            let y = simplex.tab.multipliers(&phase_one, &identity_cols);
            let farkas = y.iter().zip(&row_sign).map(|(v, s)| v * s).collect();
            let iterations = simplex.stats.phase_one_iterations;
            let mut stats = simplex.stats;
            stats.basis = simplex.tab.basis;
            stats.certificate = Some(farkas);
            return Ok(LpSolution::non_optimal(LpStatus::Infeasible, iterations, stats));
        }

        // Drive zero-level artificials out of the basis where possible.
        for r in 0..m {
            if simplex.tab.kinds[simplex.tab.basis[r]] != ColumnKind::Artificial {
                continue;
            }
            let mut best: Option<(usize, f64)> = None;
            for j in 0..cols {
                if simplex.tab.kinds[j] == ColumnKind::Artificial {
                    continue;
                }
                let a = simplex.tab.at(r, j).abs();
                if a > tolerances.pivot && best.is_none_or(|(_, b)| a > b) {
                    best = Some((j, a));
                }
            }
            // A row with no eligible pivot is redundant; its artificial stays
            // basic at zero and never leaves.
            if let Some((j, _)) = best {
                simplex.tab.pivot(r, j);
                simplex.clean_rhs();
            }
        }
    }

    // Phase II in maximization form.
    let flip = match problem.sense {
        Sense::Maximize => 1.0,
        Sense::Minimize => -1.0,
    };
    let mut phase_two = vec![0.0; cols];
    for (j, map) in maps.iter().enumerate() {
        let c = flip * problem.objective[j];
        match *map {
            ColumnMap::Shifted { col, .. } => phase_two[col] = c,
            ColumnMap::Split { pos, neg } => {
                phase_two[pos] = c;
                phase_two[neg] = -c;
            }
        }
    }
    simplex.tab.load_costs(&phase_two);
    let outcome = simplex.run_phase(2)?;
    let iterations = simplex.stats.phase_one_iterations + simplex.stats.phase_two_iterations;

    if let PhaseOutcome::Unbounded { entering } = outcome {
        let mut dir = vec![0.0; cols];
        dir[entering] = 1.0;
        for r in 0..m {
            dir[simplex.tab.basis[r]] = -simplex.tab.at(r, entering);
        }
        let ray = maps
            .iter()
            .map(|map| match *map {
                ColumnMap::Shifted { col, .. } => dir[col],
                ColumnMap::Split { pos, neg } => dir[pos] - dir[neg],
            })
            .collect();
        let mut stats = simplex.stats;
        stats.basis = simplex.tab.basis;
        stats.certificate = Some(ray);
        return Ok(LpSolution::non_optimal(LpStatus::Unbounded, iterations, stats));
    }

    let mut values = vec![0.0; cols];
    for r in 0..m {
        values[simplex.tab.basis[r]] = simplex.tab.rhs(r).max(0.0);
    }
    let x: Vec<f64> = maps
        .iter()
        .map(|map| match *map {
            ColumnMap::Shifted { col, lower } => lower + values[col],
            ColumnMap::Split { pos, neg } => values[pos] - values[neg],
        })
        .collect();
    let objective: f64 = problem.objective.iter().zip(&x).map(|(c, v)| c * v).sum();

    let y_std = simplex.tab.multipliers(&phase_two, &identity_cols);
    let duals: Vec<f64> = y_std
        .iter()
        .zip(&row_sign)
        .map(|(y, s)| flip * y * s)
        .collect();
    let mut dual_objective: f64 = duals
        .iter()
        .zip(&problem.constraints)
        .map(|(y, c)| y * c.rhs)
        .sum();
    for j in 0..n {
        if problem.free[j] || problem.lower_bounds[j] == 0.0 {
            continue;
        }
        let aty: f64 = problem
            .constraints
            .iter()
            .zip(&duals)
            .map(|(c, y)| c.coefficients[j] * y)
            .sum();
        dual_objective += (problem.objective[j] - aty) * problem.lower_bounds[j];
    }

    let mut stats = simplex.stats;
    stats.basis = simplex.tab.basis;
    stats.duality_gap = (objective - dual_objective).abs();
    if stats.duality_gap > tolerances.duality_gap * objective.abs().max(1.0) {
        log::warn!(
            "duality gap {:.3e} exceeds tolerance {:.1e}",
            stats.duality_gap,
            tolerances.duality_gap
        );
    }

    Ok(LpSolution {
        status: LpStatus::Optimal,
        objective,
        x,
        duals,
        dual_objective,
        iterations,
        stats,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn solve(p: &LpProblem) -> LpSolution {
        solve_lp(p, &SolverTolerances::default()).unwrap()
    }

    #[test]
    fn single_variable_upper_bound() {
        let p = LpProblem::maximize(vec![1.0]).with_constraint(vec![1.0], Relation::Le, 3.0);
        let s = solve(&p);
        assert_eq!(s.status, LpStatus::Optimal);
        assert_eq!(s.x, vec![3.0]);
        assert_eq!(s.objective, 3.0);
    }

    #[test]
    fn contradictory_bound_is_infeasible() {
        let p = LpProblem::maximize(vec![1.0]).with_constraint(vec![1.0], Relation::Le, -1.0);
        let s = solve(&p);
        assert_eq!(s.status, LpStatus::Infeasible);
        assert!(s.stats.certificate.is_some());
    }

    #[test]
    fn missing_upper_bound_is_unbounded() {
        // x >= 0 stated as an explicit row so the problem has a constraint.
        let p = LpProblem::maximize(vec![1.0]).with_constraint(vec![1.0], Relation::Ge, 0.0);
        let s = solve(&p);
        assert_eq!(s.status, LpStatus::Unbounded);
        let ray = s.stats.certificate.unwrap();
        assert!(ray[0] > 0.0);
    }

    #[test]
    fn two_variable_vertex() {
        let p = LpProblem::maximize(vec![3.0, 2.0])
            .with_constraint(vec![1.0, 1.0], Relation::Le, 4.0)
            .with_constraint(vec![1.0, 3.0], Relation::Le, 6.0);
        let s = solve(&p);
        assert_eq!(s.status, LpStatus::Optimal);
        assert!((s.x[0] - 4.0).abs() < 1e-12 && s.x[1].abs() < 1e-12);
        assert!((s.objective - 12.0).abs() < 1e-12);
        assert!((s.dual_objective - 12.0).abs() < 1e-9);
        assert!((s.duals[0] - 3.0).abs() < 1e-12 && s.duals[1].abs() < 1e-12);
    }

    #[test]
    fn minimize_with_ge_and_eq_rows() {
        // min x + 2y s.t. x + y >= 2, x - y = 0 → x = y = 1, objective 3.
        let p = LpProblem::minimize(vec![1.0, 2.0])
            .with_constraint(vec![1.0, 1.0], Relation::Ge, 2.0)
            .with_constraint(vec![1.0, -1.0], Relation::Eq, 0.0);
        let s = solve(&p);
        assert_eq!(s.status, LpStatus::Optimal);
        assert!((s.objective - 3.0).abs() < 1e-12);
        assert!((s.dual_objective - 3.0).abs() < 1e-12);
        assert!(s.duals[0] >= 0.0);
    }

    #[test]
    fn free_variable_goes_negative() {
        // max -x s.t. x >= -5 with x free → x = -5.
        let mut p = LpProblem::maximize(vec![-1.0]).with_constraint(vec![1.0], Relation::Ge, -5.0);
        p.set_free(0);
        let s = solve(&p);
        assert_eq!(s.status, LpStatus::Optimal);
        assert!((s.x[0] + 5.0).abs() < 1e-12);
        assert!((s.objective - 5.0).abs() < 1e-12);
    }

    #[test]
    fn lower_bounds_are_shifted() {
        // min x + y s.t. x + y <= 10, x >= 2, y >= 3.
        let mut p = LpProblem::minimize(vec![1.0, 1.0]).with_constraint(vec![1.0, 1.0], Relation::Le, 10.0);
        p.set_lower_bound(0, 2.0).set_lower_bound(1, 3.0);
        let s = solve(&p);
        assert!((s.objective - 5.0).abs() < 1e-12);
        assert!((s.dual_objective - 5.0).abs() < 1e-12);
    }

    #[test]
    fn redundant_equality_rows() {
        let p = LpProblem::maximize(vec![1.0, 1.0])
            .with_constraint(vec![1.0, 1.0], Relation::Eq, 2.0)
            .with_constraint(vec![2.0, 2.0], Relation::Eq, 4.0)
            .with_constraint(vec![1.0, 0.0], Relation::Le, 1.5);
        let s = solve(&p);
        assert_eq!(s.status, LpStatus::Optimal);
        assert!((s.objective - 2.0).abs() < 1e-12);
        assert!(s.stats.duality_gap < 1e-9);
    }

    #[test]
    fn malformed_problems_are_rejected() {
        let p = LpProblem::maximize(vec![1.0, 2.0]).with_constraint(vec![1.0], Relation::Le, 1.0);
        assert!(matches!(solve_lp(&p, &SolverTolerances::default()), Err(LpError::Malformed(_))));
        let p = LpProblem::maximize(vec![f64::NAN]).with_constraint(vec![1.0], Relation::Le, 1.0);
        assert!(matches!(solve_lp(&p, &SolverTolerances::default()), Err(LpError::Malformed(_))));
        let p = LpProblem::maximize(vec![1.0]);
        assert!(matches!(solve_lp(&p, &SolverTolerances::default()), Err(LpError::Malformed(_))));
    }

    #[test]
    fn iteration_limit_trips() {
        let p = LpProblem::maximize(vec![3.0, 2.0])
            .with_constraint(vec![1.0, 1.0], Relation::Le, 4.0)
            .with_constraint(vec![1.0, 3.0], Relation::Le, 6.0);
        let tol = SolverTolerances {
            max_iterations: 0,
            ..Default::default()
        };
        assert!(matches!(
            solve_lp(&p, &tol),
            Err(LpError::IterationLimitExceeded { .. })
        ));
    }

    #[test]
    fn beale_cycling_example_terminates() {
        // Beale's classic example cycles under textbook Dantzig pricing.
        let p = LpProblem::minimize(vec![-0.75, 150.0, -0.02, 6.0])
            .with_constraint(vec![0.25, -60.0, -0.04, 9.0], Relation::Le, 0.0)
            .with_constraint(vec![0.5, -90.0, -0.02, 3.0], Relation::Le, 0.0)
            .with_constraint(vec![0.0, 0.0, 1.0, 0.0], Relation::Le, 1.0);
        let tol = SolverTolerances {
            stall_threshold: 1,
            ..Default::default()
        };
        let s = solve_lp(&p, &tol).unwrap();
        assert_eq!(s.status, LpStatus::Optimal);
        assert!((s.objective + 0.05).abs() < 1e-12);
    }
}
