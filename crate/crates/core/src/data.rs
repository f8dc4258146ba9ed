//! Dataset schema, CSV ingestion and preprocessing.
//!
//! A [`Dataset`] is an immutable `N × (M + S)` matrix of finite values, one
//! row per decision-making unit, with role-tagged variable specs. Every
//! mutation made on the way from raw input to a solvable dataset is recorded
//! in its [`PreprocessLog`].

use std::collections::HashSet;
use std::fmt;
use std::io::{Read, Write};
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Role {
    Input,
    Output,
}

impl fmt::Display for Role {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Role::Input => f.write_str("input"),
            Role::Output => f.write_str("output"),
        }
    }
}

impl FromStr for Role {
    type Err = DataError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.trim().to_ascii_lowercase().as_str() {
            "input" => Ok(Role::Input),
            "output" => Ok(Role::Output),
            other => Err(DataError::Schema(format!("unknown role `{other}`"))),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct VariableSpec {
    pub id: String,
    pub name: String,
    pub role: Role,
    pub units: String,
}

impl VariableSpec {
    pub fn new(id: impl Into<String>, role: Role, name: impl Into<String>, units: impl Into<String>) -> Self {
        Self {
            id: id.into(),
            name: name.into(),
            role,
            units: units.into(),
        }
    }

    pub fn input(id: impl Into<String>) -> Self {
        let id = id.into();
        Self::new(id.clone(), Role::Input, id, "")
    }

    pub fn output(id: impl Into<String>) -> Self {
        let id = id.into();
        Self::new(id.clone(), Role::Output, id, "")
    }
}

#[derive(Debug, Error)]
pub enum DataError {
    #[error("header mismatch: {0}")]
    HeaderMismatch(String),
    #[error("non-numeric cell at row {row}, column {column} (`{column_id}`): `{value}`")]
    NonNumericCell {
        /// 1-based CSV line, counting the header as line 1.
        row: usize,
        /// 1-based CSV column, counting `dmu_id` as column 1.
        column: usize,
        column_id: String,
        value: String,
    },
    #[error("missing value at row {row}, column `{column_id}`")]
    MissingValue { row: usize, column_id: String },
    #[error("dataset is empty after dropping rows with missing values")]
    EmptyDataset,
    #[error("duplicate DMU id `{0}`")]
    DuplicateDmu(String),
    #[error("invalid schema: {0}")]
    Schema(String),
    #[error("invalid dataset: {0}")]
    Invalid(String),
    #[error("malformed HS code `{0}`: expected exactly 6 digits")]
    MalformedCode(String),
    #[error("duplicate HS code `{0}`")]
    DuplicateCode(String),
    #[error("invalid catalog entry: {0}")]
    Catalog(String),
    #[error("csv: {0}")]
    Csv(#[from] csv::Error),
    #[error("io: {0}")]
    Io(#[from] std::io::Error),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum MissingPolicy {
    /// Drop the DMU row and record it in the log.
    #[default]
    Drop,
    /// Reject the whole file.
    Fail,
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct LoadOptions {
    pub missing: MissingPolicy,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum LogEntry {
    DroppedRow {
        dmu_id: String,
        line: usize,
        reason: String,
    },
    Displaced {
        var_id: String,
        role: Role,
        amount: f64,
    },
    DroppedVariable {
        var_id: String,
        reason: String,
    },
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct PreprocessLog {
    pub entries: Vec<LogEntry>,
}

impl PreprocessLog {
    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn dropped_rows(&self) -> impl Iterator<Item = &str> {
        self.entries.iter().filter_map(|e| match e {
            LogEntry::DroppedRow { dmu_id, .. } => Some(dmu_id.as_str()),
            _ => None,
        })
    }

    /// Total displacement applied to a variable so far.
    pub fn displacement(&self, var_id: &str) -> f64 {
        self.entries
            .iter()
            .filter_map(|e| match e {
                LogEntry::Displaced { var_id: v, amount, .. } if v == var_id => Some(*amount),
                _ => None,
            })
            .sum()
    }

    /// Displaced outputs; output-oriented VRS scores are not invariant to these.
    pub fn displaced_outputs(&self) -> Vec<&str> {
        self.entries
            .iter()
            .filter_map(|e| match e {
                LogEntry::Displaced {
                    var_id,
                    role: Role::Output,
                    ..
                } => Some(var_id.as_str()),
                _ => None,
            })
            .collect()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Dataset {
    dmu_ids: Vec<String>,
    variables: Vec<VariableSpec>,
    /// Row-major, one row per DMU.
    values: Vec<Vec<f64>>,
    log: PreprocessLog,
}

impl Dataset {
    pub fn new(dmu_ids: Vec<String>, variables: Vec<VariableSpec>, values: Vec<Vec<f64>>) -> Result<Self, DataError> {
        Self::with_log(dmu_ids, variables, values, PreprocessLog::default())
    }

    fn with_log(
        dmu_ids: Vec<String>,
        variables: Vec<VariableSpec>,
        values: Vec<Vec<f64>>,
        log: PreprocessLog,
    ) -> Result<Self, DataError> {
        validate_schema(&variables)?;
        if dmu_ids.is_empty() {
            return Err(DataError::EmptyDataset);
        }
        if values.len() != dmu_ids.len() {
            return Err(DataError::Invalid(format!(
                "{} DMU ids but {} value rows",
                dmu_ids.len(),
                values.len()
            )));
        }
        let mut seen = HashSet::new();
        for id in &dmu_ids {
            if !seen.insert(id.as_str()) {
                return Err(DataError::DuplicateDmu(id.clone()));
            }
        }
        for (row, id) in values.iter().zip(&dmu_ids) {
            if row.len() != variables.len() {
                return Err(DataError::Invalid(format!(
                    "row `{id}` has {} values, expected {}",
                    row.len(),
                    variables.len()
                )));
            }
            if let Some(j) = row.iter().position(|v| !v.is_finite()) {
                return Err(DataError::Invalid(format!(
                    "value for `{id}`, `{}` is not finite",
                    variables[j].id
                )));
            }
        }
        Ok(Self {
            dmu_ids,
            variables,
            values,
            log,
        })
    }

    pub fn dmu_ids(&self) -> &[String] {
        &self.dmu_ids
    }

    pub fn variables(&self) -> &[VariableSpec] {
        &self.variables
    }

    pub fn values(&self) -> &[Vec<f64>] {
        &self.values
    }

    pub fn log(&self) -> &PreprocessLog {
        &self.log
    }

    /// Number of DMUs.
    pub fn n(&self) -> usize {
        self.dmu_ids.len()
    }

    /// Number of inputs.
    pub fn m(&self) -> usize {
        self.variables.iter().filter(|v| v.role == Role::Input).count()
    }

    /// Number of outputs.
    pub fn s(&self) -> usize {
        self.variables.iter().filter(|v| v.role == Role::Output).count()
    }

    pub fn input_columns(&self) -> Vec<usize> {
        self.columns_with(Role::Input)
    }

    pub fn output_columns(&self) -> Vec<usize> {
        self.columns_with(Role::Output)
    }

    fn columns_with(&self, role: Role) -> Vec<usize> {
        self.variables
            .iter()
            .enumerate()
            .filter(|(_, v)| v.role == role)
            .map(|(j, _)| j)
            .collect()
    }

    pub fn column_index(&self, var_id: &str) -> Option<usize> {
        self.variables.iter().position(|v| v.id == var_id)
    }

    pub fn dmu_index(&self, dmu_id: &str) -> Option<usize> {
        self.dmu_ids.iter().position(|d| d == dmu_id)
    }

    pub fn column(&self, col: usize) -> Vec<f64> {
        self.values.iter().map(|row| row[col]).collect()
    }

    /// Column values with any logged displacement removed.
    pub fn raw_column(&self, col: usize) -> Vec<f64> {
        let d = self.log.displacement(&self.variables[col].id);
        if d == 0.0 {
            self.column(col)
        } else {
            self.values.iter().map(|row| row[col] - d).collect()
        }
    }

    /// Input matrix `X(i, j)`: one row per input, one column per DMU.
    pub fn inputs(&self) -> Vec<Vec<f64>> {
        self.input_columns().into_iter().map(|c| self.column(c)).collect()
    }

    /// Output matrix `Y(r, j)`: one row per output, one column per DMU.
    pub fn outputs(&self) -> Vec<Vec<f64>> {
        self.output_columns().into_iter().map(|c| self.column(c)).collect()
    }

    pub fn is_strictly_positive(&self) -> bool {
        self.values.iter().flatten().all(|&v| v > 0.0)
    }

    /// Keeps only the named variables (in their existing order), logging each
    /// dropped one with `reason`.
    pub fn retain_variables(&self, keep: &[String], reason: &str) -> Result<Self, DataError> {
        let cols: Vec<usize> = (0..self.variables.len())
            .filter(|&j| keep.contains(&self.variables[j].id))
            .collect();
        let mut log = self.log.clone();
        for v in &self.variables {
            if !keep.contains(&v.id) {
                log.entries.push(LogEntry::DroppedVariable {
                    var_id: v.id.clone(),
                    reason: reason.to_string(),
                });
            }
        }
        let variables = cols.iter().map(|&c| self.variables[c].clone()).collect();
        let values = self
            .values
            .iter()
            .map(|row| cols.iter().map(|&c| row[c]).collect())
            .collect();
        Self::with_log(self.dmu_ids.clone(), variables, values, log)
    }

    /// Reorders DMU rows; `order[i]` is the source row of new row `i`.
    pub fn permute_rows(&self, order: &[usize]) -> Self {
        Self {
            dmu_ids: order.iter().map(|&i| self.dmu_ids[i].clone()).collect(),
            variables: self.variables.clone(),
            values: order.iter().map(|&i| self.values[i].clone()).collect(),
            log: self.log.clone(),
        }
    }

    /// Returns a copy with one column mapped through `f`; the log is untouched.
    pub fn map_column(&self, col: usize, f: impl Fn(f64) -> f64) -> Result<Self, DataError> {
        let mut values = self.values.clone();
        for row in &mut values {
            row[col] = f(row[col]);
        }
        Self::with_log(self.dmu_ids.clone(), self.variables.clone(), values, self.log.clone())
    }

    /// Re-applies the displacement and variable-drop entries of `log` to
    /// `self`, which is taken to be the dataset as loaded.
    pub fn replay(&self, log: &PreprocessLog) -> Result<Self, DataError> {
        let mut out = self.clone();
        for entry in &log.entries {
            match entry {
                LogEntry::Displaced { var_id, amount, .. } => {
                    let col = out
                        .column_index(var_id)
                        .ok_or_else(|| DataError::Invalid(format!("log names unknown variable `{var_id}`")))?;
                    for row in &mut out.values {
                        row[col] += amount;
                    }
                    out.log.entries.push(entry.clone());
                }
                LogEntry::DroppedVariable { var_id, reason } => {
                    let keep: Vec<String> = out
                        .variables
                        .iter()
                        .filter(|v| &v.id != var_id)
                        .map(|v| v.id.clone())
                        .collect();
                    out = out.retain_variables(&keep, reason)?;
                }
                LogEntry::DroppedRow { .. } => {}
            }
        }
        Ok(out)
    }

    /// Writes the dataset CSV (`dmu_id,<var_id>,...`).
    pub fn write_csv<W: Write>(&self, writer: W) -> Result<(), DataError> {
        let mut w = csv::Writer::from_writer(writer);
        let mut header = vec!["dmu_id".to_string()];
        header.extend(self.variables.iter().map(|v| v.id.clone()));
        w.write_record(&header)?;
        for (id, row) in self.dmu_ids.iter().zip(&self.values) {
            let mut rec = vec![id.clone()];
            rec.extend(row.iter().map(|v| v.to_string()));
            w.write_record(&rec)?;
        }
        w.flush()?;
        Ok(())
    }

    pub fn to_csv_string(&self) -> String {
        let mut buf = Vec::new();
        self.write_csv(&mut buf).expect("writing to memory cannot fail");
        String::from_utf8(buf).expect("csv output is utf-8")
    }
}

fn validate_schema(variables: &[VariableSpec]) -> Result<(), DataError> {
    let mut seen = HashSet::new();
    for v in variables {
        if v.id.trim().is_empty() {
            return Err(DataError::Schema("empty variable id".into()));
        }
        if v.id == "dmu_id" {
            return Err(DataError::Schema("`dmu_id` is reserved".into()));
        }
        if !seen.insert(v.id.as_str()) {
            return Err(DataError::Schema(format!("duplicate variable id `{}`", v.id)));
        }
    }
    if !variables.iter().any(|v| v.role == Role::Input) {
        return Err(DataError::Schema("at least one input is required".into()));
    }
    if !variables.iter().any(|v| v.role == Role::Output) {
        return Err(DataError::Schema("at least one output is required".into()));
    }
    Ok(())
}

/// Parses the schema sidecar: one `<var_id>,<input|output>,<name>,<units>`
/// line per variable. Blank lines and `#` comments are skipped.
pub fn parse_schema<R: Read>(reader: R) -> Result<Vec<VariableSpec>, DataError> {
    let mut rdr = csv::ReaderBuilder::new()
        .has_headers(false)
        .flexible(true)
        .comment(Some(b'#'))
        .from_reader(reader);
    let mut specs = Vec::new();
    for (line, rec) in rdr.records().enumerate() {
        let rec = rec?;
        if rec.iter().all(|f| f.trim().is_empty()) {
            continue;
        }
        if rec.len() < 2 {
            return Err(DataError::Schema(format!(
                "line {}: expected `<var_id>,<role>,<name>,<units>`",
                line + 1
            )));
        }
        let id = rec[0].trim().to_string();
        let role: Role = rec[1].parse()?;
        let name = rec.get(2).map(str::trim).filter(|s| !s.is_empty()).unwrap_or(&id).to_string();
        let units = rec.get(3).map(str::trim).unwrap_or("").to_string();
        specs.push(VariableSpec { id, name, role, units });
    }
    validate_schema(&specs)?;
    Ok(specs)
}

pub fn write_schema<W: Write>(variables: &[VariableSpec], writer: W) -> Result<(), DataError> {
    let mut w = csv::WriterBuilder::new().has_headers(false).from_writer(writer);
    for v in variables {
        w.write_record([v.id.as_str(), &v.role.to_string(), &v.name, &v.units])?;
    }
    w.flush()?;
    Ok(())
}

/// Loads a dataset CSV against a schema.
///
/// The header must be `dmu_id` followed by exactly the schema ids in schema
/// order. Numbers are parsed as dot-decimal `f64`; an empty cell is missing.
pub fn load_dataset<R: Read>(reader: R, schema: &[VariableSpec], options: LoadOptions) -> Result<Dataset, DataError> {
    validate_schema(schema)?;
    let mut rdr = csv::ReaderBuilder::new()
        .has_headers(true)
        .flexible(true)
        .trim(csv::Trim::All)
        .from_reader(reader);
    let header = rdr.headers()?.clone();
    let expected = schema.len() + 1;
    if header.len() != expected {
        return Err(DataError::HeaderMismatch(format!(
            "header has {} columns, schema implies {expected} (dmu_id + {} variables)",
            header.len(),
            schema.len()
        )));
    }
    if &header[0] != "dmu_id" {
        return Err(DataError::HeaderMismatch(format!(
            "first column must be `dmu_id`, found `{}`",
            &header[0]
        )));
    }
    for (j, spec) in schema.iter().enumerate() {
        if header[j + 1] != spec.id {
            return Err(DataError::HeaderMismatch(format!(
                "column {} is `{}`, schema expects `{}`",
                j + 2,
                &header[j + 1],
                spec.id
            )));
        }
    }

    let mut ids = Vec::new();
    let mut values = Vec::new();
    let mut log = PreprocessLog::default();
    for (i, rec) in rdr.records().enumerate() {
        let rec = rec?;
        let line = i + 2;
        if rec.iter().all(str::is_empty) {
            continue;
        }
        if rec.len() != expected {
            return Err(DataError::HeaderMismatch(format!(
                "line {line} has {} columns, expected {expected}",
                rec.len()
            )));
        }
        let id = rec[0].to_string();
        let mut row = Vec::with_capacity(schema.len());
        let mut missing: Option<&str> = None;
        for (j, spec) in schema.iter().enumerate() {
            let cell = &rec[j + 1];
            if cell.is_empty() {
                missing.get_or_insert(&spec.id);
                row.push(f64::NAN);
                continue;
            }
            match cell.parse::<f64>() {
                Ok(v) if v.is_finite() => row.push(v),
                _ => {
                    return Err(DataError::NonNumericCell {
                        row: line,
                        column: j + 2,
                        column_id: spec.id.clone(),
                        value: cell.to_string(),
                    })
                }
            }
        }
        if let Some(column_id) = missing {
            match options.missing {
                MissingPolicy::Fail => {
                    return Err(DataError::MissingValue {
                        row: line,
                        column_id: column_id.to_string(),
                    })
                }
                MissingPolicy::Drop => {
                    log::warn!("dropping DMU `{id}` (line {line}): missing `{column_id}`");
                    log.entries.push(LogEntry::DroppedRow {
                        dmu_id: id,
                        line,
                        reason: format!("missing value for `{column_id}`"),
                    });
                    continue;
                }
            }
        }
        ids.push(id);
        values.push(row);
    }
    if ids.is_empty() {
        return Err(DataError::EmptyDataset);
    }
    Dataset::with_log(ids, schema.to_vec(), values, log)
}

/// Shifts every column whose minimum is below `minimum` so that its
/// smallest entry becomes at least `minimum`.
///
/// The displacement is the smallest `d >= minimum − min(column)` for which
/// `min(column) + d >= minimum` holds in floating point, so a second call is
/// always a no-op.
pub fn displace_to_positive(dataset: &Dataset, minimum: f64) -> Dataset {
    assert!(minimum > 0.0 && minimum.is_finite(), "minimum must be positive");
    let mut out = dataset.clone();
    for (col, spec) in dataset.variables.iter().enumerate() {
        let lo = dataset.values.iter().map(|r| r[col]).fold(f64::INFINITY, f64::min);
        if lo >= minimum {
            continue;
        }
        let mut d = minimum - lo;
        while lo + d < minimum {
            d = d.next_up();
        }
        for row in &mut out.values {
            row[col] += d;
        }
        if spec.role == Role::Output {
            log::info!(
                "output `{}` displaced by {d}: output-oriented VRS scores are not invariant to output translation",
                spec.id
            );
        }
        out.log.entries.push(LogEntry::Displaced {
            var_id: spec.id.clone(),
            role: spec.role,
            amount: d,
        });
    }
    out
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CatalogEntry {
    pub code: String,
    pub section: u8,
    pub chapter: u8,
    pub name: String,
}

#[derive(Debug, Clone, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct ProductCatalog {
    entries: Vec<CatalogEntry>,
}

impl ProductCatalog {
    pub fn new(entries: Vec<CatalogEntry>) -> Result<Self, DataError> {
        let mut seen = HashSet::new();
        for e in &entries {
            let chapter = parse_hs_code(&e.code)?;
            if chapter != e.chapter {
                return Err(DataError::Catalog(format!(
                    "`{}` declares chapter {} but its prefix is {chapter}",
                    e.code, e.chapter
                )));
            }
            if !(1..=21).contains(&e.section) {
                return Err(DataError::Catalog(format!("`{}`: section {} out of 1..=21", e.code, e.section)));
            }
            if !seen.insert(e.code.as_str()) {
                return Err(DataError::DuplicateCode(e.code.clone()));
            }
        }
        Ok(Self { entries })
    }

    pub fn entries(&self) -> &[CatalogEntry] {
        &self.entries
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn write_csv<W: Write>(&self, writer: W) -> Result<(), DataError> {
        let mut w = csv::Writer::from_writer(writer);
        w.write_record(["code", "section", "name"])?;
        for e in &self.entries {
            w.write_record([e.code.as_str(), &e.section.to_string(), &e.name])?;
        }
        w.flush()?;
        Ok(())
    }
}

/// Validates a 6-digit HS code and returns its chapter.
fn parse_hs_code(code: &str) -> Result<u8, DataError> {
    if code.len() != 6 || !code.bytes().all(|b| b.is_ascii_digit()) {
        return Err(DataError::MalformedCode(code.to_string()));
    }
    let chapter: u8 = code[..2].parse().expect("two ascii digits");
    if !(1..=97).contains(&chapter) {
        return Err(DataError::MalformedCode(code.to_string()));
    }
    Ok(chapter)
}

/// Loads a catalog CSV with header `code,section,name`.
pub fn load_catalog<R: Read>(reader: R) -> Result<ProductCatalog, DataError> {
    let mut rdr = csv::ReaderBuilder::new().trim(csv::Trim::All).from_reader(reader);
    let header = rdr.headers()?.clone();
    let cols: Vec<&str> = header.iter().collect();
    if cols != ["code", "section", "name"] {
        return Err(DataError::HeaderMismatch(format!(
            "catalog header must be `code,section,name`, found `{}`",
            cols.join(",")
        )));
    }
    let mut entries = Vec::new();
    for (i, rec) in rdr.records().enumerate() {
        let rec = rec?;
        let code = rec[0].to_string();
        let chapter = parse_hs_code(&code)?;
        let section = rec[1]
            .parse::<u8>()
            .map_err(|_| DataError::Catalog(format!("line {}: bad section `{}`", i + 2, &rec[1])))?;
        entries.push(CatalogEntry {
            code,
            section,
            chapter,
            name: rec[2].to_string(),
        });
    }
    ProductCatalog::new(entries)
}
