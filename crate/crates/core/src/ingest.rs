//! Tabular input: CSV loading, ordinal/continuous classification and missing
//! data policies.
//!
//! Missing cells are stored as `NaN` in the value matrix.

use std::collections::HashSet;
use std::path::Path;

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::{Error, Result};

/// Columns with integer values and at most this many distinct values are ordinal.
pub const MAX_ORDINAL_LEVELS: usize = 7;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase", tag = "type")]
pub enum VariableType {
    /// Integer-coded ordinal variable; `levels` is the sorted set of codes.
    Ordinal { levels: Vec<f64> },
    Continuous,
}

impl VariableType {
    pub fn is_ordinal(&self) -> bool {
        matches!(self, VariableType::Ordinal { .. })
    }

    pub fn levels(&self) -> Option<&[f64]> {
        match self {
            VariableType::Ordinal { levels } => Some(levels),
            VariableType::Continuous => None,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum MissingPolicy {
    /// Drop every case with at least one missing value.
    Listwise,
    /// Keep all cases; correlations use complete pairs per variable pair.
    #[default]
    Pairwise,
}

#[derive(Debug, Clone)]
pub struct LoadOptions {
    /// Field delimiter; `None` sniffs tab vs comma from the first line.
    pub delimiter: Option<u8>,
    pub has_header: bool,
    /// Cell contents (after trimming) treated as missing.
    pub missing_markers: Vec<String>,
}

impl Default for LoadOptions {
    fn default() -> Self {
        LoadOptions {
            delimiter: None,
            has_header: true,
            missing_markers: vec![String::new(), "NA".to_string()],
        }
    }
}

/// n cases by p variables.
#[derive(Debug, Clone, PartialEq)]
pub struct Dataset {
    values: DMatrix<f64>,
    names: Vec<String>,
    types: Vec<VariableType>,
    missing_policy: MissingPolicy,
}

impl Dataset {
    /// Build and validate a dataset; variable types are detected from the values.
    pub fn new(values: DMatrix<f64>, names: Vec<String>) -> Result<Self> {
        let types = classify_columns(&values);
        let ds = Dataset {
            values,
            names,
            types,
            missing_policy: MissingPolicy::default(),
        };
        ds.validate()?;
        Ok(ds)
    }

    /// Names default to `V1..Vp`.
    pub fn from_matrix(values: DMatrix<f64>) -> Result<Self> {
        let names = default_names(values.ncols());
        Dataset::new(values, names)
    }

    /// Skip validation and reuse declared types. Used for resampled data,
    /// where a column may legitimately collapse to a single value; the
    /// correlation routines report that case as an error.
    pub(crate) fn from_parts_unchecked(
        values: DMatrix<f64>,
        names: Vec<String>,
        types: Vec<VariableType>,
        missing_policy: MissingPolicy,
    ) -> Self {
        Dataset {
            values,
            names,
            types,
            missing_policy,
        }
    }

    /// Override the detected variable types, e.g. from a config file.
    pub fn with_types(mut self, types: Vec<VariableType>) -> Result<Self> {
        if types.len() != self.p() {
            return Err(Error::InvalidArgument(format!(
                "{} variable types for {} columns",
                types.len(),
                self.p()
            )));
        }
        self.types = types;
        self.validate()?;
        Ok(self)
    }

    pub fn with_missing_policy(mut self, policy: MissingPolicy) -> Self {
        self.missing_policy = policy;
        self
    }

    pub fn n(&self) -> usize {
        self.values.nrows()
    }

    pub fn p(&self) -> usize {
        self.values.ncols()
    }

    pub fn values(&self) -> &DMatrix<f64> {
        &self.values
    }

    pub fn names(&self) -> &[String] {
        &self.names
    }

    pub fn variable_types(&self) -> &[VariableType] {
        &self.types
    }

    pub fn missing_policy(&self) -> MissingPolicy {
        self.missing_policy
    }

    pub fn column(&self, j: usize) -> &[f64] {
        let n = self.n();
        &self.values.as_slice()[j * n..(j + 1) * n]
    }

    pub fn has_missing(&self) -> bool {
        self.values.iter().any(|v| v.is_nan())
    }

    /// Rows in the given order (repeats allowed), types kept as declared.
    pub fn select_rows(&self, rows: &[usize]) -> Dataset {
        let p = self.p();
        let values = DMatrix::from_fn(rows.len(), p, |i, j| self.values[(rows[i], j)]);
        Dataset::from_parts_unchecked(
            values,
            self.names.clone(),
            self.types.clone(),
            self.missing_policy,
        )
    }

    /// Columns in the given order, types kept as declared.
    pub fn select_columns(&self, cols: &[usize]) -> Dataset {
        let values = self.values.select_columns(cols);
        Dataset::from_parts_unchecked(
            values,
            cols.iter().map(|&j| self.names[j].clone()).collect(),
            cols.iter().map(|&j| self.types[j].clone()).collect(),
            self.missing_policy,
        )
    }

    fn validate(&self) -> Result<()> {
        let (n, p) = self.values.shape();
        if p == 0 {
            return Err(Error::NoColumns);
        }
        if n < 2 {
            return Err(Error::InvalidData(format!("need at least 2 cases, got {n}")));
        }
        if p < 2 {
            return Err(Error::InvalidData(format!("need at least 2 variables, got {p}")));
        }
        if self.names.len() != p {
            return Err(Error::InvalidData(format!(
                "{} names for {p} columns",
                self.names.len()
            )));
        }
        let mut seen = HashSet::new();
        for name in &self.names {
            if name.trim().is_empty() {
                return Err(Error::InvalidData("empty variable name".into()));
            }
            if !seen.insert(name.as_str()) {
                return Err(Error::InvalidData(format!("duplicate variable name {name:?}")));
            }
        }
        for j in 0..p {
            let col = self.column(j);
            if col.iter().any(|v| v.is_infinite()) {
                return Err(Error::InvalidData(format!(
                    "column {:?} contains an infinite value",
                    self.names[j]
                )));
            }
            if distinct_observed(col).len() < 2 {
                return Err(Error::DegenerateColumn(self.names[j].clone()));
            }
            if let VariableType::Ordinal { levels } = &self.types[j] {
                for &v in col.iter().filter(|v| !v.is_nan()) {
                    if v.fract() != 0.0 || levels.binary_search_by(|l| l.total_cmp(&v)).is_err() {
                        return Err(Error::InvalidData(format!(
                            "column {:?}: value {v} outside its ordinal level set",
                            self.names[j]
                        )));
                    }
                }
            }
        }
        Ok(())
    }
}

pub(crate) fn default_names(p: usize) -> Vec<String> {
    (1..=p).map(|j| format!("V{j}")).collect()
}

fn distinct_observed(col: &[f64]) -> Vec<f64> {
    let mut v: Vec<f64> = col.iter().copied().filter(|x| !x.is_nan()).collect();
    v.sort_by(f64::total_cmp);
    v.dedup();
    v
}

fn classify_column(col: &[f64]) -> VariableType {
    let levels = distinct_observed(col);
    let integral = levels.iter().all(|v| v.fract() == 0.0);
    if integral && levels.len() <= MAX_ORDINAL_LEVELS {
        VariableType::Ordinal { levels }
    } else {
        VariableType::Continuous
    }
}

fn classify_columns(values: &DMatrix<f64>) -> Vec<VariableType> {
    let n = values.nrows();
    (0..values.ncols())
        .map(|j| classify_column(&values.as_slice()[j * n..(j + 1) * n]))
        .collect()
}

/// A column is ordinal iff all observed values are integers and there are at
/// most [`MAX_ORDINAL_LEVELS`] distinct values.
pub fn detect_variable_types(dataset: &Dataset) -> Vec<VariableType> {
    classify_columns(&dataset.values)
}

fn sniff_delimiter(text: &str) -> u8 {
    let first = text.lines().next().unwrap_or("");
    if first.contains('\t') && !first.contains(',') {
        b'\t'
    } else {
        b','
    }
}

/// Parse a delimited table from an in-memory string.
pub fn parse_table(text: &str, options: &LoadOptions) -> Result<Dataset> {
    let delimiter = options.delimiter.unwrap_or_else(|| sniff_delimiter(text));
    let mut reader = csv::ReaderBuilder::new()
        .delimiter(delimiter)
        .has_headers(false)
        .flexible(true)
        .trim(csv::Trim::All)
        .from_reader(text.as_bytes());

    let mut records = reader.records();
    let mut names: Option<Vec<String>> = None;
    if options.has_header {
        match records.next() {
            Some(rec) => names = Some(rec?.iter().map(str::to_string).collect()),
            None => return Err(Error::NoColumns),
        }
    }

    let mut rows: Vec<Vec<f64>> = Vec::new();
    let mut width = names.as_ref().map(Vec::len);
    for (idx, rec) in records.enumerate() {
        let rec = rec?;
        // Row numbers are 1-based data rows, header excluded.
        let row = idx + 1;
        if rec.len() == 1 && rec.get(0) == Some("") {
            continue;
        }
        let expected = *width.get_or_insert(rec.len());
        if rec.len() != expected {
            return Err(Error::RaggedRow {
                row,
                found: rec.len(),
                expected,
            });
        }
        let mut parsed = Vec::with_capacity(expected);
        for (j, cell) in rec.iter().enumerate() {
            if options.missing_markers.iter().any(|m| m == cell) {
                parsed.push(f64::NAN);
                continue;
            }
            match cell.parse::<f64>() {
                Ok(v) if !v.is_nan() => parsed.push(v),
                _ => {
                    let column = names
                        .as_ref()
                        .and_then(|n| n.get(j).cloned())
                        .unwrap_or_else(|| format!("V{}", j + 1));
                    return Err(Error::NonNumeric {
                        row,
                        column,
                        value: cell.to_string(),
                    });
                }
            }
        }
        rows.push(parsed);
    }

    let p = width.unwrap_or(0);
    if p == 0 {
        return Err(Error::NoColumns);
    }
    let n = rows.len();
    let values = DMatrix::from_fn(n, p, |i, j| rows[i][j]);
    let names = names.unwrap_or_else(|| default_names(p));
    Dataset::new(values, names)
}

/// Load a CSV/TSV file. Rows with unparseable cells make the whole load fail.
pub fn load_table(path: impl AsRef<Path>, options: &LoadOptions) -> Result<Dataset> {
    let path = path.as_ref();
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    parse_table(&text, options)
}

/// Write a dataset as comma-separated text with a header row; missing cells as `NA`.
/// Values use the shortest representation that parses back to the same `f64`.
pub fn write_table(dataset: &Dataset, writer: impl std::io::Write) -> Result<()> {
    let mut w = csv::Writer::from_writer(writer);
    w.write_record(dataset.names())?;
    for i in 0..dataset.n() {
        let row: Vec<String> = (0..dataset.p())
            .map(|j| {
                let v = dataset.values[(i, j)];
                if v.is_nan() {
                    "NA".to_string()
                } else {
                    format!("{v}")
                }
            })
            .collect();
        w.write_record(&row)?;
    }
    w.flush().map_err(|e| Error::io("<writer>", e))?;
    Ok(())
}

/// Apply a missing-data policy. Listwise deletion removes incomplete cases;
/// pairwise keeps every case and marks the dataset so correlations use
/// complete pairs.
pub fn apply_missing_policy(dataset: &Dataset, policy: MissingPolicy) -> Result<Dataset> {
    match policy {
        MissingPolicy::Pairwise => Ok(dataset.clone().with_missing_policy(MissingPolicy::Pairwise)),
        MissingPolicy::Listwise => {
            let keep: Vec<usize> = (0..dataset.n())
                .filter(|&i| (0..dataset.p()).all(|j| !dataset.values[(i, j)].is_nan()))
                .collect();
            if keep.len() < 2 {
                return Err(Error::InvalidData(format!(
                    "listwise deletion leaves {} complete cases",
                    keep.len()
                )));
            }
            let reduced = dataset.select_rows(&keep);
            for j in 0..reduced.p() {
                if distinct_observed(reduced.column(j)).len() < 2 {
                    return Err(Error::DegenerateColumn(reduced.names[j].clone()));
                }
            }
            Ok(reduced.with_missing_policy(MissingPolicy::Listwise))
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn parse(text: &str) -> Result<Dataset> {
        parse_table(text, &LoadOptions::default())
    }

    #[test]
    fn small_integer_table_is_ordinal() {
        let ds = parse("a,b,c\n0,1,2\n1,2,3\n2,3,0\n3,0,1\n").unwrap();
        assert_eq!((ds.n(), ds.p()), (4, 3));
        assert!(ds.variable_types().iter().all(VariableType::is_ordinal));
        assert_eq!(ds.variable_types()[0].levels().unwrap(), &[0.0, 1.0, 2.0, 3.0]);
    }

    #[test]
    fn constant_column_is_rejected() {
        let err = parse("a,b\n1,5\n2,5\n3,5\n").unwrap_err();
        assert!(err.to_string().contains("< 2 distinct values"), "{err}");
    }

    #[test]
    fn ordinal_cutoff() {
        let col = |vals: Vec<f64>| classify_column(&vals);
        assert_eq!(
            col(vec![0.0, 1.0, 2.0, 3.0]),
            VariableType::Ordinal {
                levels: vec![0.0, 1.0, 2.0, 3.0]
            }
        );
        assert_eq!(col((1..=8).map(f64::from).collect()), VariableType::Continuous);
        assert!(col((1..=7).map(f64::from).collect()).is_ordinal());
        assert_eq!(col((0..100).map(|i| i as f64 * 0.37).collect()), VariableType::Continuous);
    }

    #[test]
    fn detection_is_idempotent() {
        let ds = parse("x,y\n1,0.5\n2,1.5\n1,2.25\n3,0.1\n").unwrap();
        let t1 = detect_variable_types(&ds);
        let t2 = detect_variable_types(&ds.clone().with_types(t1.clone()).unwrap());
        assert_eq!(t1, t2);
        assert_eq!(t1[1], VariableType::Continuous);
    }

    #[test]
    fn missing_markers_and_listwise() {
        let ds = parse("a,b\n1,2\nNA,3\n2,\n3,1\n4,4\n").unwrap();
        assert!(ds.has_missing());
        let lw = apply_missing_policy(&ds, MissingPolicy::Listwise).unwrap();
        assert_eq!(lw.n(), 3);
        assert_eq!(lw.p(), 2);
        let pw = apply_missing_policy(&ds, MissingPolicy::Pairwise).unwrap();
        assert_eq!(pw.n(), ds.n());
    }

    #[test]
    fn listwise_without_missing_is_identity() {
        let ds = parse("a,b\n1,2\n2,3\n3,1\n").unwrap();
        let lw = apply_missing_policy(&ds, MissingPolicy::Listwise).unwrap();
        assert_eq!(lw.values(), ds.values());
    }

    #[test]
    fn variable_missing_everywhere_errors() {
        // Column b only has one observed value, already invalid at load.
        assert!(parse("a,b\n1,NA\n2,NA\n3,1\n").is_err());
        // Listwise deletion that wipes out the cases.
        let ds = parse("a,b,c\n1,NA,1\n2,3,NA\n3,1,2\n4,2,NA\n").unwrap();
        assert!(apply_missing_policy(&ds, MissingPolicy::Listwise).is_err());
    }

    #[test]
    fn load_errors() {
        assert!(matches!(
            load_table("/nonexistent/x.csv", &LoadOptions::default()),
            Err(Error::FileNotFound(_))
        ));
        assert!(matches!(parse("a,b\n1,2\n3\n"), Err(Error::RaggedRow { row: 2, .. })));
        assert!(matches!(parse("a,b\n1,2\nfoo,3\n2,1\n"), Err(Error::NonNumeric { .. })));
        assert!(matches!(parse(""), Err(Error::NoColumns)));
        assert!(parse("a,a\n1,2\n2,1\n").is_err());
    }

    #[test]
    fn tab_delimited_without_header() {
        let opts = LoadOptions {
            has_header: false,
            ..LoadOptions::default()
        };
        let ds = parse_table("1\t2.5\n2\t3.5\n3\t0.5\n", &opts).unwrap();
        assert_eq!(ds.names(), &["V1".to_string(), "V2".to_string()]);
        assert_eq!(ds.values()[(1, 1)], 3.5);
    }

    #[test]
    fn write_then_reload_is_identical() {
        let ds = parse("a,b\n0.1,2\nNA,3\n1e-7,1\n-3.25,2\n").unwrap();
        let mut buf = Vec::new();
        write_table(&ds, &mut buf).unwrap();
        let back = parse(std::str::from_utf8(&buf).unwrap()).unwrap();
        assert_eq!(back.names(), ds.names());
        for (a, b) in back.values().iter().zip(ds.values().iter()) {
            assert!(a.to_bits() == b.to_bits() || (a.is_nan() && b.is_nan()));
        }
    }
}
