//! File formats for networks, centralities, bootstrap runs and simulation
//! results.
//!
//! Every CSV has a header row and a documented, deterministic row order.
//! Numbers are written with Rust's shortest round-trip formatting, so reading
//! a file back recovers the exact values. Undefined values are empty cells.

use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::bootstrap::{
    BootstrapKind, BootstrapResult, CsCoefficient, DifferenceMatrix, EdgeCi, Replicate, ReplicateOutcome,
    StabilityIndex, SubsetBootstrapResult, SubsetOutcome,
};
use crate::centrality::{centrality_table, CentralityTable};
use crate::ggm::{EstimationOptions, Network, Provenance};
use crate::simgen::SimulationResult;
use crate::stats::CorrelationMatrix;
use crate::{Error, Result};

pub const BOOTSTRAP_META: &str = "bootstrap.json";
pub const BOOTSTRAP_REPLICATES: &str = "replicates.csv";

fn io_err(path: &Path) -> impl FnOnce(std::io::Error) -> Error + '_ {
    move |source| Error::Io {
        path: path.to_path_buf(),
        source,
    }
}

/// Buffered writer for `path`, creating parent directories.
pub fn create_file(path: &Path) -> Result<BufWriter<File>> {
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        std::fs::create_dir_all(dir).map_err(io_err(dir))?;
    }
    Ok(BufWriter::new(File::create(path).map_err(io_err(path))?))
}

/// Write with `f` into `path` and flush.
pub fn write_file(path: &Path, f: impl FnOnce(&mut BufWriter<File>) -> Result<()>) -> Result<()> {
    let mut w = create_file(path)?;
    f(&mut w)?;
    w.flush().map_err(io_err(path))
}

pub fn write_json<T: Serialize + ?Sized>(path: &Path, value: &T) -> Result<()> {
    write_file(path, |w| {
        serde_json::to_writer_pretty(&mut *w, value)?;
        w.write_all(b"\n").map_err(io_err(path))
    })
}

pub fn read_json<T: for<'de> Deserialize<'de>>(path: &Path) -> Result<T> {
    let text = read_text(path)?;
    Ok(serde_json::from_str(&text)?)
}

fn read_text(path: &Path) -> Result<String> {
    std::fs::read_to_string(path).map_err(|e| Error::io(path, e))
}

/// A CSV file as its header and string records.
#[derive(Debug, Clone, PartialEq)]
pub struct CsvTable {
    pub header: Vec<String>,
    pub rows: Vec<Vec<String>>,
}

impl CsvTable {
    pub fn column_index(&self, name: &str) -> Result<usize> {
        self.header
            .iter()
            .position(|h| h == name)
            .ok_or_else(|| Error::InvalidData(format!("missing column {name:?}")))
    }

    /// Cells of a named column parsed as numbers; empty cells are `None`.
    pub fn numbers(&self, name: &str) -> Result<Vec<Option<f64>>> {
        let c = self.column_index(name)?;
        self.rows.iter().map(|r| parse_cell(&r[c])).collect()
    }

    pub fn strings(&self, name: &str) -> Result<Vec<&str>> {
        let c = self.column_index(name)?;
        Ok(self.rows.iter().map(|r| r[c].as_str()).collect())
    }
}

fn parse_cell(s: &str) -> Result<Option<f64>> {
    if s.is_empty() {
        return Ok(None);
    }
    s.parse()
        .map(Some)
        .map_err(|_| Error::InvalidData(format!("not a number: {s:?}")))
}

pub fn read_csv(path: &Path) -> Result<CsvTable> {
    let text = read_text(path)?;
    let mut rdr = csv::ReaderBuilder::new().has_headers(true).from_reader(text.as_bytes());
    let header = rdr.headers()?.iter().map(str::to_owned).collect();
    let rows = rdr
        .records()
        .map(|r| r.map(|rec| rec.iter().map(str::to_owned).collect()))
        .collect::<std::result::Result<_, _>>()?;
    Ok(CsvTable { header, rows })
}

pub fn fmt_num(x: f64) -> String {
    format!("{x}")
}

fn fmt_opt(x: Option<f64>) -> String {
    x.map(fmt_num).unwrap_or_default()
}

fn csv_writer<W: Write>(w: W) -> csv::Writer<W> {
    csv::WriterBuilder::new().terminator(csv::Terminator::Any(b'\n')).from_writer(w)
}

fn edge_label(labels: &[String], i: usize, j: usize) -> String {
    format!("{}--{}", labels[i], labels[j])
}

/// Square matrix with a leading label column; rows and columns in node order.
pub fn write_matrix_csv<W: Write>(w: W, labels: &[String], m: &DMatrix<f64>) -> Result<()> {
    let mut out = csv_writer(w);
    out.write_record(std::iter::once("").chain(labels.iter().map(String::as_str)))?;
    for (i, l) in labels.iter().enumerate() {
        let row: Vec<String> = (0..m.ncols()).map(|j| fmt_num(m[(i, j)])).collect();
        out.write_record(std::iter::once(l.as_str()).chain(row.iter().map(String::as_str)))?;
    }
    out.flush().map_err(|e| Error::Csv(e.into()))
}

/// Labels and values of a file written by [`write_matrix_csv`].
pub fn read_matrix_csv(path: &Path) -> Result<(Vec<String>, DMatrix<f64>)> {
    let t = read_csv(path)?;
    let labels: Vec<String> = t.header.iter().skip(1).cloned().collect();
    let p = labels.len();
    if t.rows.len() != p {
        return Err(Error::InvalidData(format!("{}: expected {p} rows, found {}", path.display(), t.rows.len())));
    }
    let mut m = DMatrix::zeros(p, p);
    for (i, row) in t.rows.iter().enumerate() {
        for j in 0..p {
            m[(i, j)] = parse_cell(&row[j + 1])?
                .ok_or_else(|| Error::InvalidData(format!("{}: empty cell", path.display())))?;
        }
    }
    Ok((labels, m))
}

/// Nonzero edges, `node1 < node2` in row-major order.
pub fn write_edge_list<W: Write>(w: W, network: &Network) -> Result<()> {
    let mut out = csv_writer(w);
    out.write_record(["node1", "node2", "weight"])?;
    let labels = network.labels();
    for (i, j, v) in network.edges() {
        out.write_record([labels[i].as_str(), labels[j].as_str(), &fmt_num(v)])?;
    }
    out.flush().map_err(|e| Error::Csv(e.into()))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NetworkFile {
    pub labels: Vec<String>,
    /// Row-major weight matrix.
    pub weights: Vec<Vec<f64>>,
    pub provenance: Provenance,
}

impl NetworkFile {
    pub fn from_network(network: &Network) -> Self {
        let w = network.weights();
        NetworkFile {
            labels: network.labels().to_vec(),
            weights: (0..w.nrows()).map(|i| w.row(i).iter().copied().collect()).collect(),
            provenance: network.provenance().clone(),
        }
    }

    pub fn to_network(&self) -> Result<Network> {
        let p = self.labels.len();
        if self.weights.len() != p || self.weights.iter().any(|r| r.len() != p) {
            return Err(Error::InvalidData("network weights must be a p x p matrix".into()));
        }
        let w = DMatrix::from_fn(p, p, |i, j| self.weights[i][j]);
        Ok(Network::new(w, self.labels.clone())?.with_provenance(self.provenance.clone()))
    }
}

/// Nodes in order; raw indices then z-scores.
pub fn write_centrality_csv<W: Write>(w: W, table: &CentralityTable) -> Result<()> {
    let mut out = csv_writer(w);
    out.write_record([
        "node",
        "strength",
        "closeness",
        "betweenness",
        "z_strength",
        "z_closeness",
        "z_betweenness",
    ])?;
    for (k, l) in table.labels.iter().enumerate() {
        out.write_record([
            l.clone(),
            fmt_num(table.strength[k]),
            fmt_num(table.closeness[k]),
            fmt_num(table.betweenness[k]),
            fmt_num(table.z_strength[k]),
            fmt_num(table.z_closeness[k]),
            fmt_num(table.z_betweenness[k]),
        ])?;
    }
    out.flush().map_err(|e| Error::Csv(e.into()))
}

pub fn write_correlation_csv<W: Write>(w: W, cor: &CorrelationMatrix) -> Result<()> {
    write_matrix_csv(w, cor.variable_names(), cor.entries())
}

/// Edge intervals in row-major pair order, all candidate pairs.
pub fn write_edge_ci_csv<W: Write>(w: W, labels: &[String], cis: &[EdgeCi]) -> Result<()> {
    let mut out = csv_writer(w);
    out.write_record(["edge", "node1", "node2", "sample", "mean", "lower", "upper", "nonzero_proportion"])?;
    for c in cis {
        out.write_record([
            edge_label(labels, c.i, c.j),
            labels[c.i].clone(),
            labels[c.j].clone(),
            fmt_num(c.sample),
            fmt_num(c.mean),
            fmt_num(c.lower),
            fmt_num(c.upper),
            fmt_num(c.nonzero_proportion),
        ])?;
    }
    out.flush().map_err(|e| Error::Csv(e.into()))
}

/// Long format: one row per ordered element pair `(a, b)`, `a` major.
/// Blank `significant` marks an untested pair (the diagonal).
pub fn write_difference_matrix_csv<W: Write>(w: W, m: &DifferenceMatrix) -> Result<()> {
    let mut out = csv_writer(w);
    out.write_record(["statistic", "alpha", "element_a", "element_b", "significant"])?;
    let alpha = fmt_num(m.alpha);
    for (a, la) in m.element_labels.iter().enumerate() {
        for (b, lb) in m.element_labels.iter().enumerate() {
            let sig = match m.significant[a][b] {
                Some(true) => "1",
                Some(false) => "0",
                None => "",
            };
            out.write_record([m.statistic.name(), &alpha, la, lb, sig])?;
        }
    }
    out.flush().map_err(|e| Error::Csv(e.into()))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
struct FailureEntry {
    replicate: usize,
    reason: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
struct BootstrapMeta {
    kind: BootstrapKind,
    n_boots: usize,
    base_seed: u64,
    n_cases: usize,
    options: EstimationOptions,
    shrinkage_warning: bool,
    n_successful: usize,
    failures: Vec<FailureEntry>,
    reference: NetworkFile,
}

/// Writes `bootstrap.json` (settings, reference network, failures) and
/// `replicates.csv` (one row per replicate in index order, one column per
/// node pair in row-major order; failed replicates have empty cells).
pub fn save_bootstrap(dir: &Path, result: &BootstrapResult) -> Result<Vec<PathBuf>> {
    let meta = BootstrapMeta {
        kind: result.kind,
        n_boots: result.n_boots,
        base_seed: result.base_seed,
        n_cases: result.n_cases,
        options: result.options.clone(),
        shrinkage_warning: result.shrinkage_warning,
        n_successful: result.n_successful(),
        failures: result
            .failures()
            .into_iter()
            .map(|(b, r)| FailureEntry {
                replicate: b,
                reason: r.to_owned(),
            })
            .collect(),
        reference: NetworkFile::from_network(&result.reference),
    };
    let meta_path = dir.join(BOOTSTRAP_META);
    write_json(&meta_path, &meta)?;

    let labels = result.labels();
    let p = result.p();
    let pairs: Vec<(usize, usize)> = (0..p).flat_map(|i| ((i + 1)..p).map(move |j| (i, j))).collect();
    let rep_path = dir.join(BOOTSTRAP_REPLICATES);
    write_file(&rep_path, |w| {
        let mut out = csv_writer(w);
        let mut header = vec!["replicate".to_owned()];
        header.extend(pairs.iter().map(|&(i, j)| edge_label(labels, i, j)));
        out.write_record(&header)?;
        for (b, rep) in result.replicates.iter().enumerate() {
            let mut row = vec![b.to_string()];
            match rep {
                ReplicateOutcome::Ok(r) => row.extend(pairs.iter().map(|&(i, j)| fmt_num(r.weights[(i, j)]))),
                ReplicateOutcome::Failed(_) => row.extend(pairs.iter().map(|_| String::new())),
            }
            out.write_record(&row)?;
        }
        out.flush().map_err(|e| Error::Csv(e.into()))
    })?;
    Ok(vec![meta_path, rep_path])
}

/// Inverse of [`save_bootstrap`]. Centralities are recomputed from the weights.
pub fn load_bootstrap(dir: &Path) -> Result<BootstrapResult> {
    let meta: BootstrapMeta = read_json(&dir.join(BOOTSTRAP_META))?;
    let reference = meta.reference.to_network()?;
    let p = reference.p();
    let table = read_csv(&dir.join(BOOTSTRAP_REPLICATES))?;
    let n_pairs = p * (p - 1) / 2;
    if table.header.len() != n_pairs + 1 || table.rows.len() != meta.n_boots {
        return Err(Error::InvalidData(format!(
            "{} does not match {}",
            BOOTSTRAP_REPLICATES, BOOTSTRAP_META
        )));
    }
    let reasons: std::collections::HashMap<usize, String> =
        meta.failures.into_iter().map(|f| (f.replicate, f.reason)).collect();
    let mut replicates = Vec::with_capacity(meta.n_boots);
    for (b, row) in table.rows.iter().enumerate() {
        if let Some(reason) = reasons.get(&b) {
            replicates.push(ReplicateOutcome::Failed(reason.clone()));
            continue;
        }
        let mut w = DMatrix::zeros(p, p);
        let mut cells = row.iter().skip(1);
        for i in 0..p {
            for j in (i + 1)..p {
                let v = parse_cell(cells.next().map_or("", String::as_str))?
                    .ok_or_else(|| Error::InvalidData(format!("replicate {b} has an empty weight")))?;
                w[(i, j)] = v;
                w[(j, i)] = v;
            }
        }
        replicates.push(ReplicateOutcome::Ok(Replicate::from_weights(w)));
    }
    Ok(BootstrapResult {
        kind: meta.kind,
        n_boots: meta.n_boots,
        base_seed: meta.base_seed,
        options: meta.options,
        n_cases: meta.n_cases,
        reference_centrality: centrality_table(&reference),
        reference,
        replicates,
        shrinkage_warning: meta.shrinkage_warning,
    })
}

/// One row per (level, replicate), levels in the order tested. Each index
/// column holds the correlation with the full-sample values; empty when
/// undefined or when the replicate failed (then `error` is set).
pub fn write_subset_csv<W: Write>(w: W, result: &SubsetBootstrapResult) -> Result<()> {
    let mut out = csv_writer(w);
    let mut header = vec!["drop", "retained", "replicate"];
    header.extend(StabilityIndex::ALL.iter().map(|i| i.name()));
    header.push("error");
    out.write_record(&header)?;
    for (l, level) in result.outcomes.iter().enumerate() {
        for (b, o) in level.iter().enumerate() {
            let mut row = vec![fmt_num(result.drop_levels[l]), result.retained[l].to_string(), b.to_string()];
            match o {
                SubsetOutcome::Ok(c) => {
                    row.extend(c.iter().map(|&v| fmt_opt(v)));
                    row.push(String::new());
                }
                SubsetOutcome::Failed(msg) => {
                    row.extend(StabilityIndex::ALL.iter().map(|_| String::new()));
                    row.push(msg.clone());
                }
            }
            out.write_record(&row)?;
        }
    }
    out.flush().map_err(|e| Error::Csv(e.into()))
}

/// One row per index in [`StabilityIndex::ALL`] order.
pub fn write_cs_csv<W: Write>(w: W, cs: &[CsCoefficient]) -> Result<()> {
    let mut out = csv_writer(w);
    out.write_record(["index", "cs", "cor_threshold", "probability"])?;
    for c in cs {
        out.write_record([c.index.name(), &fmt_num(c.value), &fmt_num(c.cor_threshold), &fmt_num(c.probability)])?;
    }
    out.flush().map_err(|e| Error::Csv(e.into()))
}

/// Records in job order, then metric order within a job.
pub fn write_simulation_csv<W: Write>(w: W, result: &SimulationResult) -> Result<()> {
    let mut out = csv_writer(w);
    out.write_record(["study", "rewiring", "n", "replication", "metric", "alpha", "value"])?;
    for r in &result.records {
        out.write_record([
            result.study.name(),
            &fmt_num(r.rewiring),
            &r.n.to_string(),
            &r.replication.to_string(),
            &r.metric,
            &fmt_opt(r.alpha),
            &fmt_num(r.value),
        ])?;
    }
    out.flush().map_err(|e| Error::Csv(e.into()))
}

#[derive(Serialize)]
struct SimulationSummaryFile<'a> {
    study: crate::simgen::Study,
    config: &'a crate::simgen::SimulationConfig,
    n_jobs: usize,
    failure_rate: f64,
    failures: &'a [crate::simgen::SimulationFailure],
    summaries: &'a [crate::simgen::MetricSummary],
}

pub fn write_simulation_summary(path: &Path, result: &SimulationResult) -> Result<()> {
    write_json(
        path,
        &SimulationSummaryFile {
            study: result.study,
            config: &result.config,
            n_jobs: result.n_jobs,
            failure_rate: result.failure_rate(),
            failures: &result.failures,
            summaries: &result.summaries,
        },
    )
}

#[cfg(test)]
mod tests {
    use super::*;

    fn net() -> Network {
        let w = DMatrix::from_row_slice(3, 3, &[0.0, 0.1, -0.25, 0.1, 0.0, 0.0, -0.25, 0.0, 0.0]);
        Network::new(w, vec!["a".into(), "b".into(), "c".into()]).unwrap()
    }

    #[test]
    fn edge_list_format() {
        let mut buf = Vec::new();
        write_edge_list(&mut buf, &net()).unwrap();
        assert_eq!(String::from_utf8(buf).unwrap(), "node1,node2,weight\na,b,0.1\na,c,-0.25\n");
    }

    #[test]
    fn matrix_round_trip() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("m.csv");
        let n = net();
        write_file(&path, |w| write_matrix_csv(w, n.labels(), n.weights())).unwrap();
        let (labels, m) = read_matrix_csv(&path).unwrap();
        assert_eq!(labels, n.labels());
        assert_eq!(&m, n.weights());
    }

    #[test]
    fn network_file_round_trip() {
        let n = net();
        let f = NetworkFile::from_network(&n);
        let back: NetworkFile = serde_json::from_str(&serde_json::to_string(&f).unwrap()).unwrap();
        assert_eq!(back.to_network().unwrap(), n);
    }

    #[test]
    fn missing_file_is_reported() {
        assert!(matches!(read_csv(Path::new("/nonexistent/x.csv")), Err(Error::FileNotFound(_))));
    }
}
