use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use super::polychoric::{polychoric, ContingencyTable};
use super::psd::nearest_psd;
use crate::ingest::{apply_missing_policy, Dataset, MissingPolicy, VariableType};
use crate::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum CorrelationMethod {
    /// Polychoric for ordinal-ordinal pairs, Pearson otherwise.
    #[default]
    Auto,
    Pearson,
    Spearman,
    Polychoric,
}

impl std::str::FromStr for CorrelationMethod {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "auto" => Ok(CorrelationMethod::Auto),
            "pearson" => Ok(CorrelationMethod::Pearson),
            "spearman" => Ok(CorrelationMethod::Spearman),
            "polychoric" => Ok(CorrelationMethod::Polychoric),
            other => Err(Error::InvalidArgument(format!("unknown correlation method {other:?}"))),
        }
    }
}

/// Symmetric, unit-diagonal input matrix for network estimation.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CorrelationMatrix {
    entries: DMatrix<f64>,
    method: CorrelationMethod,
    psd_repaired: bool,
    variable_names: Vec<String>,
    /// Cases in the dataset the matrix was computed from (after listwise deletion).
    n_cases: usize,
    /// Polychoric pairs whose estimate sits at the search bound.
    degenerate_pairs: Vec<(usize, usize)>,
}

impl CorrelationMatrix {
    /// Wrap a user-supplied matrix, validating shape and repairing to PSD.
    pub fn from_matrix(
        entries: DMatrix<f64>,
        variable_names: Vec<String>,
        method: CorrelationMethod,
        n_cases: usize,
    ) -> Result<Self> {
        let p = entries.nrows();
        if entries.ncols() != p || variable_names.len() != p {
            return Err(Error::InvalidArgument("correlation matrix must be square with one name per row".into()));
        }
        for i in 0..p {
            if (entries[(i, i)] - 1.0).abs() > 1e-12 {
                return Err(Error::InvalidArgument(format!("diagonal entry {i} is not 1")));
            }
            for j in 0..i {
                let v = entries[(i, j)];
                if v != entries[(j, i)] || !(-1.0..=1.0).contains(&v) {
                    return Err(Error::InvalidArgument(format!(
                        "entry ({i}, {j}) must be symmetric and in [-1, 1]"
                    )));
                }
            }
        }
        let (entries, psd_repaired) = nearest_psd(&entries);
        Ok(CorrelationMatrix {
            entries,
            method,
            psd_repaired,
            variable_names,
            n_cases,
            degenerate_pairs: Vec::new(),
        })
    }

    pub fn entries(&self) -> &DMatrix<f64> {
        &self.entries
    }

    pub fn method(&self) -> CorrelationMethod {
        self.method
    }

    pub fn psd_repaired(&self) -> bool {
        self.psd_repaired
    }

    pub fn variable_names(&self) -> &[String] {
        &self.variable_names
    }

    pub fn n_cases(&self) -> usize {
        self.n_cases
    }

    pub fn degenerate_pairs(&self) -> &[(usize, usize)] {
        &self.degenerate_pairs
    }

    pub fn p(&self) -> usize {
        self.entries.nrows()
    }

    /// Largest absolute off-diagonal entry.
    pub fn max_abs_off_diagonal(&self) -> f64 {
        let p = self.p();
        let mut m: f64 = 0.0;
        for j in 0..p {
            for i in 0..j {
                m = m.max(self.entries[(i, j)].abs());
            }
        }
        m
    }
}

/// Product-moment correlation.
pub fn pearson(x: &[f64], y: &[f64]) -> Result<f64> {
    if x.len() != y.len() {
        return Err(Error::InvalidArgument(format!(
            "length mismatch: {} vs {}",
            x.len(),
            y.len()
        )));
    }
    if x.len() < 2 {
        return Err(Error::InvalidArgument("need at least 2 observations".into()));
    }
    let n = x.len() as f64;
    let mx = x.iter().sum::<f64>() / n;
    let my = y.iter().sum::<f64>() / n;
    let (mut sxy, mut sxx, mut syy) = (0.0, 0.0, 0.0);
    for (&a, &b) in x.iter().zip(y) {
        let (dx, dy) = (a - mx, b - my);
        sxy += dx * dy;
        sxx += dx * dx;
        syy += dy * dy;
    }
    if sxx == 0.0 || syy == 0.0 {
        return Err(Error::ConstantInput);
    }
    Ok((sxy / (sxx.sqrt() * syy.sqrt())).clamp(-1.0, 1.0))
}

/// 1-based ranks with ties replaced by their average rank.
pub fn midranks(x: &[f64]) -> Vec<f64> {
    let mut order: Vec<usize> = (0..x.len()).collect();
    order.sort_by(|&a, &b| x[a].total_cmp(&x[b]));
    let mut ranks = vec![0.0; x.len()];
    let mut start = 0;
    while start < order.len() {
        let mut end = start + 1;
        while end < order.len() && x[order[end]] == x[order[start]] {
            end += 1;
        }
        // positions start..end (0-based) share rank mean of (start+1)..=end
        let r = (start + 1 + end) as f64 / 2.0;
        for &k in &order[start..end] {
            ranks[k] = r;
        }
        start = end;
    }
    ranks
}

/// Pearson correlation of mid-ranks.
pub fn spearman(x: &[f64], y: &[f64]) -> Result<f64> {
    if x.len() != y.len() {
        return Err(Error::InvalidArgument(format!(
            "length mismatch: {} vs {}",
            x.len(),
            y.len()
        )));
    }
    pearson(&midranks(x), &midranks(y))
}

#[derive(Clone, Copy, PartialEq)]
enum PairMethod {
    Pearson,
    Spearman,
    Polychoric,
}

const MISSING_CODE: u8 = u8::MAX;

fn level_codes(col: &[f64], levels: &[f64]) -> Vec<u8> {
    col.iter()
        .map(|&v| {
            if v.is_nan() {
                MISSING_CODE
            } else {
                // Level sets are small (at most a handful of categories).
                levels
                    .iter()
                    .position(|&l| l == v)
                    .map_or(MISSING_CODE, |i| i as u8)
            }
        })
        .collect()
}

/// One bitset of case indicators per level, so a contingency cell is the
/// popcount of an intersection. Missing cells belong to no level.
struct LevelBits {
    levels: usize,
    words: usize,
    bits: Vec<u64>,
}

impl LevelBits {
    fn new(codes: &[u8], levels: usize) -> Self {
        let words = codes.len().div_ceil(64);
        let mut bits = vec![0u64; levels * words];
        for (r, &c) in codes.iter().enumerate() {
            if (c as usize) < levels {
                bits[c as usize * words + r / 64] |= 1 << (r % 64);
            }
        }
        LevelBits { levels, words, bits }
    }

    fn level(&self, l: usize) -> &[u64] {
        &self.bits[l * self.words..(l + 1) * self.words]
    }

    fn table(&self, other: &LevelBits) -> ContingencyTable {
        let mut counts = Vec::with_capacity(self.levels * other.levels);
        for a in 0..self.levels {
            let xa = self.level(a);
            for b in 0..other.levels {
                let n: u32 = xa.iter().zip(other.level(b)).map(|(u, v)| (u & v).count_ones()).sum();
                counts.push(n as u64);
            }
        }
        ContingencyTable::from_flat(self.levels, other.levels, counts)
    }
}

fn complete_pairs(x: &[f64], y: &[f64]) -> (Vec<f64>, Vec<f64>) {
    x.iter()
        .zip(y)
        .filter(|(a, b)| !a.is_nan() && !b.is_nan())
        .map(|(&a, &b)| (a, b))
        .unzip()
}

/// Correlation matrix for a dataset, repaired to PSD if needed.
///
/// `Auto` uses polychoric correlations for ordinal-ordinal pairs and Pearson
/// otherwise (mixed pairs included). Missing cells follow the dataset's
/// policy: listwise drops incomplete cases first, pairwise uses complete pairs.
pub fn correlation_matrix(dataset: &Dataset, method: CorrelationMethod) -> Result<CorrelationMatrix> {
    let reduced;
    let ds = if dataset.missing_policy() == MissingPolicy::Listwise && dataset.has_missing() {
        reduced = apply_missing_policy(dataset, MissingPolicy::Listwise)?;
        &reduced
    } else {
        dataset
    };
    let p = ds.p();
    let types = ds.variable_types();

    if method == CorrelationMethod::Polychoric {
        if let Some(j) = types.iter().position(|t| !t.is_ordinal()) {
            return Err(Error::InvalidArgument(format!(
                "polychoric correlation requested but {:?} is continuous",
                ds.names()[j]
            )));
        }
    }

    let pair_method = |i: usize, j: usize| match method {
        CorrelationMethod::Pearson => PairMethod::Pearson,
        CorrelationMethod::Spearman => PairMethod::Spearman,
        CorrelationMethod::Polychoric => PairMethod::Polychoric,
        CorrelationMethod::Auto => {
            if types[i].is_ordinal() && types[j].is_ordinal() {
                PairMethod::Polychoric
            } else {
                PairMethod::Pearson
            }
        }
    };

    let codes: Vec<Option<LevelBits>> = (0..p)
        .map(|j| match &types[j] {
            VariableType::Ordinal { levels } if levels.len() < MISSING_CODE as usize => {
                Some(LevelBits::new(&level_codes(ds.column(j), levels), levels.len()))
            }
            _ => None,
        })
        .collect();

    let any_missing = ds.has_missing();
    // Without missing cells every pair sees the same cases, so per-column
    // standardization and ranks can be computed once.
    let needs_moments = (0..p).any(|i| (0..p).any(|j| i != j && pair_method(i, j) != PairMethod::Polychoric));
    let standardized: Option<Vec<Vec<f64>>> = if any_missing || !needs_moments {
        None
    } else {
        let spear = (0..p).any(|i| (0..p).any(|j| i != j && pair_method(i, j) == PairMethod::Spearman));
        Some(
            (0..p)
                .map(|j| {
                    let col = if spear {
                        midranks(ds.column(j))
                    } else {
                        ds.column(j).to_vec()
                    };
                    standardize(&col)
                })
                .collect::<Result<Vec<_>>>()?,
        )
    };

    let mut r = DMatrix::<f64>::identity(p, p);
    let mut degenerate_pairs = Vec::new();
    for j in 0..p {
        for i in 0..j {
            let value = match pair_method(i, j) {
                PairMethod::Polychoric => {
                    let bx = codes[i].as_ref().expect("ordinal column has codes");
                    let by = codes[j].as_ref().expect("ordinal column has codes");
                    let est = polychoric(&bx.table(by))?;
                    if est.degenerate {
                        degenerate_pairs.push((i, j));
                    }
                    est.rho
                }
                m => match &standardized {
                    Some(z) => z[i]
                        .iter()
                        .zip(&z[j])
                        .map(|(a, b)| a * b)
                        .sum::<f64>()
                        .clamp(-1.0, 1.0),
                    None => {
                        let (x, y) = complete_pairs(ds.column(i), ds.column(j));
                        if m == PairMethod::Spearman {
                            spearman(&x, &y)?
                        } else {
                            pearson(&x, &y)?
                        }
                    }
                },
            };
            r[(i, j)] = value;
            r[(j, i)] = value;
        }
    }

    let (entries, psd_repaired) = nearest_psd(&r);
    Ok(CorrelationMatrix {
        entries,
        method,
        psd_repaired,
        variable_names: ds.names().to_vec(),
        n_cases: ds.n(),
        degenerate_pairs,
    })
}

/// Centre and scale to unit norm, so dot products are correlations.
fn standardize(x: &[f64]) -> Result<Vec<f64>> {
    let n = x.len() as f64;
    let m = x.iter().sum::<f64>() / n;
    let ss = x.iter().map(|v| (v - m) * (v - m)).sum::<f64>();
    if ss == 0.0 {
        return Err(Error::ConstantInput);
    }
    let s = ss.sqrt();
    Ok(x.iter().map(|v| (v - m) / s).collect())
}
