//! WDBC ingestion, z-score standardization, train/test splits and k-fold indices.

use std::fmt::Write as _;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::numerics::{Matrix, RngState};

/// Number of real-valued features per WDBC record.
pub const WDBC_FEATURES: usize = 30;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Diagnosis {
    Benign,
    Malignant,
}

impl Diagnosis {
    /// +1 for malignant, −1 for benign.
    pub fn signed(self) -> f64 {
        match self {
            Diagnosis::Malignant => 1.0,
            Diagnosis::Benign => -1.0,
        }
    }

    /// 1 for malignant, 0 for benign.
    pub fn binary(self) -> f64 {
        match self {
            Diagnosis::Malignant => 1.0,
            Diagnosis::Benign => 0.0,
        }
    }

    pub fn is_positive(self) -> bool {
        self == Diagnosis::Malignant
    }

    pub fn from_positive(positive: bool) -> Self {
        if positive {
            Diagnosis::Malignant
        } else {
            Diagnosis::Benign
        }
    }

    pub fn code(self) -> char {
        match self {
            Diagnosis::Malignant => 'M',
            Diagnosis::Benign => 'B',
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct LabeledDataset {
    features: Matrix,
    labels: Vec<Diagnosis>,
    ids: Vec<String>,
}

impl LabeledDataset {
    pub fn new(features: Matrix, labels: Vec<Diagnosis>, ids: Vec<String>) -> Result<Self> {
        if labels.len() != features.rows() {
            return Err(Error::LengthMismatch {
                left: features.rows(),
                right: labels.len(),
            });
        }
        if ids.len() != features.rows() {
            return Err(Error::LengthMismatch {
                left: features.rows(),
                right: ids.len(),
            });
        }
        if !features.is_finite() {
            return Err(Error::Config("non-finite feature value".into()));
        }
        Ok(LabeledDataset {
            features,
            labels,
            ids,
        })
    }

    /// Dataset with ids `0..n`.
    pub fn from_parts(features: Matrix, labels: Vec<Diagnosis>) -> Result<Self> {
        let ids = (0..labels.len()).map(|i| i.to_string()).collect();
        Self::new(features, labels, ids)
    }

    pub fn len(&self) -> usize {
        self.labels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.labels.is_empty()
    }

    pub fn n_features(&self) -> usize {
        self.features.cols()
    }

    pub fn features(&self) -> &Matrix {
        &self.features
    }

    pub fn labels(&self) -> &[Diagnosis] {
        &self.labels
    }

    pub fn ids(&self) -> &[String] {
        &self.ids
    }

    /// (benign, malignant)
    pub fn class_counts(&self) -> (usize, usize) {
        let m = self.labels.iter().filter(|l| l.is_positive()).count();
        (self.len() - m, m)
    }

    pub fn signed_labels(&self) -> Vec<f64> {
        self.labels.iter().map(|l| l.signed()).collect()
    }

    pub fn binary_labels(&self) -> Vec<f64> {
        self.labels.iter().map(|l| l.binary()).collect()
    }

    pub fn subset(&self, idx: &[usize]) -> LabeledDataset {
        LabeledDataset {
            features: self.features.select_rows(idx),
            labels: idx.iter().map(|&i| self.labels[i]).collect(),
            ids: idx.iter().map(|&i| self.ids[i].clone()).collect(),
        }
    }

    pub fn with_features(&self, features: Matrix) -> Result<LabeledDataset> {
        Self::new(features, self.labels.clone(), self.ids.clone())
    }

    /// Canonical text form: one `id,diagnosis,f1,...` line per case.
    pub fn to_wdbc_string(&self) -> String {
        let mut out = String::new();
        for i in 0..self.len() {
            out.push_str(&self.ids[i]);
            out.push(',');
            out.push(self.labels[i].code());
            for v in self.features.row(i) {
                let _ = write!(out, ",{v}");
            }
            out.push('\n');
        }
        out
    }
}

/// Parses WDBC records. Blank lines and CRLF endings are accepted.
pub fn parse_wdbc(text: &str) -> Result<LabeledDataset> {
    let mut data = Vec::new();
    let mut labels = Vec::new();
    let mut ids = Vec::new();
    for (lineno, raw) in text.lines().enumerate() {
        let line = raw.trim_end_matches('\r').trim();
        if line.is_empty() {
            continue;
        }
        let line_no = lineno + 1;
        let err = |message: String| Error::Parse {
            line: line_no,
            message,
        };
        let fields: Vec<&str> = line.split(',').map(str::trim).collect();
        if fields.len() != WDBC_FEATURES + 2 {
            return Err(err(format!(
                "expected {} fields, found {}",
                WDBC_FEATURES + 2,
                fields.len()
            )));
        }
        if fields[0].is_empty() {
            return Err(err("empty id".into()));
        }
        let label = match fields[1] {
            "M" => Diagnosis::Malignant,
            "B" => Diagnosis::Benign,
            other => return Err(err(format!("unknown diagnosis code `{other}`"))),
        };
        for (j, f) in fields[2..].iter().enumerate() {
            let v: f64 = f
                .parse()
                .map_err(|_| err(format!("feature {}: cannot parse `{f}`", j + 1)))?;
            if !v.is_finite() {
                return Err(err(format!("feature {}: non-finite value", j + 1)));
            }
            data.push(v);
        }
        ids.push(fields[0].to_string());
        labels.push(label);
    }
    if labels.is_empty() {
        return Err(Error::Parse {
            line: 0,
            message: "no records".into(),
        });
    }
    let features = Matrix::from_vec(labels.len(), WDBC_FEATURES, data)?;
    LabeledDataset::new(features, labels, ids)
}

pub fn read_wdbc(path: impl AsRef<Path>) -> Result<LabeledDataset> {
    let path = path.as_ref();
    let text = std::fs::read_to_string(path).map_err(|source| Error::Io {
        path: path.display().to_string(),
        source,
    })?;
    parse_wdbc(&text)
}

/// Per-column z-score transform. Uses the sample (n − 1) standard deviation.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Standardizer {
    pub mean: Vec<f64>,
    pub std: Vec<f64>,
}

impl Standardizer {
    pub fn fit(features: &Matrix) -> Result<Self> {
        let n = features.rows();
        if n < 2 {
            return Err(Error::Config(format!(
                "standardizer needs at least 2 rows, got {n}"
            )));
        }
        let p = features.cols();
        let mut mean = vec![0.0; p];
        for row in features.row_iter() {
            for (m, x) in mean.iter_mut().zip(row) {
                *m += x;
            }
        }
        mean.iter_mut().for_each(|m| *m /= n as f64);
        let mut var = vec![0.0; p];
        for row in features.row_iter() {
            for ((v, x), m) in var.iter_mut().zip(row).zip(&mean) {
                *v += (x - m) * (x - m);
            }
        }
        let mut std = Vec::with_capacity(p);
        for (j, v) in var.into_iter().enumerate() {
            let s = (v / (n - 1) as f64).sqrt();
            if !(s > 0.0) {
                return Err(Error::DegenerateColumn(j));
            }
            std.push(s);
        }
        Ok(Standardizer { mean, std })
    }

    pub fn apply(&self, features: &Matrix) -> Result<Matrix> {
        if features.cols() != self.mean.len() {
            return Err(Error::DimensionMismatch {
                expected: self.mean.len(),
                found: features.cols(),
            });
        }
        let mut out = features.clone();
        for i in 0..out.rows() {
            for ((x, m), s) in out.row_mut(i).iter_mut().zip(&self.mean).zip(&self.std) {
                *x = (*x - m) / s;
            }
        }
        Ok(out)
    }

    pub fn apply_dataset(&self, data: &LabeledDataset) -> Result<LabeledDataset> {
        data.with_features(self.apply(data.features())?)
    }
}

pub fn fit_standardizer(data: &LabeledDataset) -> Result<Standardizer> {
    Standardizer::fit(data.features())
}

pub fn apply_standardizer(s: &Standardizer, features: &Matrix) -> Result<Matrix> {
    s.apply(features)
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct SplitSpec {
    pub train_fraction: f64,
    pub seed: u64,
    pub stratified: bool,
}

impl Default for SplitSpec {
    fn default() -> Self {
        SplitSpec {
            train_fraction: 0.8,
            seed: 0,
            stratified: true,
        }
    }
}

/// Train and test row indices, each ascending.
///
/// The train part has `round(fraction · n)` rows. In stratified mode each
/// class contributes `floor(fraction · n_c)` rows and the leftover rows go to
/// the classes with the largest fractional remainders (benign first on ties).
pub fn split_indices(labels: &[Diagnosis], spec: &SplitSpec) -> Result<(Vec<usize>, Vec<usize>)> {
    if !(spec.train_fraction > 0.0 && spec.train_fraction < 1.0) {
        return Err(Error::Config(format!(
            "train fraction {} outside (0, 1)",
            spec.train_fraction
        )));
    }
    let n = labels.len();
    let n_train = (spec.train_fraction * n as f64).round() as usize;
    let mut rng = RngState::new(spec.seed).split_named("split");
    let mut train = if spec.stratified {
        let strata: Vec<Vec<usize>> = [Diagnosis::Benign, Diagnosis::Malignant]
            .iter()
            .map(|c| (0..n).filter(|&i| labels[i] == *c).collect())
            .collect();
        let exact: Vec<f64> = strata
            .iter()
            .map(|s| spec.train_fraction * s.len() as f64)
            .collect();
        let mut take: Vec<usize> = exact.iter().map(|e| e.floor() as usize).collect();
        let mut order: Vec<usize> = (0..strata.len()).collect();
        order.sort_by(|&a, &b| {
            let ra = exact[a] - exact[a].floor();
            let rb = exact[b] - exact[b].floor();
            rb.total_cmp(&ra).then(a.cmp(&b))
        });
        let mut missing = n_train.saturating_sub(take.iter().sum());
        for &c in order.iter().cycle().take(order.len() * 2) {
            if missing == 0 {
                break;
            }
            if take[c] < strata[c].len() {
                take[c] += 1;
                missing -= 1;
            }
        }
        let mut train = Vec::with_capacity(n_train);
        for (stratum, k) in strata.into_iter().zip(take) {
            let mut s = stratum;
            rng.shuffle(&mut s);
            train.extend_from_slice(&s[..k]);
        }
        train
    } else {
        let perm = rng.permutation(n);
        perm[..n_train].to_vec()
    };
    train.sort_unstable();
    let mut in_train = vec![false; n];
    for &i in &train {
        in_train[i] = true;
    }
    let test = (0..n).filter(|&i| !in_train[i]).collect();
    Ok((train, test))
}

pub fn split(data: &LabeledDataset, spec: &SplitSpec) -> Result<(LabeledDataset, LabeledDataset)> {
    let (train, test) = split_indices(data.labels(), spec)?;
    Ok((data.subset(&train), data.subset(&test)))
}

/// One cross-validation fold: (train indices, validation indices), each ascending.
pub type Fold = (Vec<usize>, Vec<usize>);

/// Shuffled k-fold partition of `0..n`. The first `n mod k` folds hold one extra item.
pub fn kfold(n: usize, k: usize, seed: u64) -> Result<Vec<Fold>> {
    if k < 2 || k > n {
        return Err(Error::BadFoldCount { n, k });
    }
    let perm = RngState::new(seed).split_named("kfold").permutation(n);
    let base = n / k;
    let extra = n % k;
    let mut folds = Vec::with_capacity(k);
    let mut start = 0;
    for f in 0..k {
        let size = base + usize::from(f < extra);
        let mut val = perm[start..start + size].to_vec();
        val.sort_unstable();
        let mut train: Vec<usize> = perm[..start]
            .iter()
            .chain(&perm[start + size..])
            .copied()
            .collect();
        train.sort_unstable();
        folds.push((train, val));
        start += size;
    }
    Ok(folds)
}
