//! Brute-force Euclidean k-nearest-neighbour classification.
//!
//! Neighbours are ordered by (squared distance, training index). A tied vote
//! goes to the benign class. The score is the malignant fraction of the k
//! neighbours.

use serde::{Deserialize, Serialize};

use crate::dataset::{kfold, Diagnosis, LabeledDataset};
use crate::error::{Error, Result};
use crate::numerics::{squared_distance, Matrix};

#[derive(Clone, Debug)]
pub struct KnnModel {
    features: Matrix,
    labels: Vec<Diagnosis>,
    k: usize,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct KnnPrediction {
    pub label: Diagnosis,
    /// Fraction of the k neighbours that are malignant.
    pub score: f64,
}

/// How a training point is treated when it is itself the query.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SelfMatch {
    /// The point counts as its own nearest neighbour.
    Include,
    /// Leave-one-out: the point is removed from its own neighbour set.
    Exclude,
}

impl KnnModel {
    pub fn new(features: Matrix, labels: Vec<Diagnosis>, k: usize) -> Result<Self> {
        if labels.len() != features.rows() {
            return Err(Error::LengthMismatch {
                left: features.rows(),
                right: labels.len(),
            });
        }
        if k == 0 || k > labels.len() {
            return Err(Error::Config(format!(
                "k = {k} must be in 1..={}",
                labels.len()
            )));
        }
        Ok(KnnModel {
            features,
            labels,
            k,
        })
    }

    pub fn from_dataset(data: &LabeledDataset, k: usize) -> Result<Self> {
        Self::new(data.features().clone(), data.labels().to_vec(), k)
    }

    pub fn k(&self) -> usize {
        self.k
    }

    /// Indices of the k nearest training rows, skipping `skip` if given.
    pub fn neighbors(&self, x: &[f64], skip: Option<usize>) -> Result<Vec<usize>> {
        if x.len() != self.features.cols() {
            return Err(Error::DimensionMismatch {
                expected: self.features.cols(),
                found: x.len(),
            });
        }
        let mut d: Vec<(f64, usize)> = self
            .features
            .row_iter()
            .enumerate()
            .filter(|(i, _)| Some(*i) != skip)
            .map(|(i, row)| (squared_distance(row, x), i))
            .collect();
        let k = self.k.min(d.len());
        if k == 0 {
            return Err(Error::Config("no neighbours left".into()));
        }
        let by_key = |a: &(f64, usize), b: &(f64, usize)| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1));
        if k < d.len() {
            d.select_nth_unstable_by(k - 1, by_key);
            d.truncate(k);
        }
        d.sort_unstable_by(by_key);
        Ok(d.into_iter().map(|(_, i)| i).collect())
    }

    fn vote(&self, neighbors: &[usize]) -> KnnPrediction {
        let m = neighbors
            .iter()
            .filter(|&&i| self.labels[i].is_positive())
            .count();
        let k = neighbors.len();
        KnnPrediction {
            label: Diagnosis::from_positive(2 * m > k),
            score: m as f64 / k as f64,
        }
    }

    pub fn predict(&self, x: &[f64]) -> Result<KnnPrediction> {
        Ok(self.vote(&self.neighbors(x, None)?))
    }

    pub fn predict_batch(&self, xs: &Matrix) -> Result<Vec<KnnPrediction>> {
        xs.row_iter().map(|x| self.predict(x)).collect()
    }

    /// Predictions for the model's own training rows.
    pub fn training_predictions(&self, mode: SelfMatch) -> Result<Vec<KnnPrediction>> {
        (0..self.labels.len())
            .map(|i| {
                let skip = match mode {
                    SelfMatch::Include => None,
                    SelfMatch::Exclude => Some(i),
                };
                Ok(self.vote(&self.neighbors(self.features.row(i), skip)?))
            })
            .collect()
    }
}

pub fn knn_predict(model: &KnnModel, x: &[f64]) -> Result<KnnPrediction> {
    model.predict(x)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct KSelection {
    pub best_k: usize,
    /// (k, mean validation error) for every candidate, in input order.
    pub errors: Vec<(usize, f64)>,
}

/// Picks k by mean k-fold validation error; ties go to the smaller k.
pub fn knn_select_k(
    data: &LabeledDataset,
    candidate_ks: &[usize],
    folds: usize,
    seed: u64,
) -> Result<KSelection> {
    if candidate_ks.is_empty() {
        return Err(Error::Config("no candidate k values".into()));
    }
    let fold_sets = kfold(data.len(), folds, seed)?;
    let mut errors = Vec::with_capacity(candidate_ks.len());
    for &k in candidate_ks {
        let mut total = 0.0;
        for (train, val) in &fold_sets {
            let tr = data.subset(train);
            let va = data.subset(val);
            let model = KnnModel::from_dataset(&tr, k)?;
            let wrong = model
                .predict_batch(va.features())?
                .iter()
                .zip(va.labels())
                .filter(|(p, t)| p.label != **t)
                .count();
            total += wrong as f64 / va.len() as f64;
        }
        errors.push((k, total / fold_sets.len() as f64));
    }
    let best_k = errors
        .iter()
        .min_by(|a, b| a.1.total_cmp(&b.1).then(a.0.cmp(&b.0)))
        .map(|e| e.0)
        .expect("non-empty");
    Ok(KSelection { best_k, errors })
}
