//! Confusion counts, ROC curves, AUC and accuracy sweeps. Malignant is the positive class.

use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use crate::dataset::Diagnosis;
use crate::error::{Error, Result};

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct ConfusionMatrix {
    pub tp: usize,
    pub fp: usize,
    pub tn: usize,
    pub fn_: usize,
}

impl ConfusionMatrix {
    pub fn total(&self) -> usize {
        self.tp + self.fp + self.tn + self.fn_
    }

    pub fn misses(&self) -> usize {
        self.fp + self.fn_
    }

    /// `(fp + fn) / n`
    pub fn error_rate(&self) -> f64 {
        self.misses() as f64 / self.total() as f64
    }

    pub fn accuracy(&self) -> f64 {
        1.0 - self.error_rate()
    }
}

pub fn confusion(preds: &[Diagnosis], truths: &[Diagnosis]) -> Result<ConfusionMatrix> {
    if preds.len() != truths.len() {
        return Err(Error::LengthMismatch {
            left: preds.len(),
            right: truths.len(),
        });
    }
    let mut cm = ConfusionMatrix::default();
    for (p, t) in preds.iter().zip(truths) {
        match (p.is_positive(), t.is_positive()) {
            (true, true) => cm.tp += 1,
            (true, false) => cm.fp += 1,
            (false, false) => cm.tn += 1,
            (false, true) => cm.fn_ += 1,
        }
    }
    Ok(cm)
}

/// `(TP/(TP+FN), FP/(FP+TN))`
pub fn tpr_fpr(cm: &ConfusionMatrix) -> Result<(f64, f64)> {
    if cm.tp + cm.fn_ == 0 {
        return Err(Error::EmptyClass("positive"));
    }
    if cm.fp + cm.tn == 0 {
        return Err(Error::EmptyClass("negative"));
    }
    Ok((
        cm.tp as f64 / (cm.tp + cm.fn_) as f64,
        cm.fp as f64 / (cm.fp + cm.tn) as f64,
    ))
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct RocPoint {
    /// Cases with score ≥ threshold are called malignant. The first point uses +∞.
    pub threshold: f64,
    pub fpr: f64,
    pub tpr: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RocCurve {
    pub points: Vec<RocPoint>,
    pub auc: f64,
}

fn class_sizes(truths: &[Diagnosis]) -> Result<(usize, usize)> {
    let pos = truths.iter().filter(|t| t.is_positive()).count();
    let neg = truths.len() - pos;
    if pos == 0 {
        return Err(Error::EmptyClass("positive"));
    }
    if neg == 0 {
        return Err(Error::EmptyClass("negative"));
    }
    Ok((pos, neg))
}

/// ROC over the distinct scores, descending, one point per tie group, with
/// trapezoidal area. Larger scores mean "more malignant".
pub fn roc_curve(scores: &[f64], truths: &[Diagnosis]) -> Result<RocCurve> {
    if scores.len() != truths.len() {
        return Err(Error::LengthMismatch {
            left: scores.len(),
            right: truths.len(),
        });
    }
    if scores.iter().any(|s| s.is_nan()) {
        return Err(Error::Config("NaN score".into()));
    }
    let (pos, neg) = class_sizes(truths)?;
    let mut order: Vec<usize> = (0..scores.len()).collect();
    order.sort_by(|&a, &b| scores[b].total_cmp(&scores[a]));
    let mut points = vec![RocPoint {
        threshold: f64::INFINITY,
        fpr: 0.0,
        tpr: 0.0,
    }];
    let (mut tp, mut fp) = (0usize, 0usize);
    let mut auc = 0.0;
    let mut k = 0;
    while k < order.len() {
        let s = scores[order[k]];
        while k < order.len() && scores[order[k]] == s {
            if truths[order[k]].is_positive() {
                tp += 1;
            } else {
                fp += 1;
            }
            k += 1;
        }
        let prev = *points.last().expect("starts with the origin");
        let point = RocPoint {
            threshold: s,
            fpr: fp as f64 / neg as f64,
            tpr: tp as f64 / pos as f64,
        };
        auc += 0.5 * (point.tpr + prev.tpr) * (point.fpr - prev.fpr);
        points.push(point);
    }
    Ok(RocCurve { points, auc })
}

/// `(#{M > B} + ½ #{M = B}) / (n_M n_B)` by direct pair counting.
pub fn auc_pair_oracle(scores: &[f64], truths: &[Diagnosis]) -> Result<f64> {
    if scores.len() != truths.len() {
        return Err(Error::LengthMismatch {
            left: scores.len(),
            right: truths.len(),
        });
    }
    let (pos, neg) = class_sizes(truths)?;
    let mut wins = 0.0;
    for (i, ti) in truths.iter().enumerate() {
        if !ti.is_positive() {
            continue;
        }
        for (j, tj) in truths.iter().enumerate() {
            if tj.is_positive() {
                continue;
            }
            if scores[i] > scores[j] {
                wins += 1.0;
            } else if scores[i] == scores[j] {
                wins += 0.5;
            }
        }
    }
    Ok(wins / (pos as f64 * neg as f64))
}

/// `0.00, 0.01, …, 1.00`
pub fn default_cutoff_grid() -> Vec<f64> {
    (0..=100).map(|i| i as f64 / 100.0).collect()
}

/// Accuracy of "malignant iff score ≥ cutoff" at every cutoff, for arbitrary real scores.
pub fn accuracy_vs_threshold(
    scores: &[f64],
    truths: &[Diagnosis],
    grid: &[f64],
) -> Result<Vec<(f64, f64)>> {
    if scores.len() != truths.len() {
        return Err(Error::LengthMismatch {
            left: scores.len(),
            right: truths.len(),
        });
    }
    if grid.is_empty() {
        return Err(Error::Config("empty cutoff grid".into()));
    }
    if truths.is_empty() {
        return Err(Error::Config("no cases to score".into()));
    }
    let n = truths.len() as f64;
    Ok(grid
        .iter()
        .map(|&c| {
            let right = scores
                .iter()
                .zip(truths)
                .filter(|(s, t)| (**s >= c) == t.is_positive())
                .count();
            (c, right as f64 / n)
        })
        .collect())
}

/// [`accuracy_vs_threshold`] restricted to probabilities and cutoffs in [0, 1].
pub fn accuracy_vs_cutoff(
    probs: &[f64],
    truths: &[Diagnosis],
    grid: &[f64],
) -> Result<Vec<(f64, f64)>> {
    if let Some(c) = grid.iter().find(|c| !(0.0..=1.0).contains(*c)) {
        return Err(Error::Config(format!("cutoff {c} outside [0, 1]")));
    }
    if let Some(p) = probs.iter().find(|p| !(0.0..=1.0).contains(*p)) {
        return Err(Error::Config(format!("probability {p} outside [0, 1]")));
    }
    accuracy_vs_threshold(probs, truths, grid)
}

/// CSV with columns `threshold,fpr,tpr`.
pub fn roc_csv(curve: &RocCurve) -> String {
    let mut out = String::from("threshold,fpr,tpr\n");
    for p in &curve.points {
        let _ = writeln!(out, "{},{},{}", p.threshold, p.fpr, p.tpr);
    }
    out
}

/// CSV with columns `cutoff,accuracy`.
pub fn accuracy_csv(sweep: &[(f64, f64)]) -> String {
    let mut out = String::from("cutoff,accuracy\n");
    for (c, a) in sweep {
        let _ = writeln!(out, "{c},{a}");
    }
    out
}
