//! The end-to-end comparison: split, standardize on the training split,
//! cross-validate hyperparameters, fit, and score every method on the test split.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::path::{Path, PathBuf};
use std::str::FromStr;
use std::time::Instant;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use serde_json::{json, Value};

use crate::dataset::{
    kfold, read_wdbc, split_indices, Diagnosis, Fold, LabeledDataset, SplitSpec, Standardizer,
};
use crate::error::{Error, Result};
use crate::eval::{
    accuracy_csv, accuracy_vs_cutoff, accuracy_vs_threshold, confusion, default_cutoff_grid,
    roc_csv, roc_curve,
};
use crate::kernels::{gram, KernelSpec};
use crate::knn::{KnnModel, SelfMatch};
use crate::logreg::{with_bias, LogRegConfig, LogRegModel, DEFAULT_RIDGE};
use crate::numerics::{Matrix, RngState};
use crate::svm::{SvmConfig, SvmModel};
use crate::vblr::{self, predict_proba_mc_batch, Prior, VblrConfig};

pub const REPORT_SCHEMA_VERSION: u32 = 1;

pub const METHODS: [&str; 6] = ["svm_rbf", "svm_poly", "svm_tanh", "knn", "logreg", "vblr"];

pub const PREPROCESSING: &str =
    "z-score per feature, mean and sample standard deviation (n-1) from the training split";

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum VblrVariant {
    Fixed,
    Hierarchical,
}

impl FromStr for VblrVariant {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "fixed" => Ok(VblrVariant::Fixed),
            "hierarchical" => Ok(VblrVariant::Hierarchical),
            other => Err(Error::Config(format!(
                "unknown vblr variant `{other}` (fixed|hierarchical)"
            ))),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Grids {
    pub c: Vec<f64>,
    pub gamma: Vec<f64>,
    pub degree: Vec<u32>,
    /// (κ, c) pairs.
    pub tanh: Vec<(f64, f64)>,
    pub knn_k: Vec<usize>,
}

impl Default for Grids {
    fn default() -> Self {
        Grids {
            c: vec![0.1, 1.0, 10.0, 100.0],
            gamma: vec![0.01, 0.033, 0.1, 0.33],
            degree: vec![2, 3],
            tanh: vec![(1.0 / 30.0, -1.0), (0.001, -0.1)],
            knn_k: vec![1, 3, 10],
        }
    }
}

impl Grids {
    fn validate(&self) -> Result<()> {
        let empty = [
            ("c", self.c.is_empty()),
            ("gamma", self.gamma.is_empty()),
            ("d", self.degree.is_empty()),
            ("tanh", self.tanh.is_empty()),
            ("k", self.knn_k.is_empty()),
        ];
        if let Some((name, _)) = empty.iter().find(|(_, e)| *e) {
            return Err(Error::Config(format!("grid `{name}` is empty")));
        }
        Ok(())
    }

    /// Overrides entries from `key=v1,v2;key=...`. Keys: `c`, `gamma`, `d`,
    /// `tanh` (as `kappa:c` pairs), `k`.
    pub fn apply_spec(&mut self, spec: &str) -> Result<()> {
        for part in spec.split(';').map(str::trim).filter(|p| !p.is_empty()) {
            let (key, values) = part
                .split_once('=')
                .ok_or_else(|| Error::Config(format!("grid entry `{part}` is not key=values")))?;
            let items: Vec<&str> = values
                .split(',')
                .map(str::trim)
                .filter(|v| !v.is_empty())
                .collect();
            match key.trim() {
                "c" => self.c = parse_list(key, &items)?,
                "gamma" => self.gamma = parse_list(key, &items)?,
                "d" => self.degree = parse_list(key, &items)?,
                "k" => self.knn_k = parse_list(key, &items)?,
                "tanh" => {
                    self.tanh = items
                        .iter()
                        .map(|item| {
                            let (k, c) = item.split_once(':').ok_or_else(|| {
                                Error::Config(format!("tanh grid item `{item}` is not kappa:c"))
                            })?;
                            Ok((parse_one(key, k)?, parse_one(key, c)?))
                        })
                        .collect::<Result<_>>()?
                }
                other => {
                    return Err(Error::Config(format!(
                        "unknown grid key `{other}` (c, gamma, d, tanh, k)"
                    )))
                }
            }
        }
        self.validate()
    }
}

fn parse_one<T: FromStr>(key: &str, v: &str) -> Result<T> {
    v.trim()
        .parse()
        .map_err(|_| Error::Config(format!("bad value `{v}` for grid key `{key}`")))
}

fn parse_list<T: FromStr>(key: &str, items: &[&str]) -> Result<Vec<T>> {
    items.iter().map(|v| parse_one(key, v)).collect()
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ExperimentConfig {
    pub data: PathBuf,
    pub seed: u64,
    pub train_fraction: f64,
    pub stratified: bool,
    pub cv_folds: usize,
    pub grids: Grids,
    pub mc_samples: usize,
    pub vblr_variant: VblrVariant,
    pub knn_training_neighbors: SelfMatch,
    pub logreg_ridge: f64,
    pub svm_tol: f64,
    #[serde(skip)]
    pub out_dir: Option<PathBuf>,
}

impl ExperimentConfig {
    pub fn new(data: impl Into<PathBuf>, seed: u64) -> Self {
        ExperimentConfig {
            data: data.into(),
            seed,
            train_fraction: 0.8,
            stratified: true,
            cv_folds: 10,
            grids: Grids::default(),
            mc_samples: 2000,
            vblr_variant: VblrVariant::Hierarchical,
            knn_training_neighbors: SelfMatch::Include,
            logreg_ridge: DEFAULT_RIDGE,
            svm_tol: 1e-3,
            out_dir: None,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.train_fraction > 0.0 && self.train_fraction < 1.0) {
            return Err(Error::Config(format!(
                "train fraction {} must be in (0, 1)",
                self.train_fraction
            )));
        }
        if self.cv_folds < 2 {
            return Err(Error::Config(format!(
                "need at least 2 folds, got {}",
                self.cv_folds
            )));
        }
        if self.mc_samples == 0 {
            return Err(Error::Config("mc_samples must be at least 1".into()));
        }
        if !(self.logreg_ridge >= 0.0) {
            return Err(Error::Config("ridge must be non-negative".into()));
        }
        if !(self.svm_tol > 0.0) {
            return Err(Error::Config("SVM tolerance must be positive".into()));
        }
        self.grids.validate()
    }

    fn split_spec(&self) -> SplitSpec {
        SplitSpec {
            train_fraction: self.train_fraction,
            seed: self.seed,
            stratified: self.stratified,
        }
    }
}

/// Standardized train and test splits plus the indices they came from.
#[derive(Clone, Debug)]
pub struct PreparedData {
    pub train: LabeledDataset,
    pub test: LabeledDataset,
    pub train_indices: Vec<usize>,
    pub test_indices: Vec<usize>,
    pub standardizer: Standardizer,
}

pub fn prepare(data: &LabeledDataset, cfg: &ExperimentConfig) -> Result<PreparedData> {
    let (train_indices, test_indices) = split_indices(data.labels(), &cfg.split_spec())?;
    let raw_train = data.subset(&train_indices);
    let raw_test = data.subset(&test_indices);
    let standardizer = Standardizer::fit(raw_train.features())?;
    Ok(PreparedData {
        train: standardizer.apply_dataset(&raw_train)?,
        test: standardizer.apply_dataset(&raw_test)?,
        train_indices,
        test_indices,
        standardizer,
    })
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum MethodStatus {
    Ok,
    /// The solver hit its iteration cap; numbers come from the last iterate.
    NoConvergence,
    Failed(String),
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CvEntry {
    pub hyperparams: Value,
    pub mean_error: f64,
    /// Folds whose solver stopped at the iteration cap.
    pub capped_folds: usize,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Timing {
    pub seconds: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MethodReport {
    pub name: String,
    pub status: MethodStatus,
    pub hyperparams: Value,
    pub train_error: Option<f64>,
    pub train_misses: Option<usize>,
    pub test_error: Option<f64>,
    pub test_misses: Option<usize>,
    pub auc: Option<f64>,
    pub accuracy: Option<f64>,
    pub roc_file: Option<String>,
    pub cv: Vec<CvEntry>,
    pub timing: Timing,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ComparisonReport {
    pub schema_version: u32,
    pub library_version: String,
    pub preprocessing: String,
    pub n_train: usize,
    pub n_test: usize,
    pub config: ExperimentConfig,
    pub methods: Vec<MethodReport>,
}

impl ComparisonReport {
    pub fn method(&self, name: &str) -> Option<&MethodReport> {
        self.methods.iter().find(|m| m.name == name)
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }

    /// The report with every `timing` entry zeroed.
    pub fn without_timing(&self) -> ComparisonReport {
        let mut r = self.clone();
        for m in &mut r.methods {
            m.timing.seconds = 0.0;
        }
        r
    }

    pub fn all_failed(&self) -> bool {
        self.methods
            .iter()
            .all(|m| matches!(m.status, MethodStatus::Failed(_)))
    }

    pub fn table(&self) -> String {
        let mut out = format!(
            "seed {}  train {}  test {}\n{:<9} {:>14} {:>8} {:>14} {:>8} {:>9}  {}\n",
            self.config.seed,
            self.n_train,
            self.n_test,
            "method",
            "train_error",
            "misses",
            "test_error",
            "misses",
            "auc",
            "status"
        );
        let fmt_f = |v: Option<f64>| v.map_or("-".to_string(), |x| format!("{x:.8}"));
        let fmt_u = |v: Option<usize>| v.map_or("-".to_string(), |x| x.to_string());
        for m in &self.methods {
            let status = match &m.status {
                MethodStatus::Ok => "ok".to_string(),
                MethodStatus::NoConvergence => "no_convergence".to_string(),
                MethodStatus::Failed(e) => format!("failed: {e}"),
            };
            let _ = writeln!(
                out,
                "{:<9} {:>14} {:>8} {:>14} {:>8} {:>9}  {}  {}",
                m.name,
                fmt_f(m.train_error),
                fmt_u(m.train_misses),
                fmt_f(m.test_error),
                fmt_u(m.test_misses),
                m.auc.map_or("-".to_string(), |x| format!("{x:.6}")),
                status,
                m.hyperparams
            );
        }
        out
    }
}

/// Everything a fitted method produces on the two splits.
struct Scored {
    hyperparams: Value,
    status: MethodStatus,
    train_preds: Vec<Diagnosis>,
    test_preds: Vec<Diagnosis>,
    test_scores: Vec<f64>,
    /// Scores are probabilities in [0, 1].
    probabilistic: bool,
    cv: Vec<CvEntry>,
}

fn to_labels(scores: &[f64], cutoff: f64) -> Vec<Diagnosis> {
    scores
        .iter()
        .map(|&s| Diagnosis::from_positive(s >= cutoff))
        .collect()
}

fn error_count(preds: &[Diagnosis], truths: &[Diagnosis]) -> usize {
    preds.iter().zip(truths).filter(|(p, t)| p != t).count()
}

fn sub_gram(g: &Matrix, idx: &[usize]) -> Matrix {
    let mut out = Matrix::zeros(idx.len(), idx.len());
    for (a, &i) in idx.iter().enumerate() {
        let row = out.row_mut(a);
        for (b, &j) in idx.iter().enumerate() {
            row[b] = g[(i, j)];
        }
    }
    out
}

fn cross_gram(g: &Matrix, rows: &[usize], cols: &[usize]) -> Matrix {
    let mut out = Matrix::zeros(rows.len(), cols.len());
    for (a, &i) in rows.iter().enumerate() {
        let row = out.row_mut(a);
        for (b, &j) in cols.iter().enumerate() {
            row[b] = g[(i, j)];
        }
    }
    out
}

/// Trains and keeps the last iterate when the cap is hit.
fn train_svm(xs: &Matrix, ys: &[f64], g: &Matrix, cfg: &SvmConfig) -> Result<(SvmModel, bool)> {
    match SvmModel::train_with_gram(xs, ys, g, cfg) {
        Ok(m) => Ok((m, false)),
        Err(Error::NoConvergence { best, .. }) => Ok((*best, true)),
        Err(e) => Err(e),
    }
}

/// Decision values for `cols` of a precomputed Gram, using the model's support indices.
fn decisions_from_gram(model: &SvmModel, g: &Matrix) -> Vec<f64> {
    (0..g.cols())
        .map(|j| {
            model
                .support_indices
                .iter()
                .zip(model.alphas.iter().zip(&model.support_labels))
                .map(|(&i, (a, y))| a * y * g[(i, j)])
                .sum::<f64>()
                + model.bias
        })
        .collect()
}

fn svm_kernels(family: &str, grids: &Grids) -> Vec<KernelSpec> {
    match family {
        "svm_rbf" => grids
            .gamma
            .iter()
            .map(|&gamma| KernelSpec::Rbf { gamma })
            .collect(),
        "svm_poly" => grids
            .degree
            .iter()
            .map(|&d| KernelSpec::Poly { d })
            .collect(),
        _ => grids
            .tanh
            .iter()
            .map(|&(kappa, c)| KernelSpec::Tanh { kappa, c })
            .collect(),
    }
}

fn kernel_params(k: &KernelSpec) -> Value {
    match k {
        KernelSpec::Linear => json!({}),
        KernelSpec::Poly { d } => json!({ "d": d }),
        KernelSpec::Rbf { gamma } => json!({ "gamma": gamma }),
        KernelSpec::Tanh { kappa, c } => json!({ "kappa": kappa, "c": c }),
    }
}

fn svm_hyperparams(k: &KernelSpec, c: f64) -> Value {
    let mut v = kernel_params(k);
    v["C"] = json!(c);
    v["kernel"] = json!(k.to_string());
    v
}

/// Ordering key for kernel parameters: smaller γ / d / κ first.
fn kernel_key(k: &KernelSpec) -> (f64, f64) {
    match *k {
        KernelSpec::Linear => (0.0, 0.0),
        KernelSpec::Poly { d } => (d as f64, 0.0),
        KernelSpec::Rbf { gamma } => (gamma, 0.0),
        KernelSpec::Tanh { kappa, c } => (kappa, c),
    }
}

/// Mean fold error for every (kernel, C) pair, in grid order.
pub fn svm_grid_search(
    train: &LabeledDataset,
    kernels: &[KernelSpec],
    cs: &[f64],
    folds: &[Fold],
    tol: f64,
) -> Result<Vec<(KernelSpec, f64, CvEntry)>> {
    let xs = train.features();
    let ys = train.signed_labels();
    let grams: Vec<Matrix> = kernels.par_iter().map(|k| gram(k, xs)).collect();
    let jobs: Vec<(usize, usize, usize)> = (0..kernels.len())
        .flat_map(|ki| {
            (0..cs.len()).flat_map(move |ci| (0..folds.len()).map(move |fi| (ki, ci, fi)))
        })
        .collect();
    let results: Vec<Result<(f64, bool)>> = jobs
        .par_iter()
        .map(|&(ki, ci, fi)| {
            let (tr, va) = &folds[fi];
            let cfg = SvmConfig::new(kernels[ki], cs[ci]).with_tol(tol);
            let g = &grams[ki];
            let sub_y: Vec<f64> = tr.iter().map(|&i| ys[i]).collect();
            let (model, capped) = train_svm(&xs.select_rows(tr), &sub_y, &sub_gram(g, tr), &cfg)?;
            let scores = decisions_from_gram(&model, &cross_gram(g, tr, va));
            let truths: Vec<Diagnosis> = va.iter().map(|&i| train.labels()[i]).collect();
            let wrong = error_count(&to_labels(&scores, 0.0), &truths);
            Ok((wrong as f64 / va.len() as f64, capped))
        })
        .collect();
    let mut out = Vec::with_capacity(kernels.len() * cs.len());
    let mut it = results.into_iter();
    for k in kernels {
        for &c in cs {
            let mut total = 0.0;
            let mut capped_folds = 0;
            for _ in folds {
                let (err, capped) = it.next().expect("one result per job")?;
                total += err;
                capped_folds += capped as usize;
            }
            out.push((
                *k,
                c,
                CvEntry {
                    hyperparams: svm_hyperparams(k, c),
                    mean_error: total / folds.len() as f64,
                    capped_folds,
                },
            ));
        }
    }
    Ok(out)
}

/// Lowest mean error; ties go to smaller C, then the smaller kernel parameter.
fn best_svm(entries: &[(KernelSpec, f64, CvEntry)]) -> (KernelSpec, f64) {
    let best = entries
        .iter()
        .min_by(|a, b| {
            a.2.mean_error
                .total_cmp(&b.2.mean_error)
                .then(a.1.total_cmp(&b.1))
                .then(kernel_key(&a.0).0.total_cmp(&kernel_key(&b.0).0))
                .then(kernel_key(&a.0).1.total_cmp(&kernel_key(&b.0).1))
        })
        .expect("non-empty grid");
    (best.0, best.1)
}

fn run_svm(
    family: &str,
    data: &PreparedData,
    cfg: &ExperimentConfig,
    folds: &[Fold],
) -> Result<Scored> {
    let kernels = svm_kernels(family, &cfg.grids);
    let entries = svm_grid_search(&data.train, &kernels, &cfg.grids.c, folds, cfg.svm_tol)?;
    let (kernel, c) = best_svm(&entries);
    let svm_cfg = SvmConfig::new(kernel, c).with_tol(cfg.svm_tol);
    let xs = data.train.features();
    let (model, capped) = train_svm(
        xs,
        &data.train.signed_labels(),
        &gram(&kernel, xs),
        &svm_cfg,
    )?;
    let train_scores = model.decision_batch(xs)?;
    let test_scores = model.decision_batch(data.test.features())?;
    let mut hyperparams = svm_hyperparams(&kernel, c);
    hyperparams["n_support"] = json!(model.n_support());
    Ok(Scored {
        hyperparams,
        status: if capped {
            MethodStatus::NoConvergence
        } else {
            MethodStatus::Ok
        },
        train_preds: to_labels(&train_scores, 0.0),
        test_preds: to_labels(&test_scores, 0.0),
        test_scores,
        probabilistic: false,
        cv: entries.into_iter().map(|e| e.2).collect(),
    })
}

fn run_knn(data: &PreparedData, cfg: &ExperimentConfig, folds: &[Fold]) -> Result<Scored> {
    let ks = &cfg.grids.knn_k;
    let jobs: Vec<(usize, usize)> = (0..ks.len())
        .flat_map(|ki| (0..folds.len()).map(move |fi| (ki, fi)))
        .collect();
    let errors: Vec<Result<f64>> = jobs
        .par_iter()
        .map(|&(ki, fi)| {
            let (tr, va) = &folds[fi];
            let model = KnnModel::from_dataset(&data.train.subset(tr), ks[ki])?;
            let val = data.train.subset(va);
            let preds: Vec<Diagnosis> = model
                .predict_batch(val.features())?
                .iter()
                .map(|p| p.label)
                .collect();
            Ok(error_count(&preds, val.labels()) as f64 / val.len() as f64)
        })
        .collect();
    let mut it = errors.into_iter();
    let mut cv = Vec::with_capacity(ks.len());
    for &k in ks {
        let mut total = 0.0;
        for _ in folds {
            total += it.next().expect("one result per job")?;
        }
        cv.push(CvEntry {
            hyperparams: json!({ "k": k }),
            mean_error: total / folds.len() as f64,
            capped_folds: 0,
        });
    }
    let best_k = ks
        .iter()
        .zip(&cv)
        .min_by(|a, b| a.1.mean_error.total_cmp(&b.1.mean_error).then(a.0.cmp(b.0)))
        .map(|(k, _)| *k)
        .expect("non-empty grid");
    let model = KnnModel::from_dataset(&data.train, best_k)?;
    let train_preds = model
        .training_predictions(cfg.knn_training_neighbors)?
        .iter()
        .map(|p| p.label)
        .collect();
    let test = model.predict_batch(data.test.features())?;
    Ok(Scored {
        hyperparams: json!({ "k": best_k, "training_neighbors": cfg.knn_training_neighbors }),
        status: MethodStatus::Ok,
        train_preds,
        test_preds: test.iter().map(|p| p.label).collect(),
        test_scores: test.iter().map(|p| p.score).collect(),
        probabilistic: true,
        cv,
    })
}

fn run_logreg(data: &PreparedData, cfg: &ExperimentConfig) -> Result<Scored> {
    let phis = with_bias(data.train.features());
    let lr_cfg = LogRegConfig {
        ridge: cfg.logreg_ridge,
        ..LogRegConfig::default()
    };
    let model = LogRegModel::fit(&phis, &data.train.binary_labels(), &lr_cfg)?;
    let proba = |m: &Matrix| -> Result<Vec<f64>> {
        m.row_iter().map(|phi| model.predict_proba(phi)).collect()
    };
    let train_scores = proba(&phis)?;
    let test_scores = proba(&with_bias(data.test.features()))?;
    Ok(Scored {
        hyperparams: json!({
            "ridge": model.ridge,
            "iterations": model.iterations,
            "converged": model.converged,
        }),
        status: if model.converged {
            MethodStatus::Ok
        } else {
            MethodStatus::NoConvergence
        },
        train_preds: to_labels(&train_scores, 0.5),
        test_preds: to_labels(&test_scores, 0.5),
        test_scores,
        probabilistic: true,
        cv: Vec::new(),
    })
}

fn run_vblr(data: &PreparedData, cfg: &ExperimentConfig, rng: &RngState) -> Result<Scored> {
    let phis = with_bias(data.train.features());
    let prior = match cfg.vblr_variant {
        VblrVariant::Fixed => Prior::default_fixed(phis.cols()),
        VblrVariant::Hierarchical => Prior::default_hierarchical(),
    };
    let mut vcfg = VblrConfig::new(prior);
    vcfg.mc_samples = cfg.mc_samples;
    vcfg.seed = rng.seed();
    let post = vblr::fit(&phis, &data.train.binary_labels(), &vcfg)?;
    let mut train_rng = rng.split_named("train");
    let mut test_rng = rng.split_named("test");
    let train_scores: Vec<f64> =
        predict_proba_mc_batch(&post, &phis, cfg.mc_samples, &mut train_rng)?
            .iter()
            .map(|e| e.mean)
            .collect();
    let test_scores: Vec<f64> = predict_proba_mc_batch(
        &post,
        &with_bias(data.test.features()),
        cfg.mc_samples,
        &mut test_rng,
    )?
    .iter()
    .map(|e| e.mean)
    .collect();
    let mut hyperparams = json!({
        "variant": vcfg.prior.label(),
        "em_iterations": post.elbo_trace.len().saturating_sub(1),
        "converged": post.converged,
        "final_bound": post.final_bound(),
        "jitter_events": post.jitter_events,
        "mc_samples": cfg.mc_samples,
    });
    if let Some(g) = &post.gamma {
        hyperparams["alpha_mean"] = json!(g.mean());
    }
    Ok(Scored {
        hyperparams,
        status: MethodStatus::Ok,
        train_preds: to_labels(&train_scores, 0.5),
        test_preds: to_labels(&test_scores, 0.5),
        test_scores,
        probabilistic: true,
        cv: Vec::new(),
    })
}

fn check_method(name: &str) -> Result<()> {
    if METHODS.contains(&name) {
        Ok(())
    } else {
        Err(Error::UnknownMethod {
            name: name.to_string(),
            valid: METHODS.join(", "),
        })
    }
}

fn score_method(
    name: &str,
    data: &PreparedData,
    cfg: &ExperimentConfig,
    folds: &[Fold],
) -> Result<Scored> {
    let rng = RngState::new(cfg.seed).split_named(name);
    match name {
        "svm_rbf" | "svm_poly" | "svm_tanh" => run_svm(name, data, cfg, folds),
        "knn" => run_knn(data, cfg, folds),
        "logreg" => run_logreg(data, cfg),
        "vblr" => run_vblr(data, cfg, &rng),
        other => Err(Error::UnknownMethod {
            name: other.to_string(),
            valid: METHODS.join(", "),
        }),
    }
}

/// SVM decision values are swept over this grid instead of [0, 1].
pub fn decision_cutoff_grid() -> Vec<f64> {
    (0..=100).map(|i| (i as f64 - 50.0) / 25.0).collect()
}

/// A fitted method with its curves, before anything is written to disk.
pub struct MethodRun {
    pub report: MethodReport,
    pub roc_csv: Option<String>,
    pub accuracy_csv: Option<String>,
}

pub fn run_method(
    name: &str,
    data: &PreparedData,
    cfg: &ExperimentConfig,
    folds: &[Fold],
) -> MethodRun {
    let start = Instant::now();
    let outcome = score_method(name, data, cfg, folds).and_then(|s| {
        let curve = roc_curve(&s.test_scores, data.test.labels())?;
        let sweep = if s.probabilistic {
            accuracy_vs_cutoff(&s.test_scores, data.test.labels(), &default_cutoff_grid())?
        } else {
            accuracy_vs_threshold(&s.test_scores, data.test.labels(), &decision_cutoff_grid())?
        };
        let train_misses = error_count(&s.train_preds, data.train.labels());
        let test_cm = confusion(&s.test_preds, data.test.labels())?;
        Ok((s, curve, sweep, train_misses, test_cm))
    });
    let seconds = start.elapsed().as_secs_f64();
    match outcome {
        Ok((s, curve, sweep, train_misses, test_cm)) => MethodRun {
            report: MethodReport {
                name: name.to_string(),
                status: s.status,
                hyperparams: s.hyperparams,
                train_error: Some(train_misses as f64 / data.train.len() as f64),
                train_misses: Some(train_misses),
                test_error: Some(test_cm.error_rate()),
                test_misses: Some(test_cm.misses()),
                auc: Some(curve.auc),
                accuracy: Some(test_cm.accuracy()),
                roc_file: Some(format!("roc_{name}.csv")),
                cv: s.cv,
                timing: Timing { seconds },
            },
            roc_csv: Some(roc_csv(&curve)),
            accuracy_csv: Some(accuracy_csv(&sweep)),
        },
        Err(e) => MethodRun {
            report: MethodReport {
                name: name.to_string(),
                status: MethodStatus::Failed(e.to_string()),
                hyperparams: Value::Null,
                train_error: None,
                train_misses: None,
                test_error: None,
                test_misses: None,
                auc: None,
                accuracy: None,
                roc_file: None,
                cv: Vec::new(),
                timing: Timing { seconds },
            },
            roc_csv: None,
            accuracy_csv: None,
        },
    }
}

fn write_file(dir: &Path, name: &str, text: &str) -> Result<()> {
    let path = dir.join(name);
    std::fs::write(&path, text).map_err(|source| Error::Io {
        path: path.display().to_string(),
        source,
    })
}

fn create_dir(dir: &Path) -> Result<()> {
    std::fs::create_dir_all(dir).map_err(|source| Error::Io {
        path: dir.display().to_string(),
        source,
    })
}

/// Runs every method on an already loaded dataset.
pub fn compare_dataset(
    data: &LabeledDataset,
    cfg: &ExperimentConfig,
) -> Result<(ComparisonReport, Vec<MethodRun>)> {
    cfg.validate()?;
    let prepared = prepare(data, cfg)?;
    let folds = kfold(prepared.train.len(), cfg.cv_folds, cfg.seed)?;
    let mut runs: Vec<MethodRun> = METHODS
        .par_iter()
        .map(|name| run_method(name, &prepared, cfg, &folds))
        .collect();
    let rank = |r: &MethodRun| {
        METHODS
            .iter()
            .position(|m| *m == r.report.name)
            .unwrap_or(usize::MAX)
    };
    runs.sort_by(|a, b| match (a.report.auc, b.report.auc) {
        (Some(x), Some(y)) => y.total_cmp(&x).then(rank(a).cmp(&rank(b))),
        (Some(_), None) => std::cmp::Ordering::Less,
        (None, Some(_)) => std::cmp::Ordering::Greater,
        (None, None) => rank(a).cmp(&rank(b)),
    });
    let report = ComparisonReport {
        schema_version: REPORT_SCHEMA_VERSION,
        library_version: env!("CARGO_PKG_VERSION").to_string(),
        preprocessing: PREPROCESSING.to_string(),
        n_train: prepared.train.len(),
        n_test: prepared.test.len(),
        config: cfg.clone(),
        methods: runs.iter().map(|r| r.report.clone()).collect(),
    };
    Ok((report, runs))
}

/// Reads the data, runs every method and writes `report.json`, `roc_<method>.csv`
/// and `accuracy_<method>.csv` into the output directory, if one is set.
pub fn cmd_compare(cfg: &ExperimentConfig) -> Result<ComparisonReport> {
    cfg.validate()?;
    let data = read_wdbc(&cfg.data)?;
    let (report, runs) = compare_dataset(&data, cfg)?;
    if let Some(dir) = &cfg.out_dir {
        create_dir(dir)?;
        write_file(dir, "report.json", &report.to_json()?)?;
        for run in &runs {
            if let (Some(roc), Some(acc)) = (&run.roc_csv, &run.accuracy_csv) {
                write_file(dir, &format!("roc_{}.csv", run.report.name), roc)?;
                write_file(dir, &format!("accuracy_{}.csv", run.report.name), acc)?;
            }
        }
    }
    Ok(report)
}

/// Test-split ROC CSV for one method.
pub fn cmd_roc(cfg: &ExperimentConfig, method: &str) -> Result<String> {
    check_method(method)?;
    cfg.validate()?;
    let data = read_wdbc(&cfg.data)?;
    let prepared = prepare(&data, cfg)?;
    let folds = kfold(prepared.train.len(), cfg.cv_folds, cfg.seed)?;
    let run = run_method(method, &prepared, cfg, &folds);
    let csv = match (run.report.status, run.roc_csv) {
        (MethodStatus::Failed(e), _) => return Err(Error::Config(format!("{method} failed: {e}"))),
        (_, Some(csv)) => csv,
        (_, None) => unreachable!("successful runs carry a curve"),
    };
    if let Some(dir) = &cfg.out_dir {
        create_dir(dir)?;
        write_file(dir, &format!("roc_{method}.csv"), &csv)?;
    }
    Ok(csv)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CvReport {
    pub method: String,
    pub entries: Vec<CvEntry>,
    pub best: Value,
}

/// Cross-validation of one tunable method on the training split, with grid overrides.
pub fn cmd_cv(cfg: &ExperimentConfig, method: &str, grid_spec: &str) -> Result<CvReport> {
    check_method(method)?;
    let mut cfg = cfg.clone();
    cfg.grids.apply_spec(grid_spec)?;
    cfg.validate()?;
    let data = read_wdbc(&cfg.data)?;
    let prepared = prepare(&data, &cfg)?;
    let folds = kfold(prepared.train.len(), cfg.cv_folds, cfg.seed)?;
    let (entries, best) = match method {
        "svm_rbf" | "svm_poly" | "svm_tanh" => {
            let kernels = svm_kernels(method, &cfg.grids);
            let found = svm_grid_search(&prepared.train, &kernels, &cfg.grids.c, &folds, cfg.svm_tol)?;
            let (k, c) = best_svm(&found);
            (found.into_iter().map(|e| e.2).collect(), svm_hyperparams(&k, c))
        }
        "knn" => {
            let s = run_knn(&prepared, &cfg, &folds)?;
            (s.cv, json!({ "k": s.hyperparams["k"] }))
        }
        other => {
            return Err(Error::Config(format!(
                "{other} has no hyperparameter grid; tunable methods are svm_rbf, svm_poly, svm_tanh, knn"
            )))
        }
    };
    Ok(CvReport {
        method: method.to_string(),
        entries,
        best,
    })
}

/// Case count, class counts and per-feature min / mean / max.
pub fn cmd_inspect(path: impl AsRef<Path>) -> Result<String> {
    let data = read_wdbc(path)?;
    Ok(inspect_dataset(&data))
}

pub fn inspect_dataset(data: &LabeledDataset) -> String {
    let (b, m) = data.class_counts();
    let mut out = format!("{} cases, {b} B / {m} M\n", data.len());
    let _ = writeln!(
        out,
        "{:>7} {:>14} {:>14} {:>14}",
        "feature", "min", "mean", "max"
    );
    let xs = data.features();
    for j in 0..xs.cols() {
        let col = xs.column(j);
        let min = col.iter().copied().fold(f64::INFINITY, f64::min);
        let max = col.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        let mean = col.iter().sum::<f64>() / col.len().max(1) as f64;
        let _ = writeln!(out, "{:>7} {min:>14.6} {mean:>14.6} {max:>14.6}", j + 1);
    }
    out
}

/// Per-method summary across seeds, used for multi-seed batteries.
pub fn medians(reports: &[ComparisonReport]) -> BTreeMap<String, (f64, f64)> {
    let mut out = BTreeMap::new();
    for name in METHODS {
        let mut errs: Vec<f64> = reports
            .iter()
            .filter_map(|r| r.method(name).and_then(|m| m.test_error))
            .collect();
        let mut aucs: Vec<f64> = reports
            .iter()
            .filter_map(|r| r.method(name).and_then(|m| m.auc))
            .collect();
        if errs.is_empty() {
            continue;
        }
        out.insert(name.to_string(), (median(&mut errs), median(&mut aucs)));
    }
    out
}

pub fn median(v: &mut [f64]) -> f64 {
    if v.is_empty() {
        return f64::NAN;
    }
    v.sort_by(f64::total_cmp);
    let n = v.len();
    if n % 2 == 1 {
        v[n / 2]
    } else {
        0.5 * (v[n / 2 - 1] + v[n / 2])
    }
}
