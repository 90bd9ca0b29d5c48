//! Soft-margin kernel SVM trained on the dual with SMO.
//!
//! The dual is solved in its minimization form
//!
//! ```text
//! min_α  ½ αᵀQα − Σα_i    s.t. 0 ≤ α_i ≤ C,  Σ α_i y_i = 0,   Q_ij = y_i y_j k(x_i, x_j)
//! ```
//!
//! Each step updates one pair (i, j): i is the maximal KKT violator and j is
//! picked by second-order gain among the violators on the other side. The
//! solver stops when the violation gap `max_{I_up} −y_t G_t − min_{I_low} −y_t G_t`
//! drops below `tol`, which bounds every per-point KKT violation by `tol` once the
//! bias is placed inside that gap.
//!
//! The decision function is `f(x) = Σ α_i y_i k(x_i, x) + bias`.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::kernels::{gram, KernelSpec};
use crate::numerics::Matrix;

pub const SVM_SCHEMA_VERSION: u32 = 1;

// Curvature floor for pairs with non-positive second derivative (non-PSD kernels).
const TAU: f64 = 1e-12;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SvmConfig {
    pub kernel: KernelSpec,
    /// Box constant.
    pub c: f64,
    /// KKT tolerance.
    pub tol: f64,
    /// Iteration cap; `None` means `10·n²`.
    pub max_iters: Option<usize>,
}

impl SvmConfig {
    pub fn new(kernel: KernelSpec, c: f64) -> Self {
        SvmConfig {
            kernel,
            c,
            tol: 1e-3,
            max_iters: None,
        }
    }

    pub fn with_tol(mut self, tol: f64) -> Self {
        self.tol = tol;
        self
    }

    pub fn with_max_iters(mut self, max_iters: usize) -> Self {
        self.max_iters = Some(max_iters);
        self
    }

    fn validate(&self) -> Result<()> {
        self.kernel.validate()?;
        if !(self.c > 0.0 && self.c.is_finite()) {
            return Err(Error::Config(format!(
                "box constant C = {} must be > 0",
                self.c
            )));
        }
        if !(self.tol > 0.0) {
            return Err(Error::Config(format!("tolerance {} must be > 0", self.tol)));
        }
        Ok(())
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SvmModel {
    pub support_vectors: Matrix,
    pub support_labels: Vec<f64>,
    pub alphas: Vec<f64>,
    pub bias: f64,
    pub kernel: KernelSpec,
    pub config: SvmConfig,
    /// Index of each support vector in the training set.
    pub support_indices: Vec<usize>,
    pub iterations: usize,
    /// Dual objective `Σα − ½αᵀQα` at the returned iterate.
    pub dual_objective: f64,
}

#[derive(Serialize, Deserialize)]
struct SvmDocument {
    schema_version: u32,
    model: SvmModel,
}

impl SvmModel {
    pub fn train(xs: &Matrix, ys: &[f64], cfg: &SvmConfig) -> Result<SvmModel> {
        cfg.validate()?;
        let g = gram(&cfg.kernel, xs);
        Self::train_with_gram(xs, ys, &g, cfg)
    }

    /// Trains from a precomputed Gram matrix over the rows of `xs`.
    pub fn train_with_gram(
        xs: &Matrix,
        ys: &[f64],
        gram: &Matrix,
        cfg: &SvmConfig,
    ) -> Result<SvmModel> {
        cfg.validate()?;
        let n = xs.rows();
        if ys.len() != n {
            return Err(Error::LengthMismatch {
                left: n,
                right: ys.len(),
            });
        }
        if gram.rows() != n || gram.cols() != n {
            return Err(Error::DimensionMismatch {
                expected: n,
                found: gram.rows(),
            });
        }
        if ys.iter().any(|&y| y != 1.0 && y != -1.0) {
            return Err(Error::Config("SVM labels must be +1 or -1".into()));
        }
        if !ys.iter().any(|&y| y > 0.0) {
            return Err(Error::EmptyClass("positive"));
        }
        if !ys.iter().any(|&y| y < 0.0) {
            return Err(Error::EmptyClass("negative"));
        }
        let max_iters = cfg.max_iters.unwrap_or(10 * n * n).max(1);
        let mut solver = Smo::new(gram, ys, cfg.c);
        let outcome = solver.run(cfg.tol, max_iters);
        let model = solver.into_model(xs, ys, cfg);
        match outcome {
            Ok(()) => Ok(model),
            Err(iterations) => Err(Error::NoConvergence {
                iterations,
                best: Box::new(model),
            }),
        }
    }

    pub fn n_support(&self) -> usize {
        self.alphas.len()
    }

    pub(crate) fn decision_unchecked(&self, x: &[f64]) -> f64 {
        self.support_vectors
            .row_iter()
            .zip(self.alphas.iter().zip(&self.support_labels))
            .map(|(sv, (a, y))| a * y * self.kernel.eval_unchecked(sv, x))
            .sum::<f64>()
            + self.bias
    }

    /// Raw score `Σ α_i y_i k(sv_i, x) + bias`.
    pub fn decision(&self, x: &[f64]) -> Result<f64> {
        self.check_dim(x.len())?;
        Ok(self.decision_unchecked(x))
    }

    /// +1 or −1; a score of exactly 0 maps to +1.
    pub fn predict(&self, x: &[f64]) -> Result<f64> {
        Ok(sign_label(self.decision(x)?))
    }

    pub fn decision_batch(&self, xs: &Matrix) -> Result<Vec<f64>> {
        self.check_dim(xs.cols())?;
        Ok(xs.row_iter().map(|x| self.decision_unchecked(x)).collect())
    }

    fn check_dim(&self, found: usize) -> Result<()> {
        // a model without support vectors accepts any dimension
        if self.n_support() > 0 && found != self.support_vectors.cols() {
            return Err(Error::DimensionMismatch {
                expected: self.support_vectors.cols(),
                found,
            });
        }
        Ok(())
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(&SvmDocument {
            schema_version: SVM_SCHEMA_VERSION,
            model: self.clone(),
        })?)
    }

    pub fn from_json(text: &str) -> Result<SvmModel> {
        let doc: SvmDocument = serde_json::from_str(text)?;
        if doc.schema_version != SVM_SCHEMA_VERSION {
            return Err(Error::Config(format!(
                "unsupported SVM schema version {}",
                doc.schema_version
            )));
        }
        Ok(doc.model)
    }
}

/// Sign rule with ties going to the positive class.
pub fn sign_label(score: f64) -> f64 {
    if score >= 0.0 {
        1.0
    } else {
        -1.0
    }
}

pub fn svm_train(xs: &Matrix, ys: &[f64], cfg: &SvmConfig) -> Result<SvmModel> {
    SvmModel::train(xs, ys, cfg)
}

pub fn svm_decision(model: &SvmModel, x: &[f64]) -> Result<f64> {
    model.decision(x)
}

pub fn svm_predict(model: &SvmModel, x: &[f64]) -> Result<f64> {
    model.predict(x)
}

/// `Σα − ½ΣΣ α_i α_j y_i y_j K_ij`
pub fn dual_objective(alphas: &[f64], ys: &[f64], gram: &Matrix) -> f64 {
    let n = alphas.len();
    let mut quad = 0.0;
    for i in 0..n {
        if alphas[i] == 0.0 {
            continue;
        }
        let row = gram.row(i);
        let mut s = 0.0;
        for j in 0..n {
            s += alphas[j] * ys[j] * row[j];
        }
        quad += alphas[i] * ys[i] * s;
    }
    alphas.iter().sum::<f64>() - 0.5 * quad
}

struct Smo<'a> {
    gram: &'a Matrix,
    ys: &'a [f64],
    c: f64,
    alpha: Vec<f64>,
    /// Gradient of the minimization objective, `Qα − 1`.
    grad: Vec<f64>,
    iterations: usize,
}

impl<'a> Smo<'a> {
    fn new(gram: &'a Matrix, ys: &'a [f64], c: f64) -> Self {
        let n = ys.len();
        Smo {
            gram,
            ys,
            c,
            alpha: vec![0.0; n],
            grad: vec![-1.0; n],
            iterations: 0,
        }
    }

    #[inline]
    fn in_up(&self, t: usize) -> bool {
        if self.ys[t] > 0.0 {
            self.alpha[t] < self.c
        } else {
            self.alpha[t] > 0.0
        }
    }

    #[inline]
    fn in_low(&self, t: usize) -> bool {
        if self.ys[t] > 0.0 {
            self.alpha[t] > 0.0
        } else {
            self.alpha[t] < self.c
        }
    }

    /// Returns the working pair, or `None` when the violation gap is below `tol`.
    fn select(&self, tol: f64) -> Option<(usize, usize)> {
        let n = self.ys.len();
        let mut gmax = f64::NEG_INFINITY;
        let mut i = usize::MAX;
        for t in 0..n {
            if self.in_up(t) {
                let v = -self.ys[t] * self.grad[t];
                if v >= gmax {
                    gmax = v;
                    i = t;
                }
            }
        }
        if i == usize::MAX {
            return None;
        }
        let gi = self.gram.row(i);
        let kii = gi[i];
        let mut gmin = f64::INFINITY;
        let mut best = f64::INFINITY;
        let mut j = usize::MAX;
        for t in 0..n {
            if !self.in_low(t) {
                continue;
            }
            let v = -self.ys[t] * self.grad[t];
            gmin = gmin.min(v);
            let diff = gmax - v;
            if diff > 0.0 {
                let mut curv = kii + self.gram[(t, t)] - 2.0 * gi[t];
                if curv <= 0.0 {
                    curv = TAU;
                }
                let gain = -(diff * diff) / curv;
                if gain <= best {
                    best = gain;
                    j = t;
                }
            }
        }
        if gmax - gmin < tol || j == usize::MAX {
            return None;
        }
        Some((i, j))
    }

    fn step(&mut self, i: usize, j: usize) {
        let (yi, yj) = (self.ys[i], self.ys[j]);
        let c = self.c;
        let kij = self.gram[(i, j)];
        let qij = yi * yj * kij;
        let (qii, qjj) = (self.gram[(i, i)], self.gram[(j, j)]);
        let (old_i, old_j) = (self.alpha[i], self.alpha[j]);
        let (mut ai, mut aj) = (old_i, old_j);
        if yi != yj {
            let mut curv = qii + qjj + 2.0 * qij;
            if curv <= 0.0 {
                curv = TAU;
            }
            let delta = (-self.grad[i] - self.grad[j]) / curv;
            let diff = ai - aj;
            ai += delta;
            aj += delta;
            if diff > 0.0 {
                if aj < 0.0 {
                    aj = 0.0;
                    ai = diff;
                }
            } else if ai < 0.0 {
                ai = 0.0;
                aj = -diff;
            }
            if diff > 0.0 {
                if ai > c {
                    ai = c;
                    aj = c - diff;
                }
            } else if aj > c {
                aj = c;
                ai = c + diff;
            }
        } else {
            let mut curv = qii + qjj - 2.0 * qij;
            if curv <= 0.0 {
                curv = TAU;
            }
            let delta = (self.grad[i] - self.grad[j]) / curv;
            let sum = ai + aj;
            ai -= delta;
            aj += delta;
            if sum > c {
                if ai > c {
                    ai = c;
                    aj = sum - c;
                }
            } else if aj < 0.0 {
                aj = 0.0;
                ai = sum;
            }
            if sum > c {
                if aj > c {
                    aj = c;
                    ai = sum - c;
                }
            } else if ai < 0.0 {
                ai = 0.0;
                aj = sum;
            }
        }
        self.alpha[i] = ai;
        self.alpha[j] = aj;
        let di = (ai - old_i) * yi;
        let dj = (aj - old_j) * yj;
        let (ri, rj) = (self.gram.row(i), self.gram.row(j));
        for t in 0..self.ys.len() {
            self.grad[t] += self.ys[t] * (ri[t] * di + rj[t] * dj);
        }
    }

    /// `Err(iterations)` when the cap is hit before the gap closes.
    fn run(&mut self, tol: f64, max_iters: usize) -> std::result::Result<(), usize> {
        while let Some((i, j)) = self.select(tol) {
            if self.iterations >= max_iters {
                return Err(self.iterations);
            }
            self.step(i, j);
            self.iterations += 1;
        }
        Ok(())
    }

    /// Average of `−y_t G_t` over free vectors, else the midpoint of the
    /// interval allowed by the bounded ones.
    fn bias(&self) -> f64 {
        let n = self.ys.len();
        let mut sum = 0.0;
        let mut free = 0usize;
        let mut upper = f64::NEG_INFINITY;
        let mut lower = f64::INFINITY;
        for t in 0..n {
            let v = -self.ys[t] * self.grad[t];
            if self.alpha[t] > 0.0 && self.alpha[t] < self.c {
                sum += v;
                free += 1;
            }
            if self.in_up(t) {
                upper = upper.max(v);
            }
            if self.in_low(t) {
                lower = lower.min(v);
            }
        }
        if free > 0 {
            sum / free as f64
        } else if upper.is_finite() && lower.is_finite() {
            0.5 * (upper + lower)
        } else if upper.is_finite() {
            upper
        } else {
            lower
        }
    }

    fn into_model(self, xs: &Matrix, ys: &[f64], cfg: &SvmConfig) -> SvmModel {
        let bias = self.bias();
        let objective = dual_objective(&self.alpha, ys, self.gram);
        let support_indices: Vec<usize> = (0..ys.len()).filter(|&t| self.alpha[t] > 0.0).collect();
        SvmModel {
            support_vectors: xs.select_rows(&support_indices),
            support_labels: support_indices.iter().map(|&t| ys[t]).collect(),
            alphas: support_indices.iter().map(|&t| self.alpha[t]).collect(),
            bias,
            kernel: cfg.kernel,
            config: cfg.clone(),
            support_indices,
            iterations: self.iterations,
            dual_objective: objective,
        }
    }
}
