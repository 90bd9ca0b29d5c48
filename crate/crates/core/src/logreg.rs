//! Maximum-likelihood logistic regression fit by damped Newton-Raphson.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::numerics::{dot, Cholesky, Matrix};

pub const LOGREG_SCHEMA_VERSION: u32 = 1;
pub const DEFAULT_RIDGE: f64 = 1e-8;

const MAX_HALVINGS: usize = 20;

/// Logistic sigmoid, evaluated on the side that cannot overflow.
#[inline]
pub fn sigmoid(a: f64) -> f64 {
    if a >= 0.0 {
        1.0 / (1.0 + (-a).exp())
    } else {
        let e = a.exp();
        e / (1.0 + e)
    }
}

/// `ln σ(a)` without cancellation for large |a|.
#[inline]
pub fn ln_sigmoid(a: f64) -> f64 {
    if a >= 0.0 {
        -(-a).exp().ln_1p()
    } else {
        a - a.exp().ln_1p()
    }
}

/// Design matrix `[1, x]` for each row.
pub fn with_bias(xs: &Matrix) -> Matrix {
    let mut out = Matrix::zeros(xs.rows(), xs.cols() + 1);
    for i in 0..xs.rows() {
        let row = out.row_mut(i);
        row[0] = 1.0;
        row[1..].copy_from_slice(xs.row(i));
    }
    out
}

pub fn bias_row(x: &[f64]) -> Vec<f64> {
    std::iter::once(1.0).chain(x.iter().copied()).collect()
}

/// Penalized negative log-likelihood and its gradient.
///
/// `−Σ[t ln σ(wᵀφ) + (1−t) ln(1−σ(wᵀφ))] + (ridge/2)‖w‖²`
pub fn nll_grad(w: &[f64], phis: &Matrix, ts: &[f64], ridge: f64) -> Result<(f64, Vec<f64>)> {
    check_dims(w, phis, ts)?;
    let mut value = 0.5 * ridge * dot(w, w);
    let mut grad: Vec<f64> = w.iter().map(|wi| ridge * wi).collect();
    for (phi, &t) in phis.row_iter().zip(ts) {
        let a = dot(w, phi);
        // −t ln σ(a) − (1−t) ln σ(−a)
        value -= t * ln_sigmoid(a) + (1.0 - t) * ln_sigmoid(-a);
        let r = sigmoid(a) - t;
        for (g, p) in grad.iter_mut().zip(phi) {
            *g += r * p;
        }
    }
    Ok((value, grad))
}

fn nll(w: &[f64], phis: &Matrix, ts: &[f64], ridge: f64) -> f64 {
    let mut value = 0.5 * ridge * dot(w, w);
    for (phi, &t) in phis.row_iter().zip(ts) {
        let a = dot(w, phi);
        value -= t * ln_sigmoid(a) + (1.0 - t) * ln_sigmoid(-a);
    }
    value
}

fn check_dims(w: &[f64], phis: &Matrix, ts: &[f64]) -> Result<()> {
    if w.len() != phis.cols() {
        return Err(Error::DimensionMismatch {
            expected: phis.cols(),
            found: w.len(),
        });
    }
    if ts.len() != phis.rows() {
        return Err(Error::LengthMismatch {
            left: phis.rows(),
            right: ts.len(),
        });
    }
    Ok(())
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LogRegModel {
    pub weights: Vec<f64>,
    pub ridge: f64,
    pub iterations: usize,
    pub converged: bool,
    /// Penalized objective at `weights`.
    pub objective: f64,
    pub grad_norm: f64,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct LogRegConfig {
    pub ridge: f64,
    pub tol: f64,
    pub max_iter: usize,
}

impl Default for LogRegConfig {
    fn default() -> Self {
        LogRegConfig {
            ridge: DEFAULT_RIDGE,
            tol: 1e-8,
            max_iter: 100,
        }
    }
}

#[derive(Serialize, Deserialize)]
struct LogRegDocument {
    schema_version: u32,
    model: LogRegModel,
}

impl LogRegModel {
    /// Fits on a design matrix whose rows are the feature vectors φ (include the
    /// bias column yourself, e.g. with [`with_bias`]). Labels are 0/1.
    pub fn fit(phis: &Matrix, ts: &[f64], cfg: &LogRegConfig) -> Result<LogRegModel> {
        let p = phis.cols();
        let w0 = vec![0.0; p];
        check_dims(&w0, phis, ts)?;
        if ts.iter().any(|&t| t != 0.0 && t != 1.0) {
            return Err(Error::Config("logistic labels must be 0 or 1".into()));
        }
        if !ts.contains(&1.0) {
            return Err(Error::EmptyClass("positive"));
        }
        if !ts.contains(&0.0) {
            return Err(Error::EmptyClass("negative"));
        }
        let mut w = w0;
        let (mut value, mut grad) = nll_grad(&w, phis, ts, cfg.ridge)?;
        let mut iterations = 0;
        let mut converged = false;
        while iterations < cfg.max_iter {
            let gnorm = dot(&grad, &grad).sqrt();
            if gnorm <= cfg.tol * (1.0 + value.abs()) {
                converged = true;
                break;
            }
            iterations += 1;
            let mut hess = Matrix::zeros(p, p);
            for phi in phis.row_iter() {
                let s = sigmoid(dot(&w, phi));
                let weight = s * (1.0 - s);
                if weight > 0.0 {
                    hess.add_outer(phi, weight);
                }
            }
            hess.add_diag(cfg.ridge);
            let chol = Cholesky::new(&hess).map_err(|_| Error::SingularHessian {
                iteration: iterations,
            })?;
            let step = chol.solve(&grad)?;
            if step.iter().any(|s| !s.is_finite()) {
                return Err(Error::SingularHessian {
                    iteration: iterations,
                });
            }
            let mut scale = 1.0;
            let mut accepted = None;
            for _ in 0..=MAX_HALVINGS {
                let cand: Vec<f64> = w
                    .iter()
                    .zip(&step)
                    .map(|(wi, si)| wi - scale * si)
                    .collect();
                let v = nll(&cand, phis, ts, cfg.ridge);
                if v <= value {
                    accepted = Some((cand, v));
                    break;
                }
                scale *= 0.5;
            }
            match accepted {
                Some((cand, _)) => {
                    w = cand;
                    let (v, g) = nll_grad(&w, phis, ts, cfg.ridge)?;
                    value = v;
                    grad = g;
                }
                // no descent along the Newton direction: stationary up to rounding
                None => break,
            }
        }
        if !converged {
            let gnorm = dot(&grad, &grad).sqrt();
            converged = gnorm <= cfg.tol * (1.0 + value.abs());
        }
        let grad_norm = dot(&grad, &grad).sqrt();
        Ok(LogRegModel {
            weights: w,
            ridge: cfg.ridge,
            iterations,
            converged,
            objective: value,
            grad_norm,
        })
    }

    pub fn predict_proba(&self, phi: &[f64]) -> Result<f64> {
        if phi.len() != self.weights.len() {
            return Err(Error::DimensionMismatch {
                expected: self.weights.len(),
                found: phi.len(),
            });
        }
        Ok(sigmoid(dot(&self.weights, phi)))
    }

    /// Class call at cutoff 0.5.
    pub fn predict(&self, phi: &[f64]) -> Result<bool> {
        Ok(self.predict_proba(phi)? >= 0.5)
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(&LogRegDocument {
            schema_version: LOGREG_SCHEMA_VERSION,
            model: self.clone(),
        })?)
    }

    pub fn from_json(text: &str) -> Result<LogRegModel> {
        let doc: LogRegDocument = serde_json::from_str(text)?;
        if doc.schema_version != LOGREG_SCHEMA_VERSION {
            return Err(Error::Config(format!(
                "unsupported logistic model schema version {}",
                doc.schema_version
            )));
        }
        Ok(doc.model)
    }
}

pub fn logreg_fit(
    phis: &Matrix,
    ts: &[f64],
    ridge: f64,
    tol: f64,
    max_iter: usize,
) -> Result<LogRegModel> {
    LogRegModel::fit(
        phis,
        ts,
        &LogRegConfig {
            ridge,
            tol,
            max_iter,
        },
    )
}

pub fn logreg_predict_proba(model: &LogRegModel, phi: &[f64]) -> Result<f64> {
    model.predict_proba(phi)
}
