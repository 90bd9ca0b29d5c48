//! Variational Bayesian logistic regression.
//!
//! The logistic likelihood is replaced by the local quadratic lower bound
//!
//! ```text
//! σ(a) ≥ σ(ξ) exp{(a − ξ)/2 − λ(ξ)(a² − ξ²)},   λ(ξ) = (σ(ξ) − ½) / (2ξ)
//! ```
//!
//! with one variational parameter ξ_i per case. Two priors are supported:
//!
//! * `Fixed`: `w ~ N(m0, S0)`. EM alternates the Gaussian posterior update
//!   `S_N⁻¹ = S0⁻¹ + 2Σλ(ξ_i)φ_iφ_iᵀ`, `μ_N = S_N(S0⁻¹m0 + Σ(t_i − ½)φ_i)`
//!   with `ξ_i² = φ_iᵀ(S_N + μ_Nμ_Nᵀ)φ_i`. The trace holds the log of the
//!   bounded marginal likelihood `ln ∫ h(w, ξ) p(w) dw`.
//! * `Hierarchical`: `w | α ~ N(0, α⁻¹I)`, `α ~ Gam(a0, b0)` with a factorized
//!   `q(w) q(α)`. Each cycle updates q(w), then q(α), then ξ; the trace holds
//!   the full lower bound after every cycle.
//!
//! Prediction averages `σ(wᵀφ)` over Monte Carlo draws from q(w).

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::logreg::{ln_sigmoid, sigmoid};
use crate::numerics::random::sample_with_factor;
use crate::numerics::{digamma, dot, log_gamma, Cholesky, Matrix, RngState};

pub const VBLR_SCHEMA_VERSION: u32 = 1;

/// Lower limit applied to updated ξ so λ(ξ) stays finite.
pub const XI_FLOOR: f64 = 1e-10;

const LAMBDA_SERIES_BELOW: f64 = 1e-4;

/// `λ(ξ) = (σ(ξ) − ½)/(2ξ)`; near zero the series `1/8 − ξ²/96`.
///
/// Even in ξ.
pub fn lambda_xi(xi: f64) -> f64 {
    if xi.abs() < LAMBDA_SERIES_BELOW {
        // (σ(ξ) − ½)/(2ξ) = 1/8 − ξ²/96 + O(ξ⁴)
        0.125 - xi * xi / 96.0
    } else {
        // σ(ξ) − ½ = ½ tanh(ξ/2), which keeps precision for small ξ
        0.25 * (0.5 * xi).tanh() / xi
    }
}

/// Right-hand side of the local sigmoid bound.
pub fn sigmoid_lower_bound(a: f64, xi: f64) -> f64 {
    log_sigmoid_lower_bound(a, xi).exp()
}

pub fn log_sigmoid_lower_bound(a: f64, xi: f64) -> f64 {
    ln_sigmoid(xi) + 0.5 * (a - xi) - lambda_xi(xi) * (a * a - xi * xi)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "mode", rename_all = "lowercase")]
pub enum Prior {
    Fixed { m0: Vec<f64>, s0: Matrix },
    Hierarchical { a0: f64, b0: f64 },
}

impl Prior {
    /// `N(0, 10·I)` over `p` dimensions.
    pub fn default_fixed(p: usize) -> Prior {
        let mut s0 = Matrix::identity(p);
        s0.scale(10.0);
        Prior::Fixed {
            m0: vec![0.0; p],
            s0,
        }
    }

    /// `Gam(1e-2, 1e-2)`
    pub fn default_hierarchical() -> Prior {
        Prior::Hierarchical { a0: 1e-2, b0: 1e-2 }
    }

    pub fn label(&self) -> &'static str {
        match self {
            Prior::Fixed { .. } => "fixed",
            Prior::Hierarchical { .. } => "hierarchical",
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct VblrConfig {
    pub prior: Prior,
    pub xi_init: f64,
    pub max_em_iters: usize,
    pub elbo_tol: f64,
    pub mc_samples: usize,
    pub seed: u64,
}

impl VblrConfig {
    pub fn new(prior: Prior) -> Self {
        VblrConfig {
            prior,
            xi_init: 1.0,
            max_em_iters: 200,
            elbo_tol: 1e-6,
            mc_samples: 2000,
            seed: 0,
        }
    }

    fn validate(&self, p: usize) -> Result<()> {
        match &self.prior {
            Prior::Fixed { m0, s0 } => {
                if m0.len() != p {
                    return Err(Error::DimensionMismatch {
                        expected: p,
                        found: m0.len(),
                    });
                }
                if s0.rows() != p || s0.cols() != p {
                    return Err(Error::DimensionMismatch {
                        expected: p,
                        found: s0.rows(),
                    });
                }
            }
            Prior::Hierarchical { a0, b0 } => {
                if !(*a0 > 0.0 && *b0 > 0.0) {
                    return Err(Error::Config(format!(
                        "Gamma hyperparameters must be positive (a0 = {a0}, b0 = {b0})"
                    )));
                }
            }
        }
        if !(self.xi_init > 0.0) {
            return Err(Error::Config("xi_init must be positive".into()));
        }
        Ok(())
    }
}

/// `q(α) = Gam(a, b)` (shape, rate).
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct GammaFactor {
    pub a: f64,
    pub b: f64,
}

impl GammaFactor {
    pub fn mean(&self) -> f64 {
        self.a / self.b
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct VblrPosterior {
    pub mu: Vec<f64>,
    pub cov: Matrix,
    pub gamma: Option<GammaFactor>,
    pub xi: Vec<f64>,
    pub elbo_trace: Vec<f64>,
    pub converged: bool,
    /// Factorizations that needed the diagonal retry.
    pub jitter_events: usize,
}

#[derive(Serialize, Deserialize)]
struct PosteriorDocument {
    schema_version: u32,
    posterior: VblrPosterior,
}

impl VblrPosterior {
    pub fn dim(&self) -> usize {
        self.mu.len()
    }

    pub fn final_bound(&self) -> f64 {
        *self.elbo_trace.last().unwrap_or(&f64::NEG_INFINITY)
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(&PosteriorDocument {
            schema_version: VBLR_SCHEMA_VERSION,
            posterior: self.clone(),
        })?)
    }

    pub fn from_json(text: &str) -> Result<VblrPosterior> {
        let doc: PosteriorDocument = serde_json::from_str(text)?;
        if doc.schema_version != VBLR_SCHEMA_VERSION {
            return Err(Error::Config(format!(
                "unsupported posterior schema version {}",
                doc.schema_version
            )));
        }
        Ok(doc.posterior)
    }
}

fn check_data(phis: &Matrix, ts: &[f64]) -> Result<()> {
    if ts.len() != phis.rows() {
        return Err(Error::LengthMismatch {
            left: phis.rows(),
            right: ts.len(),
        });
    }
    if ts.iter().any(|&t| t != 0.0 && t != 1.0) {
        return Err(Error::Config("labels must be 0 or 1".into()));
    }
    Ok(())
}

/// Gaussian factor for a given prior precision and ξ:
/// `S_N⁻¹ = prior_precision + 2Σλ(ξ_i)φ_iφ_iᵀ`, `μ_N = S_N(prior_shift + Σ(t_i − ½)φ_i)`.
struct GaussianUpdate {
    mu: Vec<f64>,
    cov: Matrix,
    precision_chol: Cholesky,
    jittered: bool,
}

fn gaussian_update(
    phis: &Matrix,
    ts: &[f64],
    xi: &[f64],
    prior_precision: &Matrix,
    prior_shift: &[f64],
) -> Result<GaussianUpdate> {
    let mut precision = prior_precision.clone();
    let mut rhs = prior_shift.to_vec();
    for ((phi, &t), &x) in phis.row_iter().zip(ts).zip(xi) {
        precision.add_outer(phi, 2.0 * lambda_xi(x));
        for (r, p) in rhs.iter_mut().zip(phi) {
            *r += (t - 0.5) * p;
        }
    }
    let (chol, jittered) = Cholesky::with_jitter(&precision)?;
    let cov = chol.inverse();
    let mu = chol.solve(&rhs)?;
    Ok(GaussianUpdate {
        mu,
        cov,
        precision_chol: chol,
        jittered,
    })
}

/// Posterior `(μ_N, S_N)` under the fixed Gaussian prior for given ξ.
pub fn e_step_fixed(
    phis: &Matrix,
    ts: &[f64],
    m0: &[f64],
    s0: &Matrix,
    xi: &[f64],
) -> Result<(Vec<f64>, Matrix)> {
    check_data(phis, ts)?;
    if xi.len() != phis.rows() {
        return Err(Error::LengthMismatch {
            left: phis.rows(),
            right: xi.len(),
        });
    }
    let s0_chol = Cholesky::new(s0)?;
    let s0_inv = s0_chol.inverse();
    let shift = s0_chol.solve(m0)?;
    let up = gaussian_update(phis, ts, xi, &s0_inv, &shift)?;
    Ok((up.mu, up.cov))
}

/// `ξ_i = √(φ_iᵀ(S_N + μ_Nμ_Nᵀ)φ_i)`, floored at [`XI_FLOOR`].
pub fn m_step_xi(phis: &Matrix, mu: &[f64], cov: &Matrix) -> Vec<f64> {
    phis.row_iter()
        .map(|phi| {
            let m = dot(mu, phi);
            (cov.quad_form(phi) + m * m).max(0.0).sqrt().max(XI_FLOOR)
        })
        .collect()
}

/// `Σ_i [ln σ(ξ_i) − ξ_i/2 + λ(ξ_i) ξ_i²]`
fn xi_constant(xi: &[f64]) -> f64 {
    xi.iter()
        .map(|&x| ln_sigmoid(x) - 0.5 * x + lambda_xi(x) * x * x)
        .sum()
}

/// `ln ∫ h(w, ξ) N(w | m0, S0) dw` at the Gaussian posterior for ξ:
/// `½ ln(|S_N|/|S0|) + ½ μ_Nᵀ S_N⁻¹ μ_N − ½ m0ᵀ S0⁻¹ m0 + Σ[ln σ(ξ) − ξ/2 + λ(ξ)ξ²]`.
pub fn fixed_bound(phis: &Matrix, ts: &[f64], m0: &[f64], s0: &Matrix, xi: &[f64]) -> Result<f64> {
    check_data(phis, ts)?;
    let s0_chol = Cholesky::new(s0)?;
    let s0_inv = s0_chol.inverse();
    let shift = s0_chol.solve(m0)?;
    let up = gaussian_update(phis, ts, xi, &s0_inv, &shift)?;
    Ok(fixed_bound_at(&up, &s0_chol, m0, &shift, xi))
}

fn fixed_bound_at(
    up: &GaussianUpdate,
    s0_chol: &Cholesky,
    m0: &[f64],
    s0_inv_m0: &[f64],
    xi: &[f64],
) -> f64 {
    // S_N⁻¹ μ_N is the update's right-hand side
    let rhs_dot = {
        let l = up.precision_chol.l();
        // μᵀ S_N⁻¹ μ = ‖Lᵀ μ‖²
        let p = up.mu.len();
        (0..p)
            .map(|j| {
                let s: f64 = (j..p).map(|i| l[(i, j)] * up.mu[i]).sum();
                s * s
            })
            .sum::<f64>()
    };
    let log_det_sn = -up.precision_chol.log_det();
    0.5 * (log_det_sn - s0_chol.log_det()) + 0.5 * rhs_dot - 0.5 * dot(m0, s0_inv_m0)
        + xi_constant(xi)
}

/// EM under the fixed Gaussian prior.
pub fn fit_fixed(phis: &Matrix, ts: &[f64], cfg: &VblrConfig) -> Result<VblrPosterior> {
    check_data(phis, ts)?;
    cfg.validate(phis.cols())?;
    let (m0, s0) = match &cfg.prior {
        Prior::Fixed { m0, s0 } => (m0, s0),
        Prior::Hierarchical { .. } => {
            return Err(Error::Config("fit_fixed needs a fixed prior".into()))
        }
    };
    let s0_chol = Cholesky::new(s0)?;
    let s0_inv = s0_chol.inverse();
    let shift = s0_chol.solve(m0)?;
    let n = phis.rows();
    let mut xi = vec![cfg.xi_init; n];
    let mut jitter_events = 0;
    let mut up = gaussian_update(phis, ts, &xi, &s0_inv, &shift)?;
    jitter_events += usize::from(up.jittered);
    let mut trace = vec![fixed_bound_at(&up, &s0_chol, m0, &shift, &xi)];
    let mut converged = n == 0;
    if n > 0 {
        for _ in 0..cfg.max_em_iters {
            xi = m_step_xi(phis, &up.mu, &up.cov);
            up = gaussian_update(phis, ts, &xi, &s0_inv, &shift)?;
            jitter_events += usize::from(up.jittered);
            let bound = fixed_bound_at(&up, &s0_chol, m0, &shift, &xi);
            let prev = *trace.last().expect("trace starts non-empty");
            trace.push(bound);
            if (bound - prev).abs() < cfg.elbo_tol {
                converged = true;
                break;
            }
        }
    }
    Ok(VblrPosterior {
        mu: up.mu,
        cov: up.cov,
        gamma: None,
        xi,
        elbo_trace: trace,
        converged,
        jitter_events,
    })
}

/// Coordinate ascent under the Gamma hyperprior.
pub fn fit_hierarchical(phis: &Matrix, ts: &[f64], cfg: &VblrConfig) -> Result<VblrPosterior> {
    check_data(phis, ts)?;
    cfg.validate(phis.cols())?;
    let (a0, b0) = match cfg.prior {
        Prior::Hierarchical { a0, b0 } => (a0, b0),
        Prior::Fixed { .. } => {
            return Err(Error::Config(
                "fit_hierarchical needs a Gamma hyperprior".into(),
            ))
        }
    };
    let n = phis.rows();
    let p = phis.cols();
    let mut xi = vec![cfg.xi_init; n];
    let mut gamma = GammaFactor { a: a0, b: b0 };
    let zero_shift = vec![0.0; p];
    let mut trace: Vec<f64> = Vec::new();
    let mut converged = false;
    let mut jitter_events = 0;
    let mut mu = vec![0.0; p];
    let mut cov = Matrix::identity(p);
    for _ in 0..cfg.max_em_iters.max(1) {
        // q(w)
        let mut prior_precision = Matrix::identity(p);
        prior_precision.scale(gamma.mean());
        let up = gaussian_update(phis, ts, &xi, &prior_precision, &zero_shift)?;
        jitter_events += usize::from(up.jittered);
        mu = up.mu;
        cov = up.cov;
        // q(α)
        let ew_wtw = dot(&mu, &mu) + cov.trace();
        gamma = GammaFactor {
            a: a0 + 0.5 * p as f64,
            b: b0 + 0.5 * ew_wtw,
        };
        // ξ
        xi = m_step_xi(phis, &mu, &cov);
        let state = VblrPosterior {
            mu: mu.clone(),
            cov: cov.clone(),
            gamma: Some(gamma),
            xi: xi.clone(),
            elbo_trace: Vec::new(),
            converged: false,
            jitter_events: 0,
        };
        let value = elbo(&state, phis, ts, a0, b0)?;
        let prev = trace.last().copied();
        trace.push(value);
        if let Some(prev) = prev {
            if (value - prev).abs() < cfg.elbo_tol {
                converged = true;
                break;
            }
        }
    }
    Ok(VblrPosterior {
        mu,
        cov,
        gamma: Some(gamma),
        xi,
        elbo_trace: trace,
        converged,
        jitter_events,
    })
}

/// Dispatches on the prior mode.
pub fn fit(phis: &Matrix, ts: &[f64], cfg: &VblrConfig) -> Result<VblrPosterior> {
    match cfg.prior {
        Prior::Fixed { .. } => fit_fixed(phis, ts, cfg),
        Prior::Hierarchical { .. } => fit_hierarchical(phis, ts, cfg),
    }
}

/// The five terms of the hierarchical lower bound, kept apart for inspection.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ElboTerms {
    /// `E_w[ln h(w, ξ)]`
    pub expected_log_h: f64,
    /// `E_{w,α}[ln p(w | α)]`
    pub expected_log_prior_w: f64,
    /// `E_α[ln p(α)]`
    pub expected_log_prior_alpha: f64,
    /// `−E_w[ln q(w)]`
    pub entropy_w: f64,
    /// `−E_α[ln q(α)]`
    pub entropy_alpha: f64,
}

impl ElboTerms {
    pub fn total(&self) -> f64 {
        self.expected_log_h
            + self.expected_log_prior_w
            + self.expected_log_prior_alpha
            + self.entropy_w
            + self.entropy_alpha
    }
}

/// `E_w[ln h(w, ξ)] = Σ{ln σ(ξ) + μᵀφ t − (μᵀφ + ξ)/2 − λ(ξ)[(μᵀφ)² + φᵀSφ − ξ²]}`
pub fn expected_log_h(phis: &Matrix, ts: &[f64], mu: &[f64], cov: &Matrix, xi: &[f64]) -> f64 {
    phis.row_iter()
        .zip(ts)
        .zip(xi)
        .map(|((phi, &t), &x)| {
            let m = dot(mu, phi);
            ln_sigmoid(x) + m * t
                - 0.5 * (m + x)
                - lambda_xi(x) * (m * m + cov.quad_form(phi) - x * x)
        })
        .sum()
}

pub fn elbo_terms(
    state: &VblrPosterior,
    phis: &Matrix,
    ts: &[f64],
    a0: f64,
    b0: f64,
) -> Result<ElboTerms> {
    let gamma = state
        .gamma
        .ok_or_else(|| Error::Config("ELBO needs a hierarchical posterior".into()))?;
    let p = state.dim() as f64;
    let (a_n, b_n) = (gamma.a, gamma.b);
    let e_ln_alpha = digamma(a_n)? - b_n.ln();
    let e_alpha = a_n / b_n;
    let ln_2pi = (2.0 * PI).ln();
    let (cov_chol, _) = Cholesky::with_jitter(&state.cov)?;
    Ok(ElboTerms {
        expected_log_h: expected_log_h(phis, ts, &state.mu, &state.cov, &state.xi),
        expected_log_prior_w: -0.5 * p * ln_2pi + 0.5 * p * e_ln_alpha
            - 0.5 * e_alpha * (dot(&state.mu, &state.mu) + state.cov.trace()),
        expected_log_prior_alpha: a0 * b0.ln() + (a0 - 1.0) * e_ln_alpha
            - b0 * e_alpha
            - log_gamma(a0)?,
        // Gaussian entropy ½ln|S| + (P/2)(1 + ln 2π)
        entropy_w: 0.5 * cov_chol.log_det() + 0.5 * p * (1.0 + ln_2pi),
        entropy_alpha: log_gamma(a_n)? - (a_n - 1.0) * digamma(a_n)? - b_n.ln() + a_n,
    })
}

/// Hierarchical lower bound at `state`.
pub fn elbo(state: &VblrPosterior, phis: &Matrix, ts: &[f64], a0: f64, b0: f64) -> Result<f64> {
    Ok(elbo_terms(state, phis, ts, a0, b0)?.total())
}

/// Monte Carlo estimate of `∫σ(wᵀφ) q(w) dw` with its standard error.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct McEstimate {
    pub mean: f64,
    pub stderr: f64,
}

/// Draws `mc_samples` weight vectors from q(w).
pub fn posterior_draws(
    post: &VblrPosterior,
    mc_samples: usize,
    rng: &mut RngState,
) -> Result<Vec<Vec<f64>>> {
    if mc_samples == 0 {
        return Err(Error::Config("mc_samples must be at least 1".into()));
    }
    let chol = match Cholesky::new(&post.cov) {
        Ok(c) => c,
        Err(Error::NotPositiveDefinite { .. }) => {
            let mut shifted = post.cov.clone();
            shifted.add_diag(crate::numerics::random::DEGENERATE_EPS);
            Cholesky::new(&shifted)?
        }
        Err(e) => return Err(e),
    };
    Ok(sample_with_factor(&post.mu, &chol, mc_samples, rng))
}

fn mc_from_draws(draws: &[Vec<f64>], phi: &[f64]) -> McEstimate {
    let n = draws.len() as f64;
    let vals: Vec<f64> = draws.iter().map(|w| sigmoid(dot(w, phi))).collect();
    let mean = vals.iter().sum::<f64>() / n;
    let var = if draws.len() > 1 {
        vals.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / (n - 1.0)
    } else {
        0.0
    };
    McEstimate {
        mean,
        stderr: (var / n).sqrt(),
    }
}

pub fn predict_proba_mc(
    post: &VblrPosterior,
    phi: &[f64],
    mc_samples: usize,
    rng: &mut RngState,
) -> Result<McEstimate> {
    if phi.len() != post.dim() {
        return Err(Error::DimensionMismatch {
            expected: post.dim(),
            found: phi.len(),
        });
    }
    let draws = posterior_draws(post, mc_samples, rng)?;
    Ok(mc_from_draws(&draws, phi))
}

/// One shared set of posterior draws scored against every row of `phis`.
pub fn predict_proba_mc_batch(
    post: &VblrPosterior,
    phis: &Matrix,
    mc_samples: usize,
    rng: &mut RngState,
) -> Result<Vec<McEstimate>> {
    if phis.cols() != post.dim() {
        return Err(Error::DimensionMismatch {
            expected: post.dim(),
            found: phis.cols(),
        });
    }
    let draws = posterior_draws(post, mc_samples, rng)?;
    Ok(phis
        .row_iter()
        .map(|phi| mc_from_draws(&draws, phi))
        .collect())
}
