//! Independent oracles shared by the integration suites. Nothing here calls
//! into the code paths it is used to check.
#![allow(dead_code)]

use wdbc::numerics::RngState;
use wdbc::svm::SvmModel;
use wdbc::Matrix;

pub fn data_path() -> std::path::PathBuf {
    std::path::PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("data/wdbc.data")
}

pub fn sigmoid(a: f64) -> f64 {
    1.0 / (1.0 + (-a).exp())
}

pub fn log_sigmoid(a: f64) -> f64 {
    if a > 0.0 {
        -(-a).exp().ln_1p()
    } else {
        a - a.exp().ln_1p()
    }
}

// ---- SVM ----

pub fn rbf(gamma: f64) -> impl Fn(&[f64], &[f64]) -> f64 {
    move |x, y| {
        let d: f64 = x.iter().zip(y).map(|(a, b)| (a - b) * (a - b)).sum();
        (-gamma * d).exp()
    }
}

pub fn linear(x: &[f64], y: &[f64]) -> f64 {
    x.iter().zip(y).map(|(a, b)| a * b).sum()
}

/// Two classes of points in the plane, at least one of each.
pub fn tiny_instance(seed: u64, n: usize) -> (Vec<Vec<f64>>, Vec<f64>) {
    let mut rng = RngState::new(seed);
    let mut xs = Vec::new();
    let mut ys = Vec::new();
    for i in 0..n {
        let y = if i % 2 == 0 { 1.0 } else { -1.0 };
        xs.push(vec![rng.standard_normal() + 0.8 * y, rng.standard_normal()]);
        ys.push(y);
    }
    (xs, ys)
}

pub fn oracle_dual(alpha: &[f64], ys: &[f64], k: &[Vec<f64>]) -> f64 {
    let mut s = alpha.iter().sum::<f64>();
    for i in 0..alpha.len() {
        for j in 0..alpha.len() {
            s -= 0.5 * alpha[i] * alpha[j] * ys[i] * ys[j] * k[i][j];
        }
    }
    s
}

pub struct DualSolution {
    pub alpha: Vec<f64>,
    pub bias: f64,
    pub objective: f64,
}

/// Exhaustive search over α ∈ {0, step, …, C}^(n−1) with the last coordinate fixed
/// by Σ α y = 0. Bias from the margin vectors, or the middle of the feasible interval.
pub fn dual_grid_search(
    xs: &[Vec<f64>],
    ys: &[f64],
    kernel: &dyn Fn(&[f64], &[f64]) -> f64,
    c: f64,
    step: f64,
) -> DualSolution {
    let n = xs.len();
    let k: Vec<Vec<f64>> = xs
        .iter()
        .map(|a| xs.iter().map(|b| kernel(a, b)).collect())
        .collect();
    let levels = (c / step).round() as usize;
    let mut idx = vec![0usize; n - 1];
    let mut best: Option<(f64, Vec<f64>)> = None;
    loop {
        let mut alpha: Vec<f64> = idx.iter().map(|&i| i as f64 * step).collect();
        let partial: f64 = alpha.iter().zip(ys).map(|(a, y)| a * y).sum();
        let last = -partial * ys[n - 1];
        if (-1e-12..=c + 1e-12).contains(&last) {
            alpha.push(last.clamp(0.0, c));
            let obj = oracle_dual(&alpha, ys, &k);
            if best.as_ref().is_none_or(|(b, _)| obj > *b) {
                best = Some((obj, alpha));
            }
        }
        let mut pos = 0;
        loop {
            if pos == idx.len() {
                let (objective, alpha) = best.expect("α = 0 is feasible");
                let bias = oracle_bias(&alpha, ys, &k, c, step);
                return DualSolution {
                    alpha,
                    bias,
                    objective,
                };
            }
            idx[pos] += 1;
            if idx[pos] <= levels {
                break;
            }
            idx[pos] = 0;
            pos += 1;
        }
    }
}

fn oracle_bias(alpha: &[f64], ys: &[f64], k: &[Vec<f64>], c: f64, step: f64) -> f64 {
    let n = alpha.len();
    let f0: Vec<f64> = (0..n)
        .map(|i| (0..n).map(|j| alpha[j] * ys[j] * k[j][i]).sum())
        .collect();
    let free: Vec<usize> = (0..n)
        .filter(|&i| alpha[i] > 0.5 * step && alpha[i] < c - 0.5 * step)
        .collect();
    if !free.is_empty() {
        return free.iter().map(|&i| ys[i] - f0[i]).sum::<f64>() / free.len() as f64;
    }
    // y(f0 + b) ≥ 1 for α = 0, ≤ 1 for α = C
    let (mut lo, mut hi) = (f64::NEG_INFINITY, f64::INFINITY);
    for i in 0..n {
        let at_zero = alpha[i] <= 0.5 * step;
        let needed = ys[i] - f0[i];
        let lower_bound = (ys[i] > 0.0) == at_zero;
        if lower_bound {
            lo = lo.max(needed);
        } else {
            hi = hi.min(needed);
        }
    }
    match (lo.is_finite(), hi.is_finite()) {
        (true, true) => 0.5 * (lo + hi),
        (true, false) => lo,
        (false, true) => hi,
        _ => 0.0,
    }
}

pub fn oracle_decision(
    sol: &DualSolution,
    xs: &[Vec<f64>],
    ys: &[f64],
    kernel: &dyn Fn(&[f64], &[f64]) -> f64,
    x: &[f64],
) -> f64 {
    xs.iter()
        .zip(ys)
        .zip(&sol.alpha)
        .map(|((xi, y), a)| a * y * kernel(xi, x))
        .sum::<f64>()
        + sol.bias
}

/// Max-margin separator of separable 2-D data by a dense search over the normal's angle.
pub fn max_margin_2d(xs: &[Vec<f64>], ys: &[f64], angles: usize) -> ([f64; 2], f64, f64) {
    let mut best = (f64::NEG_INFINITY, [0.0, 0.0], 0.0);
    for s in 0..angles {
        let t = 2.0 * std::f64::consts::PI * s as f64 / angles as f64;
        let u = [t.cos(), t.sin()];
        let proj = |x: &Vec<f64>| u[0] * x[0] + u[1] * x[1];
        let min_pos = xs
            .iter()
            .zip(ys)
            .filter(|(_, y)| **y > 0.0)
            .map(|(x, _)| proj(x))
            .fold(f64::INFINITY, f64::min);
        let max_neg = xs
            .iter()
            .zip(ys)
            .filter(|(_, y)| **y < 0.0)
            .map(|(x, _)| proj(x))
            .fold(f64::NEG_INFINITY, f64::max);
        let margin = 0.5 * (min_pos - max_neg);
        if margin > best.0 {
            best = (margin, u, -0.5 * (min_pos + max_neg));
        }
    }
    (best.1, best.2, best.0)
}

pub fn full_alphas(model: &SvmModel, n: usize) -> Vec<f64> {
    let mut a = vec![0.0; n];
    for (&i, &v) in model.support_indices.iter().zip(&model.alphas) {
        a[i] = v;
    }
    a
}

/// Largest KKT violation of a trained model on its training set.
pub fn kkt_violation(model: &SvmModel, xs: &Matrix, ys: &[f64], c: f64) -> f64 {
    let alpha = full_alphas(model, ys.len());
    let mut worst = 0.0f64;
    for i in 0..ys.len() {
        let m = ys[i] * model.decision(xs.row(i)).unwrap();
        let v = if alpha[i] <= 0.0 {
            1.0 - m
        } else if alpha[i] >= c {
            m - 1.0
        } else {
            (m - 1.0).abs()
        };
        worst = worst.max(v);
    }
    worst
}

// ---- logistic models ----

pub fn nll_plain(w: &[f64], phis: &[Vec<f64>], ts: &[f64], ridge: f64) -> f64 {
    let mut v = 0.5 * ridge * w.iter().map(|x| x * x).sum::<f64>();
    for (phi, t) in phis.iter().zip(ts) {
        let a: f64 = w.iter().zip(phi).map(|(x, y)| x * y).sum();
        v -= t * log_sigmoid(a) + (1.0 - t) * log_sigmoid(-a);
    }
    v
}

pub fn central_difference(f: &dyn Fn(&[f64]) -> f64, w: &[f64], h: f64) -> Vec<f64> {
    (0..w.len())
        .map(|j| {
            let mut up = w.to_vec();
            let mut down = w.to_vec();
            up[j] += h;
            down[j] -= h;
            (f(&up) - f(&down)) / (2.0 * h)
        })
        .collect()
}

/// `ln Γ` at integers and half-integers by the recurrence from Γ(1) and Γ(½).
pub fn ln_gamma_half_integer(x: f64) -> f64 {
    let twice = (2.0 * x).round();
    assert!((2.0 * x - twice).abs() < 1e-12 && x > 0.0);
    let (mut z, mut acc) = if twice as i64 % 2 == 0 {
        (1.0, 0.0)
    } else {
        (0.5, 0.5 * std::f64::consts::PI.ln())
    };
    while z < x - 1e-9 {
        acc += z.ln();
        z += 1.0;
    }
    acc
}

fn log_lik(w: &[f64], phis: &[Vec<f64>], ts: &[f64]) -> f64 {
    phis.iter()
        .zip(ts)
        .map(|(phi, t)| {
            let a: f64 = w.iter().zip(phi).map(|(x, y)| x * y).sum();
            if *t > 0.5 {
                log_sigmoid(a)
            } else {
                log_sigmoid(-a)
            }
        })
        .sum()
}

fn log_sum_exp_weighted(terms: &[(f64, f64)]) -> f64 {
    // Σ weight · exp(log_value)
    let m = terms.iter().map(|t| t.1).fold(f64::NEG_INFINITY, f64::max);
    m + terms
        .iter()
        .map(|(w, l)| w * (l - m).exp())
        .sum::<f64>()
        .ln()
}

/// Trapezoid nodes and weights on [lo, hi].
pub fn nodes(lo: f64, hi: f64, n: usize) -> Vec<(f64, f64)> {
    let h = (hi - lo) / (n - 1) as f64;
    (0..n)
        .map(|i| {
            let w = if i == 0 || i == n - 1 { 0.5 * h } else { h };
            (lo + i as f64 * h, w)
        })
        .collect()
}

/// `ln ∫ exp(f(w)) dw` on a tensor grid for P = 1 or 2.
pub fn log_integral(
    f: &dyn Fn(&[f64]) -> f64,
    half_width: f64,
    center: &[f64],
    points: usize,
) -> f64 {
    let axes: Vec<Vec<(f64, f64)>> = center
        .iter()
        .map(|c| nodes(c - half_width, c + half_width, points))
        .collect();
    let mut terms = Vec::new();
    if center.len() == 1 {
        for &(w0, h0) in &axes[0] {
            terms.push((h0, f(&[w0])));
        }
    } else {
        for &(w0, h0) in &axes[0] {
            for &(w1, h1) in &axes[1] {
                terms.push((h0 * h1, f(&[w0, w1])));
            }
        }
    }
    log_sum_exp_weighted(&terms)
}

/// `ln ∫ p(t|w) p(w) dw`
pub fn log_evidence(
    phis: &[Vec<f64>],
    ts: &[f64],
    log_prior: &dyn Fn(&[f64]) -> f64,
    half_width: f64,
    center: &[f64],
    points: usize,
) -> f64 {
    log_integral(
        &|w| log_lik(w, phis, ts) + log_prior(w),
        half_width,
        center,
        points,
    )
}

/// `ln ∫ Π_i h_i(w, ξ_i) p(w) dw`, with h the local sigmoid bound written out directly.
pub fn log_bounded_evidence(
    phis: &[Vec<f64>],
    ts: &[f64],
    xi: &[f64],
    log_prior: &dyn Fn(&[f64]) -> f64,
    half_width: f64,
    center: &[f64],
    points: usize,
) -> f64 {
    let f = |w: &[f64]| {
        let mut v = log_prior(w);
        for ((phi, t), &x) in phis.iter().zip(ts).zip(xi) {
            let a: f64 = w.iter().zip(phi).map(|(p, q)| p * q).sum();
            let lambda = (sigmoid(x) - 0.5) / (2.0 * x);
            // e^{a t} σ(−a) ≥ e^{a t} σ(ξ) exp{−(a + ξ)/2 − λ(a² − ξ²)}
            v += a * t + log_sigmoid(x) - 0.5 * (a + x) - lambda * (a * a - x * x);
        }
        v
    };
    log_integral(&f, half_width, center, points)
}

/// Gaussian prior N(m0, diag(v0)).
pub fn log_gaussian_prior(m0: Vec<f64>, v0: Vec<f64>) -> impl Fn(&[f64]) -> f64 {
    move |w| {
        w.iter()
            .zip(&m0)
            .zip(&v0)
            .map(|((x, m), v)| {
                -0.5 * (2.0 * std::f64::consts::PI * v).ln() - 0.5 * (x - m) * (x - m) / v
            })
            .sum()
    }
}

/// Marginal of N(w | 0, α⁻¹ I) under α ~ Gam(a0, b0): a multivariate Student-t.
pub fn log_student_prior(a0: f64, b0: f64, p: usize) -> impl Fn(&[f64]) -> f64 {
    let half_p = 0.5 * p as f64;
    let norm = ln_gamma_half_integer(a0 + half_p)
        - ln_gamma_half_integer(a0)
        - half_p * (2.0 * std::f64::consts::PI).ln()
        + a0 * b0.ln();
    move |w| {
        let ww: f64 = w.iter().map(|x| x * x).sum();
        norm - (a0 + half_p) * (b0 + 0.5 * ww).ln()
    }
}

/// The same marginal by numerical integration over α.
pub fn log_student_prior_by_alpha_quadrature(a0: f64, b0: f64, w: &[f64]) -> f64 {
    let p = w.len() as f64;
    let ww: f64 = w.iter().map(|x| x * x).sum();
    let ln_gamma_a0 = ln_gamma_half_integer(a0);
    // substitute α = e^u
    let terms: Vec<(f64, f64)> = nodes(-30.0, 8.0, 40_001)
        .into_iter()
        .map(|(u, h)| {
            let alpha = u.exp();
            let ln_normal =
                0.5 * p * (alpha / (2.0 * std::f64::consts::PI)).ln() - 0.5 * alpha * ww;
            let ln_gamma_pdf = a0 * b0.ln() - ln_gamma_a0 + (a0 - 1.0) * alpha.ln() - b0 * alpha;
            (h, ln_normal + ln_gamma_pdf + u)
        })
        .collect();
    log_sum_exp_weighted(&terms)
}

/// `∫ σ(w φ) N(w | μ, s²) dw` in one dimension.
pub fn predictive_1d(mu: f64, var: f64, phi: f64) -> f64 {
    let sd = var.sqrt();
    nodes(mu - 12.0 * sd, mu + 12.0 * sd, 20_001)
        .into_iter()
        .map(|(w, h)| {
            let z = (w - mu) / sd;
            h * sigmoid(w * phi) * (-0.5 * z * z).exp() / (sd * (2.0 * std::f64::consts::PI).sqrt())
        })
        .sum()
}

pub fn random_logistic_instance(
    rng: &mut RngState,
    n: usize,
    p: usize,
) -> (Vec<Vec<f64>>, Vec<f64>) {
    let w: Vec<f64> = (0..p).map(|_| rng.standard_normal()).collect();
    let mut phis = Vec::with_capacity(n);
    let mut ts = Vec::with_capacity(n);
    for _ in 0..n {
        let phi: Vec<f64> = (0..p).map(|_| 1.5 * rng.standard_normal()).collect();
        let a: f64 = w.iter().zip(&phi).map(|(x, y)| x * y).sum();
        ts.push(if rng.uniform() < sigmoid(a) { 1.0 } else { 0.0 });
        phis.push(phi);
    }
    (phis, ts)
}
