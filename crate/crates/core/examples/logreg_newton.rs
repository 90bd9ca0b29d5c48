//! Newton logistic regression on a noisy 1-D problem, plus a finite-difference
//! check of the gradient.
//!
//!   cargo run -p wdbc --example logreg_newton

use wdbc::logreg::{nll_grad, with_bias, LogRegConfig};
use wdbc::{LogRegModel, Matrix, RngState};

fn main() -> wdbc::Result<()> {
    let mut rng = RngState::new(7);
    let rows: Vec<[f64; 1]> = (0..200).map(|_| [2.0 * rng.standard_normal()]).collect();
    // true model: P(t = 1 | x) = σ(0.5 + 1.5 x)
    let ts: Vec<f64> = rows
        .iter()
        .map(|r| {
            let p = 1.0 / (1.0 + (-(0.5 + 1.5 * r[0])).exp());
            if rng.uniform() < p {
                1.0
            } else {
                0.0
            }
        })
        .collect();
    let phis = with_bias(&Matrix::from_rows(&rows)?);

    let model = LogRegModel::fit(&phis, &ts, &LogRegConfig::default())?;
    println!(
        "w = [{:.4}, {:.4}] after {} Newton steps, converged {}, |grad| {:.2e}",
        model.weights[0], model.weights[1], model.iterations, model.converged, model.grad_norm
    );

    let w = [0.3, -0.2];
    let (_, grad) = nll_grad(&w, &phis, &ts, model.ridge)?;
    let h = 1e-6;
    for j in 0..2 {
        let (mut up, mut down) = (w, w);
        up[j] += h;
        down[j] -= h;
        let fd = (nll_grad(&up, &phis, &ts, model.ridge)?.0
            - nll_grad(&down, &phis, &ts, model.ridge)?.0)
            / (2.0 * h);
        println!(
            "d/dw{j}: analytic {:.6}, central difference {:.6}",
            grad[j], fd
        );
    }

    for x in [-2.0, 0.0, 2.0] {
        println!("P(t=1 | x={x}) = {:.4}", model.predict_proba(&[1.0, x])?);
    }
    Ok(())
}
