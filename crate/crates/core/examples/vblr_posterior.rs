//! Variational Bayesian logistic regression with a fixed Gaussian prior and
//! with a Gamma hyperprior on the weight precision.
//!
//!   cargo run -p wdbc --example vblr_posterior

use wdbc::logreg::with_bias;
use wdbc::vblr::{fit, predict_proba_mc};
use wdbc::{Matrix, Prior, RngState, VblrConfig};

fn main() -> wdbc::Result<()> {
    let mut rng = RngState::new(11);
    let rows: Vec<[f64; 2]> = (0..40)
        .map(|_| [rng.standard_normal(), rng.standard_normal()])
        .collect();
    let ts: Vec<f64> = rows
        .iter()
        .map(|r| {
            if 2.0 * r[0] - r[1] + 0.3 * rng.standard_normal() > 0.0 {
                1.0
            } else {
                0.0
            }
        })
        .collect();
    let phis = with_bias(&Matrix::from_rows(&rows)?);

    for prior in [Prior::default_fixed(3), Prior::default_hierarchical()] {
        let cfg = VblrConfig::new(prior);
        let post = fit(&phis, &ts, &cfg)?;
        println!("{} prior", cfg.prior.label());
        println!("  mean {:.3?}", post.mu);
        println!("  variances {:.3?}", post.cov.diag());
        if let Some(g) = &post.gamma {
            println!(
                "  q(alpha) = Gam({:.2}, {:.3}), E[alpha] {:.3}",
                g.a,
                g.b,
                g.mean()
            );
        }
        let trace = &post.elbo_trace;
        println!(
            "  bound {:.4} -> {:.4} over {} iterations, converged {}",
            trace[0],
            post.final_bound(),
            trace.len(),
            post.converged
        );
        let mut draws = RngState::new(cfg.seed);
        for x in [[1.0, 0.0, 0.0], [1.0, 1.0, 0.0], [1.0, -1.0, 1.0]] {
            let est = predict_proba_mc(&post, &x, 4000, &mut draws)?;
            println!(
                "  P(t=1 | {:?}) = {:.3} ± {:.3}",
                &x[1..],
                est.mean,
                est.stderr
            );
        }
    }
    Ok(())
}
