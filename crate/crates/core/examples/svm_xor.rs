//! RBF SVM on the four XOR corners.
//!
//!   cargo run -p wdbc --example svm_xor

use wdbc::{KernelSpec, Matrix, SvmConfig, SvmModel};

fn main() -> wdbc::Result<()> {
    let xs = Matrix::from_rows(&[[0.0, 0.0], [1.0, 1.0], [0.0, 1.0], [1.0, 0.0]])?;
    let ys = [-1.0, -1.0, 1.0, 1.0];

    let cfg = SvmConfig::new(KernelSpec::Rbf { gamma: 2.0 }, 10.0).with_tol(1e-6);
    let model = SvmModel::train(&xs, &ys, &cfg)?;
    println!(
        "{} support vectors, bias {:.6}, dual objective {:.6}, {} iterations",
        model.n_support(),
        model.bias,
        model.dual_objective,
        model.iterations
    );

    for (x, y) in xs.row_iter().zip(&ys) {
        println!(
            "{x:?}  f = {:+.4}  label {:+}  truth {y:+}",
            model.decision(x)?,
            model.predict(x)?
        );
    }
    for q in [[0.1, 0.9], [0.5, 0.5], [0.95, 0.05]] {
        println!("{q:?}  f = {:+.4}", model.decision(&q)?);
    }

    // a linear kernel cannot separate XOR
    let linear = SvmModel::train(&xs, &ys, &SvmConfig::new(KernelSpec::Linear, 10.0))?;
    let wrong = xs
        .row_iter()
        .zip(&ys)
        .filter(|(x, y)| linear.predict(x).unwrap() != **y)
        .count();
    println!("linear kernel misses {wrong}/4");
    Ok(())
}
