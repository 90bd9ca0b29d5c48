//! Ten-fold grid search over RBF width and box constant on the bundled data.
//!
//!   cargo run --release -p wdbc --example kfold_grid

use wdbc::dataset::{kfold, read_wdbc};
use wdbc::experiment::{prepare, svm_grid_search, ExperimentConfig};
use wdbc::KernelSpec;

fn main() -> wdbc::Result<()> {
    let path = concat!(env!("CARGO_MANIFEST_DIR"), "/data/wdbc.data");
    let data = read_wdbc(path)?;
    let cfg = ExperimentConfig::new(path, 0);
    let prepared = prepare(&data, &cfg)?;
    let folds = kfold(prepared.train.len(), 10, 0)?;

    let kernels: Vec<KernelSpec> = [1e-3, 1e-2, 1e-1]
        .iter()
        .map(|&gamma| KernelSpec::Rbf { gamma })
        .collect();
    let cs = [0.1, 1.0, 10.0, 100.0];
    let results = svm_grid_search(&prepared.train, &kernels, &cs, &folds, 1e-3)?;
    for (k, c, entry) in &results {
        println!("{k:<22} C = {c:<6} cv error {:.4}", entry.mean_error);
    }
    let (k, c, best) = results
        .iter()
        .min_by(|a, b| a.2.mean_error.total_cmp(&b.2.mean_error))
        .unwrap();
    println!("best: {k}, C = {c}, cv error {:.4}", best.mean_error);
    Ok(())
}
