//! Neighbour lookup, majority votes and k chosen by cross-validation.
//!
//!   cargo run -p wdbc --example knn_vote

use wdbc::knn::{knn_select_k, SelfMatch};
use wdbc::{Diagnosis, KnnModel, LabeledDataset, Matrix, RngState};

fn main() -> wdbc::Result<()> {
    let mut rng = RngState::new(3);
    let mut rows = Vec::new();
    let mut labels = Vec::new();
    for i in 0..60 {
        let malignant = i % 3 == 0;
        let centre = if malignant { 1.5 } else { -1.0 };
        rows.push([
            centre + rng.standard_normal(),
            centre + rng.standard_normal(),
        ]);
        labels.push(Diagnosis::from_positive(malignant));
    }
    let data = LabeledDataset::from_parts(Matrix::from_rows(&rows)?, labels)?;

    let model = KnnModel::from_dataset(&data, 5)?;
    let q = [0.3, 0.2];
    let near = model.neighbors(&q, None)?;
    println!("5 nearest to {q:?}:");
    for &i in &near {
        println!(
            "  row {i:2} {:?} {:?}",
            data.features().row(i),
            data.labels()[i]
        );
    }
    let p = model.predict(&q)?;
    println!("vote: {:?}, malignant fraction {:.2}", p.label, p.score);

    for mode in [SelfMatch::Include, SelfMatch::Exclude] {
        let wrong = model
            .training_predictions(mode)?
            .iter()
            .zip(data.labels())
            .filter(|(p, t)| p.label != **t)
            .count();
        println!("training misses with {mode:?}: {wrong}/{}", data.len());
    }

    let sel = knn_select_k(&data, &[1, 3, 5, 9, 15], 5, 0)?;
    for (k, err) in &sel.errors {
        println!("k = {k:2}  cv error {err:.4}");
    }
    println!("chosen k = {}", sel.best_k);
    Ok(())
}
