//! ROC points, trapezoidal AUC and accuracy across probability cutoffs.
//!
//!   cargo run -p wdbc --example roc_auc

use wdbc::eval::{
    accuracy_vs_cutoff, auc_pair_oracle, confusion, default_cutoff_grid, roc_csv, roc_curve,
    tpr_fpr,
};
use wdbc::Diagnosis::{self, Benign, Malignant};

fn main() -> wdbc::Result<()> {
    let probs = [0.95, 0.85, 0.7, 0.7, 0.55, 0.4, 0.3, 0.3, 0.2, 0.05];
    let truths = [
        Malignant, Malignant, Benign, Malignant, Malignant, Benign, Malignant, Benign, Benign,
        Benign,
    ];

    let curve = roc_curve(&probs, &truths)?;
    print!("{}", roc_csv(&curve));
    println!(
        "AUC {:.4} (pair counting {:.4})",
        curve.auc,
        auc_pair_oracle(&probs, &truths)?
    );

    let preds: Vec<Diagnosis> = probs
        .iter()
        .map(|&p| Diagnosis::from_positive(p >= 0.5))
        .collect();
    let cm = confusion(&preds, &truths)?;
    let (tpr, fpr) = tpr_fpr(&cm)?;
    println!(
        "at 0.5: {cm:?}, TPR {tpr:.2}, FPR {fpr:.2}, error {:.2}",
        cm.error_rate()
    );

    let sweep = accuracy_vs_cutoff(&probs, &truths, &default_cutoff_grid())?;
    let best = sweep
        .iter()
        .copied()
        .fold((0.0, 0.0), |b, s| if s.1 > b.1 { s } else { b });
    println!(
        "best accuracy {:.2} first reached at cutoff {:.2}",
        best.1, best.0
    );
    Ok(())
}
