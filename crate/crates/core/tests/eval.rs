use proptest::prelude::*;

use wdbc::dataset::Diagnosis;
use wdbc::eval::{
    accuracy_csv, accuracy_vs_cutoff, auc_pair_oracle, confusion, default_cutoff_grid, roc_csv,
    roc_curve, tpr_fpr, ConfusionMatrix,
};
use wdbc::{Error, RngState};

use Diagnosis::{Benign, Malignant};

/// Mann–Whitney U from midranks.
fn auc_by_midranks(scores: &[f64], truths: &[Diagnosis]) -> f64 {
    let mut order: Vec<usize> = (0..scores.len()).collect();
    order.sort_by(|&a, &b| scores[a].partial_cmp(&scores[b]).unwrap());
    let mut ranks = vec![0.0; scores.len()];
    let mut i = 0;
    while i < order.len() {
        let mut j = i;
        while j + 1 < order.len() && scores[order[j + 1]] == scores[order[i]] {
            j += 1;
        }
        let mid = (i + j) as f64 / 2.0 + 1.0;
        for &o in &order[i..=j] {
            ranks[o] = mid;
        }
        i = j + 1;
    }
    let n_m = truths.iter().filter(|t| **t == Malignant).count() as f64;
    let n_b = truths.len() as f64 - n_m;
    let rank_sum: f64 = ranks
        .iter()
        .zip(truths)
        .filter(|(_, t)| **t == Malignant)
        .map(|(r, _)| r)
        .sum();
    (rank_sum - n_m * (n_m + 1.0) / 2.0) / (n_m * n_b)
}

fn tied_instance(rng: &mut RngState, n: usize) -> (Vec<f64>, Vec<Diagnosis>) {
    loop {
        let truths: Vec<Diagnosis> = (0..n)
            .map(|_| Diagnosis::from_positive(rng.uniform() < 0.4))
            .collect();
        if truths.contains(&Malignant) && truths.contains(&Benign) {
            // coarse levels force ties, with a shift toward malignant
            let scores = truths
                .iter()
                .map(|t| {
                    ((rng.uniform() * 6.0).floor() + if *t == Malignant { 1.0 } else { 0.0 }) / 7.0
                })
                .collect();
            return (scores, truths);
        }
    }
}

#[test]
fn confusion_bookkeeping() {
    let cm = confusion(
        &[Malignant, Malignant, Malignant, Benign, Benign],
        &[Malignant, Malignant, Malignant, Benign, Benign],
    )
    .unwrap();
    assert_eq!(
        cm,
        ConfusionMatrix {
            tp: 3,
            fp: 0,
            tn: 2,
            fn_: 0
        }
    );
    let cm = confusion(&[Malignant; 4], &[Benign; 4]).unwrap();
    assert_eq!(
        cm,
        ConfusionMatrix {
            tp: 0,
            fp: 4,
            tn: 0,
            fn_: 0
        }
    );
    // two misses out of 114
    let mut preds = vec![Benign; 71];
    preds.extend(vec![Malignant; 43]);
    let mut truths = preds.clone();
    truths[0] = Malignant;
    truths[100] = Benign;
    let cm = confusion(&preds, &truths).unwrap();
    assert_eq!(cm.misses(), 2);
    assert!((cm.error_rate() - 0.017_543_86).abs() < 1e-8);
    assert!(matches!(
        confusion(&[Benign], &[]),
        Err(Error::LengthMismatch { .. })
    ));
}

#[test]
fn rates() {
    let cm = ConfusionMatrix {
        tp: 3,
        fn_: 1,
        fp: 2,
        tn: 2,
    };
    assert_eq!(tpr_fpr(&cm).unwrap(), (0.75, 0.5));
    assert_eq!(
        tpr_fpr(&ConfusionMatrix {
            tp: 5,
            fn_: 0,
            fp: 0,
            tn: 5
        })
        .unwrap(),
        (1.0, 0.0)
    );
    assert_eq!(
        tpr_fpr(&ConfusionMatrix {
            tp: 5,
            fn_: 0,
            fp: 5,
            tn: 0
        })
        .unwrap(),
        (1.0, 1.0)
    );
    assert!(matches!(
        tpr_fpr(&ConfusionMatrix {
            tp: 0,
            fn_: 0,
            fp: 1,
            tn: 1
        }),
        Err(Error::EmptyClass(_))
    ));
}

#[test]
fn small_curves() {
    let truths = [Malignant, Malignant, Benign, Benign];
    assert_eq!(roc_curve(&[0.9, 0.8, 0.2, 0.1], &truths).unwrap().auc, 1.0);
    assert_eq!(roc_curve(&[0.1, 0.2, 0.8, 0.9], &truths).unwrap().auc, 0.0);
    assert!((roc_curve(&[0.8, 0.4, 0.6, 0.2], &truths).unwrap().auc - 0.75).abs() < 1e-15);
    assert_eq!(auc_pair_oracle(&[0.3; 4], &truths).unwrap(), 0.5);
    assert_eq!(
        auc_pair_oracle(&[1.0, 0.0], &[Malignant, Benign]).unwrap(),
        1.0
    );
    assert!(matches!(
        roc_curve(&[0.1, 0.2], &[Benign, Benign]),
        Err(Error::EmptyClass(_))
    ));
    assert!(matches!(
        auc_pair_oracle(&[0.1, 0.2], &[Malignant, Malignant]),
        Err(Error::EmptyClass(_))
    ));
}

#[test]
fn trapezoid_area_equals_pair_counting_with_ties() {
    let mut rng = RngState::new(1);
    for case in 0..500 {
        let n = 2 + case % 60;
        let (scores, truths) = tied_instance(&mut rng, n);
        let curve = roc_curve(&scores, &truths).unwrap();
        let pairs = auc_pair_oracle(&scores, &truths).unwrap();
        assert!((curve.auc - pairs).abs() <= 1e-12, "case {case}");
        assert!(
            (curve.auc - auc_by_midranks(&scores, &truths)).abs() <= 1e-12,
            "case {case}"
        );
    }
}

#[test]
fn cutoff_sweep() {
    let truths = [Malignant, Benign, Benign, Malignant, Benign];
    let probs = [0.9, 0.1, 0.4, 1.0, 0.6];
    let sweep = accuracy_vs_cutoff(&probs, &truths, &default_cutoff_grid()).unwrap();
    assert_eq!(sweep.len(), 101);
    assert_eq!(sweep[0], (0.0, 0.4));
    // only the exact 1.0 is called malignant at the top cutoff
    assert_eq!(sweep[100], (1.0, 0.8));
    let separable = [0.8, 0.2, 0.3, 0.9, 0.1];
    let sweep = accuracy_vs_cutoff(&separable, &truths, &default_cutoff_grid()).unwrap();
    let best = sweep.iter().map(|s| s.1).fold(0.0, f64::max);
    assert_eq!(best, 1.0);
    assert!(sweep.iter().filter(|s| s.1 == 1.0).any(|s| s.0 == 0.5));
    assert!(accuracy_vs_cutoff(&[1.2], &[Benign], &[0.5]).is_err());
    assert!(accuracy_vs_cutoff(&[0.2], &[Benign], &[-0.1]).is_err());
    assert!(accuracy_vs_cutoff(&[0.2], &[Benign], &[]).is_err());
    assert!(accuracy_csv(&sweep).starts_with("cutoff,accuracy\n0,0.4\n"));
}

#[test]
fn csv_endpoints() {
    let curve = roc_curve(
        &[0.8, 0.4, 0.6, 0.2],
        &[Malignant, Malignant, Benign, Benign],
    )
    .unwrap();
    let text = roc_csv(&curve);
    let lines: Vec<&str> = text.lines().collect();
    assert_eq!(lines[0], "threshold,fpr,tpr");
    assert_eq!(lines[1], "inf,0,0");
    assert_eq!(*lines.last().unwrap(), "0.2,1,1");
    assert_eq!(lines.len(), 2 + 4);
}

fn labelled_scores() -> impl Strategy<Value = (Vec<f64>, Vec<Diagnosis>)> {
    prop::collection::vec(
        (
            prop_oneof![(-5i32..5).prop_map(|v| v as f64 * 0.5), -3.0f64..3.0],
            any::<bool>(),
        ),
        2..80,
    )
    .prop_filter("both classes", |v| {
        v.iter().any(|x| x.1) && v.iter().any(|x| !x.1)
    })
    .prop_map(|v| {
        v.into_iter()
            .map(|(s, b)| (s, Diagnosis::from_positive(b)))
            .unzip()
    })
}

proptest! {
    #[test]
    fn curve_shape_invariants((scores, truths) in labelled_scores()) {
        let curve = roc_curve(&scores, &truths).unwrap();
        let first = curve.points[0];
        let last = *curve.points.last().unwrap();
        prop_assert_eq!((first.fpr, first.tpr), (0.0, 0.0));
        prop_assert!(first.threshold.is_infinite());
        prop_assert_eq!((last.fpr, last.tpr), (1.0, 1.0));
        let mut distinct = scores.clone();
        distinct.sort_by(|a, b| b.partial_cmp(a).unwrap());
        distinct.dedup();
        prop_assert_eq!(curve.points.len(), distinct.len() + 1);
        for (w, d) in curve.points.windows(2).zip(&distinct) {
            prop_assert!(w[1].fpr >= w[0].fpr && w[1].tpr >= w[0].tpr);
            prop_assert!(w[1].threshold < w[0].threshold);
            prop_assert_eq!(w[1].threshold, *d);
        }
        prop_assert!((0.0..=1.0).contains(&curve.auc));
    }

    #[test]
    fn area_is_invariant_under_increasing_maps((scores, truths) in labelled_scores()) {
        let base = roc_curve(&scores, &truths).unwrap().auc;
        let mapped: Vec<f64> = scores.iter().map(|s| (0.7 * s).exp() * 3.0 - 1.0).collect();
        prop_assert!((roc_curve(&mapped, &truths).unwrap().auc - base).abs() <= 1e-12);
        let cubed: Vec<f64> = scores.iter().map(|s| s * s * s + s).collect();
        prop_assert!((roc_curve(&cubed, &truths).unwrap().auc - base).abs() <= 1e-12);
    }

    #[test]
    fn negated_scores_give_the_complement((scores, truths) in labelled_scores()) {
        let base = roc_curve(&scores, &truths).unwrap().auc;
        let neg: Vec<f64> = scores.iter().map(|s| -s).collect();
        prop_assert!((roc_curve(&neg, &truths).unwrap().auc - (1.0 - base)).abs() <= 1e-12);
    }

    #[test]
    fn area_matches_pair_counting((scores, truths) in labelled_scores()) {
        let curve = roc_curve(&scores, &truths).unwrap();
        prop_assert!((curve.auc - auc_by_midranks(&scores, &truths)).abs() <= 1e-12);
    }
}
