mod common;

use proptest::prelude::*;

use wdbc::dataset::{read_wdbc, split, Diagnosis, LabeledDataset, SplitSpec, Standardizer};
use wdbc::knn::{knn_predict, knn_select_k, KnnModel, SelfMatch};
use wdbc::{Error, Matrix};

use Diagnosis::{Benign, Malignant};

/// Full sort by (distance, index), then a strict-majority vote.
fn oracle(
    rows: &[Vec<f64>],
    labels: &[Diagnosis],
    x: &[f64],
    k: usize,
    skip: Option<usize>,
) -> (Diagnosis, f64) {
    let mut d: Vec<(f64, usize)> = rows
        .iter()
        .enumerate()
        .filter(|(i, _)| Some(*i) != skip)
        .map(|(i, r)| {
            (
                r.iter()
                    .zip(x)
                    .map(|(a, b)| (a - b) * (a - b))
                    .sum::<f64>()
                    .sqrt(),
                i,
            )
        })
        .collect();
    d.sort_by(|a, b| a.partial_cmp(b).unwrap());
    let m = d[..k]
        .iter()
        .filter(|(_, i)| labels[*i] == Malignant)
        .count();
    let label = if m * 2 > k { Malignant } else { Benign };
    (label, m as f64 / k as f64)
}

fn grid_points(n: usize, seed: u64) -> (Vec<Vec<f64>>, Vec<Diagnosis>) {
    // small integer grid so distance ties are common
    let mut rng = wdbc::RngState::new(seed);
    let rows: Vec<Vec<f64>> = (0..n)
        .map(|_| (0..2).map(|_| (rng.uniform() * 5.0).floor()).collect())
        .collect();
    let labels = (0..n)
        .map(|_| Diagnosis::from_positive(rng.uniform() < 0.5))
        .collect();
    (rows, labels)
}

fn model(rows: &[Vec<f64>], labels: &[Diagnosis], k: usize) -> KnnModel {
    KnnModel::new(Matrix::from_rows(rows).unwrap(), labels.to_vec(), k).unwrap()
}

#[test]
fn hand_examples() {
    let rows = vec![vec![0.0, 0.0], vec![1.0, 0.0], vec![5.0, 5.0]];
    let labels = [Benign, Benign, Malignant];
    let p = knn_predict(&model(&rows, &labels, 3), &[0.4, 0.0]).unwrap();
    assert_eq!(p.label, Benign);
    assert!((p.score - 1.0 / 3.0).abs() < 1e-15);
    for (i, row) in rows.iter().enumerate() {
        let p = model(&rows, &labels, 1).predict(row).unwrap();
        assert_eq!(p.label, labels[i]);
        assert!(p.score == 0.0 || p.score == 1.0);
    }
    assert!(matches!(
        model(&rows, &labels, 1).predict(&[0.0]),
        Err(Error::DimensionMismatch { .. })
    ));
    assert!(KnnModel::new(Matrix::from_rows(&rows).unwrap(), labels.to_vec(), 4).is_err());
    assert!(KnnModel::new(Matrix::from_rows(&rows).unwrap(), labels.to_vec(), 0).is_err());
}

#[test]
fn forty_points_match_the_brute_force_oracle() {
    for seed in 0..20 {
        let (rows, labels) = grid_points(40, seed);
        let m = model(&rows, &labels, 5);
        let (queries, _) = grid_points(30, seed + 1000);
        for q in &queries {
            let p = m.predict(q).unwrap();
            assert_eq!(
                (p.label, p.score),
                oracle(&rows, &labels, q, 5, None),
                "seed {seed}, query {q:?}"
            );
        }
    }
}

#[test]
fn all_points_give_the_global_majority() {
    for seed in 0..10 {
        let (rows, labels) = grid_points(15, seed);
        let m_count = labels.iter().filter(|l| **l == Malignant).count();
        let majority = if 2 * m_count > 15 { Malignant } else { Benign };
        let m = model(&rows, &labels, 15);
        for q in [[0.0, 0.0], [2.0, 3.0], [9.0, -4.0]] {
            assert_eq!(m.predict(&q).unwrap().label, majority);
        }
    }
}

#[test]
fn self_match_conventions() {
    let (rows, labels) = grid_points(30, 4);
    let m = model(&rows, &labels, 3);
    let include = m.training_predictions(SelfMatch::Include).unwrap();
    let exclude = m.training_predictions(SelfMatch::Exclude).unwrap();
    for (i, row) in rows.iter().enumerate() {
        assert_eq!(
            (include[i].label, include[i].score),
            oracle(&rows, &labels, row, 3, None)
        );
        assert_eq!(
            (exclude[i].label, exclude[i].score),
            oracle(&rows, &labels, row, 3, Some(i))
        );
    }
}

#[test]
fn duplicate_of_disagreeing_neighbour_can_flip_the_vote() {
    // k = 3 sees M, B, M; the nearest is B
    let rows = vec![vec![1.0], vec![2.0], vec![3.0]];
    let labels = [Benign, Malignant, Malignant];
    assert_eq!(
        model(&rows, &labels, 3).predict(&[0.0]).unwrap().label,
        Malignant
    );
    let mut more = rows.clone();
    more.push(vec![1.0]);
    let more_labels = [Benign, Malignant, Malignant, Benign];
    // 2 of 4 is a tied vote, which goes benign
    assert_eq!(
        model(&more, &more_labels, 4).predict(&[0.0]).unwrap().label,
        Benign
    );
}

#[test]
fn select_k_rules() {
    let mut rows = Vec::new();
    let mut labels = Vec::new();
    for i in 0..12 {
        rows.push(vec![i as f64 * 0.01, 0.0]);
        labels.push(Benign);
        rows.push(vec![100.0 + i as f64 * 0.01, 0.0]);
        labels.push(Malignant);
    }
    let ids = (0..24).map(|i| i.to_string()).collect();
    let data = LabeledDataset::new(Matrix::from_rows(&rows).unwrap(), labels, ids).unwrap();
    assert_eq!(knn_select_k(&data, &[7], 4, 0).unwrap().best_k, 7);
    // both are error-free on well separated clusters
    let sel = knn_select_k(&data, &[3, 1], 4, 0).unwrap();
    assert_eq!(sel.errors, vec![(3, 0.0), (1, 0.0)]);
    assert_eq!(sel.best_k, 1);
    assert!(knn_select_k(&data, &[], 4, 0).is_err());
}

#[test]
fn wdbc_training_error_under_both_conventions() {
    let d = read_wdbc(common::data_path()).unwrap();
    let (train, _) = split(&d, &SplitSpec::default()).unwrap();
    let s = Standardizer::fit(train.features()).unwrap();
    let z = s.apply(train.features()).unwrap();
    let m = KnnModel::new(z, train.labels().to_vec(), 1).unwrap();
    let misses = |mode| {
        m.training_predictions(mode)
            .unwrap()
            .iter()
            .zip(train.labels())
            .filter(|(p, t)| p.label != **t)
            .count()
    };
    let (inc, exc) = (misses(SelfMatch::Include), misses(SelfMatch::Exclude));
    println!(
        "k=1 training misses on {} rows: include-self {inc}, exclude-self {exc} ({:.8})",
        train.len(),
        exc as f64 / train.len() as f64
    );
    assert_eq!(inc, 0);
    assert!(exc > 0);
}

fn cloud() -> impl Strategy<Value = (Vec<Vec<f64>>, Vec<bool>)> {
    (5usize..40).prop_flat_map(|n| {
        (
            prop::collection::vec(prop::collection::vec(-3.0f64..3.0, 3), n),
            prop::collection::vec(any::<bool>(), n),
        )
    })
}

proptest! {
    #[test]
    fn permuting_training_rows_matches_the_oracle(
        (rows, labels) in cloud(),
        k in 1usize..6,
        q in prop::collection::vec(-3.0f64..3.0, 3),
        shift in 1usize..100,
    ) {
        let labels: Vec<Diagnosis> = labels.into_iter().map(Diagnosis::from_positive).collect();
        let n = rows.len();
        let k = k.min(n);
        let perm: Vec<usize> = (0..n).map(|i| (i * 7 + shift) % n).collect();
        prop_assume!({
            let mut s = perm.clone();
            s.sort_unstable();
            s.dedup();
            s.len() == n
        });
        let prows: Vec<Vec<f64>> = perm.iter().map(|&i| rows[i].clone()).collect();
        let plabels: Vec<Diagnosis> = perm.iter().map(|&i| labels[i]).collect();
        let a = model(&rows, &labels, k).predict(&q).unwrap();
        let b = model(&prows, &plabels, k).predict(&q).unwrap();
        prop_assert_eq!((b.label, b.score), oracle(&prows, &plabels, &q, k, None));
        // continuous coordinates: no distance ties, so order does not matter
        prop_assert_eq!((a.label, a.score), (b.label, b.score));
    }

    #[test]
    fn agreeing_duplicate_never_flips(
        (rows, labels) in cloud(),
        k in 1usize..6,
        q in prop::collection::vec(-3.0f64..3.0, 3),
    ) {
        let labels: Vec<Diagnosis> = labels.into_iter().map(Diagnosis::from_positive).collect();
        let k = k.min(rows.len());
        let m = model(&rows, &labels, k);
        let before = m.predict(&q).unwrap().label;
        let nearest = m.neighbors(&q, None).unwrap()[0];
        prop_assume!(labels[nearest] == before);
        let mut more = rows.clone();
        more.push(rows[nearest].clone());
        let mut more_labels = labels.clone();
        more_labels.push(labels[nearest]);
        prop_assert_eq!(model(&more, &more_labels, k + 1).predict(&q).unwrap().label, before);
    }
}
