//! Binary classification toolkit for tabular data.
//!
//! Models: soft-margin kernel SVM trained by SMO ([`svm`]), variational Bayesian
//! logistic regression with fixed or Gamma hyperpriors ([`vblr`]), Newton
//! logistic regression ([`logreg`]) and Euclidean KNN ([`knn`]). [`eval`] has
//! confusion counts, ROC/AUC and cutoff sweeps, and [`experiment`] runs the
//! full split / cross-validate / evaluate comparison on the bundled breast
//! cancer data.
//!
//! Runnable examples live in `examples/`:
//!
//! - `svm_xor`: RBF SVM on XOR
//! - `vblr_posterior`: variational posterior, ELBO trace and predictive probabilities
//! - `logreg_newton`: Newton fit and gradient check
//! - `knn_vote`: neighbours, votes and k selection
//! - `roc_auc`: ROC points, AUC and cutoff sweep
//! - `kfold_grid`: cross-validated SVM grid search
//! - `compare_wdbc`: the whole comparison with report files

pub mod dataset;
pub mod error;
pub mod eval;
pub mod experiment;
pub mod kernels;
pub mod knn;
pub mod logreg;
pub mod numerics;
pub mod svm;
pub mod vblr;

pub use dataset::{Diagnosis, LabeledDataset, SplitSpec, Standardizer};
pub use error::{Error, Result};
pub use kernels::KernelSpec;
pub use knn::KnnModel;
pub use logreg::LogRegModel;
pub use numerics::{Matrix, RngState};
pub use svm::{SvmConfig, SvmModel};
pub use vblr::{Prior, VblrConfig, VblrPosterior};
