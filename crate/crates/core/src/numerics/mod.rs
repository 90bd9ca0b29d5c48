//! Dense linear algebra, special functions and seeded sampling.

pub mod linalg;
pub mod matrix;
pub mod random;
pub mod special;

pub use linalg::{cholesky, inverse_spd, log_det_spd, solve_spd, Cholesky};
pub use matrix::{dot, norm_squared, squared_distance, Matrix};
pub use random::{sample_mvn, RngState};
pub use special::{digamma, log_gamma};
