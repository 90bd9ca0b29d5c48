//! Kernel functions and Gram matrices.
//!
//! Text syntax (used by the CLI and in reports):
//! `linear`, `poly:d=3`, `rbf:gamma=0.05`, `tanh:kappa=0.001,c=-1`.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::numerics::{dot, squared_distance, Matrix};

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "family", rename_all = "lowercase")]
pub enum KernelSpec {
    Linear,
    /// `(x·y)^d`, homogeneous.
    Poly {
        d: u32,
    },
    /// `exp(−γ‖x−y‖²)`
    Rbf {
        gamma: f64,
    },
    /// `tanh(κ x·y + c)`; not positive semidefinite in general.
    Tanh {
        kappa: f64,
        c: f64,
    },
}

impl KernelSpec {
    pub fn validate(&self) -> Result<()> {
        let bad = match *self {
            KernelSpec::Linear => false,
            KernelSpec::Poly { d } => d < 1,
            KernelSpec::Rbf { gamma } => !(gamma > 0.0 && gamma.is_finite()),
            KernelSpec::Tanh { kappa, c } => !(kappa.is_finite() && c.is_finite()),
        };
        if bad {
            Err(Error::KernelSpec(self.to_string()))
        } else {
            Ok(())
        }
    }

    /// `κ > 0 && c < 0` for `Tanh`; true for the other families.
    pub fn tanh_signs_admissible(&self) -> bool {
        match *self {
            KernelSpec::Tanh { kappa, c } => kappa > 0.0 && c < 0.0,
            _ => true,
        }
    }

    pub fn is_psd(&self) -> bool {
        !matches!(self, KernelSpec::Tanh { .. })
    }

    #[inline]
    pub(crate) fn eval_unchecked(&self, x: &[f64], y: &[f64]) -> f64 {
        match *self {
            KernelSpec::Linear => dot(x, y),
            KernelSpec::Poly { d } => dot(x, y).powi(d as i32),
            KernelSpec::Rbf { gamma } => (-gamma * squared_distance(x, y)).exp(),
            KernelSpec::Tanh { kappa, c } => (kappa * dot(x, y) + c).tanh(),
        }
    }

    pub fn eval(&self, x: &[f64], y: &[f64]) -> Result<f64> {
        if x.len() != y.len() {
            return Err(Error::DimensionMismatch {
                expected: x.len(),
                found: y.len(),
            });
        }
        Ok(self.eval_unchecked(x, y))
    }
}

impl fmt::Display for KernelSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match *self {
            KernelSpec::Linear => write!(f, "linear"),
            KernelSpec::Poly { d } => write!(f, "poly:d={d}"),
            KernelSpec::Rbf { gamma } => write!(f, "rbf:gamma={gamma}"),
            KernelSpec::Tanh { kappa, c } => write!(f, "tanh:kappa={kappa},c={c}"),
        }
    }
}

impl FromStr for KernelSpec {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let bad = || Error::KernelSpec(s.to_string());
        let (family, params) = match s.trim().split_once(':') {
            Some((f, p)) => (f.trim(), p.trim()),
            None => (s.trim(), ""),
        };
        let mut kv = Vec::new();
        for part in params.split(',').filter(|p| !p.trim().is_empty()) {
            let (k, v) = part.split_once('=').ok_or_else(bad)?;
            kv.push((k.trim(), v.trim()));
        }
        let get = |name: &str| -> Result<&str> {
            kv.iter()
                .find(|(k, _)| *k == name)
                .map(|(_, v)| *v)
                .ok_or_else(bad)
        };
        let num = |name: &str| -> Result<f64> { get(name)?.parse().map_err(|_| bad()) };
        let expect_keys = |n: usize| if kv.len() == n { Ok(()) } else { Err(bad()) };
        let spec = match family {
            "linear" => {
                expect_keys(0)?;
                KernelSpec::Linear
            }
            "poly" => {
                expect_keys(1)?;
                KernelSpec::Poly {
                    d: get("d")?.parse().map_err(|_| bad())?,
                }
            }
            "rbf" => {
                expect_keys(1)?;
                KernelSpec::Rbf {
                    gamma: num("gamma")?,
                }
            }
            "tanh" => {
                expect_keys(2)?;
                KernelSpec::Tanh {
                    kappa: num("kappa")?,
                    c: num("c")?,
                }
            }
            _ => return Err(bad()),
        };
        spec.validate().map_err(|_| bad())?;
        Ok(spec)
    }
}

pub fn kernel_eval(spec: &KernelSpec, x: &[f64], y: &[f64]) -> Result<f64> {
    spec.eval(x, y)
}

/// Symmetric Gram matrix over the rows of `xs`; each unordered pair is evaluated once.
pub fn gram(spec: &KernelSpec, xs: &Matrix) -> Matrix {
    let n = xs.rows();
    let mut g = Matrix::zeros(n, n);
    for i in 0..n {
        for j in 0..=i {
            let v = spec.eval_unchecked(xs.row(i), xs.row(j));
            g[(i, j)] = v;
            g[(j, i)] = v;
        }
    }
    g
}
