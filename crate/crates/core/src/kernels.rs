//! Radial basis functions `φ(εr)` and kernel matrices.

use core::fmt;
use core::str::FromStr;

use crate::error::{Error, Result};
use crate::linalg::Matrix;
use crate::math;
use crate::points::{distance, Points};

/// Default upper end of the shape-parameter range.
pub const DEFAULT_EPS_MAX: f64 = 20.0;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(rename_all = "lowercase"))]
pub enum KernelFamily {
    /// `exp(-t²)`, C∞.
    Gaussian,
    /// `exp(-t)(3 + 3t + t²)`, C⁴.
    #[cfg_attr(feature = "serde", serde(rename = "matern"))]
    MaternC4,
    /// `(35t² + 18t + 3)(1 - t)₊⁶`, C⁴ with compact support `t < 1`.
    #[cfg_attr(feature = "serde", serde(rename = "wendland"))]
    WendlandC4,
}

impl KernelFamily {
    pub const ALL: [KernelFamily; 3] = [KernelFamily::Gaussian, KernelFamily::MaternC4, KernelFamily::WendlandC4];

    /// `φ(t)` for the scaled distance `t = εr ≥ 0`.
    #[inline]
    pub fn phi(self, t: f64) -> f64 {
        match self {
            KernelFamily::Gaussian => math::exp(-t * t),
            KernelFamily::MaternC4 => math::exp(-t) * (3.0 + 3.0 * t + t * t),
            KernelFamily::WendlandC4 => {
                if t >= 1.0 {
                    0.0
                } else {
                    (35.0 * t * t + 18.0 * t + 3.0) * math::powi(1.0 - t, 6)
                }
            }
        }
    }

    /// `φ(0)`, the diagonal of every kernel matrix.
    pub fn phi_zero(self) -> f64 {
        self.phi(0.0)
    }

    pub fn name(self) -> &'static str {
        match self {
            KernelFamily::Gaussian => "gaussian",
            KernelFamily::MaternC4 => "matern",
            KernelFamily::WendlandC4 => "wendland",
        }
    }
}

impl fmt::Display for KernelFamily {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for KernelFamily {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "gaussian" | "gauss" => Ok(KernelFamily::Gaussian),
            "matern" | "maternc4" | "matern-c4" => Ok(KernelFamily::MaternC4),
            "wendland" | "wendlandc4" | "wendland-c4" => Ok(KernelFamily::WendlandC4),
            _ => Err(Error::invalid(alloc::format!("unknown kernel family `{s}`"))),
        }
    }
}

/// A kernel family together with its shape parameter.
#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct KernelSpec {
    pub family: KernelFamily,
    pub epsilon: f64,
}

impl KernelSpec {
    /// Shape parameter must lie in `(0, DEFAULT_EPS_MAX]`.
    pub fn new(family: KernelFamily, epsilon: f64) -> Result<Self> {
        Self::with_max(family, epsilon, DEFAULT_EPS_MAX)
    }

    pub fn with_max(family: KernelFamily, epsilon: f64, eps_max: f64) -> Result<Self> {
        if !(epsilon > 0.0 && epsilon <= eps_max && epsilon.is_finite()) {
            return Err(Error::invalid(alloc::format!("shape parameter {epsilon} outside (0, {eps_max}]")));
        }
        Ok(KernelSpec { family, epsilon })
    }

    /// `φ(εr)` without argument checks.
    #[inline]
    pub fn at(&self, r: f64) -> f64 {
        self.family.phi(self.epsilon * r)
    }

    /// `κ_ε(a, b) = φ(ε‖a − b‖₂)`.
    #[inline]
    pub fn between(&self, a: &[f64], b: &[f64]) -> f64 {
        self.at(distance(a, b))
    }
}

/// `φ(εr)`; negative or NaN distances are an argument error.
pub fn eval_rbf(spec: &KernelSpec, r: f64) -> Result<f64> {
    if !(r >= 0.0) {
        return Err(Error::invalid("distance must be non-negative"));
    }
    Ok(spec.at(r))
}

/// `M[i][k] = κ_ε(a_i, b_k)`.
pub fn kernel_matrix(spec: &KernelSpec, a: &Points, b: &Points) -> Result<Matrix> {
    if a.dim() != b.dim() {
        return Err(Error::DimensionMismatch { expected: a.dim(), got: b.dim() });
    }
    Ok(Matrix::from_fn(a.len(), b.len(), |i, k| spec.between(a.point(i), b.point(k))))
}

/// Symmetric kernel matrix of a point list with itself; each pair is evaluated once.
pub fn gram_matrix(spec: &KernelSpec, a: &Points) -> Matrix {
    let n = a.len();
    let mut m = Matrix::zeros(n, n);
    let d = spec.family.phi_zero();
    for i in 0..n {
        m.set(i, i, d);
        for k in 0..i {
            let v = spec.between(a.point(i), a.point(k));
            m.set(i, k, v);
            m.set(k, i, v);
        }
    }
    m
}
