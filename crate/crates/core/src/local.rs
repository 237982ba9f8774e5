//! Local RBF interpolants on one subdomain.

use alloc::vec::Vec;

use crate::error::{Error, Result};
use crate::kernels::{gram_matrix, KernelSpec};
use crate::linalg::{dot, Cholesky, Matrix};
use crate::math;
use crate::points::Points;

/// Exponents `k` of the jitter ladder `10^k · trace(K)/n`, tried after a
/// plain factorization fails.
const JITTER_EXPONENTS: [i32; 7] = [-12, -11, -10, -9, -8, -7, -6];

/// Required accuracy of a solve: `‖K c − f‖∞ ≤ RESIDUAL_TOL · (1 + ‖f‖∞)`.
pub const RESIDUAL_TOL: f64 = 1e-8;

/// A fitted interpolant `P(x) = Σ c_k φ(ε‖x − x_k‖)`.
#[derive(Debug, Clone, PartialEq)]
pub struct LocalModel {
    pub nodes: Points,
    pub coeffs: Vec<f64>,
    pub spec: KernelSpec,
    /// Diagonal shift actually added to `K`; zero for an exact interpolant.
    pub jitter_used: f64,
}

impl LocalModel {
    pub fn eval_at(&self, x: &[f64]) -> f64 {
        self.nodes.iter().zip(&self.coeffs).map(|(node, c)| c * self.spec.between(x, node)).sum()
    }
}

/// Solves `(K + jitter·I) c = f`, escalating the jitter through
/// `0, 1e-12·τ, …, 1e-6·τ` with `τ = trace(K)/n` until the factorization
/// succeeds and the residual meets [`RESIDUAL_TOL`].
pub fn fit_local(nodes: &Points, values: &[f64], spec: KernelSpec) -> Result<LocalModel> {
    if nodes.is_empty() {
        return Err(Error::Empty);
    }
    if nodes.len() != values.len() {
        return Err(Error::LengthMismatch { left: nodes.len(), right: values.len() });
    }
    let k = gram_matrix(&spec, nodes);
    let tau = k.trace() / nodes.len() as f64;
    let f_norm = values.iter().fold(0.0f64, |m, v| m.max(v.abs()));
    let bound = RESIDUAL_TOL * (1.0 + f_norm);

    let ladder = core::iter::once(0.0).chain(JITTER_EXPONENTS.iter().map(|&e| tau * math::powf(10.0, f64::from(e))));
    let mut last = 0.0;
    for jitter in ladder {
        last = jitter;
        let Some(chol) = Cholesky::factor(&k, jitter) else { continue };
        let mut c = chol.solve(values);
        let mut r = residual(&k, jitter, &c, values);
        if max_abs(&r) > bound {
            // One step of iterative refinement.
            let dc = chol.solve(&r);
            for (ci, di) in c.iter_mut().zip(&dc) {
                *ci += di;
            }
            r = residual(&k, jitter, &c, values);
        }
        if max_abs(&r) <= bound && c.iter().all(|x| x.is_finite()) {
            return Ok(LocalModel { nodes: nodes.clone(), coeffs: c, spec, jitter_used: jitter });
        }
    }
    Err(Error::IllConditioned { jitter: last })
}

/// `f − (K + jitter·I) c`.
fn residual(k: &Matrix, jitter: f64, c: &[f64], f: &[f64]) -> Vec<f64> {
    (0..k.rows()).map(|i| f[i] - dot(k.row(i), c) - jitter * c[i]).collect()
}

fn max_abs(v: &[f64]) -> f64 {
    v.iter().fold(0.0f64, |m, x| m.max(x.abs()))
}

/// Evaluates the interpolant at each target.
pub fn eval_local(model: &LocalModel, targets: &Points) -> Result<Vec<f64>> {
    if targets.dim() != model.nodes.dim() {
        return Err(Error::DimensionMismatch { expected: model.nodes.dim(), got: targets.dim() });
    }
    Ok(targets.iter().map(|x| model.eval_at(x)).collect())
}
