//! Gaussian-process surrogate over the parameter pair `θ = (ε, δ)`.
//!
//! Inputs are mapped onto `[0, 1]²` with the search box, targets are
//! standardized, and the prior is zero-mean with a Matérn-5/2 covariance
//! `k(r) = (1 + √5 r/ℓ + 5r²/(3ℓ²)) exp(−√5 r/ℓ)` of unit signal variance.
//! The length scale is picked from a log-spaced grid by marginal likelihood.

use alloc::vec::Vec;

use rand::Rng;

use crate::error::{Error, Result};
use crate::linalg::{dot, Cholesky, Matrix};
use crate::math;

/// Grid of candidate length scales: `LENGTH_SCALE_STEPS` log-spaced points in `[1e-2, 1e1]`.
pub const LENGTH_SCALE_STEPS: usize = 25;
pub const LENGTH_SCALE_MIN: f64 = 1e-2;
pub const LENGTH_SCALE_MAX: f64 = 1e1;

/// Starting noise variance; raised tenfold per failed factorization up to [`NOISE_VAR_MAX`].
pub const NOISE_VAR: f64 = 1e-8;
pub const NOISE_VAR_MAX: f64 = 1e-4;

/// Floor on the target standard deviation used for standardization.
pub const STD_FLOOR: f64 = 1e-12;

/// Axis-aligned box `[eps_lo, eps_hi] × [delta_lo, delta_hi]`.
#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct SearchBox {
    pub eps_lo: f64,
    pub eps_hi: f64,
    pub delta_lo: f64,
    pub delta_hi: f64,
}

impl SearchBox {
    pub fn new(eps: (f64, f64), delta: (f64, f64)) -> Result<Self> {
        let ok = |lo: f64, hi: f64| lo.is_finite() && hi.is_finite() && lo <= hi;
        if !ok(eps.0, eps.1) || !ok(delta.0, delta.1) {
            return Err(Error::invalid("search box bounds must be finite and ordered"));
        }
        Ok(SearchBox { eps_lo: eps.0, eps_hi: eps.1, delta_lo: delta.0, delta_hi: delta.1 })
    }

    pub fn contains(&self, theta: [f64; 2]) -> bool {
        (self.eps_lo..=self.eps_hi).contains(&theta[0]) && (self.delta_lo..=self.delta_hi).contains(&theta[1])
    }

    /// Maps `θ` onto the unit square (a zero-width side maps to 0).
    pub fn to_unit(&self, theta: [f64; 2]) -> [f64; 2] {
        let scale = |x: f64, lo: f64, hi: f64| if hi > lo { (x - lo) / (hi - lo) } else { 0.0 };
        [scale(theta[0], self.eps_lo, self.eps_hi), scale(theta[1], self.delta_lo, self.delta_hi)]
    }

    /// Uniform draw from the box.
    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> [f64; 2] {
        let draw = |rng: &mut R, lo: f64, hi: f64| if hi > lo { rng.random_range(lo..=hi) } else { lo };
        let e = draw(rng, self.eps_lo, self.eps_hi);
        let d = draw(rng, self.delta_lo, self.delta_hi);
        [e, d]
    }
}

/// Matérn-5/2 correlation at distance `r` with length scale `ell`.
#[inline]
pub fn matern52(r: f64, ell: f64) -> f64 {
    let a = math::sqrt(5.0) * r / ell;
    (1.0 + a + a * a / 3.0) * math::exp(-a)
}

/// Fixed hyperparameters for [`GpModel::fit_fixed`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GpHyper {
    pub length_scale: f64,
    pub noise_var: f64,
    /// Output mean and standard deviation used for standardization.
    pub y_mean: f64,
    pub y_std: f64,
}

/// A conditioned Gaussian process.
#[derive(Debug, Clone, PartialEq)]
pub struct GpModel {
    bounds: SearchBox,
    inputs: Vec<[f64; 2]>,
    y_mean: f64,
    y_std: f64,
    length_scale: f64,
    noise_var: f64,
    factor: Cholesky,
    alpha: Vec<f64>,
    log_marginal_likelihood: f64,
}

struct Conditioned {
    factor: Cholesky,
    alpha: Vec<f64>,
    noise_var: f64,
    lml: f64,
}

fn covariance(inputs: &[[f64; 2]], ell: f64) -> Matrix {
    let n = inputs.len();
    Matrix::from_fn(n, n, |i, j| matern52(dist2(inputs[i], inputs[j]), ell))
}

#[inline]
fn dist2(a: [f64; 2], b: [f64; 2]) -> f64 {
    let (dx, dy) = (a[0] - b[0], a[1] - b[1]);
    math::sqrt(dx * dx + dy * dy)
}

/// Factors `K + σ_n² I`, raising `σ_n²` from `noise` until it succeeds.
fn condition(k: &Matrix, y: &[f64], noise: f64) -> Option<Conditioned> {
    let mut noise_var = noise;
    while noise_var <= NOISE_VAR_MAX * (1.0 + 1e-9) {
        if let Some(factor) = Cholesky::factor(k, noise_var) {
            let alpha = factor.solve(y);
            let n = y.len() as f64;
            let lml = -0.5 * dot(y, &alpha) - 0.5 * factor.log_det() - 0.5 * n * math::ln(2.0 * core::f64::consts::PI);
            return Some(Conditioned { factor, alpha, noise_var, lml });
        }
        noise_var *= 10.0;
    }
    None
}

fn check_inputs(thetas: &[[f64; 2]], values: &[f64]) -> Result<()> {
    if thetas.is_empty() {
        return Err(Error::Empty);
    }
    if thetas.len() != values.len() {
        return Err(Error::LengthMismatch { left: thetas.len(), right: values.len() });
    }
    if let Some(i) = thetas.iter().position(|t| !t[0].is_finite() || !t[1].is_finite()) {
        return Err(Error::NonFinite(i));
    }
    if let Some(i) = values.iter().position(|v| !v.is_finite()) {
        return Err(Error::NonFinite(i));
    }
    Ok(())
}

/// Candidate length scales, ascending.
pub fn length_scale_grid() -> [f64; LENGTH_SCALE_STEPS] {
    let lo = math::ln(LENGTH_SCALE_MIN);
    let hi = math::ln(LENGTH_SCALE_MAX);
    let mut out = [0.0; LENGTH_SCALE_STEPS];
    for (k, v) in out.iter_mut().enumerate() {
        *v = math::exp(lo + (hi - lo) * k as f64 / (LENGTH_SCALE_STEPS - 1) as f64);
    }
    out
}

impl GpModel {
    /// Fits the surrogate; the length scale maximizes the log marginal
    /// likelihood over [`length_scale_grid`] (first maximum wins).
    pub fn fit(bounds: SearchBox, thetas: &[[f64; 2]], values: &[f64]) -> Result<Self> {
        check_inputs(thetas, values)?;
        let n = values.len() as f64;
        let y_mean = values.iter().sum::<f64>() / n;
        let var = values.iter().map(|v| (v - y_mean) * (v - y_mean)).sum::<f64>() / n;
        let y_std = math::sqrt(var).max(STD_FLOOR);
        let inputs: Vec<[f64; 2]> = thetas.iter().map(|&t| bounds.to_unit(t)).collect();
        let y: Vec<f64> = values.iter().map(|v| (v - y_mean) / y_std).collect();

        let mut best: Option<(f64, Conditioned)> = None;
        for ell in length_scale_grid() {
            let Some(c) = condition(&covariance(&inputs, ell), &y, NOISE_VAR) else { continue };
            if best.as_ref().is_none_or(|(_, b)| c.lml > b.lml) {
                best = Some((ell, c));
            }
        }
        let (length_scale, c) = best.ok_or(Error::IllConditioned { jitter: NOISE_VAR_MAX })?;
        Ok(GpModel {
            bounds,
            inputs,
            y_mean,
            y_std,
            length_scale,
            noise_var: c.noise_var,
            factor: c.factor,
            alpha: c.alpha,
            log_marginal_likelihood: c.lml,
        })
    }

    /// Conditions on the data with every hyperparameter held fixed.
    pub fn fit_fixed(bounds: SearchBox, thetas: &[[f64; 2]], values: &[f64], hyper: GpHyper) -> Result<Self> {
        check_inputs(thetas, values)?;
        if !(hyper.length_scale > 0.0 && hyper.noise_var > 0.0 && hyper.y_std > 0.0) {
            return Err(Error::invalid("hyperparameters must be positive"));
        }
        let inputs: Vec<[f64; 2]> = thetas.iter().map(|&t| bounds.to_unit(t)).collect();
        let y: Vec<f64> = values.iter().map(|v| (v - hyper.y_mean) / hyper.y_std).collect();
        let factor = Cholesky::factor(&covariance(&inputs, hyper.length_scale), hyper.noise_var)
            .ok_or(Error::IllConditioned { jitter: hyper.noise_var })?;
        let alpha = factor.solve(&y);
        let lml = -0.5 * dot(&y, &alpha)
            - 0.5 * factor.log_det()
            - 0.5 * y.len() as f64 * math::ln(2.0 * core::f64::consts::PI);
        Ok(GpModel {
            bounds,
            inputs,
            y_mean: hyper.y_mean,
            y_std: hyper.y_std,
            length_scale: hyper.length_scale,
            noise_var: hyper.noise_var,
            factor,
            alpha,
            log_marginal_likelihood: lml,
        })
    }

    /// Posterior mean and standard deviation of the standardized process at
    /// `theta` (noise-free latent function).
    pub fn predict_standardized(&self, theta: [f64; 2]) -> (f64, f64) {
        let u = self.bounds.to_unit(theta);
        let k: Vec<f64> = self.inputs.iter().map(|&x| matern52(dist2(x, u), self.length_scale)).collect();
        let mean = dot(&k, &self.alpha);
        let v = self.factor.solve_lower(&k);
        let var = (1.0 - dot(&v, &v)).max(0.0);
        (mean, math::sqrt(var))
    }

    /// Posterior mean and standard deviation at `theta`, in original units.
    pub fn predict(&self, theta: [f64; 2]) -> (f64, f64) {
        let (m, s) = self.predict_standardized(theta);
        (self.y_mean + self.y_std * m, self.y_std * s)
    }

    pub fn bounds(&self) -> &SearchBox {
        &self.bounds
    }

    pub fn len(&self) -> usize {
        self.inputs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.inputs.is_empty()
    }

    pub fn length_scale(&self) -> f64 {
        self.length_scale
    }

    pub fn noise_var(&self) -> f64 {
        self.noise_var
    }

    pub fn y_mean(&self) -> f64 {
        self.y_mean
    }

    pub fn y_std(&self) -> f64 {
        self.y_std
    }

    pub fn log_marginal_likelihood(&self) -> f64 {
        self.log_marginal_likelihood
    }

    /// Inputs mapped onto the unit square.
    pub fn unit_inputs(&self) -> &[[f64; 2]] {
        &self.inputs
    }

    pub fn factor(&self) -> &Cholesky {
        &self.factor
    }

    pub fn hyper(&self) -> GpHyper {
        GpHyper { length_scale: self.length_scale, noise_var: self.noise_var, y_mean: self.y_mean, y_std: self.y_std }
    }
}
