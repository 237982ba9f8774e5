//! Per-subdomain Bayesian optimization of `(ε, δ)`.
//!
//! The objective of a trial is the negative maximum absolute error of a
//! local interpolant, fit on a training part of the subdomain data and
//! checked on a held-out validation part. The first `nstart` trials are
//! uniform draws from the search box; later ones maximize Expected
//! Improvement over a random candidate set under the GP surrogate.

use alloc::boxed::Box;
use alloc::vec::Vec;

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::gp::{GpModel, SearchBox};
use crate::kdtree::SpatialIndex;
use crate::kernels::{KernelFamily, KernelSpec, DEFAULT_EPS_MAX};
use crate::local::fit_local;
use crate::math;
use crate::points::{distance, PointSet};

/// Smallest shape parameter ever sampled; the interval is open at 0.
pub const EPS_MIN: f64 = 1e-6;

#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct BoConfig {
    /// Upper end of the shape-parameter interval `(0, eps_max]`.
    pub eps_max: f64,
    /// Random warm-up trials.
    pub nstart: usize,
    /// Surrogate-guided trials after warm-up.
    pub niter: usize,
    /// Exploration margin of Expected Improvement.
    pub xi: f64,
    /// Stop once the best validation error is at or below this.
    pub tau: f64,
    /// Random candidates scored per proposal.
    pub n_candidates: usize,
    /// Fraction of the subdomain data held out for validation.
    pub split_fraction: f64,
    pub seed: u64,
}

impl Default for BoConfig {
    fn default() -> Self {
        BoConfig {
            eps_max: DEFAULT_EPS_MAX,
            nstart: 5,
            niter: 25,
            xi: 0.15,
            tau: 1e-4,
            n_candidates: 2048,
            split_fraction: 0.2,
            seed: 0,
        }
    }
}

impl BoConfig {
    pub fn validate(&self) -> Result<()> {
        if self.nstart == 0 {
            return Err(Error::config("nstart must be at least 1"));
        }
        if !(self.split_fraction > 0.0 && self.split_fraction < 1.0) {
            return Err(Error::config("split_fraction must lie in (0, 1)"));
        }
        if !(self.eps_max > EPS_MIN && self.eps_max.is_finite()) {
            return Err(Error::config("eps_max must be finite and above the sampling floor"));
        }
        if !(self.xi >= 0.0) || !(self.tau >= 0.0) {
            return Err(Error::config("xi and tau must be non-negative"));
        }
        if self.n_candidates == 0 {
            return Err(Error::config("n_candidates must be at least 1"));
        }
        Ok(())
    }

    pub fn budget(&self) -> usize {
        self.nstart + self.niter
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(rename_all = "kebab-case"))]
pub enum TrialStatus {
    Ok,
    IllConditioned,
    /// Too few points in the ball to train and validate.
    DegenerateSplit,
}

/// Every trial of one subdomain search, in order.
#[derive(Debug, Clone, Default, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct BoTrace {
    pub thetas: Vec<[f64; 2]>,
    /// Negative validation error; `-inf` for failed trials.
    pub objectives: Vec<f64>,
    pub status: Vec<TrialStatus>,
    /// `(train, validation)` sizes per trial.
    pub split_sizes: Vec<(usize, usize)>,
    /// Index of the best `Ok` trial (first one on ties).
    pub best: Option<usize>,
}

impl BoTrace {
    pub fn len(&self) -> usize {
        self.thetas.len()
    }

    pub fn is_empty(&self) -> bool {
        self.thetas.is_empty()
    }

    pub fn best_objective(&self) -> Option<f64> {
        self.best.map(|i| self.objectives[i])
    }

    /// Running maximum of the objective over `Ok` trials (`-inf` until the first one).
    pub fn incumbent(&self) -> Vec<f64> {
        let mut best = f64::NEG_INFINITY;
        self.objectives
            .iter()
            .zip(&self.status)
            .map(|(&g, &s)| {
                if s == TrialStatus::Ok && g > best {
                    best = g;
                }
                best
            })
            .collect()
    }

    fn push(&mut self, theta: [f64; 2], objective: f64, status: TrialStatus, sizes: (usize, usize)) {
        if status == TrialStatus::Ok && self.best.is_none_or(|b| objective > self.objectives[b]) {
            self.best = Some(self.thetas.len());
        }
        self.thetas.push(theta);
        self.objectives.push(objective);
        self.status.push(status);
        self.split_sizes.push(sizes);
    }

    fn ok_trials(&self) -> (Vec<[f64; 2]>, Vec<f64>) {
        (0..self.len())
            .filter(|&i| self.status[i] == TrialStatus::Ok)
            .map(|i| (self.thetas[i], self.objectives[i]))
            .unzip()
    }
}

/// Closed-form Expected Improvement over `best` with margin `xi`:
/// `(μ − best − ξ) Φ(z) + σ φ(z)`, `z = (μ − best − ξ)/σ`, and 0 when `σ = 0`.
pub fn expected_improvement(mean: f64, std: f64, best: f64, xi: f64) -> f64 {
    if !(std > 0.0) {
        return 0.0;
    }
    let gain = mean - best - xi;
    let z = gain / std;
    (gain * math::norm_cdf(z) + std * math::norm_pdf(z)).max(0.0)
}

/// `ln` of [`expected_improvement`], finite even where the closed form
/// underflows to zero; `-inf` when `σ = 0`.
pub fn log_expected_improvement(mean: f64, std: f64, best: f64, xi: f64) -> f64 {
    if !(std > 0.0) {
        return f64::NEG_INFINITY;
    }
    let z = (mean - best - xi) / std;
    math::ln(std) + log_h(z)
}

/// `ln(z Φ(z) + φ(z))`.
fn log_h(z: f64) -> f64 {
    if z > -25.0 {
        let h = z * math::norm_cdf(z) + math::norm_pdf(z);
        if h > 0.0 {
            return math::ln(h);
        }
    }
    // Far lower tail: h(z) = φ(z)/z² · (1 − 3/z² + 15/z⁴ − 105/z⁶ + …).
    let t2 = z * z;
    let series = 1.0 - 3.0 / t2 + 15.0 / (t2 * t2) - 105.0 / (t2 * t2 * t2);
    -0.5 * t2 - math::ln(math::SQRT_2PI) - math::ln(t2) + math::ln(series)
}

/// Index of the candidate with the largest EI.
///
/// Ties in EI (including candidates where it underflows to zero) are broken
/// by its logarithm, then by the lowest index.
pub fn best_candidate(model: &GpModel, candidates: &[[f64; 2]], best: f64, xi: f64) -> Option<usize> {
    let mut top: Option<(usize, f64, f64)> = None;
    for (i, &c) in candidates.iter().enumerate() {
        let (m, s) = model.predict(c);
        let ei = expected_improvement(m, s, best, xi);
        let log_ei = log_expected_improvement(m, s, best, xi);
        let better = match top {
            None => true,
            Some((_, e, l)) => ei > e || (ei == e && log_ei > l),
        };
        if better {
            top = Some((i, ei, log_ei));
        }
    }
    top.map(|t| t.0)
}

/// Draws `n_candidates` uniform points in the box and returns the one that
/// maximizes EI.
pub fn propose_next<R: Rng + ?Sized>(
    model: &GpModel,
    bounds: &SearchBox,
    best: f64,
    cfg: &BoConfig,
    rng: &mut R,
) -> [f64; 2] {
    let candidates: Vec<[f64; 2]> = (0..cfg.n_candidates.max(1)).map(|_| bounds.sample(rng)).collect();
    let i = best_candidate(model, &candidates, best, cfg.xi).unwrap_or(0);
    candidates[i]
}

/// RNG for subdomain `stream`: one ChaCha stream per subdomain off the global seed.
pub fn subdomain_rng(seed: u64, stream: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    rng
}

/// Searches `(ε, δ) ∈ [EPS_MIN, eps_max] × [δ_start, 2δ_start]` for the
/// subdomain centered at `center`.
///
/// The data inside the largest admissible ball are shuffled once; every
/// trial then takes the points within its `δ` in that shuffled order, holds
/// out the first `max(2, round(split_fraction·n))` for validation and trains
/// on the rest. Stops after `nstart + niter` trials or once the best
/// validation error is at most `tau`.
pub fn bo_search(
    data: &PointSet,
    index: &SpatialIndex,
    center: &[f64],
    delta_start: f64,
    family: KernelFamily,
    cfg: &BoConfig,
    stream: u64,
) -> Result<([f64; 2], BoTrace)> {
    cfg.validate()?;
    let values = data.require_values()?;
    if !(delta_start > 0.0) {
        return Err(Error::invalid("delta_start must be positive"));
    }
    let bounds = SearchBox::new((EPS_MIN, cfg.eps_max), (delta_start, 2.0 * delta_start))?;
    let mut rng = subdomain_rng(cfg.seed, stream);

    let mut pool = index.query_radius(center, bounds.delta_hi);
    pool.shuffle(&mut rng);

    let mut trace = BoTrace::default();
    let mut model: Option<GpModel> = None;
    for trial in 0..cfg.budget() {
        let theta = match (&model, trace.best_objective()) {
            (Some(gp), Some(best)) if trial >= cfg.nstart => propose_next(gp, &bounds, best, cfg, &mut rng),
            _ => bounds.sample(&mut rng),
        };

        let members: Vec<usize> =
            pool.iter().copied().filter(|&i| distance(data.points().point(i), center) <= theta[1]).collect();
        let n = members.len();
        let n_val = (math::round(cfg.split_fraction * n as f64) as usize).max(2);
        if n < n_val + 1 {
            trace.push(theta, f64::NEG_INFINITY, TrialStatus::DegenerateSplit, (n.saturating_sub(n_val), n.min(n_val)));
            continue;
        }
        let (val, train) = members.split_at(n_val);
        let train_set = data.select(train);
        let outcome = KernelSpec::with_max(family, theta[0], cfg.eps_max)
            .and_then(|spec| fit_local(train_set.points(), train_set.require_values()?, spec));
        let status = match outcome {
            Ok(local) => {
                let err = val
                    .iter()
                    .map(|&i| (local.eval_at(data.points().point(i)) - values[i]).abs())
                    .fold(0.0f64, |m, e| if e.is_nan() || m.is_nan() { f64::NAN } else { m.max(e) });
                if err.is_finite() {
                    trace.push(theta, -err, TrialStatus::Ok, (train.len(), val.len()));
                    TrialStatus::Ok
                } else {
                    TrialStatus::IllConditioned
                }
            }
            Err(Error::IllConditioned { .. }) => TrialStatus::IllConditioned,
            Err(e) => return Err(e),
        };
        if status != TrialStatus::Ok {
            trace.push(theta, f64::NEG_INFINITY, status, (train.len(), val.len()));
            continue;
        }

        if trace.best_objective().is_some_and(|g| -g <= cfg.tau) {
            break;
        }
        // The surrogate is only consulted from trial `nstart` on.
        if trial + 1 >= cfg.nstart && trial + 1 < cfg.budget() {
            let (thetas, objectives) = trace.ok_trials();
            model = GpModel::fit(bounds, &thetas, &objectives).ok();
        }
    }

    match trace.best {
        Some(b) => Ok((trace.thetas[b], trace)),
        None => Err(Error::SubdomainSearchFailed { trace: Box::new(trace) }),
    }
}
