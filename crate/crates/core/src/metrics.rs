//! Error metrics between reference values and predictions.

use crate::error::{Error, Result};
use crate::math;

/// Entries with `|truth| < RELATIVE_FLOOR` are left out of relative metrics.
pub const RELATIVE_FLOOR: f64 = 1e-12;

fn check(truth: &[f64], pred: &[f64]) -> Result<()> {
    if truth.len() != pred.len() {
        return Err(Error::LengthMismatch { left: truth.len(), right: pred.len() });
    }
    if truth.is_empty() {
        return Err(Error::Empty);
    }
    Ok(())
}

/// Maximum absolute error `max_i |pred_i − truth_i|`.
pub fn mae(truth: &[f64], pred: &[f64]) -> Result<f64> {
    check(truth, pred)?;
    Ok(truth.iter().zip(pred).fold(0.0f64, |m, (t, p)| m.max((p - t).abs())))
}

/// Relative errors `|pred_i − truth_i| / |truth_i|` and the number of entries skipped.
fn relative<'a>(truth: &'a [f64], pred: &'a [f64]) -> Result<(impl Iterator<Item = f64> + 'a, usize)> {
    check(truth, pred)?;
    let excluded = truth.iter().filter(|t| !(t.abs() >= RELATIVE_FLOOR)).count();
    if excluded == truth.len() {
        return Err(Error::UndefinedMetric);
    }
    let iter = truth.iter().zip(pred).filter(|(t, _)| t.abs() >= RELATIVE_FLOOR).map(|(t, p)| (p - t).abs() / t.abs());
    Ok((iter, excluded))
}

/// Maximum relative error and the count of near-zero reference values excluded.
pub fn rmae(truth: &[f64], pred: &[f64]) -> Result<(f64, usize)> {
    let (rel, excluded) = relative(truth, pred)?;
    Ok((rel.fold(0.0f64, f64::max), excluded))
}

/// Root mean square of the relative errors over the included entries.
pub fn rrmse(truth: &[f64], pred: &[f64]) -> Result<(f64, usize)> {
    let (rel, excluded) = relative(truth, pred)?;
    let n = (truth.len() - excluded) as f64;
    let sum: f64 = rel.map(|e| e * e).sum();
    Ok((math::sqrt(sum / n), excluded))
}
