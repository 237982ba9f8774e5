//! End-to-end fit: centers, radius search, per-subdomain optimization and blend.

use alloc::vec::Vec;

use crate::blend::{pum_evaluate, BlendDiagnostics};
use crate::bo::{bo_search, BoConfig, BoTrace};
use crate::error::{Error, Result};
use crate::kdtree::SpatialIndex;
use crate::kernels::{KernelFamily, KernelSpec};
use crate::layout::{find_min_radius, make_pu_centers, SubdomainLayout};
use crate::metrics::{mae, rmae, rrmse};
use crate::par::{self, Stopwatch};
use crate::points::{PointSet, Points};

#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct PipelineConfig {
    pub family: KernelFamily,
    pub bo: BoConfig,
    /// Minimum number of data points in every subdomain ball.
    pub min_pts: usize,
}

impl Default for PipelineConfig {
    fn default() -> Self {
        PipelineConfig { family: KernelFamily::Gaussian, bo: BoConfig::default(), min_pts: 15 }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct Metrics {
    pub mae: f64,
    pub rmae: f64,
    pub rrmse: f64,
    /// Reference values too close to zero for the relative metrics.
    pub relative_excluded: usize,
}

impl Metrics {
    /// All three metrics; relative ones are `NaN` when every reference is near zero.
    pub fn compute(truth: &[f64], pred: &[f64]) -> Result<Self> {
        let mae = mae(truth, pred)?;
        let (rmae, rrmse, relative_excluded) = match (rmae(truth, pred), rrmse(truth, pred)) {
            (Ok((a, n)), Ok((b, _))) => (a, b, n),
            (Err(Error::UndefinedMetric), _) | (_, Err(Error::UndefinedMetric)) => (f64::NAN, f64::NAN, truth.len()),
            (Err(e), _) | (_, Err(e)) => return Err(e),
        };
        Ok(Metrics { mae, rmae, rrmse, relative_excluded })
    }
}

/// Wall-clock seconds per phase (zero without `std`).
#[derive(Debug, Clone, Copy, Default, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct Timings {
    pub radius_search: f64,
    pub bo: f64,
    pub blend: f64,
    pub total: f64,
}

#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct FitResult {
    /// Layout with the tuned radius and shape of every subdomain.
    pub layout: SubdomainLayout,
    /// Minimum-density radius of every subdomain before tuning.
    pub delta_start: Vec<f64>,
    pub predictions: Vec<f64>,
    pub metrics: Option<Metrics>,
    pub traces: Vec<BoTrace>,
    pub timings: Timings,
    pub diagnostics: BlendDiagnostics,
    /// Training rows dropped as exact repeats.
    pub duplicates_dropped: Vec<usize>,
}

/// Fits the partition-of-unity interpolant to `train` and evaluates it at
/// `eval`. Both sets are expected in `[0, 1]^d`; evaluation points outside
/// are clamped and reported. Metrics are computed when `truth` is given.
pub fn bo_pum(train: &PointSet, eval: &Points, truth: Option<&[f64]>, cfg: &PipelineConfig) -> Result<FitResult> {
    let total = Stopwatch::start();
    cfg.bo.validate()?;
    if train.is_empty() {
        return Err(Error::Empty);
    }
    train.require_values()?;
    if !train.points().in_unit_cube() {
        return Err(Error::invalid("training points must lie in the unit cube; normalize them first"));
    }
    if eval.dim() != train.dim() {
        return Err(Error::DimensionMismatch { expected: train.dim(), got: eval.dim() });
    }
    if let Some(t) = truth {
        if t.len() != eval.len() {
            return Err(Error::LengthMismatch { left: eval.len(), right: t.len() });
        }
    }

    let (data, duplicates_dropped) = train.dedup()?;
    let mut layout = make_pu_centers(data.len(), data.dim())?;
    layout.min_pts = cfg.min_pts;
    let index = SpatialIndex::build(data.points())?;

    let clock = Stopwatch::start();
    let delta_start = find_min_radius(&index, &layout, cfg.min_pts)?;
    let radius_search = clock.seconds();

    let clock = Stopwatch::start();
    let searches = par::map_indexed(layout.len(), |j| {
        bo_search(&data, &index, layout.center(j), delta_start[j], cfg.family, &cfg.bo, j as u64)
            .map_err(|e| e.in_subdomain(j))
    });
    let mut traces = Vec::with_capacity(layout.len());
    for (j, s) in searches.into_iter().enumerate() {
        let (theta, trace) = s?;
        layout.shapes[j] = theta[0];
        layout.radii[j] = theta[1];
        traces.push(trace);
    }
    let bo = clock.seconds();

    let clock = Stopwatch::start();
    let specs = layout
        .shapes
        .iter()
        .map(|&eps| KernelSpec::with_max(cfg.family, eps, cfg.bo.eps_max))
        .collect::<Result<Vec<_>>>()?;
    let (predictions, diagnostics) = pum_evaluate(&data, eval, &layout, &index, &specs)?;
    let blend = clock.seconds();

    let metrics = truth.map(|t| Metrics::compute(t, &predictions)).transpose()?;
    Ok(FitResult {
        layout,
        delta_start,
        predictions,
        metrics,
        traces,
        timings: Timings { radius_search, bo, blend, total: total.seconds() },
        diagnostics,
        duplicates_dropped,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::testfns::{gen_testdata, TestFunction};

    fn quick() -> PipelineConfig {
        PipelineConfig {
            bo: BoConfig { niter: 5, n_candidates: 128, seed: 7, ..Default::default() },
            ..Default::default()
        }
    }

    #[test]
    fn shapes_and_radii_stay_in_the_box() {
        let train = gen_testdata(TestFunction::F1, 300, 1).unwrap();
        let test = gen_testdata(TestFunction::F1, 50, 2).unwrap();
        let r = bo_pum(&train, test.points(), test.values(), &quick()).unwrap();
        assert_eq!(r.predictions.len(), 50);
        assert_eq!(r.traces.len(), r.layout.len());
        for j in 0..r.layout.len() {
            assert!(r.layout.radii[j] >= r.delta_start[j] && r.layout.radii[j] <= 2.0 * r.delta_start[j]);
            assert!(r.layout.shapes[j] > 0.0 && r.layout.shapes[j] <= 20.0);
        }
        let m = r.metrics.unwrap();
        assert!(m.mae < 0.1 && m.rrmse <= m.rmae);
    }

    #[test]
    fn metrics_only_with_truth() {
        let train = gen_testdata(TestFunction::F2, 200, 1).unwrap();
        let r = bo_pum(&train, &Points::empty(2), None, &quick()).unwrap();
        assert!(r.metrics.is_none() && r.predictions.is_empty());
    }

    #[test]
    fn repeatable() {
        let train = gen_testdata(TestFunction::F2, 200, 9).unwrap();
        let test = gen_testdata(TestFunction::F2, 40, 10).unwrap();
        let a = bo_pum(&train, test.points(), None, &quick()).unwrap();
        let b = bo_pum(&train, test.points(), None, &quick()).unwrap();
        assert_eq!(a.predictions, b.predictions);
        assert_eq!(a.traces, b.traces);
    }

    #[test]
    fn rejects_bad_input() {
        let outside = PointSet::new(
            Points::from_rows(2, [[0.0, 0.0], [2.0, 1.0], [0.5, 0.5], [0.3, 0.1]]).unwrap(),
            Some(alloc::vec![1.0; 4]),
        )
        .unwrap();
        assert!(bo_pum(&outside, &Points::empty(2), None, &quick()).is_err());
        let few = gen_testdata(TestFunction::F1, 3, 1).unwrap();
        assert!(matches!(bo_pum(&few, &Points::empty(2), None, &quick()), Err(Error::Config(_))));
        let small = gen_testdata(TestFunction::F1, 10, 1).unwrap();
        assert!(matches!(bo_pum(&small, &Points::empty(2), None, &quick()), Err(Error::Config(_))));
    }
}
