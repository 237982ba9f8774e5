//! Shepard weights and the partition-of-unity blend of local interpolants.
//!
//! Each subdomain `j` contributes through the compactly supported bump
//! `ψ_j(x) = (1 − s)₊⁴ (4s + 1)`, `s = ‖x − c_j‖ / δ_j`, and the weights are
//! `w_j = ψ_j / Σ_k ψ_k`. The global value is `Σ_j w_j(x) P_j(x)`.

use alloc::vec::Vec;

use crate::error::{Error, Result};
use crate::kdtree::SpatialIndex;
use crate::kernels::KernelSpec;
use crate::layout::SubdomainLayout;
use crate::local::fit_local;
use crate::math;
use crate::par;
use crate::points::{distance, PointSet, Points};

/// Wendland C² bump on `[0, 1)`, zero from `s = 1` on.
#[inline]
pub fn shepard_bump(s: f64) -> f64 {
    if s >= 1.0 {
        0.0
    } else {
        math::powi(1.0 - s, 4) * (4.0 * s + 1.0)
    }
}

/// Non-zero Shepard weights per evaluation point, stored row-compressed.
#[derive(Debug, Clone, PartialEq)]
pub struct WeightField {
    offsets: Vec<usize>,
    entries: Vec<(usize, f64)>,
}

impl WeightField {
    pub fn len(&self) -> usize {
        self.offsets.len() - 1
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// `(subdomain, weight)` pairs for target `i`, ascending by subdomain.
    pub fn weights(&self, i: usize) -> &[(usize, f64)] {
        &self.entries[self.offsets[i]..self.offsets[i + 1]]
    }

    pub fn is_covered(&self, i: usize) -> bool {
        self.offsets[i + 1] > self.offsets[i]
    }

    pub fn uncovered(&self) -> Vec<usize> {
        (0..self.len()).filter(|&i| !self.is_covered(i)).collect()
    }

    /// Target lists per subdomain, with weights: the transpose of the field.
    fn by_subdomain(&self, m: usize) -> Vec<Vec<(usize, f64)>> {
        let mut out = alloc::vec![Vec::new(); m];
        for i in 0..self.len() {
            for &(j, w) in self.weights(i) {
                out[j].push((i, w));
            }
        }
        out
    }
}

/// Shepard weights of every target with respect to `layout`.
///
/// Targets that no ball strictly contains get an empty weight list.
pub fn shepard_weights(targets: &Points, layout: &SubdomainLayout) -> Result<WeightField> {
    if targets.dim() != layout.dim() {
        return Err(Error::DimensionMismatch { expected: layout.dim(), got: targets.dim() });
    }
    if layout.radii.len() != layout.len() {
        return Err(Error::LengthMismatch { left: layout.len(), right: layout.radii.len() });
    }
    if layout.radii.iter().any(|&r| !(r > 0.0)) {
        return Err(Error::invalid("subdomain radii must be positive"));
    }
    let mut offsets = Vec::with_capacity(targets.len() + 1);
    let mut entries = Vec::new();
    offsets.push(0);
    if layout.is_empty() {
        offsets.resize(targets.len() + 1, 0);
        return Ok(WeightField { offsets, entries });
    }
    let centers = SpatialIndex::build(&layout.centers)?;
    let reach = layout.radii.iter().cloned().fold(0.0, f64::max);
    for x in targets.iter() {
        let start = entries.len();
        let mut total = 0.0;
        for j in centers.query_radius(x, reach) {
            let psi = shepard_bump(distance(x, layout.center(j)) / layout.radii[j]);
            if psi > 0.0 {
                total += psi;
                entries.push((j, psi));
            }
        }
        for e in &mut entries[start..] {
            e.1 /= total;
        }
        offsets.push(entries.len());
    }
    Ok(WeightField { offsets, entries })
}

/// What happened during a blended evaluation.
#[derive(Debug, Clone, Default, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct BlendDiagnostics {
    /// Targets outside every ball, evaluated by the nearest center's model.
    pub uncovered: Vec<usize>,
    /// Targets that had at least one coordinate clamped into `[0, 1]`.
    pub clamped: Vec<usize>,
    /// Points in each subdomain's ball.
    pub local_sizes: Vec<usize>,
    /// Jitter of each subdomain's fit; `None` when the subdomain was not fit.
    pub jitter: Vec<Option<f64>>,
}

impl BlendDiagnostics {
    /// True when every local fit that ran was an exact interpolant.
    pub fn all_exact(&self) -> bool {
        self.jitter.iter().flatten().all(|&j| j == 0.0)
    }
}

/// Weighted local values of one subdomain: `(jitter, [(target, w·P_j)])`.
type Contribution = (f64, Vec<(usize, f64)>);

/// Fits every subdomain's local interpolant on the data in its ball and
/// blends them at `targets` with Shepard weights.
///
/// Contributions are summed in subdomain order, so the result does not
/// depend on how the per-subdomain work is scheduled.
pub fn pum_evaluate(
    data: &PointSet,
    targets: &Points,
    layout: &SubdomainLayout,
    index: &SpatialIndex,
    specs: &[KernelSpec],
) -> Result<(Vec<f64>, BlendDiagnostics)> {
    data.require_values()?;
    let m = layout.len();
    if specs.len() != m {
        return Err(Error::LengthMismatch { left: m, right: specs.len() });
    }
    if targets.dim() != layout.dim() || data.dim() != layout.dim() {
        return Err(Error::DimensionMismatch { expected: layout.dim(), got: targets.dim() });
    }

    let mut clamped = Vec::new();
    let mut coords = targets.as_flat().to_vec();
    for (i, p) in coords.chunks_exact_mut(targets.dim()).enumerate() {
        let mut hit = false;
        for c in p.iter_mut() {
            if !(0.0..=1.0).contains(c) {
                *c = c.clamp(0.0, 1.0);
                hit = true;
            }
        }
        if hit {
            clamped.push(i);
        }
    }
    let targets = Points::new(targets.dim(), coords)?;

    let weights = shepard_weights(&targets, layout)?;
    let members: Vec<Vec<usize>> = (0..m).map(|j| index.query_radius(layout.center(j), layout.radii[j])).collect();
    let mut assigned = weights.by_subdomain(m);

    let uncovered = weights.uncovered();
    for &i in &uncovered {
        let x = targets.point(i);
        let nearest = (0..m)
            .filter(|&j| !members[j].is_empty())
            .map(|j| (distance(x, layout.center(j)), j))
            .min_by(|a, b| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1)))
            .map(|(_, j)| j)
            .ok_or(Error::Empty)?;
        assigned[nearest].push((i, 1.0));
    }

    let parts = par::map_indexed(m, |j| -> Result<Option<Contribution>> {
        let (nodes, tgt) = (&members[j], &assigned[j]);
        if nodes.is_empty() || tgt.is_empty() {
            return Ok(None);
        }
        let local = data.select(nodes);
        let model = fit_local(local.points(), local.require_values()?, specs[j]).map_err(|e| e.in_subdomain(j))?;
        let contrib = tgt.iter().map(|&(i, w)| (i, w * model.eval_at(targets.point(i)))).collect();
        Ok(Some((model.jitter_used, contrib)))
    });

    let mut out = alloc::vec![0.0; targets.len()];
    let mut jitter = alloc::vec![None; m];
    for (j, part) in parts.into_iter().enumerate() {
        if let Some((jit, contrib)) = part? {
            jitter[j] = Some(jit);
            for (i, v) in contrib {
                out[i] += v;
            }
        }
    }
    let diagnostics =
        BlendDiagnostics { uncovered, clamped, local_sizes: members.iter().map(Vec::len).collect(), jitter };
    Ok((out, diagnostics))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::kernels::KernelFamily;
    use crate::layout::make_pu_centers;
    use crate::local::eval_local;
    use alloc::vec;
    use rand::{Rng, SeedableRng};

    fn manual_layout(centers: &[[f64; 2]], radii: &[f64]) -> SubdomainLayout {
        SubdomainLayout {
            n_side: 1,
            centers: Points::from_rows(2, centers).unwrap(),
            radii: radii.to_vec(),
            shapes: vec![1.0; radii.len()],
            min_pts: 1,
        }
    }

    #[test]
    fn bump_shape() {
        assert_eq!(shepard_bump(0.0), 1.0);
        assert_eq!(shepard_bump(1.0), 0.0);
        assert_eq!(shepard_bump(1.5), 0.0);
        assert!((shepard_bump(0.5) - 0.0625 * 3.0).abs() < 1e-16);
    }

    #[test]
    fn singleton_and_symmetric_weights() {
        let l = manual_layout(&[[0.25, 0.5], [0.75, 0.5]], &[0.3, 0.3]);
        let t = Points::from_rows(2, [[0.1, 0.5], [0.5, 0.5], [0.5, 0.99]]).unwrap();
        let w = shepard_weights(&t, &l).unwrap();
        assert_eq!(w.weights(0), &[(0, 1.0)]);
        assert_eq!(w.weights(1), &[(0, 0.5), (1, 0.5)]);
        assert!(!w.is_covered(2));
        assert_eq!(w.uncovered(), vec![2]);
    }

    #[test]
    fn three_ball_weights_match_direct_formula() {
        let l = manual_layout(&[[0.4, 0.4], [0.6, 0.45], [0.5, 0.6]], &[0.3, 0.25, 0.35]);
        let x = [0.5, 0.48];
        let w = shepard_weights(&Points::from_rows(2, [x]).unwrap(), &l).unwrap();
        let psi: Vec<f64> = (0..3)
            .map(|j| {
                let c = l.center(j);
                let s = ((x[0] - c[0]).powi(2) + (x[1] - c[1]).powi(2)).sqrt() / l.radii[j];
                (1.0 - s).powi(4) * (4.0 * s + 1.0)
            })
            .collect();
        let total: f64 = psi.iter().sum();
        let got = w.weights(0);
        assert_eq!(got.len(), 3);
        for (j, &(jj, wj)) in got.iter().enumerate() {
            assert_eq!(jj, j);
            assert!((wj - psi[j] / total).abs() < 1e-15);
        }
        assert!((got.iter().map(|e| e.1).sum::<f64>() - 1.0).abs() < 1e-12);
    }

    fn franke_like(p: &[f64]) -> f64 {
        (3.0 * p[0]).sin() * (2.0 * p[1]).cos() + p[0]
    }

    fn random_data(n: usize, seed: u64) -> PointSet {
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
        let pts = Points::new(2, (0..2 * n).map(|_| rng.random::<f64>()).collect()).unwrap();
        let vals = pts.iter().map(franke_like).collect();
        PointSet::new(pts, Some(vals)).unwrap()
    }

    #[test]
    fn reproduces_training_nodes() {
        let data = random_data(400, 12);
        let idx = SpatialIndex::build(data.points()).unwrap();
        let mut l = make_pu_centers(400, 2).unwrap();
        l.radii = crate::layout::find_min_radius(&idx, &l, 15).unwrap();
        let specs = vec![KernelSpec::new(KernelFamily::WendlandC4, 2.0).unwrap(); l.len()];
        let (y, diag) = pum_evaluate(&data, data.points(), &l, &idx, &specs).unwrap();
        assert!(diag.all_exact());
        assert!(diag.uncovered.is_empty());
        let f = data.values().unwrap();
        let fmax = f.iter().fold(0.0f64, |a, b| a.max(b.abs()));
        for (a, b) in y.iter().zip(f) {
            assert!((a - b).abs() <= 1e-6 * (1.0 + fmax));
        }
    }

    #[test]
    fn single_subdomain_equals_local_model() {
        let data = random_data(30, 3);
        let idx = SpatialIndex::build(data.points()).unwrap();
        let l = make_pu_centers(4, 2).unwrap();
        let spec = KernelSpec::new(KernelFamily::MaternC4, 3.0).unwrap();
        let t = random_data(25, 4);
        let (y, _) = pum_evaluate(&data, t.points(), &l, &idx, &[spec]).unwrap();
        let members = idx.query_radius(l.center(0), l.radii[0]);
        let local = data.select(&members);
        let model = fit_local(local.points(), local.values().unwrap(), spec).unwrap();
        let direct = eval_local(&model, t.points()).unwrap();
        for (a, b) in y.iter().zip(&direct) {
            assert!((a - b).abs() < 1e-12);
        }
    }

    #[test]
    fn two_subdomain_blend_matches_hand_assembly() {
        let data = random_data(200, 21);
        let idx = SpatialIndex::build(data.points()).unwrap();
        let l = manual_layout(&[[0.35, 0.5], [0.65, 0.5]], &[0.3, 0.3]);
        let specs = [
            KernelSpec::new(KernelFamily::Gaussian, 6.0).unwrap(),
            KernelSpec::new(KernelFamily::Gaussian, 7.0).unwrap(),
        ];
        let t = Points::from_rows(2, [[0.5, 0.5], [0.45, 0.55], [0.6, 0.4], [0.2, 0.5]]).unwrap();
        let (y, diag) = pum_evaluate(&data, &t, &l, &idx, &specs).unwrap();
        assert!(diag.uncovered.is_empty());

        let models: Vec<_> = (0..2)
            .map(|j| {
                let sub = data.select(&idx.query_radius(l.center(j), l.radii[j]));
                fit_local(sub.points(), sub.values().unwrap(), specs[j]).unwrap()
            })
            .collect();
        for (i, x) in t.iter().enumerate() {
            let psi: Vec<f64> = (0..2)
                .map(|j| {
                    let s = distance(x, l.center(j)) / l.radii[j];
                    if s < 1.0 {
                        (1.0 - s).powi(4) * (4.0 * s + 1.0)
                    } else {
                        0.0
                    }
                })
                .collect();
            let tot: f64 = psi.iter().sum();
            let expect: f64 = (0..2).map(|j| psi[j] / tot * models[j].eval_at(x)).sum();
            assert!((y[i] - expect).abs() < 1e-12, "target {i}: {} vs {expect}", y[i]);
        }
    }

    #[test]
    fn uncovered_and_clamped_targets_are_reported() {
        let data = random_data(100, 5);
        let idx = SpatialIndex::build(data.points()).unwrap();
        let l = manual_layout(&[[0.3, 0.3], [0.7, 0.7]], &[0.2, 0.2]);
        let specs = vec![KernelSpec::new(KernelFamily::Gaussian, 5.0).unwrap(); 2];
        let t = Points::from_rows(2, [[0.95, 0.05], [0.3, 0.3], [1.3, 0.7]]).unwrap();
        let (y, diag) = pum_evaluate(&data, &t, &l, &idx, &specs).unwrap();
        assert_eq!(diag.uncovered, vec![0, 2]);
        assert_eq!(diag.clamped, vec![2]);
        assert!(y.iter().all(|v| v.is_finite()));
    }
}
