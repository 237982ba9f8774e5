//! Point containers and unit-cube normalization.

use alloc::collections::BTreeMap;
use alloc::vec::Vec;

use rand::seq::SliceRandom;
use rand::Rng;

use crate::error::{Error, Result};
use crate::math;

/// Values closer than this are treated as equal when deduplicating points.
pub const DUPLICATE_VALUE_TOL: f64 = 1e-12;

/// Euclidean distance, accumulated axis by axis.
#[inline]
pub fn distance(a: &[f64], b: &[f64]) -> f64 {
    let mut acc = 0.0;
    for (x, y) in a.iter().zip(b) {
        let d = x - y;
        acc += d * d;
    }
    math::sqrt(acc)
}

/// A list of `d`-dimensional points stored row-major in one buffer.
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct Points {
    dim: usize,
    coords: Vec<f64>,
}

impl Points {
    /// Wraps a flat coordinate buffer. Every coordinate must be finite.
    pub fn new(dim: usize, coords: Vec<f64>) -> Result<Self> {
        if dim == 0 {
            return Err(Error::invalid("dimension must be at least 1"));
        }
        if !coords.len().is_multiple_of(dim) {
            return Err(Error::invalid("coordinate buffer is not a multiple of the dimension"));
        }
        if let Some(pos) = coords.iter().position(|c| !c.is_finite()) {
            return Err(Error::NonFinite(pos / dim));
        }
        Ok(Points { dim, coords })
    }

    pub fn from_rows<R: AsRef<[f64]>>(dim: usize, rows: impl IntoIterator<Item = R>) -> Result<Self> {
        let mut coords = Vec::new();
        for row in rows {
            let row = row.as_ref();
            if row.len() != dim {
                return Err(Error::DimensionMismatch { expected: dim, got: row.len() });
            }
            coords.extend_from_slice(row);
        }
        Points::new(dim, coords)
    }

    pub fn empty(dim: usize) -> Self {
        Points { dim: dim.max(1), coords: Vec::new() }
    }

    #[inline]
    pub fn dim(&self) -> usize {
        self.dim
    }

    #[inline]
    pub fn len(&self) -> usize {
        self.coords.len() / self.dim
    }

    #[inline]
    pub fn is_empty(&self) -> bool {
        self.coords.is_empty()
    }

    #[inline]
    pub fn point(&self, i: usize) -> &[f64] {
        &self.coords[i * self.dim..(i + 1) * self.dim]
    }

    pub fn iter(&self) -> core::slice::ChunksExact<'_, f64> {
        self.coords.chunks_exact(self.dim)
    }

    pub fn as_flat(&self) -> &[f64] {
        &self.coords
    }

    pub fn into_flat(self) -> Vec<f64> {
        self.coords
    }

    /// Copies the listed points, in the listed order.
    pub fn select(&self, indices: &[usize]) -> Points {
        let mut coords = Vec::with_capacity(indices.len() * self.dim);
        for &i in indices {
            coords.extend_from_slice(self.point(i));
        }
        Points { dim: self.dim, coords }
    }

    pub fn push(&mut self, p: &[f64]) -> Result<()> {
        if p.len() != self.dim {
            return Err(Error::DimensionMismatch { expected: self.dim, got: p.len() });
        }
        if p.iter().any(|c| !c.is_finite()) {
            return Err(Error::NonFinite(self.len()));
        }
        self.coords.extend_from_slice(p);
        Ok(())
    }

    /// True when every coordinate lies in `[0, 1]`.
    pub fn in_unit_cube(&self) -> bool {
        self.coords.iter().all(|c| (0.0..=1.0).contains(c))
    }
}

/// A point list with optional data values, one per point.
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct PointSet {
    points: Points,
    values: Option<Vec<f64>>,
}

impl PointSet {
    pub fn new(points: Points, values: Option<Vec<f64>>) -> Result<Self> {
        if let Some(v) = &values {
            if v.len() != points.len() {
                return Err(Error::LengthMismatch { left: points.len(), right: v.len() });
            }
            if let Some(pos) = v.iter().position(|x| !x.is_finite()) {
                return Err(Error::NonFinite(pos));
            }
        }
        Ok(PointSet { points, values })
    }

    pub fn points(&self) -> &Points {
        &self.points
    }

    pub fn values(&self) -> Option<&[f64]> {
        self.values.as_deref()
    }

    /// Values, or an error for a set that carries none.
    pub fn require_values(&self) -> Result<&[f64]> {
        self.values.as_deref().ok_or_else(|| Error::invalid("point set has no data values"))
    }

    pub fn dim(&self) -> usize {
        self.points.dim()
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn into_parts(self) -> (Points, Option<Vec<f64>>) {
        (self.points, self.values)
    }

    /// Removes repeated points (bit-identical coordinates).
    ///
    /// The first occurrence is kept. Repeats whose values differ from the kept
    /// one by more than [`DUPLICATE_VALUE_TOL`] are an error. Returns the
    /// deduplicated set and the original indices that were dropped.
    pub fn dedup(&self) -> Result<(PointSet, Vec<usize>)> {
        let mut seen: BTreeMap<Vec<u64>, usize> = BTreeMap::new();
        let mut keep = Vec::with_capacity(self.len());
        let mut dropped = Vec::new();
        for (i, p) in self.points.iter().enumerate() {
            // -0.0 and 0.0 are the same location.
            let key: Vec<u64> = p.iter().map(|c| (c + 0.0).to_bits()).collect();
            match seen.get(&key) {
                Some(&first) => {
                    if let Some(v) = &self.values {
                        if (v[first] - v[i]).abs() > DUPLICATE_VALUE_TOL {
                            return Err(Error::ConflictingDuplicate { first, second: i });
                        }
                    }
                    dropped.push(i);
                }
                None => {
                    seen.insert(key, i);
                    keep.push(i);
                }
            }
        }
        Ok((self.select(&keep), dropped))
    }

    pub fn select(&self, indices: &[usize]) -> PointSet {
        PointSet {
            points: self.points.select(indices),
            values: self.values.as_ref().map(|v| indices.iter().map(|&i| v[i]).collect()),
        }
    }

    /// Random split without replacement into `n_first` and `len - n_first` points.
    /// Both halves keep the original relative order.
    pub fn split_random<R: Rng + ?Sized>(&self, n_first: usize, rng: &mut R) -> Result<(PointSet, PointSet)> {
        if n_first > self.len() {
            return Err(Error::invalid("split size exceeds the number of points"));
        }
        let mut order: Vec<usize> = (0..self.len()).collect();
        order.shuffle(rng);
        let mut first = order[..n_first].to_vec();
        let mut second = order[n_first..].to_vec();
        first.sort_unstable();
        second.sort_unstable();
        Ok((self.select(&first), self.select(&second)))
    }
}

/// How a single axis is mapped into the unit interval.
#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub enum AxisMap {
    Identity,
    /// `(x - lo) / (hi - lo)`.
    Affine {
        lo: f64,
        hi: f64,
    },
    /// Zero-width axis; every coordinate maps to 0.5.
    Constant {
        value: f64,
    },
}

/// Per-axis affine map from original coordinates into `[0, 1]^d`.
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct AffineMap {
    axes: Vec<AxisMap>,
}

impl AffineMap {
    pub fn identity(dim: usize) -> Self {
        AffineMap { axes: alloc::vec![AxisMap::Identity; dim] }
    }

    /// Fits the map to the bounding box of `points`.
    ///
    /// Axes already inside `[0, 1]` are left alone; zero-width axes map to the
    /// constant 0.5 and are reported in the second return value.
    pub fn fit(points: &Points) -> Result<(Self, Vec<usize>)> {
        if points.is_empty() {
            return Err(Error::Empty);
        }
        let dim = points.dim();
        let mut lo = alloc::vec![f64::INFINITY; dim];
        let mut hi = alloc::vec![f64::NEG_INFINITY; dim];
        for p in points.iter() {
            for k in 0..dim {
                lo[k] = lo[k].min(p[k]);
                hi[k] = hi[k].max(p[k]);
            }
        }
        let mut degenerate = Vec::new();
        let axes = (0..dim)
            .map(|k| {
                if hi[k] == lo[k] {
                    degenerate.push(k);
                    AxisMap::Constant { value: lo[k] }
                } else if lo[k] >= 0.0 && hi[k] <= 1.0 {
                    AxisMap::Identity
                } else {
                    AxisMap::Affine { lo: lo[k], hi: hi[k] }
                }
            })
            .collect();
        Ok((AffineMap { axes }, degenerate))
    }

    pub fn dim(&self) -> usize {
        self.axes.len()
    }

    pub fn axes(&self) -> &[AxisMap] {
        &self.axes
    }

    pub fn is_identity(&self) -> bool {
        self.axes.iter().all(|a| matches!(a, AxisMap::Identity))
    }

    /// Per-axis scale factors (`1 / (hi - lo)`; 1 for identity, 0 for constant axes).
    pub fn scales(&self) -> Vec<f64> {
        self.axes
            .iter()
            .map(|a| match *a {
                AxisMap::Identity => 1.0,
                AxisMap::Affine { lo, hi } => 1.0 / (hi - lo),
                AxisMap::Constant { .. } => 0.0,
            })
            .collect()
    }

    pub fn forward_coord(&self, axis: usize, x: f64) -> f64 {
        match self.axes[axis] {
            AxisMap::Identity => x,
            AxisMap::Affine { lo, hi } => (x - lo) / (hi - lo),
            AxisMap::Constant { .. } => 0.5,
        }
    }

    /// Maps normalized coordinates back; constant axes return their original value.
    pub fn inverse_coord(&self, axis: usize, u: f64) -> f64 {
        match self.axes[axis] {
            AxisMap::Identity => u,
            AxisMap::Affine { lo, hi } => lo + u * (hi - lo),
            AxisMap::Constant { value } => value,
        }
    }

    pub fn apply(&self, points: &Points) -> Result<Points> {
        if points.dim() != self.dim() {
            return Err(Error::DimensionMismatch { expected: self.dim(), got: points.dim() });
        }
        let dim = self.dim();
        let coords = points.as_flat().iter().enumerate().map(|(i, &x)| self.forward_coord(i % dim, x)).collect();
        Points::new(dim, coords)
    }

    pub fn invert(&self, points: &Points) -> Result<Points> {
        if points.dim() != self.dim() {
            return Err(Error::DimensionMismatch { expected: self.dim(), got: points.dim() });
        }
        let dim = self.dim();
        let coords = points.as_flat().iter().enumerate().map(|(i, &u)| self.inverse_coord(i % dim, u)).collect();
        Points::new(dim, coords)
    }
}

/// Result of [`normalize`].
#[derive(Debug, Clone, PartialEq)]
pub struct Normalized {
    pub set: PointSet,
    pub map: AffineMap,
    /// Axes whose extent was zero (mapped to 0.5).
    pub degenerate_axes: Vec<usize>,
}

/// Rescales coordinates into the unit cube. Values are left untouched.
pub fn normalize(ps: &PointSet) -> Result<Normalized> {
    let (map, degenerate_axes) = AffineMap::fit(ps.points())?;
    let points = map.apply(ps.points())?;
    let set = PointSet::new(points, ps.values().map(<[f64]>::to_vec))?;
    Ok(Normalized { set, map, degenerate_axes })
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::vec;
    use rand::SeedableRng;

    #[test]
    fn two_point_bounding_box() {
        let ps = PointSet::new(Points::from_rows(2, [[0.0, 0.0], [2.0, 4.0]]).unwrap(), None).unwrap();
        let n = normalize(&ps).unwrap();
        assert_eq!(n.set.points().as_flat(), &[0.0, 0.0, 1.0, 1.0]);
        assert_eq!(n.map.scales(), vec![0.5, 0.25]);
        assert!(n.degenerate_axes.is_empty());
    }

    #[test]
    fn unit_cube_input_is_identity() {
        let pts = Points::from_rows(2, [[0.1, 0.9], [0.5, 0.2], [0.3, 0.3]]).unwrap();
        let ps = PointSet::new(pts.clone(), Some(vec![1.0, 2.0, 3.0])).unwrap();
        let n = normalize(&ps).unwrap();
        assert!(n.map.is_identity());
        assert_eq!(n.set.points(), &pts);
    }

    #[test]
    fn degenerate_axis_maps_to_half() {
        let pts = Points::from_rows(2, [[3.0, 7.0], [5.0, 7.0]]).unwrap();
        let n = normalize(&PointSet::new(pts, None).unwrap()).unwrap();
        assert_eq!(n.degenerate_axes, vec![1]);
        assert_eq!(n.set.points().as_flat(), &[0.0, 0.5, 1.0, 0.5]);
        assert_eq!(n.map.inverse_coord(1, 0.5), 7.0);
    }

    #[test]
    fn survey_like_data_spans_unit_box_and_keeps_values() {
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(3);
        let rows: Vec<[f64; 2]> =
            (0..300).map(|_| [rng.random_range(-176.0..-172.0), rng.random_range(-24.0..-15.0)]).collect();
        let values: Vec<f64> = (0..300).map(|i| -100.0 * i as f64).collect();
        let ps = PointSet::new(Points::from_rows(2, &rows).unwrap(), Some(values.clone())).unwrap();
        let n = normalize(&ps).unwrap();
        for k in 0..2 {
            let col: Vec<f64> = n.set.points().iter().map(|p| p[k]).collect();
            let lo = col.iter().cloned().fold(f64::INFINITY, f64::min);
            let hi = col.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
            assert_eq!((lo, hi), (0.0, 1.0));
        }
        assert_eq!(n.set.values().unwrap(), values.as_slice());
    }

    #[test]
    fn dedup_keeps_first_and_rejects_conflicts() {
        let pts = Points::from_rows(2, [[0.1, 0.2], [0.3, 0.4], [0.1, 0.2]]).unwrap();
        let ps = PointSet::new(pts.clone(), Some(vec![1.0, 2.0, 1.0])).unwrap();
        let (d, dropped) = ps.dedup().unwrap();
        assert_eq!(d.len(), 2);
        assert_eq!(dropped, vec![2]);

        let bad = PointSet::new(pts, Some(vec![1.0, 2.0, 1.5])).unwrap();
        assert_eq!(bad.dedup().unwrap_err(), Error::ConflictingDuplicate { first: 0, second: 2 });
    }

    #[test]
    fn split_sizes() {
        let pts = Points::new(1, (0..8113).map(|i| i as f64).collect()).unwrap();
        let ps = PointSet::new(pts, None).unwrap();
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(11);
        let (a, b) = ps.split_random(7000, &mut rng).unwrap();
        assert_eq!((a.len(), b.len()), (7000, 1113));
        let mut all: Vec<f64> = a.points().as_flat().iter().chain(b.points().as_flat()).cloned().collect();
        all.sort_by(f64::total_cmp);
        assert!(all.windows(2).all(|w| w[0] < w[1]));
    }

    #[test]
    fn rejects_non_finite_and_ragged_input() {
        assert!(matches!(Points::new(2, vec![0.0, f64::NAN]), Err(Error::NonFinite(0))));
        assert!(Points::new(2, vec![0.0, 1.0, 2.0]).is_err());
        let pts = Points::from_rows(1, [[0.0], [1.0]]).unwrap();
        assert!(PointSet::new(pts, Some(vec![1.0])).is_err());
    }
}
