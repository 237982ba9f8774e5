//! Subdomain centers on a regular grid and the minimum-density radius search.

use alloc::vec::Vec;

use crate::error::{Error, Result};
use crate::kdtree::SpatialIndex;
use crate::math;
use crate::points::Points;

/// Centers, radii and shape parameters of the partition-of-unity cover.
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct SubdomainLayout {
    /// Grid points per axis.
    pub n_side: usize,
    pub centers: Points,
    /// Ball radius of each subdomain, in unit-cube lengths.
    pub radii: Vec<f64>,
    /// Shape parameter of each subdomain's kernel.
    pub shapes: Vec<f64>,
    pub min_pts: usize,
}

impl SubdomainLayout {
    pub fn dim(&self) -> usize {
        self.centers.dim()
    }

    pub fn len(&self) -> usize {
        self.centers.len()
    }

    pub fn is_empty(&self) -> bool {
        self.centers.is_empty()
    }

    /// Half the diagonal of one grid cell, `√d / (2 m^{1/d})`.
    pub fn initial_radius(&self) -> f64 {
        initial_radius(self.dim(), self.n_side)
    }

    /// Step of the radius growth in [`find_min_radius`]: an eighth of the initial radius.
    pub fn radius_increment(&self) -> f64 {
        self.initial_radius() / 8.0
    }

    pub fn center(&self, j: usize) -> &[f64] {
        self.centers.point(j)
    }
}

fn initial_radius(dim: usize, n_side: usize) -> f64 {
    math::sqrt(dim as f64) / (2.0 * n_side as f64)
}

/// Grid size for `n` points in `dim` dimensions:
/// `n_side = round((n / 2^d)^{1/d})`, `m = n_side^d`.
pub fn grid_side(n: usize, dim: usize) -> Result<usize> {
    if dim == 0 {
        return Err(Error::config("dimension must be at least 1"));
    }
    if dim >= usize::BITS as usize || n < (1usize << dim) {
        return Err(Error::config("need at least 2^d points to place subdomains"));
    }
    let target = n >> dim;
    let side = math::round(math::powf(target as f64, 1.0 / dim as f64)) as usize;
    Ok(side.max(1))
}

/// Builds the cell-centered grid of subdomain centers for `n` points.
///
/// Radii start at the half cell diagonal, which covers the unit cube, and
/// shapes start at 1.
pub fn make_pu_centers(n: usize, dim: usize) -> Result<SubdomainLayout> {
    let n_side = grid_side(n, dim)?;
    let m = n_side.checked_pow(dim as u32).ok_or_else(|| Error::config("subdomain grid too large"))?;
    let mut coords = Vec::with_capacity(m * dim);
    let mut digits = alloc::vec![0usize; dim];
    for _ in 0..m {
        // Axis 0 varies fastest.
        for &g in &digits {
            coords.push((g as f64 + 0.5) / n_side as f64);
        }
        for g in digits.iter_mut() {
            *g += 1;
            if *g < n_side {
                break;
            }
            *g = 0;
        }
    }
    let r0 = initial_radius(dim, n_side);
    Ok(SubdomainLayout {
        n_side,
        centers: Points::new(dim, coords)?,
        radii: alloc::vec![r0; m],
        shapes: alloc::vec![1.0; m],
        min_pts: 1,
    })
}

/// Grows each subdomain radius along `r0 + kΔ`, `Δ = r0 / 8`, until the ball
/// holds at least `min_pts` points, and returns the grown radii.
///
/// `r_k` is computed as `r0 + k·Δ` rather than by repeated addition, so the
/// returned value is exactly the first member of that progression that
/// satisfies the density requirement.
pub fn find_min_radius(index: &SpatialIndex, layout: &SubdomainLayout, min_pts: usize) -> Result<Vec<f64>> {
    if min_pts == 0 {
        return Err(Error::config("min_pts must be at least 1"));
    }
    if min_pts > index.len() {
        return Err(Error::config("min_pts exceeds the number of data points"));
    }
    if index.dim() != layout.dim() {
        return Err(Error::DimensionMismatch { expected: layout.dim(), got: index.dim() });
    }
    let r0 = layout.initial_radius();
    let step = layout.radius_increment();
    let cap = math::sqrt(layout.dim() as f64) + step;
    (0..layout.len())
        .map(|j| {
            let c = layout.center(j);
            let mut k = 0u32;
            let mut r = r0;
            while index.count_radius(c, r) < min_pts {
                k += 1;
                r = r0 + f64::from(k) * step;
                // Past the diagonal the ball holds the whole cube.
                if r > cap {
                    return Err(Error::RadiusSearchDefect { center: j });
                }
            }
            Ok(r)
        })
        .collect()
}
