//! Bivariate benchmark functions and seeded sample generation.

use alloc::vec::Vec;
use core::fmt;
use core::str::FromStr;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::math::{cos, exp, sin};
use crate::points::{PointSet, Points};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(rename_all = "lowercase"))]
pub enum TestFunction {
    /// Four-term exponential sum of Franke type.
    F1,
    /// `2 cos(10x) sin(10y) + sin(10xy)`.
    F2,
}

impl TestFunction {
    pub const ALL: [TestFunction; 2] = [TestFunction::F1, TestFunction::F2];

    pub fn eval(self, x: f64, y: f64) -> f64 {
        match self {
            TestFunction::F1 => {
                let (u, v) = (9.0 * x, 9.0 * y);
                0.75 * exp(-(u - 2.0) * (u - 2.0) / 4.0 - (v - 2.0) * (v - 2.0) / 4.0)
                    + 0.75 * exp(-(u - 2.0) * (u - 2.0) / 49.0 - (v + 1.0) / 10.0)
                    + 0.5 * exp(-(u - 7.0) * (u - 7.0) / 4.0 - (v - 3.0) * (v - 3.0) / 4.0)
                    - 0.2 * exp(-(u - 4.0) * (u - 4.0) - (v - 7.0) * (v - 7.0))
            }
            TestFunction::F2 => 2.0 * cos(10.0 * x) * sin(10.0 * y) + sin(10.0 * x * y),
        }
    }

    pub fn eval_points(self, points: &Points) -> Result<Vec<f64>> {
        if points.dim() != 2 {
            return Err(Error::DimensionMismatch { expected: 2, got: points.dim() });
        }
        Ok(points.iter().map(|p| self.eval(p[0], p[1])).collect())
    }

    pub fn name(self) -> &'static str {
        match self {
            TestFunction::F1 => "f1",
            TestFunction::F2 => "f2",
        }
    }
}

impl fmt::Display for TestFunction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for TestFunction {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "f1" | "franke" => Ok(TestFunction::F1),
            "f2" => Ok(TestFunction::F2),
            other => Err(Error::invalid(alloc::format!("unknown test function `{other}` (expected f1 or f2)"))),
        }
    }
}

/// `n` uniform random points in `[0, 1]²` with exact values of `fun`.
pub fn gen_testdata(fun: TestFunction, n: usize, seed: u64) -> Result<PointSet> {
    if n == 0 {
        return Err(Error::invalid("number of points must be at least 1"));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let coords: Vec<f64> = (0..2 * n).map(|_| rng.random::<f64>()).collect();
    let points = Points::new(2, coords)?;
    let values = fun.eval_points(&points)?;
    PointSet::new(points, Some(values))
}
