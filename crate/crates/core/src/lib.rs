//! Partition-of-unity interpolation of scattered data with radial basis
//! functions, where every subdomain's shape parameter and radius are tuned
//! by Bayesian optimization.
//!
//! The crate is `no_std` (with `alloc`). Enabling `std` adds wall-clock phase
//! timings; `parallel` runs the per-subdomain loops on a rayon pool while
//! keeping results bit-identical to the sequential path.
//!
//! The pipeline, bottom up:
//!
//! - [`points`]: point containers, unit-cube normalization, deduplication.
//! - [`kdtree`]: a median-split kd-tree with exact closed-ball radius queries.
//! - [`layout`]: the grid of subdomain centers and the minimum-density radius search.
//! - [`kernels`]: the three radial basis functions and kernel matrices.
//! - [`local`]: local interpolants solved through a jittered Cholesky factorization.
//! - [`blend`]: Shepard weights and the global blended evaluation.
//! - [`gp`]: the Gaussian-process surrogate over `(epsilon, delta)`.
//! - [`bo`]: Expected Improvement and the per-subdomain search loop.
//! - [`pipeline`]: the end-to-end fit and the error metrics in [`metrics`].

#![cfg_attr(not(feature = "std"), no_std)]
// Negated comparisons are how NaN inputs get rejected.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

extern crate alloc;

pub mod blend;
pub mod bo;
mod error;
pub mod gp;
pub mod kdtree;
pub mod kernels;
pub mod layout;
pub mod linalg;
pub mod local;
mod math;
pub mod metrics;
mod par;
pub mod pipeline;
pub mod points;
pub mod testfns;

pub use blend::{pum_evaluate, shepard_weights, BlendDiagnostics, WeightField};
pub use bo::{bo_search, expected_improvement, log_expected_improvement, propose_next, BoConfig, BoTrace, TrialStatus};
pub use error::{Error, Result};
pub use gp::{GpModel, SearchBox};
pub use kdtree::SpatialIndex;
pub use kernels::{eval_rbf, kernel_matrix, KernelFamily, KernelSpec};
pub use layout::{find_min_radius, make_pu_centers, SubdomainLayout};
pub use local::{eval_local, fit_local, LocalModel};
pub use metrics::{mae, rmae, rrmse};
pub use pipeline::{bo_pum, FitResult, Metrics, PipelineConfig, Timings};
pub use points::{normalize, AffineMap, PointSet, Points};
pub use testfns::{gen_testdata, TestFunction};
