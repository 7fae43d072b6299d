//! Depth-based multivariate rank-sum testing.
//!
//! A depth function orders points from the center of a reference sample
//! outward. Turning depths into ranks gives `R(y; F_m)`, and averaging those
//! ranks over a second sample gives the quality index `Q(F_m, G_n)`, which is
//! `1/2` when both samples come from one distribution and drops below `1/2`
//! when the second is more dispersed or shifted.
//!
//! ```
//! use depthrank::{null_test, DepthSpec, Sample};
//!
//! let x = Sample::from_rows(&[[0.0, 0.1], [1.0, -0.4], [-0.7, 0.9], [0.3, -1.2], [-0.2, 0.0]])?;
//! let y = Sample::from_rows(&[[2.5, 3.0], [-3.1, 0.2], [0.4, -2.8]])?;
//! let report = null_test(&x, &y, &DepthSpec::halfspace(), 0.05)?;
//! assert!(report.statistic < 0.5);
//! # Ok::<(), depthrank::Error>(())
//! ```
//!
//! Modules:
//! - [`depth`]: Mahalanobis, halfspace and projection depth, exact and sampled.
//! - [`ranksum`]: the `Q` statistic, its variances and tests.
//! - [`competitors`]: Hotelling's `T²` and the Oja rank test.
//! - [`theory`]: closed-form `Q` and asymptotic power against normal alternatives.
//! - [`powerlab`]: seeded Monte Carlo power and table reproduction.

pub mod competitors;
pub mod depth;
mod error;
pub mod model;
pub mod numerics;
pub mod powerlab;
pub mod ranksum;
mod report;
pub mod theory;

pub use competitors::{hotelling_t2_test, oja_rank_vector, oja_test, OjaConfig, OjaMode};
pub use depth::{
    cdf_depth_1d, halfspace_depth, mahalanobis_depth, projection_depth, rank_transform,
    DepthMethod, DepthMode, DepthModel, DepthSpec, LocationScale, RankTransform,
};
pub use error::{Error, Result};
pub use model::{alternative_families, sample, Family, GaussianComponent, GaussianMixture, RngStream};
pub use numerics::{Sample, SquareMatrix};
pub use powerlab::{mc_power, reproduce, Budget, McEstimate, PowerCell, PowerGrid, SimPlan, Target, TestKind};
pub use ranksum::{general_test, null_test, q_statistic, variance_estimates, QResult};
pub use report::TestReport;
pub use theory::{asymptotic_sigmas, beta_q, beta_t2, closed_form_q, mixture_q, PowerQuery};
