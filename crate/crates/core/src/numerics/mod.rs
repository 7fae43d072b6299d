//! Special functions and small dense linear algebra.

mod linalg;
pub mod quad;
mod special;

pub use linalg::{sample_mean_cov, Sample, SquareMatrix, Vector};
pub(crate) use linalg::dot;
pub use special::{
    chisq_cdf, chisq_quantile, chisq_sf, noncentral_chisq_cdf, noncentral_chisq_sf,
    std_normal_cdf, std_normal_quantile, std_normal_sf,
};
