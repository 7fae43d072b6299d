//! Depth functions and the depth-induced rank transform.
//!
//! A [`DepthSpec`] names the depth and how to compute it. Fitting it to a
//! reference sample gives a [`DepthModel`] that evaluates `D(x; F_m)` for any
//! number of query points; [`RankTransform`] adds the sorted reference depths
//! needed for `R(y; F_m)`.

mod halfspace;
mod projection;
mod univariate;

use std::fmt;
use std::str::FromStr;

use nalgebra::SymmetricEigen;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::RngStream;
use crate::numerics::{sample_mean_cov, Sample, SquareMatrix};

pub use univariate::{median_in_place, LocationScale};

/// Direction count used by approximate modes unless overridden.
pub const DEFAULT_DIRECTIONS: usize = 1000;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum DepthMethod {
    Mahalanobis,
    Halfspace,
    Projection,
    /// Empirical cdf on the line, `D(x; F) = F(x)`.
    Cdf1d,
}

impl DepthMethod {
    pub fn name(self) -> &'static str {
        match self {
            DepthMethod::Mahalanobis => "mahalanobis",
            DepthMethod::Halfspace => "halfspace",
            DepthMethod::Projection => "projection",
            DepthMethod::Cdf1d => "cdf1d",
        }
    }
}

impl fmt::Display for DepthMethod {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for DepthMethod {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "mahalanobis" => Ok(DepthMethod::Mahalanobis),
            "halfspace" => Ok(DepthMethod::Halfspace),
            "projection" => Ok(DepthMethod::Projection),
            "cdf1d" => Ok(DepthMethod::Cdf1d),
            _ => Err(Error::Domain(format!(
                "unknown depth method '{s}' (expected mahalanobis, halfspace, projection or cdf1d)"
            ))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum DepthMode {
    Exact,
    Approximate,
}

impl DepthMode {
    pub fn name(self) -> &'static str {
        match self {
            DepthMode::Exact => "exact",
            DepthMode::Approximate => "approximate",
        }
    }
}

impl FromStr for DepthMode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "exact" => Ok(DepthMode::Exact),
            "approximate" | "approx" => Ok(DepthMode::Approximate),
            _ => Err(Error::Domain(format!("unknown depth mode '{s}' (expected exact or approximate)"))),
        }
    }
}

/// Which depth to compute and how.
///
/// Approximate modes draw `n_directions` unit vectors from
/// `RngStream::new(seed, 0)` once per fit.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DepthSpec {
    pub method: DepthMethod,
    pub mode: DepthMode,
    pub n_directions: usize,
    pub location_scale: LocationScale,
    pub seed: u64,
}

impl DepthSpec {
    pub fn new(method: DepthMethod) -> Self {
        Self {
            method,
            mode: DepthMode::Exact,
            n_directions: DEFAULT_DIRECTIONS,
            location_scale: LocationScale::MedianMad,
            seed: 0,
        }
    }

    pub fn mahalanobis() -> Self {
        Self::new(DepthMethod::Mahalanobis)
    }

    pub fn halfspace() -> Self {
        Self::new(DepthMethod::Halfspace)
    }

    /// Projection depth with (median, MAD).
    pub fn projection() -> Self {
        Self::new(DepthMethod::Projection)
    }

    pub fn cdf1d() -> Self {
        Self::new(DepthMethod::Cdf1d)
    }

    /// Switches to direction sampling with `n_directions` directions.
    pub fn approximate(mut self, n_directions: usize) -> Self {
        self.mode = DepthMode::Approximate;
        self.n_directions = n_directions;
        self
    }

    pub fn with_location_scale(mut self, pair: LocationScale) -> Self {
        self.location_scale = pair;
        self
    }

    pub fn with_seed(mut self, seed: u64) -> Self {
        self.seed = seed;
        self
    }

    /// Fits the depth to a reference sample.
    pub fn fit(&self, reference: &Sample) -> Result<DepthModel> {
        DepthModel::fit(*self, reference)
    }

    fn validate(&self, dim: usize) -> Result<()> {
        match self.method {
            DepthMethod::Cdf1d if dim != 1 => Err(Error::Unsupported(format!(
                "cdf1d depth is defined on the line only, data has dimension {dim}"
            ))),
            DepthMethod::Halfspace | DepthMethod::Projection
                if self.mode == DepthMode::Exact && dim > 2 =>
            {
                Err(Error::Unsupported(format!(
                    "exact {} depth is available for d <= 2 only (d = {dim}); use approximate mode",
                    self.method
                )))
            }
            _ if self.mode == DepthMode::Approximate && self.n_directions == 0 => {
                Err(Error::Domain("approximate mode needs at least one direction".into()))
            }
            _ => Ok(()),
        }
    }

    fn directions(&self, dim: usize) -> Vec<Vec<f64>> {
        let mut rng = RngStream::new(self.seed, 0);
        (0..self.n_directions).map(|_| rng.unit_vector(dim)).collect()
    }
}

impl Default for DepthSpec {
    fn default() -> Self {
        Self::projection()
    }
}

#[derive(Debug, Clone)]
enum Kind {
    /// `1 / (1 + (x − μ)ᵀ Σ⁻¹ (x − μ))`.
    Mahalanobis { mean: Vec<f64>, inv_cov: SquareMatrix },
    HalfspaceLine { sorted: Vec<f64> },
    HalfspacePlane { points: Vec<[f64; 2]> },
    HalfspaceSampled(halfspace::DirectionCounts),
    Outlyingness(projection::DirectionSet),
    /// (mean, sd) projection depth, whose supremum is the Mahalanobis norm.
    MeanSdClosedForm { mean: Vec<f64>, inv_cov: SquareMatrix },
    Cdf { sorted: Vec<f64> },
}

/// A depth function fitted to a reference sample.
#[derive(Debug, Clone)]
pub struct DepthModel {
    spec: DepthSpec,
    dim: usize,
    m: usize,
    kind: Kind,
}

impl DepthModel {
    pub fn fit(spec: DepthSpec, reference: &Sample) -> Result<Self> {
        let dim = reference.dim();
        let m = reference.len();
        if m == 0 {
            return Err(Error::InsufficientData("reference sample is empty".into()));
        }
        spec.validate(dim)?;
        let kind = match spec.method {
            DepthMethod::Mahalanobis => {
                let (mean, inv_cov) = location_scatter(reference)?;
                Kind::Mahalanobis { mean, inv_cov }
            }
            DepthMethod::Cdf1d => Kind::Cdf { sorted: sorted_values(reference) },
            DepthMethod::Halfspace => match (dim, spec.mode) {
                (1, _) => Kind::HalfspaceLine { sorted: sorted_values(reference) },
                (2, DepthMode::Exact) => Kind::HalfspacePlane {
                    points: reference.rows().map(|r| [r[0], r[1]]).collect(),
                },
                _ => Kind::HalfspaceSampled(halfspace::DirectionCounts::new(
                    reference,
                    spec.directions(dim),
                )),
            },
            DepthMethod::Projection => match (spec.location_scale, dim, spec.mode) {
                (pair, 1, _) => {
                    Kind::Outlyingness(projection::DirectionSet::build(reference, [vec![1.0]], pair)?)
                }
                (LocationScale::MeanSd, _, DepthMode::Exact) => {
                    let (mean, inv_cov) = location_scatter(reference).map_err(|e| match e {
                        Error::DegenerateSample(_) => smallest_scale_direction(reference),
                        other => other,
                    })?;
                    Kind::MeanSdClosedForm { mean, inv_cov }
                }
                (LocationScale::MedianMad, 2, DepthMode::Exact) => {
                    Kind::Outlyingness(projection::exact_planar(reference)?)
                }
                (pair, _, _) => Kind::Outlyingness(projection::DirectionSet::build(
                    reference,
                    spec.directions(dim),
                    pair,
                )?),
            },
        };
        Ok(Self { spec, dim, m, kind })
    }

    pub fn spec(&self) -> &DepthSpec {
        &self.spec
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    /// Size of the reference sample.
    pub fn reference_len(&self) -> usize {
        self.m
    }

    /// Number of directions the model maximizes or minimizes over, when any.
    pub fn direction_count(&self) -> Option<usize> {
        match &self.kind {
            Kind::Outlyingness(set) => Some(set.len()),
            _ => None,
        }
    }

    /// `D(x; F_m)`.
    pub fn depth(&self, x: &[f64]) -> Result<f64> {
        if x.len() != self.dim {
            return Err(Error::DimensionMismatch { expected: self.dim, found: x.len() });
        }
        let m = self.m as f64;
        Ok(match &self.kind {
            Kind::Mahalanobis { mean, inv_cov } => 1.0 / (1.0 + mahalanobis_sq(x, mean, inv_cov)),
            Kind::MeanSdClosedForm { mean, inv_cov } => {
                1.0 / (1.0 + mahalanobis_sq(x, mean, inv_cov).sqrt())
            }
            Kind::HalfspaceLine { sorted } => halfspace::count_line(sorted, x[0]) as f64 / m,
            Kind::HalfspacePlane { points } => {
                halfspace::count_plane(points, [x[0], x[1]]) as f64 / m
            }
            Kind::HalfspaceSampled(counts) => counts.count(x) as f64 / m,
            Kind::Outlyingness(set) => 1.0 / (1.0 + set.outlyingness(x)),
            Kind::Cdf { sorted } => sorted.partition_point(|v| *v <= x[0]) as f64 / m,
        })
    }

    /// Projection outlyingness `O(x; F_m)`; `None` for other depths.
    pub fn outlyingness(&self, x: &[f64]) -> Option<f64> {
        match &self.kind {
            Kind::Outlyingness(set) if x.len() == self.dim => Some(set.outlyingness(x)),
            Kind::MeanSdClosedForm { mean, inv_cov } if x.len() == self.dim => {
                Some(mahalanobis_sq(x, mean, inv_cov).sqrt())
            }
            _ => None,
        }
    }

    /// Depths of every row of `points`, in row order.
    pub fn depths(&self, points: &Sample) -> Result<Vec<f64>> {
        if points.dim() != self.dim {
            return Err(Error::DimensionMismatch { expected: self.dim, found: points.dim() });
        }
        (0..points.len()).into_par_iter().map(|i| self.depth(points.row(i))).collect()
    }
}

fn sorted_values(s: &Sample) -> Vec<f64> {
    let mut v = s.as_slice().to_vec();
    v.sort_by(f64::total_cmp);
    v
}

fn location_scatter(reference: &Sample) -> Result<(Vec<f64>, SquareMatrix)> {
    let dim = reference.dim();
    if reference.len() < dim + 1 {
        return Err(Error::DegenerateSample(format!(
            "{} points cannot give a nonsingular covariance in dimension {dim}",
            reference.len()
        )));
    }
    let (mean, cov) = sample_mean_cov(reference)?;
    let inv = cov
        .invert()
        .map_err(|_| Error::DegenerateSample("sample covariance is singular".into()))?;
    Ok((mean.iter().copied().collect(), inv))
}

fn smallest_scale_direction(reference: &Sample) -> Error {
    let direction = sample_mean_cov(reference)
        .map(|(_, cov)| {
            let eig = SymmetricEigen::new(cov.into_matrix());
            let k = eig.eigenvalues.imin();
            eig.eigenvectors.column(k).iter().copied().collect()
        })
        .unwrap_or_else(|_| vec![1.0; reference.dim()]);
    Error::DegenerateScale { direction }
}

fn mahalanobis_sq(x: &[f64], mean: &[f64], inv_cov: &SquareMatrix) -> f64 {
    let diff: Vec<f64> = x.iter().zip(mean).map(|(a, b)| a - b).collect();
    inv_cov.quadratic_form(&diff).max(0.0)
}

/// Mahalanobis depth of `x` with respect to the sample mean and covariance of `reference`.
pub fn mahalanobis_depth(x: &[f64], reference: &Sample) -> Result<f64> {
    DepthSpec::mahalanobis().fit(reference)?.depth(x)
}

/// Halfspace depth; `spec` selects exact or sampled evaluation.
pub fn halfspace_depth(x: &[f64], reference: &Sample, spec: &DepthSpec) -> Result<f64> {
    DepthSpec { method: DepthMethod::Halfspace, ..*spec }.fit(reference)?.depth(x)
}

/// Projection depth `1 / (1 + O(x; F_m))`.
pub fn projection_depth(x: &[f64], reference: &Sample, spec: &DepthSpec) -> Result<f64> {
    DepthSpec { method: DepthMethod::Projection, ..*spec }.fit(reference)?.depth(x)
}

/// Empirical cdf of a one-dimensional reference at `x`.
pub fn cdf_depth_1d(x: f64, reference: &Sample) -> Result<f64> {
    DepthSpec::cdf1d().fit(reference)?.depth(&[x])
}

/// `R(y; F_m)`: the fraction of reference points whose depth does not exceed
/// the depth of the query, all depths taken with respect to the reference.
#[derive(Debug, Clone)]
pub struct RankTransform {
    model: DepthModel,
    sorted_depths: Vec<f64>,
}

impl RankTransform {
    pub fn fit(spec: &DepthSpec, reference: &Sample) -> Result<Self> {
        let model = spec.fit(reference)?;
        let mut sorted_depths = model.depths(reference)?;
        sorted_depths.sort_by(f64::total_cmp);
        Ok(Self { model, sorted_depths })
    }

    pub fn model(&self) -> &DepthModel {
        &self.model
    }

    /// Depths of the reference rows, ascending.
    pub fn reference_depths(&self) -> &[f64] {
        &self.sorted_depths
    }

    /// `#{i : D(X_i) ≤ depth}`.
    pub fn count_at_most(&self, depth: f64) -> usize {
        self.sorted_depths.partition_point(|d| *d <= depth)
    }

    pub fn rank(&self, y: &[f64]) -> Result<f64> {
        let d = self.model.depth(y)?;
        Ok(self.count_at_most(d) as f64 / self.sorted_depths.len() as f64)
    }
}

/// `R(y; F_m)` for a single query point.
pub fn rank_transform(y: &[f64], reference: &Sample, spec: &DepthSpec) -> Result<f64> {
    RankTransform::fit(spec, reference)?.rank(y)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn line(v: &[f64]) -> Sample {
        Sample::from_values(v).unwrap()
    }

    #[test]
    fn mahalanobis_reference_points() {
        // mean 0 and covariance exactly I: (±1, 0), (0, ±1) scaled so s² = 1
        let a = (1.5_f64).sqrt();
        let s = Sample::from_rows(&[[a, 0.0], [-a, 0.0], [0.0, a], [0.0, -a]]).unwrap();
        assert_eq!(mahalanobis_depth(&[0.0, 0.0], &s).unwrap(), 1.0);
        assert!((mahalanobis_depth(&[1.0, 0.0], &s).unwrap() - 0.5).abs() < 1e-12);
        let flat = Sample::from_rows(&[[0.0, 0.0], [1.0, 1.0], [2.0, 2.0]]).unwrap();
        assert!(matches!(mahalanobis_depth(&[0.0, 0.0], &flat), Err(Error::DegenerateSample(_))));
    }

    #[test]
    fn halfspace_line_and_plane() {
        let s = line(&[1.0, 2.0, 3.0, 4.0, 5.0]);
        let spec = DepthSpec::halfspace();
        assert_eq!(halfspace_depth(&[0.0], &s, &spec).unwrap(), 0.0);
        assert_eq!(halfspace_depth(&[3.0], &s, &spec).unwrap(), 0.6);
        let tri = Sample::from_rows(&[[0.0, 0.0], [1.0, 0.0], [0.0, 1.0]]).unwrap();
        assert!((halfspace_depth(&[0.25, 0.25], &tri, &spec).unwrap() - 1.0 / 3.0).abs() < 1e-15);
        let approx = spec.approximate(500);
        assert!(halfspace_depth(&[0.25, 0.25], &tri, &approx).unwrap() >= 1.0 / 3.0);
    }

    #[test]
    fn projection_line() {
        let s = line(&[1.0, 2.0, 3.0, 4.0, 5.0]);
        let spec = DepthSpec::projection();
        assert_eq!(projection_depth(&[3.0], &s, &spec).unwrap(), 1.0);
        assert!((projection_depth(&[5.0], &s, &spec).unwrap() - 1.0 / 3.0).abs() < 1e-15);
        let msd = spec.with_location_scale(LocationScale::MeanSd);
        let sd = (2.5_f64).sqrt();
        assert!((projection_depth(&[5.0], &s, &msd).unwrap() - 1.0 / (1.0 + 2.0 / sd)).abs() < 1e-15);
        let constant = line(&[2.0, 2.0, 2.0]);
        assert!(matches!(
            projection_depth(&[1.0], &constant, &spec),
            Err(Error::DegenerateScale { .. })
        ));
    }

    #[test]
    fn cdf_depth() {
        let s = line(&[1.0, 2.0, 3.0]);
        assert_eq!(cdf_depth_1d(0.0, &s).unwrap(), 0.0);
        assert_eq!(cdf_depth_1d(3.0, &s).unwrap(), 1.0);
        assert!((cdf_depth_1d(2.0, &s).unwrap() - 2.0 / 3.0).abs() < 1e-15);
        let plane = Sample::from_rows(&[[0.0, 0.0]]).unwrap();
        assert!(matches!(DepthSpec::cdf1d().fit(&plane), Err(Error::Unsupported(_))));
    }

    #[test]
    fn exact_unsupported_in_three_dimensions() {
        let s = Sample::from_rows(&[[0.0, 0.0, 1.0], [1.0, 0.0, 0.0], [0.0, 1.0, 0.0], [1.0, 1.0, 1.0]])
            .unwrap();
        assert!(matches!(DepthSpec::halfspace().fit(&s), Err(Error::Unsupported(_))));
        assert!(matches!(DepthSpec::projection().fit(&s), Err(Error::Unsupported(_))));
        assert!(DepthSpec::halfspace().approximate(100).fit(&s).is_ok());
    }

    #[test]
    fn rank_extremes() {
        let s = line(&[1.0, 2.0, 3.0, 4.0, 5.0]);
        for spec in [DepthSpec::halfspace(), DepthSpec::projection(), DepthSpec::mahalanobis()] {
            assert_eq!(rank_transform(&[3.0], &s, &spec).unwrap(), 1.0);
            assert_eq!(rank_transform(&[100.0], &s, &spec).unwrap(), 0.0);
        }
    }

    #[test]
    fn rank_of_reference_rows_averages_to_midrank() {
        let s = line(&[0.3, 1.7, -0.4, 2.9, 5.1, -2.2, 0.9]);
        let rt = RankTransform::fit(&DepthSpec::mahalanobis(), &s).unwrap();
        let m = s.len() as f64;
        let mean: f64 = s.rows().map(|r| rt.rank(r).unwrap()).sum::<f64>() / m;
        assert!((mean - (m + 1.0) / (2.0 * m)).abs() < 1e-15);
    }

    #[test]
    fn dimension_mismatch() {
        let s = line(&[1.0, 2.0, 3.0]);
        let model = DepthSpec::halfspace().fit(&s).unwrap();
        assert!(matches!(model.depth(&[1.0, 2.0]), Err(Error::DimensionMismatch { .. })));
    }
}
