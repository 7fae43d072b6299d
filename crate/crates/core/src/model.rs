//! Gaussian mixture models, the alternative families used in power studies,
//! and reproducible random streams.

use std::fmt;
use std::str::FromStr;

use rand::{Rng, RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::numerics::{Sample, SquareMatrix, Vector};

/// Contamination fraction of the mixed alternatives.
pub const CONTAMINATION: f64 = 0.1;

/// Scale constant `σ` in the contaminated-location family, whose contaminant
/// variance is `1 + 10·u·σ²`.
pub const CONTAMINATED_LOCATION_SIGMA: f64 = 4.0;

/// A seeded random stream.
///
/// ChaCha8 keyed by `seed` with the 64-bit stream selector set to `stream`:
/// distinct stream ids never overlap and the sequence is identical on every
/// platform.
#[derive(Debug, Clone)]
pub struct RngStream {
    seed: u64,
    stream: u64,
    rng: ChaCha8Rng,
}

impl RngStream {
    pub fn new(seed: u64, stream: u64) -> Self {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        rng.set_stream(stream);
        Self { seed, stream, rng }
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn stream(&self) -> u64 {
        self.stream
    }

    pub fn standard_normal(&mut self) -> f64 {
        self.rng.sample(StandardNormal)
    }

    /// Uniform draw on `[0, 1)`.
    pub fn uniform(&mut self) -> f64 {
        self.rng.random::<f64>()
    }

    /// A point uniform on the unit sphere in `dim` dimensions.
    pub fn unit_vector(&mut self, dim: usize) -> Vec<f64> {
        loop {
            let v: Vec<f64> = (0..dim).map(|_| self.standard_normal()).collect();
            let norm = v.iter().map(|x| x * x).sum::<f64>().sqrt();
            if norm > 1e-12 {
                return v.into_iter().map(|x| x / norm).collect();
            }
        }
    }
}

impl RngCore for RngStream {
    fn next_u32(&mut self) -> u32 {
        self.rng.next_u32()
    }

    fn next_u64(&mut self) -> u64 {
        self.rng.next_u64()
    }

    fn fill_bytes(&mut self, dst: &mut [u8]) {
        self.rng.fill_bytes(dst)
    }
}

/// One weighted normal component.
#[derive(Debug, Clone, PartialEq)]
pub struct GaussianComponent {
    weight: f64,
    mean: Vector,
    cov: SquareMatrix,
    chol: SquareMatrix,
}

impl GaussianComponent {
    pub fn new(weight: f64, mean: Vec<f64>, cov: SquareMatrix) -> Result<Self> {
        if !(weight > 0.0 && weight <= 1.0) {
            return Err(Error::Domain(format!("component weight must lie in (0, 1], got {weight}")));
        }
        if mean.len() != cov.dim() {
            return Err(Error::DimensionMismatch { expected: cov.dim(), found: mean.len() });
        }
        if mean.iter().any(|v| !v.is_finite()) {
            return Err(Error::Domain("component mean must be finite".into()));
        }
        let chol = cov.cholesky()?;
        Ok(Self { weight, mean: Vector::from_vec(mean), cov, chol })
    }

    /// `N(mean, s2·I)` with the given weight.
    pub fn isotropic(weight: f64, mean: Vec<f64>, s2: f64) -> Result<Self> {
        let d = mean.len();
        Self::new(weight, mean, SquareMatrix::scaled_identity(d, s2))
    }

    pub fn weight(&self) -> f64 {
        self.weight
    }

    pub fn mean(&self) -> &Vector {
        &self.mean
    }

    pub fn cov(&self) -> &SquareMatrix {
        &self.cov
    }

    pub fn dim(&self) -> usize {
        self.mean.len()
    }

    /// Returns `s2` when the covariance is exactly `s2·I`.
    pub fn isotropic_variance(&self) -> Option<f64> {
        let d = self.dim();
        let s2 = self.cov.get(0, 0);
        let ok = (0..d).all(|i| {
            (0..d).all(|j| self.cov.get(i, j) == if i == j { s2 } else { 0.0 })
        });
        ok.then_some(s2)
    }

    fn draw_into(&self, rng: &mut RngStream, out: &mut Vec<f64>) {
        let d = self.dim();
        let z: Vec<f64> = (0..d).map(|_| rng.standard_normal()).collect();
        let l = self.chol.as_matrix();
        for i in 0..d {
            let mut v = self.mean[i];
            for (j, zj) in z.iter().enumerate().take(i + 1) {
                v += l[(i, j)] * zj;
            }
            out.push(v);
        }
    }
}

/// A finite mixture of normals sharing one dimension.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(into = "MixtureDoc", try_from = "MixtureDoc")]
pub struct GaussianMixture {
    dim: usize,
    components: Vec<GaussianComponent>,
}

impl GaussianMixture {
    pub fn new(components: Vec<GaussianComponent>) -> Result<Self> {
        let first = components
            .first()
            .ok_or_else(|| Error::Domain("a mixture needs at least one component".into()))?;
        let dim = first.dim();
        if let Some(c) = components.iter().find(|c| c.dim() != dim) {
            return Err(Error::DimensionMismatch { expected: dim, found: c.dim() });
        }
        let total: f64 = components.iter().map(|c| c.weight).sum();
        if (total - 1.0).abs() > 1e-12 {
            return Err(Error::Domain(format!("mixture weights sum to {total}, not 1")));
        }
        Ok(Self { dim, components })
    }

    /// A single normal `N(mean, cov)`.
    pub fn normal(mean: Vec<f64>, cov: SquareMatrix) -> Result<Self> {
        Self::new(vec![GaussianComponent::new(1.0, mean, cov)?])
    }

    /// The standard normal `N(0, I_d)`.
    pub fn standard(dim: usize) -> Self {
        Self::normal(vec![0.0; dim], SquareMatrix::identity(dim))
            .expect("identity covariance is positive definite")
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn components(&self) -> &[GaussianComponent] {
        &self.components
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(&MixtureDoc::from(self)).expect("mixture serializes")
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let doc: MixtureDoc = serde_json::from_str(text)
            .map_err(|e| Error::Domain(format!("invalid mixture document: {e}")))?;
        doc.try_into()
    }
}

/// Draws `n` observations from `mix`.
///
/// Each row picks a component by weight, then returns `mean + L z` with `L`
/// the component's Cholesky factor.
pub fn sample(mix: &GaussianMixture, n: usize, rng: &mut RngStream) -> Result<Sample> {
    if n == 0 {
        return Err(Error::Domain("sample size must be positive".into()));
    }
    let mut data = Vec::with_capacity(n * mix.dim);
    let last = mix.components.len() - 1;
    for _ in 0..n {
        let comp = if last == 0 {
            &mix.components[0]
        } else {
            let u = rng.uniform();
            let mut acc = 0.0;
            let mut pick = last;
            for (k, c) in mix.components.iter().enumerate() {
                acc += c.weight;
                if u < acc {
                    pick = k;
                    break;
                }
            }
            &mix.components[pick]
        };
        comp.draw_into(rng, &mut data);
    }
    Sample::from_row_major(mix.dim, data)
}

/// Bivariate alternative families, all shrinking to `F = N₂(0, I₂)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Family {
    /// `0.9 N₂((u,u)', I₂) + 0.1 N₂(0, (1 + 10uσ²) I₂)`, `σ = 4`; parameter `u`.
    ContaminatedLocation,
    /// `0.9 N₂(0, σ² I₂) + 0.1 N₂((u,u)', I₂)`, `u = σ − 1`; parameter `σ²`.
    ContaminatedScale,
    /// `N₂((u,u)', σ² I₂)`, `σ = u + 1`; parameter `u`.
    LocationScale,
    /// `N₂((u,u)', I₂)`; parameter `u`.
    PureLocation,
    /// `N₂(0, σ² I₂)`; parameter `σ²`.
    PureScale,
}

impl Family {
    pub const ALL: [Family; 5] = [
        Family::ContaminatedLocation,
        Family::ContaminatedScale,
        Family::LocationScale,
        Family::PureLocation,
        Family::PureScale,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Family::ContaminatedLocation => "contaminated-location",
            Family::ContaminatedScale => "contaminated-scale",
            Family::LocationScale => "location-scale",
            Family::PureLocation => "pure-location",
            Family::PureScale => "pure-scale",
        }
    }

    /// Parameter value at which the alternative coincides with `F`.
    pub fn null_param(self) -> f64 {
        match self {
            Family::ContaminatedScale | Family::PureScale => 1.0,
            _ => 0.0,
        }
    }

    /// Name of the parameter the family is indexed by.
    pub fn param_name(self) -> &'static str {
        match self {
            Family::ContaminatedScale | Family::PureScale => "sigma2",
            _ => "u",
        }
    }

    fn check_param(self, p: f64) -> Result<()> {
        let ok = match self {
            Family::ContaminatedLocation | Family::LocationScale => p >= 0.0,
            Family::ContaminatedScale => p >= 1.0,
            Family::PureLocation => true,
            Family::PureScale => p > 0.0,
        };
        if ok && p.is_finite() {
            Ok(())
        } else {
            Err(Error::Domain(format!("parameter {p} is outside the range of {}", self.name())))
        }
    }
}

impl fmt::Display for Family {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Family {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Family::ALL
            .into_iter()
            .find(|f| f.name() == s)
            .ok_or_else(|| {
                let names: Vec<_> = Family::ALL.iter().map(|f| f.name()).collect();
                Error::Domain(format!("unknown family '{s}' (expected one of {})", names.join(", ")))
            })
    }
}

/// The bivariate mixture `G` of `family` at parameter `param`.
pub fn alternative_families(family: Family, param: f64) -> Result<GaussianMixture> {
    family.check_param(param)?;
    let eps = CONTAMINATION;
    let comps = match family {
        Family::ContaminatedLocation => {
            let u = param;
            let s2 = CONTAMINATED_LOCATION_SIGMA * CONTAMINATED_LOCATION_SIGMA;
            vec![
                GaussianComponent::isotropic(1.0 - eps, vec![u, u], 1.0)?,
                GaussianComponent::isotropic(eps, vec![0.0, 0.0], 1.0 + 10.0 * u * s2)?,
            ]
        }
        Family::ContaminatedScale => {
            let s2 = param;
            let u = s2.sqrt() - 1.0;
            vec![
                GaussianComponent::isotropic(1.0 - eps, vec![0.0, 0.0], s2)?,
                GaussianComponent::isotropic(eps, vec![u, u], 1.0)?,
            ]
        }
        Family::LocationScale => {
            let u = param;
            let s = u + 1.0;
            vec![GaussianComponent::isotropic(1.0, vec![u, u], s * s)?]
        }
        Family::PureLocation => vec![GaussianComponent::isotropic(1.0, vec![param, param], 1.0)?],
        Family::PureScale => vec![GaussianComponent::isotropic(1.0, vec![0.0, 0.0], param)?],
    };
    GaussianMixture::new(comps)
}

#[derive(Debug, Clone, Serialize, Deserialize)]
struct ComponentDoc {
    weight: f64,
    mean: Vec<f64>,
    cov: Vec<f64>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
struct MixtureDoc {
    dim: usize,
    components: Vec<ComponentDoc>,
}

impl From<GaussianMixture> for MixtureDoc {
    fn from(m: GaussianMixture) -> Self {
        MixtureDoc::from(&m)
    }
}

impl From<&GaussianMixture> for MixtureDoc {
    fn from(m: &GaussianMixture) -> Self {
        MixtureDoc {
            dim: m.dim,
            components: m
                .components
                .iter()
                .map(|c| ComponentDoc {
                    weight: c.weight,
                    mean: c.mean.iter().copied().collect(),
                    cov: c.cov.to_row_major(),
                })
                .collect(),
        }
    }
}

impl TryFrom<MixtureDoc> for GaussianMixture {
    type Error = Error;

    fn try_from(doc: MixtureDoc) -> Result<Self> {
        let comps = doc
            .components
            .into_iter()
            .map(|c| {
                if c.mean.len() != doc.dim {
                    return Err(Error::DimensionMismatch { expected: doc.dim, found: c.mean.len() });
                }
                let cov = SquareMatrix::from_row_major(doc.dim, &c.cov)?;
                GaussianComponent::new(c.weight, c.mean, cov)
            })
            .collect::<Result<Vec<_>>>()?;
        GaussianMixture::new(comps)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn degenerate_concentration() {
        let mix = GaussianMixture::normal(vec![3.0, 3.0], SquareMatrix::scaled_identity(2, 1e-12))
            .unwrap();
        let s = sample(&mix, 50, &mut RngStream::new(1, 0)).unwrap();
        assert!(s.as_slice().iter().all(|v| (v - 3.0).abs() < 1e-4));
    }

    #[test]
    fn clt_mean() {
        let n = 100_000;
        let s = sample(&GaussianMixture::standard(2), n, &mut RngStream::new(7, 3)).unwrap();
        for j in 0..2 {
            let m: f64 = s.rows().map(|r| r[j]).sum::<f64>() / n as f64;
            assert!(m.abs() < 4.0 / (n as f64).sqrt());
        }
    }

    #[test]
    fn component_frequencies() {
        // far-apart components make the label recoverable from the draw
        let mix = GaussianMixture::new(vec![
            GaussianComponent::isotropic(0.9, vec![0.0], 1e-6).unwrap(),
            GaussianComponent::isotropic(0.1, vec![100.0], 1e-6).unwrap(),
        ])
        .unwrap();
        let n = 100_000;
        let s = sample(&mix, n, &mut RngStream::new(11, 0)).unwrap();
        let first = s.rows().filter(|r| r[0] < 50.0).count() as f64 / n as f64;
        assert!((first - 0.9).abs() < 0.004);
    }

    #[test]
    fn determinism_and_streams() {
        let mix = alternative_families(Family::ContaminatedScale, 1.6).unwrap();
        let a = sample(&mix, 100, &mut RngStream::new(5, 9)).unwrap();
        let b = sample(&mix, 100, &mut RngStream::new(5, 9)).unwrap();
        assert_eq!(a, b);
        let c = sample(&mix, 100, &mut RngStream::new(5, 10)).unwrap();
        assert_ne!(a, c);
        // no shared 64-bit words among the first draws of neighbouring streams
        let mut seen = std::collections::HashSet::new();
        for stream in 0..64 {
            let mut r = RngStream::new(5, stream);
            for _ in 0..256 {
                assert!(seen.insert(r.next_u64()));
            }
        }
    }

    #[test]
    fn family_members() {
        let f = GaussianMixture::standard(2);
        let g = alternative_families(Family::ContaminatedLocation, 0.0).unwrap();
        assert!(g.components().iter().all(|c| c.mean().iter().all(|v| *v == 0.0)
            && c.isotropic_variance() == Some(1.0)));
        let g = alternative_families(Family::ContaminatedScale, 1.0).unwrap();
        assert!(g.components().iter().all(|c| c.mean().iter().all(|v| *v == 0.0)
            && c.isotropic_variance() == Some(1.0)));
        let g = alternative_families(Family::LocationScale, 0.35).unwrap();
        assert_eq!(g.components().len(), 1);
        assert_eq!(g.components()[0].mean().as_slice(), &[0.35, 0.35]);
        assert!((g.components()[0].isotropic_variance().unwrap() - 1.35 * 1.35).abs() < 1e-15);
        let g = alternative_families(Family::ContaminatedLocation, 0.25).unwrap();
        assert_eq!(g.components()[1].isotropic_variance(), Some(1.0 + 10.0 * 0.25 * 16.0));
        assert_eq!(f.dim(), 2);
        assert!(alternative_families(Family::ContaminatedScale, 0.5).is_err());
        assert!("no-such-family".parse::<Family>().is_err());
        assert_eq!("location-scale".parse::<Family>().unwrap(), Family::LocationScale);
    }

    #[test]
    fn construction_errors() {
        assert!(GaussianComponent::isotropic(0.0, vec![0.0], 1.0).is_err());
        assert!(GaussianComponent::isotropic(0.5, vec![0.0], -1.0).is_err());
        let a = GaussianComponent::isotropic(0.5, vec![0.0], 1.0).unwrap();
        assert!(GaussianMixture::new(vec![a.clone()]).is_err());
        let b = GaussianComponent::isotropic(0.5, vec![0.0, 0.0], 1.0).unwrap();
        assert!(GaussianMixture::new(vec![a, b]).is_err());
    }

    #[test]
    fn json_round_trip() {
        let g = alternative_families(Family::ContaminatedScale, 1.8).unwrap();
        let back = GaussianMixture::from_json(&g.to_json()).unwrap();
        assert_eq!(g, back);
        let doc = r#"{"dim": 2, "components": [{"weight": 1.0, "mean": [1, 2], "cov": [2, 0.5, 0.5, 1]}]}"#;
        let m = GaussianMixture::from_json(doc).unwrap();
        assert_eq!(m.components()[0].cov().get(0, 1), 0.5);
        assert!(GaussianMixture::from_json(r#"{"dim": 2, "components": []}"#).is_err());
    }
}
