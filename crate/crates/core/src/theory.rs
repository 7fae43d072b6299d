//! Analytic quality index, asymptotic variances and power for bivariate
//! normal alternatives against `F = N₂(0, I₂)`.
//!
//! For any affine-invariant depth the depth ordering under `F` is the
//! ordering of `‖x‖`, so `R(y; F) = P(‖X‖ ≥ ‖y‖) = exp(−‖y‖²/2)`. Every
//! quantity below is an expectation of that function or of the `‖Y‖` law.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::{
    alternative_families, Family, GaussianComponent, GaussianMixture, CONTAMINATED_LOCATION_SIGMA,
    CONTAMINATION,
};
use crate::numerics::quad::integrate;
use crate::numerics::{
    chisq_quantile, noncentral_chisq_cdf, noncentral_chisq_sf, std_normal_cdf,
    std_normal_quantile, SquareMatrix,
};
use crate::powerlab::{PowerCell, PowerGrid, Source};

/// Upper limit of the radial integral; the `‖X‖` density is below `e^{-72}` beyond it.
const RADIUS_MAX: f64 = 12.0;
const QUAD_TOL: f64 = 1e-8;

/// One analytic power evaluation.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PowerQuery {
    pub family: Family,
    pub param: f64,
    pub m: usize,
    pub n: usize,
    pub alpha: f64,
}

impl PowerQuery {
    /// Equal sample sizes `m = n` at level 0.05.
    pub fn new(family: Family, param: f64, n: usize) -> Self {
        Self { family, param, m: n, n, alpha: 0.05 }
    }

    fn validate(&self) -> Result<()> {
        if self.m == 0 || self.n == 0 {
            return Err(Error::Domain("sample sizes must be positive".into()));
        }
        if !(self.alpha > 0.0 && self.alpha < 1.0) {
            return Err(Error::Domain(format!("alpha must lie in (0, 1), got {}", self.alpha)));
        }
        Ok(())
    }

    pub fn alternative(&self) -> Result<GaussianMixture> {
        alternative_families(self.family, self.param)
    }
}

fn require_planar(dim: usize) -> Result<()> {
    if dim == 2 {
        Ok(())
    } else {
        Err(Error::Domain(format!("the closed forms hold for bivariate alternatives only, got dimension {dim}")))
    }
}

fn mean_vec(c: &GaussianComponent) -> Vec<f64> {
    c.mean().iter().copied().collect()
}

/// `Q(F, G)` for `G = N₂(μ, Σ)`:
/// `(|S|/|Σ|)^{1/2} exp(−μᵀ(Σ⁻¹ − Σ⁻¹SΣ⁻¹)μ/2)` with `S = (I + Σ⁻¹)⁻¹`.
pub fn closed_form_q(mu: &[f64], sigma: &SquareMatrix) -> Result<f64> {
    require_planar(mu.len())?;
    if sigma.dim() != 2 {
        return Err(Error::DimensionMismatch { expected: 2, found: sigma.dim() });
    }
    sigma.cholesky().map_err(|_| Error::Domain("Σ must be symmetric positive definite".into()))?;
    let sigma_inv = sigma.invert()?;
    let s = SquareMatrix::new(SquareMatrix::identity(2).as_matrix() + sigma_inv.as_matrix())?.invert()?;
    let inner = sigma_inv.as_matrix() - sigma_inv.as_matrix() * s.as_matrix() * sigma_inv.as_matrix();
    let quad = SquareMatrix::new(inner)?.quadratic_form(mu);
    Ok((s.determinant() / sigma.determinant()).sqrt() * (-quad / 2.0).exp())
}

/// `Q(u, σ²) = exp(−u²/(1 + σ²)) / (1 + σ²)` for `G = N₂((u,u)', σ² I₂)`.
pub fn q_location_scale(u: f64, sigma2: f64) -> f64 {
    (-u * u / (1.0 + sigma2)).exp() / (1.0 + sigma2)
}

/// `Q(F, G)`, linear in the mixture weights.
pub fn mixture_q(g: &GaussianMixture) -> Result<f64> {
    require_planar(g.dim())?;
    g.components()
        .iter()
        .map(|c| Ok(c.weight() * closed_form_q(&mean_vec(c), c.cov())?))
        .sum()
}

/// `E exp(−‖Y‖²)` for `Y ~ N(μ, Σ)`: `|I + 2Σ|^{-1/2} exp(−μᵀ(I + 2Σ)⁻¹μ)`.
fn mean_squared_rank(c: &GaussianComponent) -> Result<f64> {
    let d = c.dim();
    let a = SquareMatrix::new(SquareMatrix::identity(d).as_matrix() + c.cov().as_matrix() * 2.0)?;
    let mu = mean_vec(c);
    Ok(a.determinant().powf(-0.5) * (-a.invert()?.quadratic_form(&mu)).exp())
}

/// `P(‖Y‖ ≤ r)` under `g`, one noncentral `χ²₂` term per isotropic component.
fn radius_cdf(g: &GaussianMixture, r: f64) -> Result<f64> {
    let mut p = 0.0;
    for c in g.components() {
        let s2 = c.isotropic_variance().ok_or_else(|| {
            Error::Unsupported("σ²_GF quadrature needs isotropic mixture components".into())
        })?;
        let ncp = c.mean().norm_squared() / s2;
        p += c.weight() * noncentral_chisq_cdf(r * r / s2, 2, ncp)?;
    }
    Ok(p.min(1.0))
}

/// Asymptotic `(σ²_GF, σ²_FG)`.
///
/// `σ²_FG = E_G exp(−‖Y‖²) − Q²` in closed form and
/// `σ²_GF = ∫₀^∞ P_G(‖Y‖ ≤ r)² r e^{−r²/2} dr − Q²` by adaptive quadrature.
pub fn asymptotic_sigmas(g: &GaussianMixture) -> Result<(f64, f64)> {
    require_planar(g.dim())?;
    let q = mixture_q(g)?;
    let r2: f64 = g
        .components()
        .iter()
        .map(|c| Ok(c.weight() * mean_squared_rank(c)?))
        .sum::<Result<f64>>()?;
    let second = integrate(
        |r| {
            let p = radius_cdf(g, r)?;
            Ok(p * p * r * (-r * r / 2.0).exp())
        },
        0.0,
        RADIUS_MAX,
        QUAD_TOL,
    )?;
    Ok(((second - q * q).max(0.0), (r2 - q * q).max(0.0)))
}

/// Asymptotic power of the two-sided `Q` test:
/// `1 − Φ((1/2 − Q + c)/τ) + Φ((1/2 − Q − c)/τ)`, with
/// `c = z_{1−α/2} √((1/m + 1/n)/12)` and `τ² = σ²_GF/m + σ²_FG/n`.
pub fn beta_q(query: &PowerQuery) -> Result<f64> {
    query.validate()?;
    let g = query.alternative()?;
    let q = mixture_q(&g)?;
    let (gf, fg) = asymptotic_sigmas(&g)?;
    let (m, n) = (query.m as f64, query.n as f64);
    let c = std_normal_quantile(1.0 - query.alpha / 2.0)? * ((1.0 / m + 1.0 / n) / 12.0).sqrt();
    let tau = (gf / m + fg / n).sqrt();
    if tau == 0.0 {
        return Ok(if (q - 0.5).abs() > c { 1.0 } else { 0.0 });
    }
    Ok(1.0 - std_normal_cdf((0.5 - q + c) / tau) + std_normal_cdf((0.5 - q - c) / tau))
}

/// Noncentrality of `T²` with `m = n` in closed form for the three
/// contaminated and location-scale families.
pub fn displayed_ncp(family: Family, param: f64, n: usize) -> Option<f64> {
    let n = n as f64;
    let eps = CONTAMINATION;
    match family {
        Family::ContaminatedLocation => {
            let (u, s2) = (param, CONTAMINATED_LOCATION_SIGMA * CONTAMINATED_LOCATION_SIGMA);
            Some(n * (1.0 - eps).powi(2) * u * u / (1.0 + 5.0 * eps * u * s2 + eps * (1.0 - eps) * u * u))
        }
        Family::ContaminatedScale => {
            let s2 = param;
            let u = s2.sqrt() - 1.0;
            Some(2.0 * n * eps * eps * u * u / (1.0 + eps + (1.0 - eps) * s2 + 2.0 * eps * (1.0 - eps) * u * u))
        }
        Family::LocationScale => {
            let u = param;
            let s2 = (u + 1.0) * (u + 1.0);
            Some(2.0 * n * u * u / (1.0 + s2))
        }
        Family::PureLocation | Family::PureScale => None,
    }
}

/// Noncentrality `δᵀ[(1/m + 1/n) Σ_pool]⁻¹ δ` from the first two moments of
/// `G`, with `δ = E_G Y` and `Σ_pool = (m I + n Cov_G)/(m + n)`.
pub fn moment_ncp(g: &GaussianMixture, m: usize, n: usize) -> Result<f64> {
    let d = g.dim();
    let mut mean = vec![0.0; d];
    for c in g.components() {
        for (a, v) in mean.iter_mut().zip(c.mean().iter()) {
            *a += c.weight() * v;
        }
    }
    let mut cov = nalgebra::DMatrix::<f64>::zeros(d, d);
    for c in g.components() {
        let dm = c.mean() - nalgebra::DVector::from_column_slice(&mean);
        cov += (c.cov().as_matrix() + &dm * dm.transpose()) * c.weight();
    }
    let (mf, nf) = (m as f64, n as f64);
    let pooled = (nalgebra::DMatrix::identity(d, d) * mf + cov * nf) / (mf + nf);
    let scaled = SquareMatrix::new(pooled * (1.0 / mf + 1.0 / nf))?;
    Ok(scaled.invert()?.quadratic_form(&mean))
}

/// Asymptotic power of the level-`α` `T²` test, `P(χ²₂(λ) > χ²_{1−α}(2))`.
///
/// With `m = n` the family's closed-form noncentrality is used; unequal sizes
/// use the moment form, which reduces to it when `m = n`. Pure scale change
/// has `λ = 0` and power `α`.
pub fn beta_t2(query: &PowerQuery) -> Result<f64> {
    query.validate()?;
    let g = query.alternative()?;
    require_planar(g.dim())?;
    let ncp = match displayed_ncp(query.family, query.param, query.n) {
        Some(v) if query.m == query.n => v,
        _ => moment_ncp(&g, query.m, query.n)?,
    };
    let crit = chisq_quantile(1.0 - query.alpha, 2)?;
    noncentral_chisq_sf(crit, 2, ncp)
}

/// Figures available from [`figure_grids`].
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Figure {
    /// `Q(u, σ²)` surface.
    Fig1,
    /// Power against pure scale change.
    Fig2,
}

/// Sample size used for the pure-scale power curves.
pub const FIG2_SAMPLE_SIZE: usize = 100;

/// `u` and `σ²` axes of the `Q(u, σ²)` surface.
pub fn fig1_axes() -> (Vec<f64>, Vec<f64>) {
    let us = (0..=20).map(|k| k as f64 * 0.1).collect();
    let s2 = (0..=20).map(|k| 1.0 + k as f64 * 0.1).collect();
    (us, s2)
}

/// `σ²` axis of the pure-scale power curves.
pub fn fig2_axis() -> Vec<f64> {
    (0..=20).map(|k| 1.0 + k as f64 * 0.1).collect()
}

/// Grids behind the two figures. The `β_O` cells of `Fig2` carry no value;
/// they are filled by Monte Carlo in the reproduction driver.
pub fn figure_grids(which: Figure) -> Result<PowerGrid> {
    match which {
        Figure::Fig1 => {
            let (us, s2s) = fig1_axes();
            let mut grid = PowerGrid::new("fig1", "u");
            for &s2 in &s2s {
                for &u in &us {
                    let cell = PowerCell::analytic(u, "Q", q_location_scale(u, s2))
                        .with_family(Family::LocationScale)
                        .with_secondary(s2);
                    grid.push(cell);
                }
            }
            Ok(grid)
        }
        Figure::Fig2 => {
            let n = FIG2_SAMPLE_SIZE;
            let mut grid = PowerGrid::new("fig2", "sigma2");
            for s2 in fig2_axis() {
                let q = PowerQuery::new(Family::PureScale, s2, n);
                let base = |c: PowerCell| c.with_family(Family::PureScale).with_sizes(n, n);
                grid.push(base(PowerCell::analytic(s2, "T2", beta_t2(&q)?)));
                grid.push(base(PowerCell::empty(s2, "O", Source::MonteCarlo)));
                grid.push(base(PowerCell::analytic(s2, "Q", beta_q(&q)?)));
            }
            Ok(grid)
        }
    }
}
