//! The depth-based rank-sum statistic `Q(F_m, G_n) = (1/n) Σ_j R(Y_j; F_m)`
//! and its asymptotic tests.
//!
//! Everything is computed from integer counts over sorted depths, so results
//! do not depend on summation order or thread count.

use serde::{Deserialize, Serialize};

use crate::depth::{DepthModel, DepthSpec};
use crate::error::{Error, Result};
use crate::numerics::{std_normal_quantile, std_normal_sf, Sample};
use crate::report::TestReport;

/// `Q̂` together with its null standardization and plug-in variances.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct QResult {
    pub q: f64,
    pub m: usize,
    pub n: usize,
    pub sigma2_gf_hat: f64,
    pub sigma2_fg_hat: f64,
    /// `(q − 1/2) / √((1/m + 1/n)/12)`.
    pub z_null: f64,
    /// Two-sided normal p-value of `z_null`.
    pub p_null: f64,
}

/// Pair counts behind `Q̂`: `reference_counts[j] = #{i : D(X_i) ≤ D(Y_j)}`
/// and `query_counts[i] = #{j : D(X_i) ≤ D(Y_j)}`, all depths relative to `X`.
#[derive(Debug, Clone)]
pub struct RankCounts {
    pub m: usize,
    pub n: usize,
    pub reference_counts: Vec<u64>,
    pub query_counts: Vec<u64>,
}

impl RankCounts {
    pub fn compute(x: &Sample, y: &Sample, spec: &DepthSpec) -> Result<Self> {
        check_samples(x, y)?;
        let model = spec.fit(x)?;
        Self::from_model(&model, x, y)
    }

    /// Counts using an already fitted model (fitted to `x`).
    pub fn from_model(model: &DepthModel, x: &Sample, y: &Sample) -> Result<Self> {
        check_samples(x, y)?;
        let mut dx = model.depths(x)?;
        let mut dy = model.depths(y)?;
        dx.sort_by(f64::total_cmp);
        let reference_counts = dy.iter().map(|d| dx.partition_point(|v| v <= d) as u64).collect();
        dy.sort_by(f64::total_cmp);
        let query_counts = dx
            .iter()
            .map(|d| (dy.len() - dy.partition_point(|v| v < d)) as u64)
            .collect();
        Ok(Self { m: x.len(), n: y.len(), reference_counts, query_counts })
    }

    /// `#{(i, j) : D(X_i) ≤ D(Y_j)}`.
    pub fn pair_count(&self) -> u64 {
        self.reference_counts.iter().sum()
    }

    pub fn q(&self) -> f64 {
        self.pair_count() as f64 / (self.m as f64 * self.n as f64)
    }

    /// `(σ̂²_GF, σ̂²_FG)`, each clipped below at 0.
    pub fn variances(&self) -> (f64, f64) {
        let (m, n) = (self.m as f64, self.n as f64);
        let q = self.q();
        let sq = |c: &[u64]| c.iter().map(|&v| (v as u128) * (v as u128)).sum::<u128>() as f64;
        let fg = sq(&self.reference_counts) / (n * m * m) - q * q;
        let gf = sq(&self.query_counts) / (m * n * n) - q * q;
        (gf.max(0.0), fg.max(0.0))
    }

    pub fn result(&self) -> QResult {
        let q = self.q();
        let (gf, fg) = self.variances();
        let z = null_z(q, self.m, self.n);
        QResult {
            q,
            m: self.m,
            n: self.n,
            sigma2_gf_hat: gf,
            sigma2_fg_hat: fg,
            z_null: z,
            p_null: two_sided_p(z),
        }
    }
}

fn check_samples(x: &Sample, y: &Sample) -> Result<()> {
    if x.is_empty() || y.is_empty() {
        return Err(Error::InsufficientData("both samples must be nonempty".into()));
    }
    if x.dim() != y.dim() {
        return Err(Error::DimensionMismatch { expected: x.dim(), found: y.dim() });
    }
    Ok(())
}

fn check_alpha(alpha: f64) -> Result<()> {
    if alpha > 0.0 && alpha < 1.0 {
        Ok(())
    } else {
        Err(Error::Domain(format!("alpha must lie in (0, 1), got {alpha}")))
    }
}

fn null_z(q: f64, m: usize, n: usize) -> f64 {
    (q - 0.5) / ((1.0 / m as f64 + 1.0 / n as f64) / 12.0).sqrt()
}

pub(crate) fn two_sided_p(z: f64) -> f64 {
    (2.0 * std_normal_sf(z.abs())).min(1.0)
}

/// `Q(F_m, G_n)`.
pub fn q_statistic(x: &Sample, y: &Sample, spec: &DepthSpec) -> Result<f64> {
    Ok(RankCounts::compute(x, y, spec)?.q())
}

/// `Q̂`, its null standardization and plug-in variances in one pass.
pub fn q_result(x: &Sample, y: &Sample, spec: &DepthSpec) -> Result<QResult> {
    Ok(RankCounts::compute(x, y, spec)?.result())
}

/// Plug-in `(σ̂²_GF, σ̂²_FG)`.
pub fn variance_estimates(x: &Sample, y: &Sample, spec: &DepthSpec) -> Result<(f64, f64)> {
    Ok(RankCounts::compute(x, y, spec)?.variances())
}

/// Two-sided test of `F = G` against the `N(1/2, (1/m + 1/n)/12)` limit.
pub fn null_test(x: &Sample, y: &Sample, spec: &DepthSpec, alpha: f64) -> Result<TestReport> {
    check_alpha(alpha)?;
    Ok(null_report(&q_result(x, y, spec)?, alpha))
}

pub fn null_report(r: &QResult, alpha: f64) -> TestReport {
    TestReport {
        test: "q-null".into(),
        statistic: r.q,
        z: Some(r.z_null),
        df: None,
        p_value: r.p_null,
        alpha,
        reject: r.p_null < alpha,
        m: r.m,
        n: r.n,
        sigma2_gf_hat: Some(r.sigma2_gf_hat),
        sigma2_fg_hat: Some(r.sigma2_fg_hat),
        confidence_interval: None,
    }
}

/// Two-sided test of `Q(F, G) = q0` with plug-in variances, plus a `(1 − α)`
/// confidence interval for `Q(F, G)`.
pub fn general_test(
    x: &Sample,
    y: &Sample,
    spec: &DepthSpec,
    q0: f64,
    alpha: f64,
) -> Result<TestReport> {
    check_alpha(alpha)?;
    general_report(&q_result(x, y, spec)?, q0, alpha)
}

pub fn general_report(r: &QResult, q0: f64, alpha: f64) -> Result<TestReport> {
    if !(0.0..=1.0).contains(&q0) {
        return Err(Error::Domain(format!("q0 must lie in [0, 1], got {q0}")));
    }
    let var = r.sigma2_gf_hat / r.m as f64 + r.sigma2_fg_hat / r.n as f64;
    if !(var > 0.0) {
        return Err(Error::DegenerateVariance(
            "plug-in variance of Q is zero; the samples carry no rank dispersion".into(),
        ));
    }
    let se = var.sqrt();
    let z = (r.q - q0) / se;
    let p = two_sided_p(z);
    let half = std_normal_quantile(1.0 - alpha / 2.0)? * se;
    Ok(TestReport {
        test: "q-general".into(),
        statistic: r.q,
        z: Some(z),
        df: None,
        p_value: p,
        alpha,
        reject: p < alpha,
        m: r.m,
        n: r.n,
        sigma2_gf_hat: Some(r.sigma2_gf_hat),
        sigma2_fg_hat: Some(r.sigma2_fg_hat),
        confidence_interval: Some((r.q - half, r.q + half)),
    })
}
