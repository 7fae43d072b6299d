use crate::error::{Error, Result};
use crate::numerics::{chisq_quantile, chisq_sf, sample_mean_cov, Sample, SquareMatrix};
use crate::report::TestReport;

/// Two-sample Hotelling statistic `(X̄ − Ȳ)ᵀ [(1/m + 1/n) S_pooled]⁻¹ (X̄ − Ȳ)`
/// referred to `χ²(d)`.
pub fn hotelling_t2_test(x: &Sample, y: &Sample, alpha: f64) -> Result<TestReport> {
    if !(alpha > 0.0 && alpha < 1.0) {
        return Err(Error::Domain(format!("alpha must lie in (0, 1), got {alpha}")));
    }
    let t2 = hotelling_t2(x, y)?;
    let d = x.dim() as u32;
    let p = chisq_sf(t2, d)?;
    Ok(TestReport {
        test: "t2".into(),
        statistic: t2,
        z: None,
        df: Some(d),
        p_value: p,
        alpha,
        reject: t2 > chisq_quantile(1.0 - alpha, d)?,
        m: x.len(),
        n: y.len(),
        sigma2_gf_hat: None,
        sigma2_fg_hat: None,
        confidence_interval: None,
    })
}

/// The `T²` statistic alone.
pub fn hotelling_t2(x: &Sample, y: &Sample) -> Result<f64> {
    if x.dim() != y.dim() {
        return Err(Error::DimensionMismatch { expected: x.dim(), found: y.dim() });
    }
    let (m, n, d) = (x.len(), y.len(), x.dim());
    if m < 2 || n < 2 || m + n < d + 2 {
        return Err(Error::InsufficientData(format!(
            "T² needs at least two points per sample and m + n >= d + 2 (m = {m}, n = {n}, d = {d})"
        )));
    }
    let (mx, sx) = sample_mean_cov(x)?;
    let (my, sy) = sample_mean_cov(y)?;
    let (mf, nf) = (m as f64, n as f64);
    let scale = (1.0 / mf + 1.0 / nf) / (mf + nf - 2.0);
    let pooled = (sx.as_matrix() * (mf - 1.0) + sy.as_matrix() * (nf - 1.0)) * scale;
    let inv = SquareMatrix::new(pooled)?.invert().map_err(|_| {
        Error::DegenerateSample(
            "pooled covariance is singular; supply more observations or reduce the dimension".into(),
        )
    })?;
    let diff: Vec<f64> = mx.iter().zip(my.iter()).map(|(a, b)| a - b).collect();
    Ok(inv.quadratic_form(&diff).max(0.0))
}
