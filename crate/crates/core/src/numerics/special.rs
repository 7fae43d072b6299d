//! Normal and chi-square distribution functions.

use statrs::function::erf::erfc;
use statrs::function::gamma::{gamma_lr, gamma_ur, ln_gamma};

use crate::error::{Error, Result};

const SQRT_2: f64 = std::f64::consts::SQRT_2;

/// Relative weight left in the Poisson tail when the noncentral series stops.
const POISSON_TAIL: f64 = 1e-12;

/// Standard normal cdf `Φ(x)`.
///
/// Evaluated through the complementary error function on whichever side keeps
/// full relative precision, so the lower tail does not cancel to zero.
pub fn std_normal_cdf(x: f64) -> f64 {
    if x.is_nan() {
        return f64::NAN;
    }
    if x < 0.0 {
        0.5 * erfc(-x / SQRT_2)
    } else {
        1.0 - 0.5 * erfc(x / SQRT_2)
    }
}

/// Upper tail `1 - Φ(x)` without cancellation.
pub fn std_normal_sf(x: f64) -> f64 {
    std_normal_cdf(-x)
}

fn std_normal_pdf(x: f64) -> f64 {
    (-0.5 * x * x).exp() / (2.0 * std::f64::consts::PI).sqrt()
}

/// Inverse of [`std_normal_cdf`].
///
/// Rational starting point (Acklam) polished with two Halley steps against the
/// erfc-based cdf.
pub fn std_normal_quantile(p: f64) -> Result<f64> {
    if !(p > 0.0 && p < 1.0) {
        return Err(Error::Domain(format!(
            "normal quantile needs 0 < p < 1, got {p}"
        )));
    }
    if p == 0.5 {
        return Ok(0.0);
    }
    const A: [f64; 6] = [
        -3.969_683_028_665_376e1,
        2.209_460_984_245_205e2,
        -2.759_285_104_469_687e2,
        1.383_577_518_672_69e2,
        -3.066_479_806_614_716e1,
        2.506_628_277_459_239,
    ];
    const B: [f64; 5] = [
        -5.447_609_879_822_406e1,
        1.615_858_368_580_409e2,
        -1.556_989_798_598_866e2,
        6.680_131_188_771_972e1,
        -1.328_068_155_288_572e1,
    ];
    const C: [f64; 6] = [
        -7.784_894_002_430_293e-3,
        -3.223_964_580_411_365e-1,
        -2.400_758_277_161_838,
        -2.549_732_539_343_734,
        4.374_664_141_464_968,
        2.938_163_982_698_783,
    ];
    const D: [f64; 4] = [
        7.784_695_709_041_462e-3,
        3.224_671_290_700_398e-1,
        2.445_134_137_142_996,
        3.754_408_661_907_416,
    ];
    const P_LOW: f64 = 0.024_25;

    let mut x = if p < P_LOW {
        let q = (-2.0 * p.ln()).sqrt();
        (((((C[0] * q + C[1]) * q + C[2]) * q + C[3]) * q + C[4]) * q + C[5])
            / ((((D[0] * q + D[1]) * q + D[2]) * q + D[3]) * q + 1.0)
    } else if p <= 1.0 - P_LOW {
        let q = p - 0.5;
        let r = q * q;
        (((((A[0] * r + A[1]) * r + A[2]) * r + A[3]) * r + A[4]) * r + A[5]) * q
            / (((((B[0] * r + B[1]) * r + B[2]) * r + B[3]) * r + B[4]) * r + 1.0)
    } else {
        let q = (-2.0 * (1.0 - p).ln()).sqrt();
        -(((((C[0] * q + C[1]) * q + C[2]) * q + C[3]) * q + C[4]) * q + C[5])
            / ((((D[0] * q + D[1]) * q + D[2]) * q + D[3]) * q + 1.0)
    };

    for _ in 0..2 {
        // Residual on the side of the distribution that carries precision.
        let e = if x < 0.0 {
            std_normal_cdf(x) - p
        } else {
            (1.0 - p) - std_normal_sf(x)
        };
        let u = e / std_normal_pdf(x);
        x -= u / (1.0 + 0.5 * x * u);
    }
    Ok(x)
}

fn check_df(d: u32) -> Result<()> {
    if d == 0 {
        return Err(Error::Domain("chi-square degrees of freedom must be positive".into()));
    }
    Ok(())
}

/// Central chi-square cdf with `d` degrees of freedom.
pub fn chisq_cdf(x: f64, d: u32) -> Result<f64> {
    check_df(d)?;
    if x <= 0.0 {
        return Ok(0.0);
    }
    if x.is_infinite() {
        return Ok(1.0);
    }
    Ok(gamma_lr(d as f64 / 2.0, x / 2.0))
}

/// Central chi-square survival function `P(Z > x)`.
pub fn chisq_sf(x: f64, d: u32) -> Result<f64> {
    check_df(d)?;
    if x <= 0.0 {
        return Ok(1.0);
    }
    if x.is_infinite() {
        return Ok(0.0);
    }
    Ok(gamma_ur(d as f64 / 2.0, x / 2.0))
}

fn chisq_pdf(x: f64, d: u32) -> f64 {
    if x <= 0.0 {
        return 0.0;
    }
    let k = d as f64 / 2.0;
    ((k - 1.0) * x.ln() - x / 2.0 - k * std::f64::consts::LN_2 - ln_gamma(k)).exp()
}

/// Quantile of the central chi-square distribution.
///
/// Wilson–Hilferty start, safeguarded Newton iterations inside a shrinking
/// bracket.
pub fn chisq_quantile(p: f64, d: u32) -> Result<f64> {
    check_df(d)?;
    if !(p > 0.0 && p < 1.0) {
        return Err(Error::Domain(format!(
            "chi-square quantile needs 0 < p < 1, got {p}"
        )));
    }
    let k = d as f64;
    let z = std_normal_quantile(p)?;
    let h = 2.0 / (9.0 * k);
    let wh = k * (1.0 - h + z * h.sqrt()).powi(3);

    let mut lo = 0.0_f64;
    let mut hi = k.max(1.0);
    while chisq_cdf(hi, d)? < p {
        lo = hi;
        hi *= 2.0;
    }
    // lower tail: F(x) ≈ (x/2)^{k/2} / Γ(k/2 + 1)
    let tail = 2.0 * ((p.ln() + ln_gamma(k / 2.0 + 1.0)) * 2.0 / k).exp();
    let start = if p < 1e-3 { tail } else { wh };
    let mut x = if start > lo && start < hi { start } else { 0.5 * (lo + hi) };
    for _ in 0..200 {
        let f = chisq_cdf(x, d)? - p;
        if f == 0.0 {
            return Ok(x);
        }
        if f < 0.0 {
            lo = x;
        } else {
            hi = x;
        }
        let dens = chisq_pdf(x, d);
        let mut next = if dens > 0.0 { x - f / dens } else { f64::NAN };
        if !(next > lo && next < hi) {
            next = if lo > 0.0 && hi > 4.0 * lo {
                (lo * hi).sqrt()
            } else if lo == 0.0 {
                hi / 16.0
            } else {
                0.5 * (lo + hi)
            };
        }
        if (next - x).abs() <= 1e-15 * x.abs().max(1e-300) || hi - lo <= 1e-15 * hi {
            return Ok(next);
        }
        x = next;
    }
    Ok(x)
}

/// Survival function of the noncentral chi-square distribution.
///
/// Poisson mixture of central chi-square tails,
/// `Σ_j e^{-λ/2} (λ/2)^j / j! · P(χ²_{d+2j} > x)`, summed outward from the
/// Poisson mode until the unvisited weight drops below `1e-12`.
pub fn noncentral_chisq_sf(x: f64, d: u32, ncp: f64) -> Result<f64> {
    check_df(d)?;
    if !(ncp >= 0.0) || !ncp.is_finite() {
        return Err(Error::Domain(format!(
            "noncentrality must be a finite nonnegative number, got {ncp}"
        )));
    }
    if x.is_nan() {
        return Err(Error::Domain("noncentral chi-square argument is NaN".into()));
    }
    if x <= 0.0 {
        return Ok(1.0);
    }
    if ncp == 0.0 {
        return chisq_sf(x, d);
    }
    let half = ncp / 2.0;
    let mode = half.floor() as u64;
    let log_weight = |j: u64| -> f64 { -half + j as f64 * half.ln() - ln_gamma(j as f64 + 1.0) };
    let term = |j: u64| -> Result<f64> { chisq_sf(x, d + 2 * j as u32) };

    let mut total_weight = 0.0;
    let mut sum = 0.0;
    // downward from the mode, including it
    let mut j = mode;
    loop {
        let w = log_weight(j).exp();
        total_weight += w;
        sum += w * term(j)?;
        if j == 0 || (w < POISSON_TAIL * 1e-3 && j < mode) {
            break;
        }
        j -= 1;
    }
    // upward until the remaining mass is negligible
    let mut j = mode + 1;
    loop {
        if 1.0 - total_weight < POISSON_TAIL {
            break;
        }
        let w = log_weight(j).exp();
        if j as f64 > half && w < POISSON_TAIL * 1e-3 {
            break;
        }
        total_weight += w;
        sum += w * term(j)?;
        j += 1;
        if j > mode + 100_000 {
            return Err(Error::Numeric(format!(
                "noncentral chi-square series did not converge (ncp = {ncp})"
            )));
        }
    }
    Ok(sum.clamp(0.0, 1.0))
}

/// Noncentral chi-square cdf, `1 - sf`.
pub fn noncentral_chisq_cdf(x: f64, d: u32, ncp: f64) -> Result<f64> {
    Ok(1.0 - noncentral_chisq_sf(x, d, ncp)?)
}

#[cfg(test)]
mod tests {
    use super::*;

    /// Composite Simpson on the standard normal density, used as an oracle.
    fn normal_cdf_by_quadrature(x: f64) -> f64 {
        let lo = -12.0;
        let n = 200_000;
        let h = (x - lo) / n as f64;
        let mut s = std_normal_pdf(lo) + std_normal_pdf(x);
        for i in 1..n {
            let t = lo + i as f64 * h;
            s += if i % 2 == 1 { 4.0 } else { 2.0 } * std_normal_pdf(t);
        }
        s * h / 3.0
    }

    /// Continued fraction for erfc-based Mills ratio at large |x|.
    fn normal_lower_tail_cf(x: f64) -> f64 {
        let t = -x;
        let mut f = t;
        for k in (1..200).rev() {
            f = t + k as f64 / f;
        }
        std_normal_pdf(t) / f
    }

    #[test]
    fn cdf_reference_points() {
        assert_eq!(std_normal_cdf(0.0), 0.5);
        let oracle = normal_cdf_by_quadrature(1.959964);
        assert!((oracle - 0.975).abs() < 1e-6);
        assert!((std_normal_cdf(1.959964) - oracle).abs() < 1e-10);
        assert!((std_normal_cdf(1.959964) - 0.975).abs() < 1e-7);
        let tail = std_normal_cdf(-8.0);
        assert!(tail < 1e-14);
        assert!((tail - normal_lower_tail_cf(-8.0)).abs() / tail < 1e-10);
    }

    #[test]
    fn quantile_reference_points() {
        assert_eq!(std_normal_quantile(0.5).unwrap(), 0.0);
        // bisection on the cdf
        let (mut lo, mut hi) = (0.0, 5.0);
        for _ in 0..200 {
            let mid = 0.5 * (lo + hi);
            if std_normal_cdf(mid) < 0.975 {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        let q = std_normal_quantile(0.975).unwrap();
        assert!((q - lo).abs() < 1e-10);
        assert!((q - 1.959964).abs() < 1e-6);
        for i in 1..100 {
            let p = i as f64 / 100.0;
            let x = std_normal_quantile(p).unwrap();
            assert!((std_normal_cdf(x) - p).abs() < 1e-10, "p = {p}");
        }
        assert!(std_normal_quantile(0.0).is_err());
        assert!(std_normal_quantile(1.0).is_err());
        assert!(std_normal_quantile(f64::NAN).is_err());
    }

    #[test]
    fn chisq_quantile_reference_points() {
        let q = chisq_quantile(0.95, 2).unwrap();
        assert!((q - (-2.0 * 0.05_f64.ln())).abs() < 1e-10);
        assert!((q - 5.991465).abs() < 1e-5);
        assert!(chisq_quantile(1e-300, 3).unwrap() < 1e-100);

        // d = 4 density x e^{-x/2} / 4, integrated by Simpson
        let q4 = chisq_quantile(0.95, 4).unwrap();
        let n = 100_000;
        let h = q4 / n as f64;
        let pdf = |x: f64| x * (-x / 2.0).exp() / 4.0;
        let mut s = pdf(0.0) + pdf(q4);
        for i in 1..n {
            s += if i % 2 == 1 { 4.0 } else { 2.0 } * pdf(i as f64 * h);
        }
        assert!((s * h / 3.0 - 0.95).abs() < 1e-10);

        for d in 1..=6 {
            for &p in &[0.01, 0.3, 0.5, 0.9, 0.99] {
                let x = chisq_quantile(p, d).unwrap();
                assert!((chisq_cdf(x, d).unwrap() - p).abs() < 1e-10);
            }
        }
        assert!(chisq_quantile(0.0, 2).is_err());
        assert!(chisq_quantile(0.5, 0).is_err());
    }

    #[test]
    fn noncentral_reduces_to_central() {
        let sf = noncentral_chisq_sf(5.991465, 2, 0.0).unwrap();
        assert!((sf - 0.05).abs() < 1e-6);
        for d in 1..=6 {
            for i in 0..=50 {
                let x = i as f64;
                let a = noncentral_chisq_sf(x, d, 0.0).unwrap();
                let b = chisq_sf(x, d).unwrap();
                assert!((a - b).abs() < 1e-10);
            }
        }
        assert!(noncentral_chisq_sf(1.0, 2, -0.1).is_err());
    }

    #[test]
    fn noncentral_matches_closed_form_d2() {
        // d = 2: P(Z > x) = Q_1(√λ, √x), compare with direct 1-D integration of
        // the Rice density for the radius.
        let (x, ncp): (f64, f64) = (5.991465, 4.0);
        let a = ncp.sqrt();
        let bessel_i0 = |z: f64| {
            let mut s = 0.0;
            let mut term = 1.0;
            for k in 0..200 {
                if k > 0 {
                    term *= (z / 2.0) * (z / 2.0) / (k as f64 * k as f64);
                }
                s += term;
            }
            s
        };
        let rice = |r: f64| r * (-(r * r + a * a) / 2.0).exp() * bessel_i0(a * r);
        let (lo, hi) = (x.sqrt(), 30.0);
        let n = 200_000;
        let h = (hi - lo) / n as f64;
        let mut s = rice(lo) + rice(hi);
        for i in 1..n {
            s += if i % 2 == 1 { 4.0 } else { 2.0 } * rice(lo + i as f64 * h);
        }
        let oracle = s * h / 3.0;
        let sf = noncentral_chisq_sf(x, 2, ncp).unwrap();
        assert!((sf - oracle).abs() < 1e-9, "{sf} vs {oracle}");
    }

    #[test]
    fn noncentral_monotone() {
        for d in 1..=4 {
            let mut prev = 1.0;
            for i in 0..40 {
                let v = noncentral_chisq_sf(i as f64 * 0.5, d, 3.0).unwrap();
                assert!(v <= prev + 1e-15);
                prev = v;
            }
            let mut prev = 0.0;
            for i in 0..40 {
                let v = noncentral_chisq_sf(6.0, d, i as f64 * 0.7).unwrap();
                assert!(v >= prev - 1e-15);
                prev = v;
            }
        }
    }

    #[test]
    fn noncentral_large_ncp() {
        // mean d + λ; median is close to the mean for large λ
        let sf = noncentral_chisq_sf(1002.0, 2, 1000.0).unwrap();
        assert!(sf > 0.4 && sf < 0.6, "{sf}");
    }
}
