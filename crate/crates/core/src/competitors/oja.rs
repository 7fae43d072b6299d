//! Oja's affine-invariant rank vectors and the two-sample rank test built on them.
//!
//! For a `d`-subset `p` of the pooled sample, expanding the determinant of
//! `[(1, z_{i_1}), …, (1, z_{i_d}), (1, z)]` along its last column gives
//! `n_{0p} + zᵀ n_p`. The rank vector averages `sign(n_{0p} + zᵀ n_p) n_p`
//! over subsets.

use std::f64::consts::{PI, TAU};

use nalgebra::DMatrix;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::RngStream;
use crate::numerics::{chisq_quantile, chisq_sf, Sample, SquareMatrix};
use crate::report::TestReport;

/// Largest number of subsets enumerated in exact mode.
pub const DEFAULT_ENUMERATION_BUDGET: u64 = 2_000_000;
pub const DEFAULT_SUBSETS: usize = 200_000;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum OjaMode {
    Exact,
    /// Averages over subsets drawn uniformly with replacement.
    Sampled,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct OjaConfig {
    pub mode: OjaMode,
    pub n_subsets: usize,
    pub budget: u64,
    /// Seed for subset sampling.
    pub seed: u64,
}

impl OjaConfig {
    pub fn exact() -> Self {
        Self { mode: OjaMode::Exact, n_subsets: DEFAULT_SUBSETS, budget: DEFAULT_ENUMERATION_BUDGET, seed: 0 }
    }

    pub fn sampled(n_subsets: usize, seed: u64) -> Self {
        Self { mode: OjaMode::Sampled, n_subsets, seed, ..Self::exact() }
    }
}

impl Default for OjaConfig {
    fn default() -> Self {
        Self::exact()
    }
}

/// `C(n, k)`, saturating at `u64::MAX`.
pub fn binomial(n: u64, k: u64) -> u64 {
    if k > n {
        return 0;
    }
    let k = k.min(n - k);
    let mut acc: u128 = 1;
    for i in 0..k {
        acc = acc * (n - i) as u128 / (i + 1) as u128;
        if acc > u64::MAX as u128 {
            return u64::MAX;
        }
    }
    acc as u64
}

/// Calls `f` on every increasing `k`-subset of `0..n`.
fn for_each_subset(n: usize, k: usize, mut f: impl FnMut(&[usize])) {
    if k > n {
        return;
    }
    let mut idx: Vec<usize> = (0..k).collect();
    loop {
        f(&idx);
        let mut i = k;
        while i > 0 && idx[i - 1] == n - k + i - 1 {
            i -= 1;
        }
        if i == 0 {
            return;
        }
        idx[i - 1] += 1;
        for j in i..k {
            idx[j] = idx[j - 1] + 1;
        }
    }
}

/// `(n_{0p}, n_p)` for the subset `p` of `pooled`.
pub fn subset_hyperplane(pooled: &Sample, subset: &[usize]) -> (f64, Vec<f64>) {
    let d = pooled.dim();
    match d {
        1 => (-pooled.row(subset[0])[0], vec![1.0]),
        2 => {
            let a = pooled.row(subset[0]);
            let b = pooled.row(subset[1]);
            (a[0] * b[1] - a[1] * b[0], vec![a[1] - b[1], b[0] - a[0]])
        }
        _ => {
            // first d columns of the (d+1)×(d+1) matrix; cofactors of the last column
            let cols = DMatrix::from_fn(d + 1, d, |r, c| {
                if r == 0 {
                    1.0
                } else {
                    pooled.row(subset[c])[r - 1]
                }
            });
            let cofactor = |r: usize| {
                let minor = cols.clone().remove_row(r);
                let sign = if (r + d).is_multiple_of(2) { 1.0 } else { -1.0 };
                sign * minor.determinant()
            };
            (cofactor(0), (1..=d).map(cofactor).collect())
        }
    }
}

fn sign(v: f64) -> f64 {
    if v > 0.0 {
        1.0
    } else if v < 0.0 {
        -1.0
    } else {
        0.0
    }
}

/// Sign of `n_{0p} + zᵀ n_p`, computed as `(−1)^d det[z_{i_k} − z]` so that
/// `z` on the subset's hyperplane gives exactly 0.
fn side(pooled: &Sample, subset: &[usize], z: &[f64]) -> f64 {
    let d = z.len();
    let det = match d {
        1 => pooled.row(subset[0])[0] - z[0],
        2 => {
            let a = pooled.row(subset[0]);
            let b = pooled.row(subset[1]);
            cross([a[0] - z[0], a[1] - z[1]], [b[0] - z[0], b[1] - z[1]])
        }
        _ => DMatrix::from_fn(d, d, |r, c| pooled.row(subset[c])[r] - z[r]).determinant(),
    };
    if d.is_multiple_of(2) {
        sign(det)
    } else {
        -sign(det)
    }
}

fn cross(a: [f64; 2], b: [f64; 2]) -> f64 {
    a[0] * b[1] - a[1] * b[0]
}

fn accumulate(acc: &mut [f64], pooled: &Sample, subset: &[usize], z: &[f64]) {
    let s = side(pooled, subset, z);
    if s != 0.0 {
        let (_, np) = subset_hyperplane(pooled, subset);
        for (a, v) in acc.iter_mut().zip(&np) {
            *a += s * v;
        }
    }
}

/// Rank vector by explicit enumeration of every subset.
pub fn oja_rank_enumerated(z: &[f64], pooled: &Sample) -> Vec<f64> {
    let d = pooled.dim();
    let mut acc = vec![0.0; d];
    for_each_subset(pooled.len(), d, |p| accumulate(&mut acc, pooled, p, z));
    let total = binomial(pooled.len() as u64, d as u64) as f64;
    acc.iter().map(|v| v / total).collect()
}

/// Planar rank vector in `O(N log N)`.
///
/// With `v_k = z_k − z`, the pair `(a, b)` contributes
/// `sign(v_a × v_b) J(v_b − v_a)` where `J(w) = (−w₂, w₁)`, so the sum over
/// pairs regroups as `Σ_b c_b J(v_b)` with `c_b = Σ_a sign(v_a × v_b)`.
/// The counts come from binary searches over sorted angles; points within
/// `ANGLE_SLACK` of an arc boundary are classified by the exact cross product,
/// so collinear triples contribute nothing.
fn oja_rank_planar(z: &[f64], pooled: &Sample) -> Vec<f64> {
    const ANGLE_SLACK: f64 = 1e-9;
    let vs: Vec<[f64; 2]> = pooled
        .rows()
        .map(|r| [r[0] - z[0], r[1] - z[1]])
        .filter(|v| v[0] != 0.0 || v[1] != 0.0)
        .collect();
    let theta: Vec<f64> = vs.iter().map(|v| v[1].atan2(v[0])).collect();
    let mut order: Vec<usize> = (0..vs.len()).collect();
    order.sort_by(|&a, &b| theta[a].total_cmp(&theta[b]));
    // three turns so every arc of length below 2π is a contiguous window
    let mut ring: Vec<(f64, usize)> = Vec::with_capacity(3 * vs.len());
    for shift in [-TAU, 0.0, TAU] {
        ring.extend(order.iter().map(|&k| (theta[k] + shift, k)));
    }
    let closed = |lo: f64, hi: f64| {
        let a = ring.partition_point(|e| e.0 < lo);
        let b = ring.partition_point(|e| e.0 <= hi);
        &ring[a..b.max(a)]
    };
    let open = |lo: f64, hi: f64| {
        let a = ring.partition_point(|e| e.0 <= lo);
        let b = ring.partition_point(|e| e.0 < hi);
        b.saturating_sub(a)
    };
    // #{a : sign(v_b × v_a) = want} over the arc (t + start, t + start + π)
    let arc_count = |b: usize, start: f64, want: f64| {
        let t = theta[b] + start;
        let inner = open(t + ANGLE_SLACK, t + PI - ANGLE_SLACK);
        let exact = |e: &&(f64, usize)| sign(cross(vs[b], vs[e.1])) == want;
        let edges = closed(t - ANGLE_SLACK, t + ANGLE_SLACK).iter().filter(exact).count()
            + closed(t + PI - ANGLE_SLACK, t + PI + ANGLE_SLACK).iter().filter(exact).count();
        (inner + edges) as f64
    };
    let mut acc = [0.0; 2];
    for (b, v) in vs.iter().enumerate() {
        let c = arc_count(b, PI, -1.0) - arc_count(b, 0.0, 1.0);
        acc[0] -= c * v[1];
        acc[1] += c * v[0];
    }
    let total = binomial(pooled.len() as u64, 2) as f64;
    vec![acc[0] / total, acc[1] / total]
}

/// Draws `count` subsets of size `k` from `0..n` uniformly with replacement.
fn draw_subsets(n: usize, k: usize, count: usize, rng: &mut RngStream) -> Vec<usize> {
    let mut out = Vec::with_capacity(count * k);
    let mut cur = Vec::with_capacity(k);
    for _ in 0..count {
        cur.clear();
        while cur.len() < k {
            let i = ((rng.uniform() * n as f64) as usize).min(n - 1);
            if !cur.contains(&i) {
                cur.push(i);
            }
        }
        cur.sort_unstable();
        out.extend_from_slice(&cur);
    }
    out
}

fn check_pooled(pooled: &Sample) -> Result<()> {
    if pooled.len() < pooled.dim() + 1 {
        return Err(Error::InsufficientData(format!(
            "Oja ranks need at least d + 1 = {} pooled points, got {}",
            pooled.dim() + 1,
            pooled.len()
        )));
    }
    Ok(())
}

/// Rank vectors `R_N(z_k)` of every pooled point (in row order).
fn pooled_ranks(pooled: &Sample, cfg: &OjaConfig) -> Result<Vec<Vec<f64>>> {
    check_pooled(pooled)?;
    let (n, d) = (pooled.len(), pooled.dim());
    let total = binomial(n as u64, d as u64);
    let subsets = match cfg.mode {
        OjaMode::Sampled if (cfg.n_subsets as u64) < total => {
            if cfg.n_subsets == 0 {
                return Err(Error::Domain("sampled mode needs at least one subset".into()));
            }
            let mut rng = RngStream::new(cfg.seed, 0);
            Some(draw_subsets(n, d, cfg.n_subsets, &mut rng))
        }
        _ => None,
    };
    if subsets.is_none() && d > 2 && total > cfg.budget {
        return Err(Error::Unsupported(format!(
            "exact Oja ranks need {total} subsets, above the budget of {}; use sampled mode",
            cfg.budget
        )));
    }
    let ranks = (0..n)
        .into_par_iter()
        .map(|k| {
            let z = pooled.row(k);
            match (&subsets, d) {
                (Some(flat), _) => {
                    let mut acc = vec![0.0; d];
                    for p in flat.chunks_exact(d) {
                        accumulate(&mut acc, pooled, p, z);
                    }
                    let count = (flat.len() / d) as f64;
                    acc.iter().map(|v| v / count).collect()
                }
                (None, 2) => oja_rank_planar(z, pooled),
                (None, _) => oja_rank_enumerated(z, pooled),
            }
        })
        .collect();
    Ok(ranks)
}

/// `R_N(z)` relative to the pooled sample.
pub fn oja_rank_vector(z: &[f64], pooled: &Sample, cfg: &OjaConfig) -> Result<Vec<f64>> {
    check_pooled(pooled)?;
    let d = pooled.dim();
    if z.len() != d {
        return Err(Error::DimensionMismatch { expected: d, found: z.len() });
    }
    let total = binomial(pooled.len() as u64, d as u64);
    match cfg.mode {
        OjaMode::Sampled if (cfg.n_subsets as u64) < total => {
            let mut rng = RngStream::new(cfg.seed, 0);
            let flat = draw_subsets(pooled.len(), d, cfg.n_subsets.max(1), &mut rng);
            let mut acc = vec![0.0; d];
            for p in flat.chunks_exact(d) {
                accumulate(&mut acc, pooled, p, z);
            }
            let count = (flat.len() / d) as f64;
            Ok(acc.iter().map(|v| v / count).collect())
        }
        _ if d == 2 => Ok(oja_rank_planar(z, pooled)),
        _ if d > 2 && total > cfg.budget => Err(Error::Unsupported(format!(
            "exact Oja ranks need {total} subsets, above the budget of {}",
            cfg.budget
        ))),
        _ => Ok(oja_rank_enumerated(z, pooled)),
    }
}

/// Two-sample score weights scaled by `N = m + n`: `−n` for the first sample
/// and `m` for the second, i.e. `N·(−λ)` and `N·(1−λ)` with `λ = n/N`.
pub fn rank_weights(m: usize, n: usize) -> Vec<i64> {
    let (m, n) = (m as i64, n as i64);
    (0..m).map(|_| -n).chain((0..n).map(|_| m)).collect()
}

/// The Oja two-sample statistic `(Nλ(1−λ))⁻¹ Tᵀ B⁻¹ T` with a `χ²(d)` reference.
pub fn oja_statistic(x: &Sample, y: &Sample, cfg: &OjaConfig) -> Result<f64> {
    if x.dim() != y.dim() {
        return Err(Error::DimensionMismatch { expected: x.dim(), found: y.dim() });
    }
    if x.is_empty() || y.is_empty() {
        return Err(Error::InsufficientData("both samples must be nonempty".into()));
    }
    let pooled = x.concat(y)?;
    let ranks = pooled_ranks(&pooled, cfg)?;
    let (m, d) = (x.len(), x.dim());
    let big_n = pooled.len() as f64;
    let lambda = y.len() as f64 / big_n;
    let mut t = vec![0.0; d];
    let mut b = DMatrix::<f64>::zeros(d, d);
    for (r, w) in ranks.iter().zip(rank_weights(m, y.len())) {
        for i in 0..d {
            t[i] += w as f64 * r[i];
            for j in 0..d {
                b[(i, j)] += r[i] * r[j];
            }
        }
    }
    t.iter_mut().for_each(|v| *v /= big_n);
    b /= big_n - 1.0;
    let inv = SquareMatrix::new(b)?.invert().map_err(|_| {
        Error::DegenerateRank(
            "rank covariance is singular; supply more observations or reduce the dimension".into(),
        )
    })?;
    Ok((inv.quadratic_form(&t) / (big_n * lambda * (1.0 - lambda))).max(0.0))
}

pub fn oja_test(x: &Sample, y: &Sample, cfg: &OjaConfig, alpha: f64) -> Result<TestReport> {
    if !(alpha > 0.0 && alpha < 1.0) {
        return Err(Error::Domain(format!("alpha must lie in (0, 1), got {alpha}")));
    }
    let stat = oja_statistic(x, y, cfg)?;
    let d = x.dim() as u32;
    Ok(TestReport {
        test: "oja".into(),
        statistic: stat,
        z: None,
        df: Some(d),
        p_value: chisq_sf(stat, d)?,
        alpha,
        reject: stat > chisq_quantile(1.0 - alpha, d)?,
        m: x.len(),
        n: y.len(),
        sigma2_gf_hat: None,
        sigma2_fg_hat: None,
        confidence_interval: None,
    })
}
