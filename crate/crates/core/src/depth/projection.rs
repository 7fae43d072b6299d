//! Projection outlyingness `O(x) = sup_u |uᵀx − μ(F_u)| / σ(F_u)`.
//!
//! The supremum is replaced by a maximum over a finite set of directions, each
//! stored with its projected location and scale. In the plane with
//! (median, MAD) that set is exact; with sampled directions it gives a lower
//! bound on `O`.

use std::f64::consts::PI;

use super::univariate::{median_indices, LocationScale};
use crate::error::{Error, Result};
use crate::numerics::{dot, Sample};

/// Directions with their projected (location, scale).
#[derive(Debug, Clone)]
pub(crate) struct DirectionSet {
    dim: usize,
    dirs: Vec<f64>,
    locs: Vec<f64>,
    scales: Vec<f64>,
}

impl DirectionSet {
    /// Evaluates `pair` along each direction in `directions`.
    pub(crate) fn build(
        reference: &Sample,
        directions: impl IntoIterator<Item = Vec<f64>>,
        pair: LocationScale,
    ) -> Result<Self> {
        let dim = reference.dim();
        let mut set = DirectionSet { dim, dirs: Vec::new(), locs: Vec::new(), scales: Vec::new() };
        let mut buf = Vec::with_capacity(reference.len());
        for u in directions {
            buf.clear();
            buf.extend(reference.rows().map(|r| dot(r, &u)));
            let (loc, scale) = pair.estimate(&mut buf);
            if !(scale > 0.0) {
                return Err(Error::DegenerateScale { direction: u });
            }
            set.dirs.extend_from_slice(&u);
            set.locs.push(loc);
            set.scales.push(scale);
        }
        Ok(set)
    }

    pub(crate) fn len(&self) -> usize {
        self.locs.len()
    }

    pub(crate) fn outlyingness(&self, x: &[f64]) -> f64 {
        let mut best = 0.0_f64;
        for ((u, loc), scale) in self.dirs.chunks_exact(self.dim).zip(&self.locs).zip(&self.scales)
        {
            best = best.max((dot(u, x) - loc).abs() / scale);
        }
        best
    }
}

/// Angle in `[0, π)` of the unit vector perpendicular to `w`.
fn normal_angle(w: [f64; 2]) -> f64 {
    let a = w[1].atan2(w[0]) + PI / 2.0;
    let a = a.rem_euclid(PI);
    if a >= PI {
        0.0
    } else {
        a
    }
}

fn unit(theta: f64) -> Vec<f64> {
    vec![theta.cos(), theta.sin()]
}

/// Every direction at which the planar (median, MAD) outlyingness can attain
/// its supremum, independently of the query point.
///
/// Between consecutive normals of pair differences `X_i − X_j` the ordering of
/// the projections is fixed, so the median is `uᵀc/2` for a fixed
/// `c = X_a + X_b` (`a = b` for odd sizes). Inside such a stretch the MAD term
/// only changes identity where two absolute deviations swap or a deviation
/// changes sign, i.e. at normals of `X_i − X_j` or of `X_i + X_j − c`. Between
/// all of these breakpoints the outlyingness is `|aᵀu| / |bᵀu|` for fixed
/// `a, b`, which is monotone in the angle, so its maximum sits on a
/// breakpoint.
pub(crate) fn planar_median_mad_directions(points: &[[f64; 2]]) -> Vec<f64> {
    let m = points.len();
    let mut pair_angles = Vec::with_capacity(m * (m.saturating_sub(1)) / 2);
    for i in 0..m {
        for j in (i + 1)..m {
            let w = [points[i][0] - points[j][0], points[i][1] - points[j][1]];
            if w != [0.0, 0.0] {
                pair_angles.push(normal_angle(w));
            }
        }
    }
    pair_angles.sort_by(f64::total_cmp);
    pair_angles.dedup();
    if pair_angles.is_empty() {
        return vec![0.0];
    }

    // stretches of constant median index set: (start, end, a, b)
    let k = pair_angles.len();
    let mut proj = vec![0.0; m];
    let mut scratch = Vec::with_capacity(m);
    let mut stretches: Vec<(f64, f64, usize, usize)> = Vec::new();
    for c in 0..k {
        let start = pair_angles[c];
        let end = if c + 1 < k { pair_angles[c + 1] } else { pair_angles[0] + PI };
        let mid = 0.5 * (start + end);
        let (s, t) = (mid.cos(), mid.sin());
        for (p, x) in proj.iter_mut().zip(points) {
            *p = s * x[0] + t * x[1];
        }
        let (a, b) = median_indices(&proj, &mut scratch);
        let key = (a.min(b), a.max(b));
        match stretches.last_mut() {
            Some(last) if (last.2, last.3) == key => last.1 = end,
            _ => stretches.push((start, end, key.0, key.1)),
        }
    }

    const SLACK: f64 = 1e-12;
    let mut breakpoints = pair_angles.clone();
    for &(start, end, a, b) in &stretches {
        let c = [points[a][0] + points[b][0], points[a][1] + points[b][1]];
        for i in 0..m {
            for j in i..m {
                let w = [
                    points[i][0] + points[j][0] - c[0],
                    points[i][1] + points[j][1] - c[1],
                ];
                if w == [0.0, 0.0] {
                    continue;
                }
                let mut theta = normal_angle(w);
                if theta < start - SLACK {
                    theta += PI;
                }
                if theta >= start - SLACK && theta <= end + SLACK {
                    breakpoints.push(theta.rem_euclid(PI));
                }
            }
        }
    }
    breakpoints.sort_by(f64::total_cmp);
    breakpoints.dedup();
    breakpoints
}

/// Exact planar (median, MAD) direction set.
pub(crate) fn exact_planar(reference: &Sample) -> Result<DirectionSet> {
    let points: Vec<[f64; 2]> = reference.rows().map(|r| [r[0], r[1]]).collect();
    let angles = planar_median_mad_directions(&points);
    DirectionSet::build(reference, angles.into_iter().map(unit), LocationScale::MedianMad)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::RngStream;

    fn dense_outlyingness(points: &[[f64; 2]], x: [f64; 2], n: usize) -> f64 {
        let s = Sample::from_rows(points).unwrap();
        let dirs = (0..n).map(|k| unit(k as f64 * PI / n as f64));
        DirectionSet::build(&s, dirs, LocationScale::MedianMad).unwrap().outlyingness(&x)
    }

    #[test]
    fn exact_dominates_dense_grid() {
        let mut rng = RngStream::new(99, 0);
        for trial in 0..20 {
            let m = 5 + trial % 9;
            let pts: Vec<[f64; 2]> =
                (0..m).map(|_| [rng.standard_normal(), rng.standard_normal()]).collect();
            let s = Sample::from_rows(&pts).unwrap();
            let exact = exact_planar(&s).unwrap();
            for _ in 0..5 {
                let x = [2.0 * rng.standard_normal(), 2.0 * rng.standard_normal()];
                let e = exact.outlyingness(&x);
                let g = dense_outlyingness(&pts, x, 20_000);
                assert!(e >= g - 1e-9, "exact {e} < grid {g}");
                assert!(e - g < 1e-2 * e.max(1.0), "gap {} too large", e - g);
            }
        }
    }

    #[test]
    fn pair_normals_alone_are_not_enough() {
        // the MAD breakpoints matter: compare with a set built from pair normals only
        let mut rng = RngStream::new(3, 1);
        let mut worse = 0;
        for _ in 0..30 {
            let pts: Vec<[f64; 2]> =
                (0..9).map(|_| [rng.standard_normal(), rng.standard_normal()]).collect();
            let s = Sample::from_rows(&pts).unwrap();
            let mut pairs = Vec::new();
            for i in 0..9 {
                for j in (i + 1)..9 {
                    pairs.push(normal_angle([pts[i][0] - pts[j][0], pts[i][1] - pts[j][1]]));
                }
            }
            let partial =
                DirectionSet::build(&s, pairs.into_iter().map(unit), LocationScale::MedianMad)
                    .unwrap();
            let exact = exact_planar(&s).unwrap();
            let x = [3.0 * rng.standard_normal(), 3.0 * rng.standard_normal()];
            if exact.outlyingness(&x) > partial.outlyingness(&x) + 1e-9 {
                worse += 1;
            }
        }
        assert!(worse > 0);
    }
}
