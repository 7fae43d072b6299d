//! Halfspace (Tukey) depth: exact on the line and in the plane, direction
//! sampling otherwise.

use std::f64::consts::{FRAC_PI_2, PI, TAU};

use crate::numerics::{dot, Sample};

/// Smallest closed half-line count through `x` over a sorted reference.
pub(crate) fn count_line(sorted: &[f64], x: f64) -> usize {
    let below_or_at = sorted.partition_point(|v| *v <= x);
    let at_or_above = sorted.len() - sorted.partition_point(|v| *v < x);
    below_or_at.min(at_or_above)
}

/// Exact minimum number of reference points in a closed half-plane whose
/// boundary passes through `x`.
///
/// Angles of `X_i − x` are sorted; the count only changes at the critical
/// angles `φ_i ± π/2`, and is smallest on the open arcs between them, so it
/// suffices to evaluate one direction per arc (its midpoint). Points equal to
/// `x` lie in every closed half-plane.
pub(crate) fn count_plane(points: &[[f64; 2]], x: [f64; 2]) -> usize {
    let mut coincident = 0;
    let mut angles = Vec::with_capacity(points.len());
    for p in points {
        let (dx, dy) = (p[0] - x[0], p[1] - x[1]);
        if dx == 0.0 && dy == 0.0 {
            coincident += 1;
        } else {
            angles.push(dy.atan2(dx));
        }
    }
    if angles.is_empty() {
        return coincident;
    }
    angles.sort_by(f64::total_cmp);
    let k = angles.len();

    let mut critical: Vec<f64> = angles
        .iter()
        .flat_map(|a| [wrap(a + FRAC_PI_2), wrap(a - FRAC_PI_2)])
        .collect();
    critical.sort_by(f64::total_cmp);
    critical.dedup();

    let mut doubled = angles.clone();
    doubled.extend(angles.iter().map(|a| a + TAU));

    let mut best = k;
    for (i, c) in critical.iter().enumerate() {
        let next = if i + 1 < critical.len() { critical[i + 1] } else { critical[0] + TAU };
        let theta = 0.5 * (c + next);
        // closed window [θ − π/2, θ + π/2], shifted so its start lies in (−π, π]
        let start = wrap(theta - FRAC_PI_2);
        let end = start + PI;
        let lo = doubled.partition_point(|v| *v < start);
        let hi = doubled.partition_point(|v| *v <= end);
        best = best.min(hi - lo);
        if best == 0 {
            break;
        }
    }
    best + coincident
}

/// Maps an angle into `(−π, π]`.
fn wrap(a: f64) -> f64 {
    let mut a = a % TAU;
    if a <= -PI {
        a += TAU;
    } else if a > PI {
        a -= TAU;
    }
    a
}

/// Reference projections sorted along each sampled direction.
#[derive(Debug, Clone)]
pub(crate) struct DirectionCounts {
    directions: Vec<Vec<f64>>,
    sorted: Vec<Vec<f64>>,
}

impl DirectionCounts {
    pub(crate) fn new(reference: &Sample, directions: Vec<Vec<f64>>) -> Self {
        let sorted = directions
            .iter()
            .map(|u| {
                let mut p = reference.project(u);
                p.sort_by(f64::total_cmp);
                p
            })
            .collect();
        Self { directions, sorted }
    }

    /// Minimum closed half-space count over `±u` for the stored directions.
    pub(crate) fn count(&self, x: &[f64]) -> usize {
        self.directions
            .iter()
            .zip(&self.sorted)
            .map(|(u, proj)| count_line(proj, dot(u, x)))
            .min()
            .unwrap_or(0)
    }
}
