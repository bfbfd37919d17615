//! Winner-take-all disparity selection and parabolic sub-pixel refinement.

use crate::img::DisparityMap;
use crate::sgbm::CostVolume;

/// Per-pixel argmin over the aggregated costs. Ties break toward the
/// smaller disparity.
pub fn select_disparity(aggregated: &CostVolume) -> DisparityMap {
    let width = aggregated.width();
    let height = aggregated.height();
    let mut map = DisparityMap::invalid(width, height);
    for y in 0..height {
        for x in 0..width {
            map.set(x, y, argmin(aggregated.pixel(x, y)) as f32);
        }
    }
    map
}

pub(crate) fn argmin(cell: &[u32]) -> usize {
    let mut best = 0;
    let mut best_cost = cell[0];
    for (d, &c) in cell.iter().enumerate().skip(1) {
        if c < best_cost {
            best_cost = c;
            best = d;
        }
    }
    best
}

/// Fit a parabola through the aggregated costs at d*-1, d*, d*+1:
///
/// `d_sub = d* + (S(d*-1) - S(d*+1)) / (2 * (S(d*-1) + S(d*+1) - 2 S(d*)))`
///
/// Applied only on interior disparities with a positive curvature
/// denominator; the correction never exceeds half a pixel.
pub fn subpixel_refine(aggregated: &CostVolume, d_star: &DisparityMap) -> DisparityMap {
    let mut out = d_star.clone();
    let last = aggregated.disparities() - 1;
    for y in 0..aggregated.height() {
        for x in 0..aggregated.width() {
            let value = d_star.get(x, y);
            if !crate::img::is_valid(value) {
                continue;
            }
            let d = value.round() as usize;
            if d == 0 || d >= last {
                continue;
            }
            let cell = aggregated.pixel(x, y);
            let (below, center, above) =
                (cell[d - 1] as f64, cell[d] as f64, cell[d + 1] as f64);
            let denom = below + above - 2.0 * center;
            if denom > 0.0 {
                let offset = (below - above) / (2.0 * denom);
                out.set(x, y, (d as f64 + offset) as f32);
            }
        }
    }
    out
}
