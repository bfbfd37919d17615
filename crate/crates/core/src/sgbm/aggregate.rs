//! Path-wise cost aggregation: a 1-D dynamic program per scanline
//! direction, summed over eight directions.

use rayon::prelude::*;

use crate::sgbm::CostVolume;

/// The eight canonical aggregation directions: horizontals, verticals, and
/// the four diagonals.
pub const DIRECTIONS: [(i32, i32); 8] = [
    (1, 0),
    (-1, 0),
    (0, 1),
    (0, -1),
    (1, 1),
    (-1, 1),
    (1, -1),
    (-1, -1),
];

/// Aggregate along one direction:
///
/// `L(p,d) = C(p,d) + min(L(p-r,d), L(p-r,d±1)+alpha, min_k L(p-r,k)+beta)
///          - min_k L(p-r,k)`
///
/// Path-start pixels (no in-bounds predecessor) carry their raw cost.
/// Pixels are visited so the predecessor `p - r` is always complete.
pub fn aggregate_path(cost: &CostVolume, dir: (i32, i32), alpha: u32, beta: u32) -> CostVolume {
    debug_assert!(alpha < beta, "penalties must satisfy alpha < beta");
    let (dx, dy) = dir;
    debug_assert!((dx, dy) != (0, 0) && dx.abs() <= 1 && dy.abs() <= 1);

    let width = cost.width();
    let height = cost.height();
    let disparities = cost.disparities();
    let mut out = CostVolume::zeroed(width, height, disparities);

    let ys: Vec<usize> = if dy >= 0 {
        (0..height).collect()
    } else {
        (0..height).rev().collect()
    };
    let xs: Vec<usize> = if dx >= 0 {
        (0..width).collect()
    } else {
        (0..width).rev().collect()
    };

    for &y in &ys {
        for &x in &xs {
            let px = x as i64 - dx as i64;
            let py = y as i64 - dy as i64;
            let in_bounds =
                px >= 0 && px < width as i64 && py >= 0 && py < height as i64;

            if !in_bounds {
                let base = cost.pixel(x, y).to_vec();
                out.pixel_mut(x, y).copy_from_slice(&base);
                continue;
            }

            let prev_start = ((py as usize) * width + px as usize) * disparities;
            let prev_end = prev_start + disparities;
            // Split borrow: predecessor cells are already final.
            let (prev, cur) = {
                let cur_start = (y * width + x) * disparities;
                let buf = out.costs_mut();
                if prev_end <= cur_start {
                    let (lo, hi) = buf.split_at_mut(cur_start);
                    (&lo[prev_start..prev_end], &mut hi[..disparities])
                } else {
                    let (lo, hi) = buf.split_at_mut(prev_start);
                    (
                        &hi[..disparities],
                        &mut lo[cur_start..cur_start + disparities],
                    )
                }
            };

            let prev_min = *prev.iter().min().expect("at least one disparity");
            let jump = prev_min + beta;
            let raw = cost.pixel(x, y);
            for d in 0..disparities {
                let mut best = prev[d];
                if d > 0 {
                    best = best.min(prev[d - 1] + alpha);
                }
                if d + 1 < disparities {
                    best = best.min(prev[d + 1] + alpha);
                }
                best = best.min(jump);
                cur[d] = raw[d] + best - prev_min;
            }
        }
    }

    out
}

/// Sum of the per-direction aggregations, `S(p,d) = sum_r L_r(p,d)`.
/// Directions run in parallel; integer addition keeps the result
/// independent of scheduling.
pub fn aggregate_all(cost: &CostVolume, alpha: u32, beta: u32) -> CostVolume {
    DIRECTIONS
        .par_iter()
        .map(|&dir| aggregate_path(cost, dir, alpha, beta))
        .reduce(
            || CostVolume::zeroed(cost.width(), cost.height(), cost.disparities()),
            |mut acc, volume| {
                for (a, &v) in acc.costs_mut().iter_mut().zip(volume.costs()) {
                    *a += v;
                }
                acc
            },
        )
}
