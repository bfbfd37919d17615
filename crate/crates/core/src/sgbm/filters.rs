//! Post-processing filters. All three only ever invalidate pixels; a
//! surviving pixel keeps its exact disparity value.

use crate::img::{is_valid, DisparityMap, INVALID_DISPARITY};
use crate::sgbm::disparity::argmin;
use crate::sgbm::CostVolume;

/// Reject pixels whose best aggregated cost is not sufficiently better
/// than the runner-up: keep p only if `S2 - S1 >= (gamma/100) * S1`, where
/// `S2` is the best cost at disparities non-adjacent to the minimum
/// (`|d - d*| > 1`). Comparison is exact in integers.
pub fn uniqueness_filter(
    aggregated: &CostVolume,
    map: &DisparityMap,
    gamma: u32,
) -> DisparityMap {
    let mut out = map.clone();
    for y in 0..aggregated.height() {
        for x in 0..aggregated.width() {
            if !map.is_valid_at(x, y) {
                continue;
            }
            let cell = aggregated.pixel(x, y);
            let best = argmin(cell);
            let s1 = cell[best] as u64;
            let s2 = cell
                .iter()
                .enumerate()
                .filter(|(d, _)| best.abs_diff(*d) > 1)
                .map(|(_, &c)| c as u64)
                .min();
            // No non-adjacent competitor means the minimum is trivially unique.
            if let Some(s2) = s2 {
                if 100 * (s2 - s1) < gamma as u64 * s1 {
                    out.set(x, y, INVALID_DISPARITY);
                }
            }
        }
    }
    out
}

/// Cross-check the left map against a right-view disparity synthesized
/// from the same aggregated volume, `D_R(x,y) = argmin_d S(x+d, y, d)`.
/// Pixels violating `|D_L(x,y) - D_R(x - D_L(x,y), y)| <= delta`, or whose
/// projection leaves the image, are invalidated.
pub fn lr_consistency(
    left_map: &DisparityMap,
    aggregated: &CostVolume,
    delta_lr: u32,
) -> DisparityMap {
    let width = aggregated.width();
    let height = aggregated.height();
    let disparities = aggregated.disparities();

    // Right-view reprojection: cost of right pixel xr at disparity d lives
    // at left pixel xr + d.
    let mut right_disp = vec![0u32; width * height];
    for y in 0..height {
        for xr in 0..width {
            let mut best_d = 0u32;
            let mut best_cost = u32::MAX;
            for d in 0..disparities {
                let xl = xr + d;
                if xl >= width {
                    break;
                }
                let c = aggregated.get(xl, y, d);
                if c < best_cost {
                    best_cost = c;
                    best_d = d as u32;
                }
            }
            right_disp[y * width + xr] = best_d;
        }
    }

    let mut out = left_map.clone();
    for y in 0..height {
        for x in 0..width {
            let dl = left_map.get(x, y);
            if !is_valid(dl) {
                continue;
            }
            let xr = (x as f64 - dl as f64).round() as i64;
            if xr < 0 || xr >= width as i64 {
                out.set(x, y, INVALID_DISPARITY);
                continue;
            }
            let dr = right_disp[y * width + xr as usize] as f32;
            if (dl - dr).abs() > delta_lr as f32 {
                out.set(x, y, INVALID_DISPARITY);
            }
        }
    }
    out
}

/// Remove small connected components. Components are 4-connected regions
/// of valid pixels whose neighboring disparities differ by at most
/// `speckle_range`; any component smaller than `speckle_window` pixels is
/// invalidated.
pub fn speckle_filter(map: &DisparityMap, speckle_window: u32, speckle_range: u32) -> DisparityMap {
    let width = map.width();
    let height = map.height();
    let range = speckle_range as f32;

    const UNLABELED: u32 = u32::MAX;
    let mut labels = vec![UNLABELED; width * height];
    let mut component_sizes: Vec<u32> = Vec::new();
    let mut stack: Vec<(usize, usize)> = Vec::new();

    for sy in 0..height {
        for sx in 0..width {
            if !map.is_valid_at(sx, sy) || labels[sy * width + sx] != UNLABELED {
                continue;
            }
            let label = component_sizes.len() as u32;
            let mut size = 0u32;
            labels[sy * width + sx] = label;
            stack.push((sx, sy));
            while let Some((x, y)) = stack.pop() {
                size += 1;
                let here = map.get(x, y);
                let mut visit = |nx: usize, ny: usize| {
                    let idx = ny * width + nx;
                    if labels[idx] == UNLABELED
                        && map.is_valid_at(nx, ny)
                        && (map.get(nx, ny) - here).abs() <= range
                    {
                        labels[idx] = label;
                        stack.push((nx, ny));
                    }
                };
                if x > 0 {
                    visit(x - 1, y);
                }
                if x + 1 < width {
                    visit(x + 1, y);
                }
                if y > 0 {
                    visit(x, y - 1);
                }
                if y + 1 < height {
                    visit(x, y + 1);
                }
            }
            component_sizes.push(size);
        }
    }

    let mut out = map.clone();
    for y in 0..height {
        for x in 0..width {
            let label = labels[y * width + x];
            if label != UNLABELED && component_sizes[label as usize] < speckle_window {
                out.set(x, y, INVALID_DISPARITY);
            }
        }
    }
    out
}
