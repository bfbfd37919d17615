//! Naive reference implementations used as oracles by the test suites.
//!
//! Everything here trades speed for obviousness and stays independent of
//! the optimized code paths it is used to check.

use crate::ga::Chromosome;
use crate::img::{is_valid, DisparityMap, GrayImage};
use crate::sgbm::CostVolume;
use crate::wls::WlsParams;

/// Path aggregation recomputed from scratch for every pixel: walk back to
/// the start of the pixel's path, then roll the recurrence forward along
/// the whole chain.
pub fn aggregate_path_naive(
    cost: &CostVolume,
    dir: (i32, i32),
    alpha: u32,
    beta: u32,
) -> CostVolume {
    let (dx, dy) = dir;
    let width = cost.width() as i64;
    let height = cost.height() as i64;
    let disparities = cost.disparities();
    let mut out = CostVolume::zeroed(cost.width(), cost.height(), disparities);

    for y in 0..height {
        for x in 0..width {
            // Chain of pixels from the path start up to (x, y).
            let mut chain = vec![(x, y)];
            loop {
                let (cx, cy) = *chain.last().unwrap();
                let (px, py) = (cx - dx as i64, cy - dy as i64);
                if px < 0 || px >= width || py < 0 || py >= height {
                    break;
                }
                chain.push((px, py));
            }
            chain.reverse();

            let at = |(cx, cy): (i64, i64), d: usize| cost.get(cx as usize, cy as usize, d);
            let mut l: Vec<u32> = (0..disparities).map(|d| at(chain[0], d)).collect();
            for &p in &chain[1..] {
                let prev_min = *l.iter().min().unwrap();
                let mut next = Vec::with_capacity(disparities);
                for d in 0..disparities {
                    let mut candidates = vec![l[d], prev_min + beta];
                    if d > 0 {
                        candidates.push(l[d - 1] + alpha);
                    }
                    if d + 1 < disparities {
                        candidates.push(l[d + 1] + alpha);
                    }
                    let transition = *candidates.iter().min().unwrap();
                    next.push(at(p, d) + transition - prev_min);
                }
                l = next;
            }

            let (ox, oy) = (x as usize, y as usize);
            out.pixel_mut(ox, oy).copy_from_slice(&l);
        }
    }
    out
}

/// Decoded parameter values recomputed digit by digit through decimal
/// string concatenation instead of positional arithmetic.
pub struct DigitwiseDecode {
    pub alpha: u32,
    pub beta_raw: u32,
    pub beta: u32,
    pub delta_lr: u32,
    pub eta: u32,
    pub gamma: u32,
    pub speckle_window: u32,
    pub speckle_range: u32,
    pub lambda: u32,
    pub sigma: f64,
}

pub fn decode_digitwise(chromosome: &Chromosome) -> DigitwiseDecode {
    let genes = chromosome.genes();
    let positional = |slice: &[u8]| -> u32 {
        // All genes but the last contribute the digit (gene - 1); the last
        // gene is added as-is, giving a range of [1, 10^n].
        let (last, digits) = slice.split_last().unwrap();
        let mut text = String::new();
        for &g in digits {
            text.push_str(&(g - 1).to_string());
        }
        let high: u32 = text.parse().unwrap();
        high * 10 + *last as u32
    };

    let alpha = positional(&genes[0..5]);
    let beta_raw = positional(&genes[5..10]);
    DigitwiseDecode {
        alpha,
        beta_raw,
        beta: beta_raw.max(alpha + 1),
        delta_lr: positional(&genes[10..12]),
        eta: positional(&genes[12..14]),
        gamma: positional(&genes[14..16]),
        speckle_window: positional(&genes[16..19]),
        speckle_range: positional(&genes[19..22]),
        lambda: positional(&genes[22..27]),
        sigma: format!("0.{}", genes[27] - 1).parse().unwrap(),
    }
}

/// Exact minimizer of the refinement energy on small maps, via a dense
/// normal-equation solve with Gaussian elimination. Edge weights are
/// recomputed here straight from the formula.
pub fn wls_dense_solve(
    initial: &DisparityMap,
    guide: &GrayImage,
    params: &WlsParams,
) -> DisparityMap {
    let width = initial.width();
    let height = initial.height();
    let sigma = params.sigma.max(0.01);
    let lambda = params.lambda as f64;

    let weight = |a: (usize, usize), b: (usize, usize)| -> f64 {
        let ia = guide.get(a.0, a.1) as f64 / 255.0;
        let ib = guide.get(b.0, b.1) as f64 / 255.0;
        (-(ia - ib).powi(2) / (2.0 * sigma * sigma)).exp()
    };

    // Unknowns are the valid pixels, in scan order.
    let mut index = vec![usize::MAX; width * height];
    let mut pixels = Vec::new();
    for y in 0..height {
        for x in 0..width {
            if initial.is_valid_at(x, y) {
                index[y * width + x] = pixels.len();
                pixels.push((x, y));
            }
        }
    }
    let n = pixels.len();
    if n == 0 {
        return initial.clone();
    }

    let mut matrix = vec![vec![0.0f64; n]; n];
    let mut rhs = vec![0.0f64; n];
    for (i, &(x, y)) in pixels.iter().enumerate() {
        matrix[i][i] = 1.0;
        rhs[i] = initial.get(x, y) as f64;
        let mut couple = |nx: usize, ny: usize| {
            let j = index[ny * width + nx];
            if j != usize::MAX {
                let w = lambda * weight((x, y), (nx, ny));
                matrix[i][i] += w;
                matrix[i][j] -= w;
            }
        };
        if x > 0 {
            couple(x - 1, y);
        }
        if x + 1 < width {
            couple(x + 1, y);
        }
        if y > 0 {
            couple(x, y - 1);
        }
        if y + 1 < height {
            couple(x, y + 1);
        }
    }

    // Gaussian elimination with partial pivoting.
    for col in 0..n {
        let pivot = (col..n)
            .max_by(|&a, &b| matrix[a][col].abs().total_cmp(&matrix[b][col].abs()))
            .unwrap();
        matrix.swap(col, pivot);
        rhs.swap(col, pivot);
        let diag = matrix[col][col];
        for row in col + 1..n {
            let factor = matrix[row][col] / diag;
            if factor == 0.0 {
                continue;
            }
            for k in col..n {
                matrix[row][k] -= factor * matrix[col][k];
            }
            rhs[row] -= factor * rhs[col];
        }
    }
    let mut solution = vec![0.0f64; n];
    for row in (0..n).rev() {
        let mut acc = rhs[row];
        for k in row + 1..n {
            acc -= matrix[row][k] * solution[k];
        }
        solution[row] = acc / matrix[row][row];
    }

    let mut out = initial.clone();
    for (i, &(x, y)) in pixels.iter().enumerate() {
        out.set(x, y, solution[i] as f32);
    }
    out
}

/// Refinement energy evaluated directly from its definition.
pub fn wls_energy_naive(
    map: &DisparityMap,
    initial: &DisparityMap,
    guide: &GrayImage,
    params: &WlsParams,
) -> f64 {
    let width = map.width();
    let height = map.height();
    let sigma = params.sigma.max(0.01);
    let lambda = params.lambda as f64;

    let mut energy = 0.0;
    for y in 0..height {
        for x in 0..width {
            if !is_valid(initial.get(x, y)) {
                continue;
            }
            let diff = map.get(x, y) as f64 - initial.get(x, y) as f64;
            energy += diff * diff;

            // Right and down neighbors cover each undirected edge once.
            for (nx, ny) in [(x + 1, y), (x, y + 1)] {
                if nx >= width || ny >= height || !is_valid(initial.get(nx, ny)) {
                    continue;
                }
                let ia = guide.get(x, y) as f64 / 255.0;
                let ib = guide.get(nx, ny) as f64 / 255.0;
                let w = (-(ia - ib).powi(2) / (2.0 * sigma * sigma)).exp();
                let step = map.get(x, y) as f64 - map.get(nx, ny) as f64;
                energy += lambda * w * step * step;
            }
        }
    }
    energy
}
