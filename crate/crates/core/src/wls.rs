//! Edge-preserving weighted-least-squares refinement of a disparity map.
//!
//! Minimizes `sum_p (D(p) - D0(p))^2 + lambda * sum_(p,q) w_pq (D(p) - D(q))^2`
//! over the 4-neighbor graph of valid pixels, with weights
//! `w_pq = exp(-|I(p) - I(q)|^2 / (2 sigma^2))` on guide intensities
//! normalized to [0, 1]. The normal equations are symmetric positive
//! definite and solved by Jacobi-preconditioned conjugate gradients.

use crate::error::{Error, Result};
use crate::img::{DisparityMap, GrayImage};

/// Refinement parameters. `lambda` and `sigma` are the tuned pair; the
/// solver knobs are fixed configuration.
#[derive(Debug, Clone, PartialEq)]
pub struct WlsParams {
    /// Regularization strength, in [1, 100000].
    pub lambda: u32,
    /// Edge sensitivity, in [0, 0.99]. Zero is treated as 0.01, the
    /// smallest representable step, to keep the weight formula finite.
    pub sigma: f64,
    /// Conjugate-gradient iteration cap.
    pub max_iterations: usize,
    /// Relative residual threshold for convergence.
    pub tolerance: f64,
}

impl Default for WlsParams {
    fn default() -> Self {
        Self {
            lambda: 16,
            sigma: 0.5,
            max_iterations: 200,
            tolerance: 1e-4,
        }
    }
}

impl WlsParams {
    pub fn validate(&self) -> Result<()> {
        if !(1..=100_000).contains(&self.lambda) {
            return Err(Error::Parameter(format!(
                "lambda = {} outside [1, 100000]",
                self.lambda
            )));
        }
        if !(0.0..=0.99).contains(&self.sigma) {
            return Err(Error::Parameter(format!(
                "sigma = {} outside [0, 0.99]",
                self.sigma
            )));
        }
        Ok(())
    }
}

/// Per-edge smoothness weights of the 4-neighbor pixel graph.
#[derive(Debug, Clone)]
pub struct EdgeWeights {
    width: usize,
    height: usize,
    /// Weight of the edge (x, y) - (x+1, y); (width-1) * height entries.
    horizontal: Vec<f64>,
    /// Weight of the edge (x, y) - (x, y+1); width * (height-1) entries.
    vertical: Vec<f64>,
}

impl EdgeWeights {
    #[inline]
    pub fn horizontal(&self, x: usize, y: usize) -> f64 {
        self.horizontal[y * (self.width - 1) + x]
    }

    #[inline]
    pub fn vertical(&self, x: usize, y: usize) -> f64 {
        self.vertical[y * self.width + x]
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn height(&self) -> usize {
        self.height
    }
}

/// Edge-aware weights from guide intensities. Weights are in (0, 1] and
/// symmetric; equal intensities give weight exactly 1.
pub fn edge_weights(guide: &GrayImage, sigma: f64) -> EdgeWeights {
    let sigma = sigma.max(0.01);
    let width = guide.width();
    let height = guide.height();
    let inv = 1.0 / (2.0 * sigma * sigma);
    let weight = |a: u8, b: u8| {
        let diff = (a as f64 - b as f64) / 255.0;
        (-diff * diff * inv).exp()
    };

    let mut horizontal = Vec::with_capacity(width.saturating_sub(1) * height);
    for y in 0..height {
        for x in 0..width - 1 {
            horizontal.push(weight(guide.get(x, y), guide.get(x + 1, y)));
        }
    }
    let mut vertical = Vec::with_capacity(width * height.saturating_sub(1));
    for y in 0..height.saturating_sub(1) {
        for x in 0..width {
            vertical.push(weight(guide.get(x, y), guide.get(x, y + 1)));
        }
    }

    EdgeWeights {
        width,
        height,
        horizontal,
        vertical,
    }
}

/// Result of a refinement run.
#[derive(Debug, Clone)]
pub struct WlsRefinement {
    pub map: DisparityMap,
    /// False when the solver hit `max_iterations` before reaching
    /// `tolerance`; the map still holds the best iterate.
    pub converged: bool,
    pub iterations: usize,
}

/// Refine the valid pixels of `initial` against `guide`. Invalid pixels
/// stay invalid and do not participate in the energy. The returned map
/// never increases the refinement energy (up to numerical slack) and its
/// values stay inside the range of the valid input values.
pub fn wls_refine(
    initial: &DisparityMap,
    guide: &GrayImage,
    params: &WlsParams,
) -> Result<WlsRefinement> {
    params.validate()?;
    if initial.width() != guide.width() || initial.height() != guide.height() {
        return Err(Error::Dimension(format!(
            "disparity {}x{} vs guide {}x{}",
            initial.width(),
            initial.height(),
            guide.width(),
            guide.height()
        )));
    }

    let width = initial.width();
    let height = initial.height();
    let weights = edge_weights(guide, params.sigma);
    let lambda = params.lambda as f64;

    // Unknowns are the valid pixels in scan order.
    let mut index = vec![usize::MAX; width * height];
    let mut pixels: Vec<(usize, usize)> = Vec::new();
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
        return Ok(WlsRefinement {
            map: initial.clone(),
            converged: true,
            iterations: 0,
        });
    }

    // Off-diagonal structure (neighbor index, lambda * w) and the diagonal.
    let mut neighbors: Vec<Vec<(usize, f64)>> = vec![Vec::with_capacity(4); n];
    let mut diagonal = vec![1.0f64; n];
    for (i, &(x, y)) in pixels.iter().enumerate() {
        let mut couple = |nx: usize, ny: usize, w: f64| {
            let j = index[ny * width + nx];
            if j != usize::MAX {
                let lw = lambda * w;
                diagonal[i] += lw;
                neighbors[i].push((j, lw));
            }
        };
        if x > 0 {
            couple(x - 1, y, weights.horizontal(x - 1, y));
        }
        if x + 1 < width {
            couple(x + 1, y, weights.horizontal(x, y));
        }
        if y > 0 {
            couple(x, y - 1, weights.vertical(x, y - 1));
        }
        if y + 1 < height {
            couple(x, y + 1, weights.vertical(x, y));
        }
    }

    let matvec = |x: &[f64], out: &mut [f64]| {
        for i in 0..n {
            let mut acc = diagonal[i] * x[i];
            for &(j, lw) in &neighbors[i] {
                acc -= lw * x[j];
            }
            out[i] = acc;
        }
    };

    let b: Vec<f64> = pixels.iter().map(|&(x, y)| initial.get(x, y) as f64).collect();
    let b_norm = b.iter().map(|v| v * v).sum::<f64>().sqrt().max(f64::MIN_POSITIVE);

    // PCG starting from the data term itself.
    let mut x = b.clone();
    let mut r = vec![0.0f64; n];
    matvec(&x, &mut r);
    for i in 0..n {
        r[i] = b[i] - r[i];
    }
    let mut z: Vec<f64> = (0..n).map(|i| r[i] / diagonal[i]).collect();
    let mut p = z.clone();
    let mut rz: f64 = r.iter().zip(&z).map(|(a, b)| a * b).sum();
    let mut ap = vec![0.0f64; n];

    let mut converged = false;
    let mut iterations = 0;
    for _ in 0..params.max_iterations {
        let res_norm = r.iter().map(|v| v * v).sum::<f64>().sqrt();
        if res_norm / b_norm <= params.tolerance {
            converged = true;
            break;
        }
        matvec(&p, &mut ap);
        let pap: f64 = p.iter().zip(&ap).map(|(a, b)| a * b).sum();
        if pap <= 0.0 {
            break;
        }
        let step = rz / pap;
        for i in 0..n {
            x[i] += step * p[i];
            r[i] -= step * ap[i];
        }
        for i in 0..n {
            z[i] = r[i] / diagonal[i];
        }
        let rz_next: f64 = r.iter().zip(&z).map(|(a, b)| a * b).sum();
        let dir = rz_next / rz;
        for i in 0..n {
            p[i] = z[i] + dir * p[i];
        }
        rz = rz_next;
        iterations += 1;
    }
    if !converged {
        let res_norm = r.iter().map(|v| v * v).sum::<f64>().sqrt();
        converged = res_norm / b_norm <= params.tolerance;
    }

    // The exact minimizer is a convex combination of the valid inputs;
    // clamping strips solver overshoot without raising the energy.
    let lo = b.iter().copied().fold(f64::INFINITY, f64::min);
    let hi = b.iter().copied().fold(f64::NEG_INFINITY, f64::max);

    let mut map = initial.clone();
    for (i, &(px, py)) in pixels.iter().enumerate() {
        map.set(px, py, x[i].clamp(lo, hi) as f32);
    }
    Ok(WlsRefinement {
        map,
        converged,
        iterations,
    })
}
