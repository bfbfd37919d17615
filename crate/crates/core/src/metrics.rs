//! Disparity map quality metrics: MSE, PSNR, and SSIM.
//!
//! Invalid pixels are substituted with 0.0 in both maps before any metric
//! is computed, so configurations that invalidate everything score badly
//! instead of vacuously well.

use crate::error::{Error, Result};
use crate::img::{is_valid, DisparityMap};

/// Side length of the SSIM window.
const SSIM_WINDOW: usize = 11;
const SSIM_RADIUS: usize = SSIM_WINDOW / 2;
const SSIM_SIGMA: f64 = 1.5;
const SSIM_K1: f64 = 0.01;
const SSIM_K2: f64 = 0.03;

/// The three scores for one prediction, plus how many of its pixels were
/// valid before the invalid-to-zero substitution.
#[derive(Debug, Clone, PartialEq)]
pub struct MetricReport {
    pub mse: f64,
    pub psnr: f64,
    pub ssim: f64,
    pub valid_pixel_count: usize,
}

impl MetricReport {
    pub fn compute(gt: &DisparityMap, pred: &DisparityMap, d_max: f64) -> Result<Self> {
        Ok(Self {
            mse: mse(gt, pred)?,
            psnr: psnr(gt, pred, d_max)?,
            ssim: ssim(gt, pred, d_max)?,
            valid_pixel_count: pred.valid_count(),
        })
    }
}

fn check_congruent(gt: &DisparityMap, pred: &DisparityMap) -> Result<()> {
    if !gt.same_dims(pred) {
        return Err(Error::Dimension(format!(
            "ground truth {}x{} vs prediction {}x{}",
            gt.width(),
            gt.height(),
            pred.width(),
            pred.height()
        )));
    }
    Ok(())
}

#[inline]
fn substituted(value: f32) -> f64 {
    if is_valid(value) {
        value as f64
    } else {
        0.0
    }
}

/// Mean squared disparity error over all pixels.
pub fn mse(gt: &DisparityMap, pred: &DisparityMap) -> Result<f64> {
    check_congruent(gt, pred)?;
    let n = gt.data().len() as f64;
    let sum: f64 = gt
        .data()
        .iter()
        .zip(pred.data())
        .map(|(&a, &b)| {
            let diff = substituted(a) - substituted(b);
            diff * diff
        })
        .sum();
    Ok(sum / n)
}

/// `10 * log10(d_max^2 / MSE)` in decibels; +infinity for a perfect match.
pub fn psnr(gt: &DisparityMap, pred: &DisparityMap, d_max: f64) -> Result<f64> {
    if d_max <= 0.0 {
        return Err(Error::Parameter(format!("d_max must be positive, got {d_max}")));
    }
    let mse = mse(gt, pred)?;
    if mse == 0.0 {
        return Ok(f64::INFINITY);
    }
    Ok(10.0 * (d_max * d_max / mse).log10())
}

/// Mean structural similarity over all positions where the 11x11 Gaussian
/// window (sigma 1.5) fits, with `C1 = (0.01 d_max)^2` and
/// `C2 = (0.03 d_max)^2`.
pub fn ssim(gt: &DisparityMap, pred: &DisparityMap, d_max: f64) -> Result<f64> {
    check_congruent(gt, pred)?;
    if d_max <= 0.0 {
        return Err(Error::Parameter(format!("d_max must be positive, got {d_max}")));
    }
    let width = gt.width();
    let height = gt.height();
    if width < SSIM_WINDOW || height < SSIM_WINDOW {
        return Err(Error::Dimension(format!(
            "ssim needs at least {SSIM_WINDOW}x{SSIM_WINDOW}, got {width}x{height}"
        )));
    }

    let a: Vec<f64> = gt.data().iter().map(|&v| substituted(v)).collect();
    let b: Vec<f64> = pred.data().iter().map(|&v| substituted(v)).collect();
    let kernel = gaussian_kernel();

    let c1 = (SSIM_K1 * d_max).powi(2);
    let c2 = (SSIM_K2 * d_max).powi(2);

    let mut total = 0.0;
    let mut count = 0usize;
    for cy in SSIM_RADIUS..height - SSIM_RADIUS {
        for cx in SSIM_RADIUS..width - SSIM_RADIUS {
            let mut mu_a = 0.0;
            let mut mu_b = 0.0;
            let mut aa = 0.0;
            let mut bb = 0.0;
            let mut ab = 0.0;
            let mut k = 0;
            for wy in 0..SSIM_WINDOW {
                let row = (cy + wy - SSIM_RADIUS) * width + cx - SSIM_RADIUS;
                for wx in 0..SSIM_WINDOW {
                    let weight = kernel[k];
                    k += 1;
                    let va = a[row + wx];
                    let vb = b[row + wx];
                    mu_a += weight * va;
                    mu_b += weight * vb;
                    aa += weight * (va * va);
                    bb += weight * (vb * vb);
                    // Grouped so swapping the inputs reproduces the exact
                    // same roundings.
                    ab += weight * (va * vb);
                }
            }
            let var_a = aa - mu_a * mu_a;
            let var_b = bb - mu_b * mu_b;
            let cov = ab - mu_a * mu_b;
            let score = ((2.0 * (mu_a * mu_b) + c1) * (2.0 * cov + c2))
                / ((mu_a * mu_a + mu_b * mu_b + c1) * (var_a + var_b + c2));
            total += score;
            count += 1;
        }
    }
    Ok(total / count as f64)
}

fn gaussian_kernel() -> [f64; SSIM_WINDOW * SSIM_WINDOW] {
    let mut kernel = [0.0; SSIM_WINDOW * SSIM_WINDOW];
    let mut sum = 0.0;
    for y in 0..SSIM_WINDOW {
        for x in 0..SSIM_WINDOW {
            let dx = x as f64 - SSIM_RADIUS as f64;
            let dy = y as f64 - SSIM_RADIUS as f64;
            let value = (-(dx * dx + dy * dy) / (2.0 * SSIM_SIGMA * SSIM_SIGMA)).exp();
            kernel[y * SSIM_WINDOW + x] = value;
            sum += value;
        }
    }
    for v in kernel.iter_mut() {
        *v /= sum;
    }
    kernel
}
