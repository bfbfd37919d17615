//! Birchfield-Tomasi matching costs over intensity and gradient images,
//! plus the weighted blend of the two.

use crate::error::{Error, Result};
use crate::img::{GradientImage, GrayImage};
use crate::sgbm::CostVolume;

/// Cost assigned when the correspondence x - d falls left of the image, so
/// the argmin never favors large disparities at the border.
pub const OUT_OF_RANGE_COST: u32 = 255;

/// Sampling-insensitive dissimilarity of the left pixel against the
/// min/max envelope of the right pixel and its horizontal neighbors:
/// `max(0, L - max(R-1,R,R+1), min(R-1,R,R+1) - L)`. Neighbor reads are
/// edge-clamped.
pub fn bt_gray_cost(left: &GrayImage, right: &GrayImage, d_range: usize) -> Result<CostVolume> {
    if left.width() != right.width() || left.height() != right.height() {
        return Err(Error::Dimension(format!(
            "stereo pair {}x{} vs {}x{}",
            left.width(),
            left.height(),
            right.width(),
            right.height()
        )));
    }
    if d_range < 2 {
        return Err(Error::Parameter(format!(
            "disparity range must be at least 2, got {d_range}"
        )));
    }
    Ok(bt_volume(
        left.data(),
        right.data(),
        left.width(),
        left.height(),
        d_range,
    ))
}

/// Same construction with gradient magnitudes in place of intensities.
pub fn bt_grad_cost(
    left_grad: &GradientImage,
    right_grad: &GradientImage,
    d_range: usize,
) -> Result<CostVolume> {
    if left_grad.width() != right_grad.width() || left_grad.height() != right_grad.height() {
        return Err(Error::Dimension(format!(
            "gradient pair {}x{} vs {}x{}",
            left_grad.width(),
            left_grad.height(),
            right_grad.width(),
            right_grad.height()
        )));
    }
    if d_range < 2 {
        return Err(Error::Parameter(format!(
            "disparity range must be at least 2, got {d_range}"
        )));
    }
    Ok(bt_volume(
        left_grad.data(),
        right_grad.data(),
        left_grad.width(),
        left_grad.height(),
        d_range,
    ))
}

fn bt_volume(left: &[u8], right: &[u8], width: usize, height: usize, d_range: usize) -> CostVolume {
    let mut volume = CostVolume::zeroed(width, height, d_range);
    for y in 0..height {
        let left_row = &left[y * width..(y + 1) * width];
        let right_row = &right[y * width..(y + 1) * width];
        for (x, &left_value) in left_row.iter().enumerate() {
            let value = left_value as i32;
            let cell = volume.pixel_mut(x, y);
            for (d, cost) in cell.iter_mut().enumerate() {
                let q = x as i64 - d as i64;
                *cost = if q < 0 {
                    OUT_OF_RANGE_COST
                } else {
                    let sample = |xi: i64| right_row[xi.clamp(0, width as i64 - 1) as usize] as i32;
                    let (a, b, c) = (sample(q - 1), sample(q), sample(q + 1));
                    let hi = a.max(b).max(c);
                    let lo = a.min(b).min(c);
                    (value - hi).max(lo - value).max(0) as u32
                };
            }
        }
    }
    volume
}

/// Blend the intensity and gradient volumes:
/// `floor(((100 - eta) * gray + eta * grad) / 100)`.
pub fn combine_costs(gray: &CostVolume, grad: &CostVolume, eta: u32) -> Result<CostVolume> {
    if !gray.congruent(grad) {
        return Err(Error::Dimension(
            "cost volumes are not congruent".to_string(),
        ));
    }
    if !(1..=100).contains(&eta) {
        return Err(Error::Parameter(format!(
            "eta must be in [1, 100], got {eta}"
        )));
    }
    let mut combined = CostVolume::zeroed(gray.width(), gray.height(), gray.disparities());
    let out = combined.costs_mut();
    for (slot, (&g, &r)) in out.iter_mut().zip(gray.costs().iter().zip(grad.costs())) {
        *slot = ((100 - eta) * g + eta * r) / 100;
    }
    Ok(combined)
}
