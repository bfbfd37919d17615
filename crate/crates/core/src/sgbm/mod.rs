//! Semi-global matching: cost construction, eight-path aggregation,
//! winner-take-all selection with sub-pixel refinement, and the
//! uniqueness / left-right / speckle post-processing filters.

mod aggregate;
mod cost;
mod disparity;
mod filters;

pub use aggregate::{aggregate_all, aggregate_path, DIRECTIONS};
pub use cost::{bt_grad_cost, bt_gray_cost, combine_costs, OUT_OF_RANGE_COST};
pub use disparity::{select_disparity, subpixel_refine};
pub use filters::{lr_consistency, speckle_filter, uniqueness_filter};

use crate::error::{Error, Result};
use crate::img::{sobel_magnitude, DisparityMap, GrayImage};

/// The tunable matching parameters.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct MatchParams {
    /// Small smoothness penalty for one-step disparity changes, in [1, 100000].
    pub alpha: u32,
    /// Large smoothness penalty for disparity jumps; alpha < beta <= 200000.
    pub beta: u32,
    /// Gradient-vs-intensity blend weight, in [1, 100].
    pub eta: u32,
    /// Uniqueness ratio (percent margin over the best cost), in [1, 100].
    pub gamma: u32,
    /// Left-right consistency threshold in pixels, in [1, 100].
    pub delta_lr: u32,
    /// Minimum surviving component size in pixels, in [1, 1000].
    pub speckle_window: u32,
    /// Disparity similarity within a speckle component, in [1, 1000].
    pub speckle_range: u32,
    /// Number of disparity hypotheses (d in 0..num_disparities), >= 2.
    /// Fixed configuration, not part of the tuned set.
    pub num_disparities: usize,
}

pub const DEFAULT_NUM_DISPARITIES: usize = 64;

impl Default for MatchParams {
    fn default() -> Self {
        Self {
            alpha: 8,
            beta: 120,
            eta: 50,
            gamma: 15,
            delta_lr: 2,
            speckle_window: 100,
            speckle_range: 2,
            num_disparities: DEFAULT_NUM_DISPARITIES,
        }
    }
}

impl MatchParams {
    pub fn validate(&self) -> Result<()> {
        let check = |name: &str, value: u32, lo: u32, hi: u32| {
            if (lo..=hi).contains(&value) {
                Ok(())
            } else {
                Err(Error::Parameter(format!(
                    "{name} = {value} outside [{lo}, {hi}]"
                )))
            }
        };
        check("alpha", self.alpha, 1, 100_000)?;
        check("beta", self.beta, 2, 200_000)?;
        if self.alpha >= self.beta {
            return Err(Error::Parameter(format!(
                "alpha ({}) must be less than beta ({})",
                self.alpha, self.beta
            )));
        }
        check("eta", self.eta, 1, 100)?;
        check("gamma", self.gamma, 1, 100)?;
        check("delta_lr", self.delta_lr, 1, 100)?;
        check("speckle_window", self.speckle_window, 1, 1000)?;
        check("speckle_range", self.speckle_range, 1, 1000)?;
        if self.num_disparities < 2 {
            return Err(Error::Parameter(format!(
                "num_disparities must be at least 2, got {}",
                self.num_disparities
            )));
        }
        Ok(())
    }
}

/// Non-negative integer matching costs indexed by (y, x, d).
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CostVolume {
    width: usize,
    height: usize,
    disparities: usize,
    costs: Vec<u32>,
}

impl CostVolume {
    pub fn zeroed(width: usize, height: usize, disparities: usize) -> Self {
        Self {
            width,
            height,
            disparities,
            costs: vec![0; width * height * disparities],
        }
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn disparities(&self) -> usize {
        self.disparities
    }

    pub fn costs(&self) -> &[u32] {
        &self.costs
    }

    pub fn costs_mut(&mut self) -> &mut [u32] {
        &mut self.costs
    }

    #[inline]
    pub fn get(&self, x: usize, y: usize, d: usize) -> u32 {
        self.costs[(y * self.width + x) * self.disparities + d]
    }

    #[inline]
    pub fn set(&mut self, x: usize, y: usize, d: usize, cost: u32) {
        self.costs[(y * self.width + x) * self.disparities + d] = cost;
    }

    /// All disparity costs for one pixel.
    #[inline]
    pub fn pixel(&self, x: usize, y: usize) -> &[u32] {
        let start = (y * self.width + x) * self.disparities;
        &self.costs[start..start + self.disparities]
    }

    #[inline]
    pub fn pixel_mut(&mut self, x: usize, y: usize) -> &mut [u32] {
        let start = (y * self.width + x) * self.disparities;
        &mut self.costs[start..start + self.disparities]
    }

    pub fn congruent(&self, other: &CostVolume) -> bool {
        self.width == other.width
            && self.height == other.height
            && self.disparities == other.disparities
    }
}

/// The full matching pipeline: Sobel gradients, blended Birchfield-Tomasi
/// costs, eight-path aggregation, winner-take-all with sub-pixel
/// refinement, then uniqueness, left-right, and speckle filtering in that
/// order. Deterministic for fixed inputs regardless of worker count.
pub fn run_sgbm(left: &GrayImage, right: &GrayImage, params: &MatchParams) -> Result<DisparityMap> {
    params.validate()?;
    if left.width() != right.width() || left.height() != right.height() {
        return Err(Error::Dimension(format!(
            "stereo pair {}x{} vs {}x{}",
            left.width(),
            left.height(),
            right.width(),
            right.height()
        )));
    }

    let left_grad = sobel_magnitude(left)?;
    let right_grad = sobel_magnitude(right)?;

    let gray = bt_gray_cost(left, right, params.num_disparities)?;
    let grad = bt_grad_cost(&left_grad, &right_grad, params.num_disparities)?;
    let combined = combine_costs(&gray, &grad, params.eta)?;

    let aggregated = aggregate_all(&combined, params.alpha, params.beta);

    let selected = select_disparity(&aggregated);
    let refined = subpixel_refine(&aggregated, &selected);
    let unique = uniqueness_filter(&aggregated, &refined, params.gamma);
    let consistent = lr_consistency(&unique, &aggregated, params.delta_lr);
    Ok(speckle_filter(
        &consistent,
        params.speckle_window,
        params.speckle_range,
    ))
}
