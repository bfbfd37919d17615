//! Synthetic stereo pairs with exact ground truth: the right image is a
//! deterministic textured pattern and the left image is the same pattern
//! shifted by a constant disparity, so `left(x, y) = right(x - d, y)`
//! holds by construction wherever the correspondence exists.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::img::{DisparityMap, GrayImage};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Pattern {
    /// Independent uniform pixel noise; the high-texture default.
    UniformNoise,
    /// Horizontal stripes, textureless along the match direction.
    Bands,
    /// 8x8 checkerboard; periodic and deliberately ambiguous.
    Checker,
}

impl std::str::FromStr for Pattern {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, String> {
        match s {
            "uniform-noise" => Ok(Pattern::UniformNoise),
            "bands" => Ok(Pattern::Bands),
            "checker" => Ok(Pattern::Checker),
            other => Err(format!(
                "unknown pattern \"{other}\" (expected uniform-noise, bands, or checker)"
            )),
        }
    }
}

#[derive(Debug, Clone)]
pub struct SynthSpec {
    pub width: usize,
    pub height: usize,
    /// Constant scene disparity in whole pixels.
    pub true_disparity: usize,
    pub pattern: Pattern,
    pub noise_seed: u64,
}

/// Generate (left, right, ground truth). The ground truth carries
/// `true_disparity` everywhere a correspondence exists and the invalid
/// sentinel in the left border strip of width `true_disparity`.
pub fn generate(spec: &SynthSpec) -> Result<(GrayImage, GrayImage, DisparityMap)> {
    if spec.width == 0 || spec.height == 0 {
        return Err(Error::Parameter(format!(
            "degenerate dimensions {}x{}",
            spec.width, spec.height
        )));
    }
    if spec.true_disparity >= spec.width / 2 {
        return Err(Error::Parameter(format!(
            "true disparity {} leaves too little overlap for width {} (must be < width/2)",
            spec.true_disparity, spec.width
        )));
    }

    let width = spec.width;
    let height = spec.height;
    let right_data = render_pattern(spec);
    let mut left_data = vec![0u8; width * height];
    let mut gt = DisparityMap::invalid(width, height);

    for y in 0..height {
        for x in 0..width {
            let src = x.saturating_sub(spec.true_disparity);
            left_data[y * width + x] = right_data[y * width + src];
            if x >= spec.true_disparity {
                gt.set(x, y, spec.true_disparity as f32);
            }
        }
    }

    let right = GrayImage::from_raw(width, height, right_data)?;
    let left = GrayImage::from_raw(width, height, left_data)?;
    Ok((left, right, gt))
}

fn render_pattern(spec: &SynthSpec) -> Vec<u8> {
    let width = spec.width;
    let height = spec.height;
    let mut rng = ChaCha8Rng::seed_from_u64(spec.noise_seed);
    match spec.pattern {
        Pattern::UniformNoise => (0..width * height).map(|_| rng.random::<u8>()).collect(),
        Pattern::Bands => {
            let stripes = height.div_ceil(8);
            let shades: Vec<u8> = (0..stripes).map(|_| rng.random::<u8>()).collect();
            (0..width * height)
                .map(|i| shades[(i / width) / 8])
                .collect()
        }
        Pattern::Checker => (0..width * height)
            .map(|i| {
                let (x, y) = (i % width, i / width);
                if (x / 8 + y / 8) % 2 == 0 {
                    64
                } else {
                    192
                }
            })
            .collect(),
    }
}
