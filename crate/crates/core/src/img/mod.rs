//! Raster types, PGM/PFM file I/O, and Sobel gradient preprocessing.

mod pfm;
mod pgm;

pub use pfm::{load_pfm, save_pfm};
pub use pgm::{load_pgm, save_pgm};

use crate::error::{Error, Result};

/// Disparity value marking a pixel with no usable estimate. Used both in
/// memory and on disk.
pub const INVALID_DISPARITY: f32 = -1.0;

/// 8-bit single-channel image, row-major.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct GrayImage {
    width: usize,
    height: usize,
    data: Vec<u8>,
}

impl GrayImage {
    pub fn from_raw(width: usize, height: usize, data: Vec<u8>) -> Result<Self> {
        if width == 0 || height == 0 {
            return Err(Error::Dimension(format!(
                "image dimensions must be positive, got {width}x{height}"
            )));
        }
        if data.len() != width * height {
            return Err(Error::Dimension(format!(
                "pixel buffer length {} does not match {width}x{height}",
                data.len()
            )));
        }
        Ok(Self {
            width,
            height,
            data,
        })
    }

    pub fn filled(width: usize, height: usize, value: u8) -> Result<Self> {
        Self::from_raw(width, height, vec![value; width * height])
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn data(&self) -> &[u8] {
        &self.data
    }

    #[inline]
    pub fn get(&self, x: usize, y: usize) -> u8 {
        self.data[y * self.width + x]
    }

    /// Sample with clamp-to-edge semantics for out-of-bounds coordinates.
    #[inline]
    pub fn get_clamped(&self, x: i64, y: i64) -> u8 {
        let x = x.clamp(0, self.width as i64 - 1) as usize;
        let y = y.clamp(0, self.height as i64 - 1) as usize;
        self.data[y * self.width + x]
    }

    pub fn row(&self, y: usize) -> &[u8] {
        &self.data[y * self.width..(y + 1) * self.width]
    }
}

/// Per-pixel Sobel gradient magnitudes, quantized to the 8-bit range of the
/// source intensities so the two can be blended on equal footing.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct GradientImage {
    width: usize,
    height: usize,
    data: Vec<u8>,
}

impl GradientImage {
    pub fn width(&self) -> usize {
        self.width
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn data(&self) -> &[u8] {
        &self.data
    }

    #[inline]
    pub fn get(&self, x: usize, y: usize) -> u8 {
        self.data[y * self.width + x]
    }

    #[inline]
    pub fn get_clamped(&self, x: i64, y: i64) -> u8 {
        let x = x.clamp(0, self.width as i64 - 1) as usize;
        let y = y.clamp(0, self.height as i64 - 1) as usize;
        self.data[y * self.width + x]
    }
}

/// Floating-point disparity raster. Every value is either
/// [`INVALID_DISPARITY`] or a disparity in pixels.
#[derive(Debug, Clone, PartialEq)]
pub struct DisparityMap {
    width: usize,
    height: usize,
    data: Vec<f32>,
}

impl DisparityMap {
    pub fn from_raw(width: usize, height: usize, data: Vec<f32>) -> Result<Self> {
        if width == 0 || height == 0 {
            return Err(Error::Dimension(format!(
                "map dimensions must be positive, got {width}x{height}"
            )));
        }
        if data.len() != width * height {
            return Err(Error::Dimension(format!(
                "disparity buffer length {} does not match {width}x{height}",
                data.len()
            )));
        }
        Ok(Self {
            width,
            height,
            data,
        })
    }

    /// Map with every pixel marked invalid.
    pub fn invalid(width: usize, height: usize) -> Self {
        Self {
            width,
            height,
            data: vec![INVALID_DISPARITY; width * height],
        }
    }

    pub fn filled(width: usize, height: usize, value: f32) -> Self {
        Self {
            width,
            height,
            data: vec![value; width * height],
        }
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn data(&self) -> &[f32] {
        &self.data
    }

    pub fn data_mut(&mut self) -> &mut [f32] {
        &mut self.data
    }

    #[inline]
    pub fn get(&self, x: usize, y: usize) -> f32 {
        self.data[y * self.width + x]
    }

    #[inline]
    pub fn set(&mut self, x: usize, y: usize, value: f32) {
        self.data[y * self.width + x] = value;
    }

    #[inline]
    pub fn is_valid_at(&self, x: usize, y: usize) -> bool {
        is_valid(self.get(x, y))
    }

    pub fn valid_count(&self) -> usize {
        self.data.iter().filter(|&&v| is_valid(v)).count()
    }

    pub fn same_dims(&self, other: &DisparityMap) -> bool {
        self.width == other.width && self.height == other.height
    }
}

#[inline]
pub fn is_valid(value: f32) -> bool {
    value >= 0.0
}

/// Sobel gradient magnitude, `min(255, round(sqrt(gx^2 + gy^2) / 4))` with
/// the standard 3x3 kernels and clamp-to-edge sampling at the borders. The
/// divisor keeps the output in the same 8-bit range as the input.
pub fn sobel_magnitude(img: &GrayImage) -> Result<GradientImage> {
    if img.width() < 3 || img.height() < 3 {
        return Err(Error::Dimension(format!(
            "sobel needs at least 3x3 input, got {}x{}",
            img.width(),
            img.height()
        )));
    }

    let width = img.width();
    let height = img.height();
    let mut data = vec![0u8; width * height];

    for y in 0..height {
        for x in 0..width {
            let s = |dx: i64, dy: i64| img.get_clamped(x as i64 + dx, y as i64 + dy) as i64;

            let gx = (s(1, -1) + 2 * s(1, 0) + s(1, 1)) - (s(-1, -1) + 2 * s(-1, 0) + s(-1, 1));
            let gy = (s(-1, 1) + 2 * s(0, 1) + s(1, 1)) - (s(-1, -1) + 2 * s(0, -1) + s(1, -1));

            let mag = (((gx * gx + gy * gy) as f64).sqrt() / 4.0).round();
            data[y * width + x] = mag.min(255.0) as u8;
        }
    }

    Ok(GradientImage {
        width,
        height,
        data,
    })
}
