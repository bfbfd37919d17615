//! Stereo disparity estimation with automatic parameter tuning.
//!
//! The pipeline combines semi-global matching over a Birchfield-Tomasi
//! cost volume with an edge-preserving weighted-least-squares refinement
//! pass. Nine pipeline parameters are exposed through an integer-gene
//! chromosome so a genetic algorithm can tune them against a ground-truth
//! disparity map, scored by MSE, PSNR, or SSIM.
//!
//! Modules:
//! - [`img`]: raster types, PGM/PFM file I/O, Sobel gradients
//! - [`sgbm`]: cost volume construction, path aggregation, disparity
//!   selection, and the post-processing filters
//! - [`wls`]: weighted-least-squares disparity refinement
//! - [`metrics`]: MSE / PSNR / SSIM against ground truth
//! - [`ga`]: chromosome encoding, evolutionary operators, optimization loop
//! - [`synth`]: synthetic stereo pairs with exact ground truth
//! - [`reference`]: naive reference implementations used as test oracles

pub mod error;
pub mod ga;
pub mod img;
pub mod metrics;
pub mod reference;
pub mod sgbm;
pub mod synth;
pub mod wls;

pub use error::{Error, Result};
pub use img::{DisparityMap, GradientImage, GrayImage};
pub use sgbm::{CostVolume, MatchParams};
pub use wls::WlsParams;
