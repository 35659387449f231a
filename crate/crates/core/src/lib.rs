//! Selective de-noising of sparse-coloured grayscale images.
//!
//! The image is treated as a height field. A horizontal plane is pushed down
//! from the brightest peak until the part above it stops looking like a
//! scaled 2D Gaussian; that depth marks the base of the additive noise
//! envelope. The envelope is subtracted, the deviation between the actual
//! surface and the fitted Gaussian is accumulated into an error budget, and
//! the budget is redistributed into pixels brighter than a threshold `T`
//! where it has little visual impact.
//!
//! Modules:
//! - [`image`]: pixel containers, RGB to gray conversion, energy, PGM/PNG I/O
//! - [`noise`]: seeded additive white Gaussian noise
//! - [`envelope`]: slice-and-match detection of the Gaussian noise base
//! - [`redistribute`]: error field, noise stripping, budget redistribution
//! - [`metrics`]: MSE, PSNR, ROI-PSNR, SSIM, UIQI, energy retention
//! - [`baselines`]: mean/median/Gaussian filters and the FFT spectrum view
//! - [`cli`]: the `sparsedn` command-line front end
//! - [`synth`]: synthetic sparse scenes with planted envelopes

pub mod baselines;
pub mod cli;
pub mod envelope;
mod error;
pub mod image;
pub mod metrics;
pub mod noise;
pub mod redistribute;
pub mod synth;

pub use error::{Error, Result};
pub use image::{GrayImage, RgbImage};
