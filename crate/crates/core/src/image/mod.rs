//! Pixel containers, grayscale conversion, energy accounting and file I/O.

mod pgm;
mod png;

use std::path::Path;

use crate::{Error, Result};

pub use self::pgm::{decode_pgm, encode_pgm};
pub use self::png::{decode_png, encode_png_gray, encode_png_rgb};

/// A rectangular grid of 8-bit intensities stored row-major.
///
/// Viewed as a surface, pixel `(x, y)` has height `z = get(x, y)`.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct GrayImage {
    width: usize,
    height: usize,
    pixels: Vec<u8>,
}

impl GrayImage {
    pub fn new(width: usize, height: usize, pixels: Vec<u8>) -> Result<Self> {
        check_dims(width, height, pixels.len())?;
        Ok(Self {
            width,
            height,
            pixels,
        })
    }

    pub fn filled(width: usize, height: usize, value: u8) -> Result<Self> {
        Self::new(width, height, vec![value; width.saturating_mul(height)])
    }

    /// Builds an image by evaluating `f(x, y)` for every pixel.
    pub fn from_fn(width: usize, height: usize, mut f: impl FnMut(usize, usize) -> u8) -> Result<Self> {
        let mut pixels = Vec::with_capacity(width.saturating_mul(height));
        for y in 0..height {
            for x in 0..width {
                pixels.push(f(x, y));
            }
        }
        Self::new(width, height, pixels)
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn dims(&self) -> (usize, usize) {
        (self.width, self.height)
    }

    pub fn len(&self) -> usize {
        self.pixels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.pixels.is_empty()
    }

    pub fn pixels(&self) -> &[u8] {
        &self.pixels
    }

    pub fn pixels_mut(&mut self) -> &mut [u8] {
        &mut self.pixels
    }

    pub fn into_pixels(self) -> Vec<u8> {
        self.pixels
    }

    #[inline]
    pub fn get(&self, x: usize, y: usize) -> u8 {
        self.pixels[y * self.width + x]
    }

    #[inline]
    pub fn set(&mut self, x: usize, y: usize, value: u8) {
        self.pixels[y * self.width + x] = value;
    }

    pub fn rows(&self) -> impl Iterator<Item = &[u8]> {
        self.pixels.chunks_exact(self.width)
    }

    pub fn max(&self) -> u8 {
        self.pixels.iter().copied().max().unwrap_or(0)
    }

    pub fn min(&self) -> u8 {
        self.pixels.iter().copied().min().unwrap_or(0)
    }

    pub fn ensure_same_dims(&self, other: &GrayImage) -> Result<()> {
        if self.dims() != other.dims() {
            return Err(Error::DimensionMismatch(
                self.width,
                self.height,
                other.width,
                other.height,
            ));
        }
        Ok(())
    }
}

/// A rectangular grid of `[r, g, b]` triplets stored row-major.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RgbImage {
    width: usize,
    height: usize,
    pixels: Vec<[u8; 3]>,
}

impl RgbImage {
    pub fn new(width: usize, height: usize, pixels: Vec<[u8; 3]>) -> Result<Self> {
        check_dims(width, height, pixels.len())?;
        Ok(Self {
            width,
            height,
            pixels,
        })
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn pixels(&self) -> &[[u8; 3]] {
        &self.pixels
    }
}

fn check_dims(width: usize, height: usize, len: usize) -> Result<()> {
    if width == 0 || height == 0 || width.checked_mul(height) != Some(len) {
        return Err(Error::InvalidDimensions { width, height, len });
    }
    Ok(())
}

/// A decoded file: either already grayscale or RGB.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Image {
    Gray(GrayImage),
    Rgb(RgbImage),
}

impl Image {
    /// Collapses to grayscale, converting RGB with [`rgb_to_gray`].
    pub fn into_gray(self) -> GrayImage {
        match self {
            Image::Gray(g) => g,
            Image::Rgb(rgb) => rgb_to_gray(&rgb),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ImageFormat {
    Pgm,
    Png,
}

impl ImageFormat {
    /// Guesses the format from the leading magic bytes.
    pub fn sniff(bytes: &[u8]) -> Option<Self> {
        if bytes.starts_with(b"\x89PNG\r\n\x1a\n") {
            Some(ImageFormat::Png)
        } else if bytes.starts_with(b"P5") {
            Some(ImageFormat::Pgm)
        } else {
            None
        }
    }

    pub fn from_path(path: &Path) -> Option<Self> {
        let ext = path.extension()?.to_str()?.to_ascii_lowercase();
        match ext.as_str() {
            "png" => Some(ImageFormat::Png),
            "pgm" | "pnm" => Some(ImageFormat::Pgm),
            _ => None,
        }
    }
}

/// Luma weights (BT.601) in thousandths, so the weighted sum is exact.
const LUMA_R: u32 = 299;
const LUMA_G: u32 = 587;
const LUMA_B: u32 = 114;

/// Converts one RGB triplet to gray: `round(0.299 R + 0.587 G + 0.114 B)`,
/// ties away from zero.
#[inline]
pub fn luma(rgb: [u8; 3]) -> u8 {
    let [r, g, b] = rgb.map(u32::from);
    let weighted = LUMA_R * r + LUMA_G * g + LUMA_B * b;
    // Weights sum to 1000, so the result never exceeds 255.
    ((weighted + 500) / 1000) as u8
}

pub fn rgb_to_gray(img: &RgbImage) -> GrayImage {
    GrayImage {
        width: img.width,
        height: img.height,
        pixels: img.pixels.iter().copied().map(luma).collect(),
    }
}

/// Total intensity mass: the exact sum of all pixel values.
pub fn image_energy(img: &GrayImage) -> u64 {
    img.pixels.iter().map(|&p| u64::from(p)).sum()
}

pub fn load_image(bytes: &[u8], format: ImageFormat) -> Result<Image> {
    match format {
        ImageFormat::Pgm => decode_pgm(bytes).map(Image::Gray),
        ImageFormat::Png => decode_png(bytes),
    }
}

pub fn save_image(img: &Image, format: ImageFormat) -> Result<Vec<u8>> {
    match (img, format) {
        (Image::Gray(g), ImageFormat::Pgm) => Ok(encode_pgm(g)),
        (Image::Gray(g), ImageFormat::Png) => encode_png_gray(g),
        (Image::Rgb(rgb), ImageFormat::Png) => encode_png_rgb(rgb),
        (Image::Rgb(_), ImageFormat::Pgm) => Err(Error::UnsupportedColorType(
            "PGM output holds grayscale only".into(),
        )),
    }
}

/// Reads a file and sniffs its format from the magic bytes.
pub fn read_image_file(path: &Path) -> Result<Image> {
    let bytes = std::fs::read(path)?;
    let format = ImageFormat::sniff(&bytes)
        .ok_or_else(|| Error::MalformedFile("unrecognised magic bytes".into()))?;
    load_image(&bytes, format)
}
