//! Full-reference quality metrics for image pairs.

mod ssim;
mod uiqi;

pub use ssim::ssim;
pub use uiqi::uiqi;

use crate::image::image_energy;
use crate::{Error, GrayImage, Result};

const PEAK_SQ: f64 = 255.0 * 255.0;

/// Per-pixel membership in a region of interest.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RoiMask {
    width: usize,
    height: usize,
    member: Vec<bool>,
}

impl RoiMask {
    pub fn new(width: usize, height: usize, member: Vec<bool>) -> Result<Self> {
        if width == 0 || height == 0 || width * height != member.len() {
            return Err(Error::InvalidDimensions {
                width,
                height,
                len: member.len(),
            });
        }
        Ok(Self {
            width,
            height,
            member,
        })
    }

    pub fn full(width: usize, height: usize) -> Result<Self> {
        Self::new(width, height, vec![true; width * height])
    }

    pub fn members(&self) -> &[bool] {
        &self.member
    }

    pub fn count(&self) -> usize {
        self.member.iter().filter(|&&m| m).count()
    }

    pub fn dims(&self) -> (usize, usize) {
        (self.width, self.height)
    }
}

fn squared_error_sum<'a>(pairs: impl Iterator<Item = (&'a u8, &'a u8)>) -> (u64, u64) {
    pairs.fold((0u64, 0u64), |(sum, n), (&a, &b)| {
        let d = i64::from(a) - i64::from(b);
        (sum + (d * d) as u64, n + 1)
    })
}

pub fn mse(a: &GrayImage, b: &GrayImage) -> Result<f64> {
    a.ensure_same_dims(b)?;
    let (sum, n) = squared_error_sum(a.pixels().iter().zip(b.pixels()));
    Ok(sum as f64 / n as f64)
}

fn psnr_from_mse(mse: f64) -> f64 {
    if mse == 0.0 {
        f64::INFINITY
    } else {
        10.0 * (PEAK_SQ / mse).log10()
    }
}

/// `10 log10(255^2 / MSE)`, infinite for identical images.
pub fn psnr(a: &GrayImage, b: &GrayImage) -> Result<f64> {
    mse(a, b).map(psnr_from_mse)
}

/// PSNR over the mask's member pixels only.
pub fn psnr_roi(a: &GrayImage, b: &GrayImage, mask: &RoiMask) -> Result<f64> {
    a.ensure_same_dims(b)?;
    if mask.dims() != a.dims() {
        let (w, h) = mask.dims();
        return Err(Error::DimensionMismatch(a.width(), a.height(), w, h));
    }
    let (sum, n) = squared_error_sum(
        a.pixels()
            .iter()
            .zip(b.pixels())
            .zip(&mask.member)
            .filter(|(_, &m)| m)
            .map(|(pair, _)| pair),
    );
    if n == 0 {
        return Err(Error::EmptyMask);
    }
    Ok(psnr_from_mse(sum as f64 / n as f64))
}

/// The non-white part of the reference: pixels at or below `t`.
pub fn crucial_mask(reference: &GrayImage, t: u8) -> Result<RoiMask> {
    let member: Vec<bool> = reference.pixels().iter().map(|&p| p <= t).collect();
    if !member.contains(&true) {
        return Err(Error::EmptyMask);
    }
    RoiMask::new(reference.width(), reference.height(), member)
}

/// `energy(after) / energy(before)`.
pub fn energy_retention(before: &GrayImage, after: &GrayImage) -> Result<f64> {
    before.ensure_same_dims(after)?;
    let reference = image_energy(before);
    if reference == 0 {
        return Err(Error::ZeroEnergyReference);
    }
    Ok(image_energy(after) as f64 / reference as f64)
}

#[derive(Debug, Clone, PartialEq)]
pub struct QualityReport {
    pub mse: f64,
    pub psnr_db: f64,
    /// Absent when no region of interest was supplied.
    pub psnr_roi_db: Option<f64>,
    pub ssim: f64,
    pub uiqi: f64,
    /// `energy(candidate) / energy(reference)`; NaN for a zero-energy reference.
    pub energy_retention: f64,
}

impl QualityReport {
    /// Compares `candidate` against `reference`.
    pub fn compute(reference: &GrayImage, candidate: &GrayImage, roi: Option<&RoiMask>) -> Result<Self> {
        let mse = mse(reference, candidate)?;
        let psnr_roi_db = roi.map(|m| psnr_roi(reference, candidate, m)).transpose()?;
        let energy_retention = match energy_retention(reference, candidate) {
            Ok(r) => r,
            Err(Error::ZeroEnergyReference) => f64::NAN,
            Err(e) => return Err(e),
        };
        Ok(Self {
            mse,
            psnr_db: psnr_from_mse(mse),
            psnr_roi_db,
            ssim: ssim(reference, candidate)?,
            uiqi: uiqi(reference, candidate)?,
            energy_retention,
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn pattern(w: usize, h: usize, k: usize) -> GrayImage {
        GrayImage::from_fn(w, h, |x, y| ((x * 17 + y * 29 + k * x * y) % 256) as u8).unwrap()
    }

    #[test]
    fn mse_examples() {
        let a = pattern(9, 9, 3);
        assert_eq!(mse(&a, &a).unwrap(), 0.0);
        let zeros = GrayImage::filled(4, 4, 0).unwrap();
        let full = GrayImage::filled(4, 4, 255).unwrap();
        assert_eq!(mse(&zeros, &full).unwrap(), 65025.0);

        let b = pattern(9, 9, 5);
        let mut acc = 0.0;
        for y in 0..9 {
            for x in 0..9 {
                acc += (f64::from(a.get(x, y)) - f64::from(b.get(x, y))).powi(2);
            }
        }
        assert_eq!(mse(&a, &b).unwrap(), acc / 81.0);
    }

    #[test]
    fn psnr_examples() {
        let a = pattern(8, 8, 1);
        assert_eq!(psnr(&a, &a).unwrap(), f64::INFINITY);
        let zeros = GrayImage::filled(4, 4, 0).unwrap();
        assert_eq!(psnr(&zeros, &GrayImage::filled(4, 4, 255).unwrap()).unwrap(), 0.0);
        let ones = GrayImage::filled(4, 4, 1).unwrap();
        assert!((psnr(&zeros, &ones).unwrap() - 48.1308).abs() < 1e-4);
    }

    #[test]
    fn dimension_mismatch() {
        let a = GrayImage::filled(4, 4, 0).unwrap();
        let b = GrayImage::filled(4, 5, 0).unwrap();
        assert!(matches!(mse(&a, &b), Err(Error::DimensionMismatch(..))));
        assert!(matches!(psnr(&a, &b), Err(Error::DimensionMismatch(..))));
        let mask = RoiMask::full(4, 5).unwrap();
        assert!(matches!(psnr_roi(&a, &a, &mask), Err(Error::DimensionMismatch(..))));
    }

    #[test]
    fn roi_examples() {
        let a = pattern(10, 6, 2);
        let b = pattern(10, 6, 7);
        let full = RoiMask::full(10, 6).unwrap();
        assert_eq!(psnr_roi(&a, &b, &full).unwrap(), psnr(&a, &b).unwrap());

        let mut c = a.clone();
        c.set(3, 2, c.get(3, 2).wrapping_add(40));
        let mut members = vec![true; 60];
        members[2 * 10 + 3] = false;
        let without = RoiMask::new(10, 6, members).unwrap();
        assert_eq!(psnr_roi(&a, &c, &without).unwrap(), f64::INFINITY);

        let mut members = vec![false; 60];
        members[2 * 10 + 3] = true;
        members[0] = true;
        let with = RoiMask::new(10, 6, members).unwrap();
        let d = f64::from(a.get(3, 2)) - f64::from(c.get(3, 2));
        let oracle = 10.0 * (65025.0 / (d * d / 2.0)).log10();
        assert!((psnr_roi(&a, &c, &with).unwrap() - oracle).abs() < 1e-12);

        let empty = RoiMask::new(10, 6, vec![false; 60]).unwrap();
        assert!(matches!(psnr_roi(&a, &c, &empty), Err(Error::EmptyMask)));
    }

    #[test]
    fn crucial_mask_examples() {
        let white = GrayImage::filled(5, 5, 255).unwrap();
        assert!(matches!(crucial_mask(&white, 250), Err(Error::EmptyMask)));
        let black = GrayImage::filled(5, 5, 0).unwrap();
        for t in [0u8, 100, 255] {
            assert_eq!(crucial_mask(&black, t).unwrap().count(), 25);
        }
        let half = GrayImage::from_fn(8, 4, |x, _| if x < 4 { 0 } else { 255 }).unwrap();
        let mask = crucial_mask(&half, 128).unwrap();
        for (i, &m) in mask.members().iter().enumerate() {
            assert_eq!(m, i % 8 < 4);
        }
    }

    #[test]
    fn energy_retention_examples() {
        let a = pattern(6, 6, 4);
        assert_eq!(energy_retention(&a, &a).unwrap(), 1.0);
        assert_eq!(energy_retention(&a, &GrayImage::filled(6, 6, 0).unwrap()).unwrap(), 0.0);
        let zeros = GrayImage::filled(6, 6, 0).unwrap();
        assert!(matches!(energy_retention(&zeros, &a), Err(Error::ZeroEnergyReference)));
    }

    #[test]
    fn report_of_identical_images() {
        let a = pattern(16, 16, 3);
        let roi = crucial_mask(&a, 200).unwrap();
        let rep = QualityReport::compute(&a, &a, Some(&roi)).unwrap();
        assert_eq!(rep.mse, 0.0);
        assert_eq!(rep.psnr_db, f64::INFINITY);
        assert_eq!(rep.psnr_roi_db, Some(f64::INFINITY));
        assert_eq!(rep.ssim, 1.0);
        assert_eq!(rep.uiqi, 1.0);
        assert_eq!(rep.energy_retention, 1.0);
    }

    proptest! {
        #[test]
        fn symmetric_metrics(a in proptest::collection::vec(any::<u8>(), 144), b in proptest::collection::vec(any::<u8>(), 144)) {
            let a = GrayImage::new(12, 12, a).unwrap();
            let b = GrayImage::new(12, 12, b).unwrap();
            prop_assert_eq!(mse(&a, &b).unwrap(), mse(&b, &a).unwrap());
            prop_assert_eq!(psnr(&a, &b).unwrap(), psnr(&b, &a).unwrap());
            prop_assert!((ssim(&a, &b).unwrap() - ssim(&b, &a).unwrap()).abs() < 1e-12);
            prop_assert!((uiqi(&a, &b).unwrap() - uiqi(&b, &a).unwrap()).abs() < 1e-12);
        }

        #[test]
        fn psnr_decreases_with_mse(m1 in 1u32..60000, m2 in 1u32..60000) {
            prop_assume!(m1 != m2);
            let (p1, p2) = (psnr_from_mse(f64::from(m1)), psnr_from_mse(f64::from(m2)));
            prop_assert_eq!(m1 < m2, p1 > p2);
        }
    }
}
