//! Error accounting and redistribution of the accumulated noise mass.
//!
//! With base level `b = h_initial - d_temp`:
//!
//! ```text
//! P_actual(x, y) = max(0, A(x, y) - b)
//! P_normal(x, y) = G(x, y)                  fitted envelope, >= 0
//! Err(x, y)      = |P_actual - P_normal|
//! Error_acc      = sum of Err over the grid
//! ```
//!
//! The envelope itself is the noise estimate, so [`strip_noise`] subtracts
//! `P_normal` from the image. The accumulated error is then handed out in
//! whole intensity units to pixels brighter than the threshold `T`, brightest
//! first, until the budget runs out or every eligible pixel reaches 255.
//!
//! `P_actual` clips at zero instead of taking an absolute value; pixels below
//! the base plane are not part of the envelope. [`ActualHeight::Absolute`]
//! keeps the `|A - b|` reading for comparison.

use crate::envelope::{detect_base, EnvelopeEstimate, SliceMatchConfig};
use crate::image::image_energy;
use crate::{Error, GrayImage, Result};

/// Redistribution threshold `T` in `[0, 255]`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Threshold(u8);

impl Threshold {
    pub fn new(value: i64) -> Result<Self> {
        u8::try_from(value)
            .map(Threshold)
            .map_err(|_| Error::ThresholdOutOfRange(value))
    }

    pub fn get(self) -> u8 {
        self.0
    }
}

impl From<u8> for Threshold {
    fn from(v: u8) -> Self {
        Threshold(v)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum ActualHeight {
    /// `max(0, A - b)`
    #[default]
    Clipped,
    /// `|A - b|`
    Absolute,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ErrorField {
    width: usize,
    height: usize,
    err: Vec<f64>,
}

impl ErrorField {
    pub fn new(width: usize, height: usize, err: Vec<f64>) -> Result<Self> {
        if width == 0 || height == 0 || width * height != err.len() {
            return Err(Error::InvalidDimensions {
                width,
                height,
                len: err.len(),
            });
        }
        if err.iter().any(|e| !(e.is_finite() && *e >= 0.0)) {
            return Err(Error::InvalidParameter("error entries must be finite and >= 0".into()));
        }
        Ok(Self { width, height, err })
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn values(&self) -> &[f64] {
        &self.err
    }

    pub fn get(&self, x: usize, y: usize) -> f64 {
        self.err[y * self.width + x]
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct RedistributionReport {
    pub error_acc: f64,
    /// Whole intensity units actually added to the image.
    pub distributed: u64,
    /// `error_acc - distributed`, including the fractional part.
    pub leftover: f64,
    pub modified_pixels: u64,
    pub threshold: u8,
    pub no_envelope: bool,
}

impl RedistributionReport {
    pub fn empty(threshold: Threshold, no_envelope: bool) -> Self {
        Self {
            error_acc: 0.0,
            distributed: 0,
            leftover: 0.0,
            modified_pixels: 0,
            threshold: threshold.get(),
            no_envelope,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct DenoiseResult {
    pub output: GrayImage,
    /// Image after the envelope was subtracted, before redistribution.
    pub cleaned: GrayImage,
    pub estimate: Option<EnvelopeEstimate>,
    pub report: RedistributionReport,
}

fn check_estimate(img: &GrayImage, estimate: &EnvelopeEstimate) -> Result<()> {
    if let Some(mask) = &estimate.excluded {
        if mask.len() != img.len() {
            return Err(Error::DimensionMismatch(img.width(), img.height(), mask.len(), 1));
        }
    }
    Ok(())
}

pub fn compute_error_field(img: &GrayImage, estimate: &EnvelopeEstimate) -> Result<ErrorField> {
    compute_error_field_with(img, estimate, ActualHeight::Clipped)
}

/// Pixels excluded from envelope detection carry no error.
pub fn compute_error_field_with(
    img: &GrayImage,
    estimate: &EnvelopeEstimate,
    actual: ActualHeight,
) -> Result<ErrorField> {
    check_estimate(img, estimate)?;
    let base = i32::from(estimate.base_level);
    let normal = estimate.model.sample(img.width(), img.height());
    let err = img
        .pixels()
        .iter()
        .zip(&normal)
        .enumerate()
        .map(|(idx, (&a, &g))| {
            if estimate.is_excluded(idx) {
                return 0.0;
            }
            let above = i32::from(a) - base;
            let p_actual = match actual {
                ActualHeight::Clipped => above.max(0),
                ActualHeight::Absolute => above.abs(),
            };
            (f64::from(p_actual) - g.max(0.0)).abs()
        })
        .collect();
    ErrorField::new(img.width(), img.height(), err)
}

pub fn accumulate_error(field: &ErrorField) -> f64 {
    field.err.iter().sum()
}

/// Subtracts the fitted envelope: `clamp(round(A - P_normal), 0, 255)`.
pub fn strip_noise(img: &GrayImage, estimate: &EnvelopeEstimate) -> Result<GrayImage> {
    check_estimate(img, estimate)?;
    let normal = estimate.model.sample(img.width(), img.height());
    let pixels = img
        .pixels()
        .iter()
        .zip(&normal)
        .map(|(&a, &g)| (f64::from(a) - g.max(0.0)).round().clamp(0.0, 255.0) as u8)
        .collect();
    GrayImage::new(img.width(), img.height(), pixels)
}

/// Hands `floor(error_acc)` intensity units to pixels strictly brighter than
/// `threshold`, visiting them by descending value (row-major among ties) and
/// filling each up to 255.
pub fn redistribute(
    cleaned: &GrayImage,
    error_acc: f64,
    threshold: Threshold,
) -> Result<(GrayImage, RedistributionReport)> {
    if !(error_acc.is_finite() && error_acc >= 0.0) {
        return Err(Error::InvalidBudget(error_acc));
    }
    let t = threshold.get();
    let mut order: Vec<usize> = cleaned
        .pixels()
        .iter()
        .enumerate()
        .filter(|&(_, &p)| p > t)
        .map(|(i, _)| i)
        .collect();
    // stable sort keeps row-major order among equal values
    order.sort_by_key(|&i| std::cmp::Reverse(cleaned.pixels()[i]));

    let budget = error_acc.floor() as u64;
    let mut remaining = budget;
    let mut modified = 0u64;
    let mut out = cleaned.clone();
    let pixels = out.pixels_mut();
    for idx in order {
        if remaining == 0 {
            break;
        }
        let headroom = u64::from(255 - pixels[idx]);
        let give = headroom.min(remaining);
        if give > 0 {
            pixels[idx] += give as u8;
            remaining -= give;
            modified += 1;
        }
    }
    let distributed = budget - remaining;
    let report = RedistributionReport {
        error_acc,
        distributed,
        leftover: error_acc - distributed as f64,
        modified_pixels: modified,
        threshold: t,
        no_envelope: false,
    };
    Ok((out, report))
}

/// Runs the remaining pipeline stages for an already detected envelope.
pub fn denoise_with_estimate(
    noisy: &GrayImage,
    estimate: EnvelopeEstimate,
    threshold: Threshold,
) -> Result<DenoiseResult> {
    let field = compute_error_field(noisy, &estimate)?;
    let error_acc = accumulate_error(&field);
    let cleaned = strip_noise(noisy, &estimate)?;
    let (output, report) = redistribute(&cleaned, error_acc, threshold)?;
    Ok(DenoiseResult {
        output,
        cleaned,
        estimate: Some(estimate),
        report,
    })
}

/// Result for an image without a detectable envelope: passed through as is.
pub fn passthrough(noisy: &GrayImage, threshold: Threshold) -> DenoiseResult {
    DenoiseResult {
        output: noisy.clone(),
        cleaned: noisy.clone(),
        estimate: None,
        report: RedistributionReport::empty(threshold, true),
    }
}

/// Full pipeline: detect the envelope base, measure and accumulate the error,
/// strip the envelope, redistribute. A missing envelope is reported through
/// `report.no_envelope` with the input passed through unchanged.
pub fn denoise(noisy: &GrayImage, threshold: Threshold, cfg: &SliceMatchConfig) -> Result<DenoiseResult> {
    match detect_base(noisy, cfg) {
        Ok(estimate) => denoise_with_estimate(noisy, estimate, threshold),
        Err(Error::NoGaussianEnvelope) => Ok(passthrough(noisy, threshold)),
        Err(e) => Err(e),
    }
}

/// `image_energy(output) - image_energy(cleaned)`; equals `report.distributed`.
pub fn added_energy(result: &DenoiseResult) -> u64 {
    image_energy(&result.output) - image_energy(&result.cleaned)
}
