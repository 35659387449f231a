//! Detection of the Gaussian noise envelope's base.
//!
//! The image is read as a surface `z = A(x, y)`. A horizontal plane starts at
//! the highest peak `h_initial` and is lowered one intensity unit per step.
//! At depth `d` the part of the surface above the plane,
//! `max(0, A - (h_initial - d))`, is moment-fitted with an axis-aligned 2D
//! Gaussian and scored by `1 - RMSE / amplitude`. Depths with too few pixels
//! above the plane are skipped. Once a depth matches, the plane keeps going
//! down while it matches; the first failure after that ends the search and the
//! last matching depth is the base `d_temp`.
//!
//! Two optional pre-processing steps widen the detector to noisy scenes with
//! large saturated regions: Gaussian pre-smoothing of the analysed surface,
//! and exclusion of bright (`> white_level`) regions, which would otherwise sit
//! on top of the surface and hide any envelope below them.

use crate::baselines::{spatial_filter, KernelSpec};
use crate::{Error, GrayImage, Result};

/// Heights of the surface above a slicing plane.
#[derive(Debug, Clone, PartialEq)]
pub struct TruncatedSurface {
    width: usize,
    height: usize,
    heights: Vec<f64>,
}

impl TruncatedSurface {
    pub fn new(width: usize, height: usize, heights: Vec<f64>) -> Result<Self> {
        if width == 0 || height == 0 || width * height != heights.len() {
            return Err(Error::InvalidDimensions {
                width,
                height,
                len: heights.len(),
            });
        }
        if heights.iter().any(|h| !(h.is_finite() && *h >= 0.0)) {
            return Err(Error::InvalidParameter("surface heights must be finite and >= 0".into()));
        }
        Ok(Self {
            width,
            height,
            heights,
        })
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn heights(&self) -> &[f64] {
        &self.heights
    }

    pub fn get(&self, x: usize, y: usize) -> f64 {
        self.heights[y * self.width + x]
    }

    pub fn support(&self) -> usize {
        self.heights.iter().filter(|&&h| h > 0.0).count()
    }
}

/// `amplitude * exp(-(x - cx)^2 / 2 sx^2 - (y - cy)^2 / 2 sy^2)`
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GaussianModel2D {
    pub amplitude: f64,
    pub center_x: f64,
    pub center_y: f64,
    pub sigma_x: f64,
    pub sigma_y: f64,
}

impl GaussianModel2D {
    pub fn new(amplitude: f64, center_x: f64, center_y: f64, sigma_x: f64, sigma_y: f64) -> Result<Self> {
        let finite = [amplitude, center_x, center_y, sigma_x, sigma_y]
            .iter()
            .all(|v| v.is_finite());
        if !finite || amplitude < 0.0 || sigma_x <= 0.0 || sigma_y <= 0.0 {
            return Err(Error::InvalidParameter(format!(
                "invalid Gaussian model a={amplitude} c=({center_x}, {center_y}) s=({sigma_x}, {sigma_y})"
            )));
        }
        Ok(Self {
            amplitude,
            center_x,
            center_y,
            sigma_x,
            sigma_y,
        })
    }

    /// A zero-amplitude model: evaluates to 0 everywhere.
    pub fn flat() -> Self {
        Self {
            amplitude: 0.0,
            center_x: 0.0,
            center_y: 0.0,
            sigma_x: 1.0,
            sigma_y: 1.0,
        }
    }

    pub fn eval(&self, x: f64, y: f64) -> f64 {
        let dx = (x - self.center_x) / self.sigma_x;
        let dy = (y - self.center_y) / self.sigma_y;
        self.amplitude * (-0.5 * (dx * dx + dy * dy)).exp()
    }

    /// Row-major samples on a `width x height` pixel grid.
    pub fn sample(&self, width: usize, height: usize) -> Vec<f64> {
        let gx: Vec<f64> = (0..width)
            .map(|x| {
                let d = (x as f64 - self.center_x) / self.sigma_x;
                (-0.5 * d * d).exp()
            })
            .collect();
        let mut out = Vec::with_capacity(width * height);
        for y in 0..height {
            let d = (y as f64 - self.center_y) / self.sigma_y;
            let row = self.amplitude * (-0.5 * d * d).exp();
            out.extend(gx.iter().map(|g| row * g));
        }
        out
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SliceMatchConfig {
    /// Minimum score in (0, 1] for a depth to count as a match.
    pub match_threshold: f64,
    /// Minimum number of pixels above the plane before a fit is attempted.
    pub min_support: usize,
    /// Gaussian pre-smoothing sigma (pixels) for the analysed surface.
    pub presmooth_sigma: Option<f64>,
    /// Regions brighter than this level (after pre-smoothing) are left out of
    /// the analysed surface.
    pub white_level: Option<u8>,
}

impl Default for SliceMatchConfig {
    fn default() -> Self {
        Self {
            match_threshold: 0.85,
            min_support: 16,
            presmooth_sigma: None,
            white_level: None,
        }
    }
}

impl SliceMatchConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.match_threshold > 0.0 && self.match_threshold <= 1.0) {
            return Err(Error::InvalidParameter(format!(
                "match threshold must be in (0, 1], got {}",
                self.match_threshold
            )));
        }
        if self.min_support < 4 {
            return Err(Error::InvalidParameter(format!(
                "min support must be >= 4, got {}",
                self.min_support
            )));
        }
        if let Some(s) = self.presmooth_sigma {
            if !(s.is_finite() && s > 0.0) {
                return Err(Error::InvalidParameter(format!("smoothing sigma must be > 0, got {s}")));
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TraceEntry {
    pub depth: u8,
    /// `None` when the depth had too little support to fit.
    pub score: Option<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct EnvelopeEstimate {
    /// Highest point of the analysed surface.
    pub h_initial: u8,
    /// Last matching depth below `h_initial`.
    pub d_temp: u8,
    /// Absolute level of the envelope base, `h_initial - d_temp`.
    pub base_level: u8,
    /// Gaussian fitted to the surface above `base_level`.
    pub model: GaussianModel2D,
    pub trace: Vec<TraceEntry>,
    /// Pixels left out of the analysed surface, if any exclusion was active.
    pub excluded: Option<Vec<bool>>,
}

impl EnvelopeEstimate {
    pub fn is_excluded(&self, index: usize) -> bool {
        self.excluded.as_ref().is_some_and(|m| m[index])
    }
}

pub fn surface_max(img: &GrayImage) -> u8 {
    img.max()
}

/// Part of the surface above the plane at depth `d` below the peak.
pub fn slice_above(img: &GrayImage, d: i32) -> Result<TruncatedSurface> {
    let peak = surface_max(img);
    if d < 0 || d > i32::from(peak) {
        return Err(Error::DepthOutOfRange {
            depth: i64::from(d),
            max: peak,
        });
    }
    let plane = i32::from(peak) - d;
    let heights = img
        .pixels()
        .iter()
        .map(|&p| f64::from((i32::from(p) - plane).max(0)))
        .collect();
    TruncatedSurface::new(img.width(), img.height(), heights)
}

const MIN_SIGMA: f64 = 0.5;

/// Moment-matched Gaussian: height-weighted centroid and per-axis spread,
/// amplitude equal to the tallest height.
pub fn fit_gaussian(surface: &TruncatedSurface, min_support: usize) -> Result<GaussianModel2D> {
    let found = surface.support();
    if found < min_support || found == 0 {
        return Err(Error::InsufficientSupport {
            found,
            required: min_support,
        });
    }
    let (w, h) = (surface.width, surface.height);
    let mut mass = 0.0;
    let mut sx = 0.0;
    let mut sy = 0.0;
    let mut peak = 0.0f64;
    for y in 0..h {
        for x in 0..w {
            let v = surface.heights[y * w + x];
            mass += v;
            sx += v * x as f64;
            sy += v * y as f64;
            peak = peak.max(v);
        }
    }
    let cx = sx / mass;
    let cy = sy / mass;
    let mut vx = 0.0;
    let mut vy = 0.0;
    for y in 0..h {
        let dy = y as f64 - cy;
        for x in 0..w {
            let v = surface.heights[y * w + x];
            let dx = x as f64 - cx;
            vx += v * dx * dx;
            vy += v * dy * dy;
        }
    }
    let sigma_x = (vx / mass).sqrt().max(MIN_SIGMA);
    let sigma_y = (vy / mass).sqrt().max(MIN_SIGMA);
    GaussianModel2D::new(peak, cx, cy, sigma_x, sigma_y)
}

/// `1 - RMSE(surface, model) / amplitude`, clamped to `[0, 1]`. The RMSE runs
/// over the whole grid.
pub fn match_score(surface: &TruncatedSurface, model: &GaussianModel2D) -> Result<f64> {
    if surface.support() == 0 {
        return Err(Error::DegenerateSurface);
    }
    let sampled = model.sample(surface.width, surface.height);
    let sse: f64 = surface
        .heights
        .iter()
        .zip(&sampled)
        .map(|(s, m)| (s - m) * (s - m))
        .sum();
    let rmse = (sse / sampled.len() as f64).sqrt();
    if model.amplitude <= 0.0 {
        return Ok(0.0);
    }
    Ok((1.0 - rmse / model.amplitude).clamp(0.0, 1.0))
}

/// The surface the detector actually slices, plus the exclusion mask.
fn analysed_surface(img: &GrayImage, cfg: &SliceMatchConfig) -> Result<(GrayImage, Option<Vec<bool>>)> {
    let mut analysed = match cfg.presmooth_sigma {
        Some(sigma) => {
            let radius = smoothing_radius(sigma);
            let size = 2 * radius + 1;
            if img.width() < size || img.height() < size {
                img.clone()
            } else {
                spatial_filter(img, &KernelSpec::gaussian(size, sigma)?)?
            }
        }
        None => img.clone(),
    };
    let excluded = cfg.white_level.map(|level| {
        let bright: Vec<bool> = analysed.pixels().iter().map(|&p| p > level).collect();
        let radius = cfg.presmooth_sigma.map_or(0, smoothing_radius) + 1;
        dilate(&bright, analysed.width(), analysed.height(), radius)
    });
    if let Some(mask) = &excluded {
        for (p, &skip) in analysed.pixels_mut().iter_mut().zip(mask) {
            if skip {
                *p = 0;
            }
        }
    }
    Ok((analysed, excluded))
}

fn smoothing_radius(sigma: f64) -> usize {
    ((3.0 * sigma).ceil() as usize).max(1)
}

/// Square (Chebyshev) dilation, done separably.
fn dilate(mask: &[bool], width: usize, height: usize, radius: usize) -> Vec<bool> {
    let mut rows = vec![false; mask.len()];
    for y in 0..height {
        for x in 0..width {
            let lo = x.saturating_sub(radius);
            let hi = (x + radius).min(width - 1);
            rows[y * width + x] = (lo..=hi).any(|sx| mask[y * width + sx]);
        }
    }
    let mut out = vec![false; mask.len()];
    for y in 0..height {
        let lo = y.saturating_sub(radius);
        let hi = (y + radius).min(height - 1);
        for x in 0..width {
            out[y * width + x] = (lo..=hi).any(|sy| rows[sy * width + x]);
        }
    }
    out
}

pub fn detect_base(img: &GrayImage, cfg: &SliceMatchConfig) -> Result<EnvelopeEstimate> {
    cfg.validate()?;
    let (analysed, excluded) = analysed_surface(img, cfg)?;
    let h_initial = surface_max(&analysed);
    if h_initial == 0 {
        return Err(Error::NoGaussianEnvelope);
    }

    let mut trace = Vec::with_capacity(usize::from(h_initial) + 1);
    let mut best: Option<(u8, GaussianModel2D)> = None;
    for depth in 0..=h_initial {
        let surface = slice_above(&analysed, i32::from(depth))?;
        if surface.support() < cfg.min_support {
            trace.push(TraceEntry { depth, score: None });
            continue;
        }
        let model = fit_gaussian(&surface, cfg.min_support)?;
        let score = match_score(&surface, &model)?;
        trace.push(TraceEntry {
            depth,
            score: Some(score),
        });
        if score >= cfg.match_threshold {
            best = Some((depth, model));
        } else if best.is_some() {
            break;
        }
    }

    let (d_temp, model) = best.ok_or(Error::NoGaussianEnvelope)?;
    Ok(EnvelopeEstimate {
        h_initial,
        d_temp,
        base_level: h_initial - d_temp,
        model,
        trace,
        excluded,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn bump_image(w: usize, h: usize, background: f64, model: GaussianModel2D) -> GrayImage {
        GrayImage::from_fn(w, h, |x, y| {
            (background + model.eval(x as f64, y as f64)).round().clamp(0.0, 255.0) as u8
        })
        .unwrap()
    }

    #[test]
    fn surface_max_examples() {
        assert_eq!(surface_max(&GrayImage::filled(5, 5, 7).unwrap()), 7);
        let mut img = GrayImage::filled(6, 4, 0).unwrap();
        img.set(3, 2, 255);
        assert_eq!(surface_max(&img), 255);
        let img = GrayImage::from_fn(32, 32, |x, y| ((x * 13 + y * 7 + x * y) % 200) as u8).unwrap();
        let mut oracle = 0u8;
        for y in 0..32 {
            for x in 0..32 {
                oracle = oracle.max(img.get(x, y));
            }
        }
        assert_eq!(surface_max(&img), oracle);
    }

    #[test]
    fn slice_examples() {
        let img = GrayImage::from_fn(8, 8, |x, y| (x * 10 + y * 3) as u8).unwrap();
        let peak = i32::from(img.max());
        assert!(slice_above(&img, 0).unwrap().heights().iter().all(|&h| h == 0.0));
        let full = slice_above(&img, peak).unwrap();
        for (h, &p) in full.heights().iter().zip(img.pixels()) {
            assert_eq!(*h, f64::from(p));
        }
        let flat = slice_above(&GrayImage::filled(4, 4, 100).unwrap(), 30).unwrap();
        assert!(flat.heights().iter().all(|&h| h == 30.0));
        assert!(matches!(slice_above(&img, -1), Err(Error::DepthOutOfRange { .. })));
        assert!(matches!(slice_above(&img, peak + 1), Err(Error::DepthOutOfRange { .. })));
    }

    #[test]
    fn fit_recovers_planted_parameters() {
        let planted = GaussianModel2D::new(40.0, 16.0, 16.0, 3.0, 3.0).unwrap();
        let surface = TruncatedSurface::new(32, 32, planted.sample(32, 32)).unwrap();
        let fit = fit_gaussian(&surface, 16).unwrap();
        assert!((fit.center_x - 16.0).abs() <= 0.2);
        assert!((fit.center_y - 16.0).abs() <= 0.2);
        assert!((fit.sigma_x / 3.0 - 1.0).abs() <= 0.1);
        assert!((fit.sigma_y / 3.0 - 1.0).abs() <= 0.1);
        assert!((fit.amplitude - 40.0).abs() <= 1.0);
    }

    #[test]
    fn symmetric_surface_centers_exactly() {
        // symmetric about (4.5, 3.0) on a 10 x 7 grid
        let heights: Vec<f64> = (0..7)
            .flat_map(|y: i32| {
                (0..10).map(move |x: i32| {
                    let dx = (2 * x - 9).abs() as f64;
                    let dy = (y - 3).abs() as f64;
                    (20.0 - dx - 2.0 * dy).max(0.0)
                })
            })
            .collect();
        let fit = fit_gaussian(&TruncatedSurface::new(10, 7, heights).unwrap(), 4).unwrap();
        assert_eq!(fit.center_x, 4.5);
        assert_eq!(fit.center_y, 3.0);
    }

    #[test]
    fn fit_needs_support() {
        let mut heights = vec![0.0; 25];
        heights[3] = 1.0;
        heights[7] = 2.0;
        heights[11] = 3.0;
        let surface = TruncatedSurface::new(5, 5, heights).unwrap();
        assert!(matches!(
            fit_gaussian(&surface, 4),
            Err(Error::InsufficientSupport { found: 3, required: 4 })
        ));
    }

    #[test]
    fn sigma_is_floored() {
        let mut heights = vec![0.0; 25];
        heights[12] = 9.0;
        let fit = fit_gaussian(&TruncatedSurface::new(5, 5, heights).unwrap(), 1).unwrap();
        assert_eq!((fit.sigma_x, fit.sigma_y), (0.5, 0.5));
    }

    #[test]
    fn score_of_exact_model_is_one() {
        let model = GaussianModel2D::new(50.0, 10.3, 8.7, 2.5, 4.0).unwrap();
        let surface = TruncatedSurface::new(24, 20, model.sample(24, 20)).unwrap();
        assert_eq!(match_score(&surface, &model).unwrap(), 1.0);
    }

    #[test]
    fn score_of_perturbed_model_matches_residual_oracle() {
        let model = GaussianModel2D::new(50.0, 12.0, 12.0, 3.0, 3.0).unwrap();
        let (w, h) = (24, 24);
        let mut heights = Vec::new();
        let mut sse = 0.0;
        for y in 0..h {
            for x in 0..w {
                let m = model.eval(x as f64, y as f64);
                // +-20% of the amplitude, checkerboard, never below zero
                let delta = if (x + y) % 2 == 0 { 10.0 } else { -10.0f64.min(m) };
                heights.push(m + delta);
                sse += delta * delta;
            }
        }
        let oracle = 1.0 - (sse / (w * h) as f64).sqrt() / 50.0;
        let surface = TruncatedSurface::new(w, h, heights).unwrap();
        let score = match_score(&surface, &model).unwrap();
        assert!((score - oracle).abs() < 1e-12, "{score} vs {oracle}");
        assert!(score < 0.9 && score > 0.8);
    }

    #[test]
    fn score_rejects_flat_surface() {
        let surface = TruncatedSurface::new(4, 4, vec![0.0; 16]).unwrap();
        let model = GaussianModel2D::new(1.0, 1.0, 1.0, 1.0, 1.0).unwrap();
        assert!(matches!(match_score(&surface, &model), Err(Error::DegenerateSurface)));
    }

    #[test]
    fn constant_image_has_no_envelope() {
        for v in [0u8, 1, 90, 255] {
            let img = GrayImage::filled(32, 32, v).unwrap();
            assert!(matches!(
                detect_base(&img, &SliceMatchConfig::default()),
                Err(Error::NoGaussianEnvelope)
            ));
        }
    }

    #[test]
    fn recovers_bump_on_flat_background() {
        let planted = GaussianModel2D::new(80.0, 31.5, 30.0, 4.0, 4.0).unwrap();
        let img = bump_image(64, 64, 60.0, planted);
        assert_eq!(img.max(), 139);
        let est = detect_base(&img, &SliceMatchConfig::default()).unwrap();
        assert!((i32::from(est.d_temp) - 80).abs() <= 2, "d_temp {}", est.d_temp);
        assert_eq!(est.base_level, est.h_initial - est.d_temp);
        assert!((est.model.center_x - 31.5).abs() < 0.5);
        assert!((est.model.center_y - 30.0).abs() < 0.5);
    }

    #[test]
    fn recovers_bump_over_zero_background() {
        let planted = GaussianModel2D::new(200.0, 32.0, 32.0, 5.0, 5.0).unwrap();
        let img = bump_image(64, 64, 0.0, planted);
        let est = detect_base(&img, &SliceMatchConfig::default()).unwrap();
        assert!((i32::from(est.d_temp) - 200).abs() <= 2, "d_temp {}", est.d_temp);
    }

    #[test]
    fn trace_is_consistent() {
        let planted = GaussianModel2D::new(60.0, 20.0, 24.0, 3.0, 5.0).unwrap();
        let img = bump_image(48, 48, 30.0, planted);
        let cfg = SliceMatchConfig::default();
        let est = detect_base(&img, &cfg).unwrap();
        for (i, entry) in est.trace.iter().enumerate() {
            assert_eq!(usize::from(entry.depth), i);
        }
        assert!(est.trace.len() <= usize::from(est.h_initial) + 1);
        let matches: Vec<u8> = est
            .trace
            .iter()
            .filter(|e| e.score.is_some_and(|s| s >= cfg.match_threshold))
            .map(|e| e.depth)
            .collect();
        assert_eq!(matches.last().copied(), Some(est.d_temp));
    }

    #[test]
    fn white_regions_are_excluded() {
        let planted = GaussianModel2D::new(80.0, 40.0, 40.0, 6.0, 6.0).unwrap();
        let mut img = bump_image(96, 96, 40.0, planted);
        for y in 0..20 {
            for x in 70..96 {
                img.set(x, y, 252);
            }
        }
        let plain = detect_base(&img, &SliceMatchConfig::default());
        assert!(!matches!(&plain, Ok(e) if (i32::from(e.d_temp) - 80).abs() <= 2));

        let cfg = SliceMatchConfig {
            white_level: Some(200),
            ..SliceMatchConfig::default()
        };
        let est = detect_base(&img, &cfg).unwrap();
        assert!((i32::from(est.d_temp) - 80).abs() <= 2, "d_temp {}", est.d_temp);
        let mask = est.excluded.as_ref().unwrap();
        assert!(mask[10 * 96 + 80]);
        assert!(mask[10 * 96 + 69]);
        assert!(!mask[10 * 96 + 68]);
        assert!(!est.is_excluded(40 * 96 + 40));
    }

    #[test]
    fn config_validation() {
        let bad = [
            SliceMatchConfig { match_threshold: 0.0, ..Default::default() },
            SliceMatchConfig { match_threshold: 1.5, ..Default::default() },
            SliceMatchConfig { min_support: 3, ..Default::default() },
            SliceMatchConfig { presmooth_sigma: Some(-1.0), ..Default::default() },
        ];
        let img = GrayImage::filled(8, 8, 3).unwrap();
        for cfg in bad {
            assert!(matches!(detect_base(&img, &cfg), Err(Error::InvalidParameter(_))));
        }
    }

    proptest! {
        #[test]
        fn slice_heights_monotone_and_bounded(pixels in proptest::collection::vec(any::<u8>(), 36)) {
            let img = GrayImage::new(6, 6, pixels).unwrap();
            let peak = i32::from(img.max());
            let mut prev = slice_above(&img, 0).unwrap();
            for d in 1..=peak {
                let cur = slice_above(&img, d).unwrap();
                for ((a, b), &p) in prev.heights().iter().zip(cur.heights()).zip(img.pixels()) {
                    prop_assert!(b >= a);
                    prop_assert!(*b <= f64::from(p));
                }
                prev = cur;
            }
        }

        #[test]
        fn detection_is_translation_invariant(
            dx in 0usize..12,
            dy in 0usize..12,
            height in 40u32..120,
            sigma in 2.0f64..5.0,
        ) {
            let base = GaussianModel2D::new(f64::from(height), 24.0, 24.0, sigma, sigma).unwrap();
            let moved = GaussianModel2D {
                center_x: 24.0 + dx as f64,
                center_y: 24.0 + dy as f64,
                ..base
            };
            let cfg = SliceMatchConfig::default();
            let a = detect_base(&bump_image(72, 72, 20.0, base), &cfg).unwrap();
            let b = detect_base(&bump_image(72, 72, 20.0, moved), &cfg).unwrap();
            prop_assert!((b.model.center_x - a.model.center_x - dx as f64).abs() < 1e-9);
            prop_assert!((b.model.center_y - a.model.center_y - dy as f64).abs() < 1e-9);
            prop_assert!((i32::from(a.d_temp) - i32::from(b.d_temp)).abs() <= 1);
        }
    }
}
