//! Synthetic sparse scenes for experiments and tests.
//!
//! A scene is a flat dark background with bright near-white rectangular
//! patches (per-pixel values in 250..=255). Its corrupted version adds a
//! planted Gaussian envelope and, optionally, AWGN. The patches keep clear of
//! the envelope so the two never overlap.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::envelope::GaussianModel2D;
use crate::noise::{awgn_apply, AwgnParams};
use crate::{GrayImage, Result};

/// `round(background + model(x, y))`, clamped to 8 bits.
pub fn bump_image(width: usize, height: usize, background: f64, model: &GaussianModel2D) -> Result<GrayImage> {
    GrayImage::from_fn(width, height, |x, y| {
        (background + model.eval(x as f64, y as f64)).round().clamp(0.0, 255.0) as u8
    })
}

/// Adds the sampled envelope to an existing image.
pub fn add_envelope(img: &GrayImage, model: &GaussianModel2D) -> GrayImage {
    let sampled = model.sample(img.width(), img.height());
    let pixels = img
        .pixels()
        .iter()
        .zip(&sampled)
        .map(|(&p, &g)| (f64::from(p) + g).round().clamp(0.0, 255.0) as u8)
        .collect();
    GrayImage::new(img.width(), img.height(), pixels).expect("same dimensions")
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SceneParams {
    pub width: usize,
    pub height: usize,
    pub background: (u8, u8),
    pub bump_height: (f64, f64),
    pub bump_sigma: (f64, f64),
    /// Fraction of the image covered by white patches.
    pub white_fraction: (f64, f64),
}

impl Default for SceneParams {
    fn default() -> Self {
        Self {
            width: 256,
            height: 256,
            background: (20, 60),
            bump_height: (60.0, 100.0),
            bump_sigma: (20.0, 28.0),
            white_fraction: (0.15, 0.30),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SparseScene {
    /// Background and white patches, no envelope.
    pub clean: GrayImage,
    pub background: u8,
    pub envelope: GaussianModel2D,
    pub white_fraction: f64,
}

impl SparseScene {
    /// Clean scene plus the planted envelope.
    pub fn with_envelope(&self) -> GrayImage {
        add_envelope(&self.clean, &self.envelope)
    }

    /// Clean scene plus envelope plus AWGN.
    pub fn corrupted(&self, noise: &AwgnParams) -> GrayImage {
        awgn_apply(&self.with_envelope(), noise)
    }
}

/// Squared distance from `(cx, cy)` to the nearest point of a rectangle.
fn rect_distance_sq(x0: usize, y0: usize, w: usize, h: usize, cx: f64, cy: f64) -> f64 {
    let nx = cx.clamp(x0 as f64, (x0 + w - 1) as f64);
    let ny = cy.clamp(y0 as f64, (y0 + h - 1) as f64);
    (nx - cx).powi(2) + (ny - cy).powi(2)
}

pub fn sparse_scene(seed: u64, params: &SceneParams) -> Result<SparseScene> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let (w, h) = (params.width, params.height);
    let background = rng.random_range(params.background.0..=params.background.1);
    let amplitude = rng.random_range(params.bump_height.0..=params.bump_height.1);
    let sigma = rng.random_range(params.bump_sigma.0..=params.bump_sigma.1);
    let jitter = (w.min(h) as f64 / 16.0).max(1.0);
    let cx = w as f64 / 2.0 + rng.random_range(-jitter..=jitter);
    let cy = h as f64 / 2.0 + rng.random_range(-jitter..=jitter);
    let envelope = GaussianModel2D::new(amplitude, cx, cy, sigma, sigma)?;

    let target = rng.random_range(params.white_fraction.0..=params.white_fraction.1);
    let keep_out = (2.5 * sigma + 8.0).powi(2);
    let total = (w * h) as f64;
    let mut white = vec![false; w * h];
    let mut covered = 0usize;
    let max_side = (w.min(h) / 3).max(2);
    for _ in 0..10_000 {
        if covered as f64 / total >= params.white_fraction.0 && covered as f64 / total >= target {
            break;
        }
        let rw = rng.random_range(max_side / 4..=max_side).max(1);
        let rh = rng.random_range(max_side / 4..=max_side).max(1);
        let x0 = rng.random_range(0..=w - rw.min(w));
        let y0 = rng.random_range(0..=h - rh.min(h));
        let (rw, rh) = (rw.min(w - x0), rh.min(h - y0));
        if rect_distance_sq(x0, y0, rw, rh, cx, cy) < keep_out {
            continue;
        }
        let added = (y0..y0 + rh)
            .flat_map(|y| (x0..x0 + rw).map(move |x| y * w + x))
            .filter(|&i| !white[i])
            .count();
        if (covered + added) as f64 / total > params.white_fraction.1 {
            continue;
        }
        for y in y0..y0 + rh {
            for x in x0..x0 + rw {
                white[y * w + x] = true;
            }
        }
        covered += added;
    }

    let pixels = white
        .iter()
        .map(|&is_white| {
            if is_white {
                rng.random_range(250..=255)
            } else {
                background
            }
        })
        .collect();
    Ok(SparseScene {
        clean: GrayImage::new(w, h, pixels)?,
        background,
        envelope,
        white_fraction: covered as f64 / total,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn scene_respects_parameters() {
        for seed in 0..5 {
            let scene = sparse_scene(seed, &SceneParams::default()).unwrap();
            assert!((20..=60).contains(&scene.background));
            assert!((60.0..=100.0).contains(&scene.envelope.amplitude));
            assert!(
                (0.15..=0.30).contains(&scene.white_fraction),
                "seed {seed}: {}",
                scene.white_fraction
            );
            for &p in scene.clean.pixels() {
                assert!(p == scene.background || p >= 250);
            }
        }
    }

    #[test]
    fn scenes_are_reproducible() {
        let p = SceneParams::default();
        assert_eq!(sparse_scene(9, &p).unwrap(), sparse_scene(9, &p).unwrap());
        assert_ne!(sparse_scene(9, &p).unwrap().clean, sparse_scene(10, &p).unwrap().clean);
    }

    #[test]
    fn envelope_adds_mass_only_near_center() {
        let scene = sparse_scene(3, &SceneParams::default()).unwrap();
        let with = scene.with_envelope();
        let (cx, cy) = (scene.envelope.center_x.round() as usize, scene.envelope.center_y.round() as usize);
        assert!(with.get(cx, cy) > scene.clean.get(cx, cy) + 50);
        assert_eq!(with.get(0, 0).max(scene.clean.get(0, 0)), with.get(0, 0));
    }
}
