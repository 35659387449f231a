//! Mean SSIM over 11x11 Gaussian windows (sigma 1.5), valid positions only,
//! with `C1 = (0.01 * 255)^2` and `C2 = (0.03 * 255)^2`.

use crate::{Error, GrayImage, Result};

const WINDOW: usize = 11;
const SIGMA: f64 = 1.5;
const C1: f64 = (0.01 * 255.0) * (0.01 * 255.0);
const C2: f64 = (0.03 * 255.0) * (0.03 * 255.0);

fn kernel() -> [f64; WINDOW] {
    let r = (WINDOW / 2) as f64;
    let mut k = [0.0; WINDOW];
    for (i, v) in k.iter_mut().enumerate() {
        let d = i as f64 - r;
        *v = (-d * d / (2.0 * SIGMA * SIGMA)).exp();
    }
    let total: f64 = k.iter().sum();
    k.map(|v| v / total)
}

/// Separable weighted filter over valid window positions.
fn filter_valid(src: &[f64], w: usize, h: usize, k: &[f64; WINDOW]) -> Vec<f64> {
    let ow = w - WINDOW + 1;
    let oh = h - WINDOW + 1;
    let mut horizontal = vec![0.0; ow * h];
    for y in 0..h {
        let row = &src[y * w..(y + 1) * w];
        for x in 0..ow {
            horizontal[y * ow + x] = k.iter().zip(&row[x..x + WINDOW]).map(|(a, b)| a * b).sum();
        }
    }
    let mut out = vec![0.0; ow * oh];
    for y in 0..oh {
        for x in 0..ow {
            out[y * ow + x] = k
                .iter()
                .enumerate()
                .map(|(i, kv)| kv * horizontal[(y + i) * ow + x])
                .sum();
        }
    }
    out
}

pub fn ssim(a: &GrayImage, b: &GrayImage) -> Result<f64> {
    a.ensure_same_dims(b)?;
    let (w, h) = a.dims();
    if w < WINDOW || h < WINDOW {
        return Err(Error::ImageTooSmall {
            width: w,
            height: h,
            min: WINDOW,
        });
    }
    let k = kernel();
    let fa: Vec<f64> = a.pixels().iter().map(|&p| f64::from(p)).collect();
    let fb: Vec<f64> = b.pixels().iter().map(|&p| f64::from(p)).collect();
    let aa: Vec<f64> = fa.iter().map(|v| v * v).collect();
    let bb: Vec<f64> = fb.iter().map(|v| v * v).collect();
    let ab: Vec<f64> = fa.iter().zip(&fb).map(|(x, y)| x * y).collect();

    let mu_a = filter_valid(&fa, w, h, &k);
    let mu_b = filter_valid(&fb, w, h, &k);
    let e_aa = filter_valid(&aa, w, h, &k);
    let e_bb = filter_valid(&bb, w, h, &k);
    let e_ab = filter_valid(&ab, w, h, &k);

    let total: f64 = (0..mu_a.len())
        .map(|i| {
            let (ma, mb) = (mu_a[i], mu_b[i]);
            let var_a = e_aa[i] - ma * ma;
            let var_b = e_bb[i] - mb * mb;
            let cov = e_ab[i] - ma * mb;
            ((2.0 * ma * mb + C1) * (2.0 * cov + C2))
                / ((ma * ma + mb * mb + C1) * (var_a + var_b + C2))
        })
        .sum();
    Ok(total / mu_a.len() as f64)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn identical_and_constant_images_score_one() {
        let img = GrayImage::from_fn(20, 16, |x, y| ((x * 31 + y * 7) % 256) as u8).unwrap();
        assert_eq!(ssim(&img, &img).unwrap(), 1.0);
        let c = GrayImage::filled(11, 11, 93).unwrap();
        assert_eq!(ssim(&c, &c).unwrap(), 1.0);
    }

    #[test]
    fn too_small() {
        let img = GrayImage::filled(10, 30, 1).unwrap();
        assert!(matches!(ssim(&img, &img), Err(Error::ImageTooSmall { .. })));
    }

    // Frozen from scikit-image 0.25 `structural_similarity(a, b, data_range=255,
    // gaussian_weights=True, sigma=1.5, use_sample_covariance=False)`, whose
    // cropped output covers exactly the valid 11x11 window positions.
    #[test]
    fn negative_matches_reference_value() {
        let img = GrayImage::from_fn(32, 32, |x, y| {
            let v = 128.0 + 90.0 * ((x as f64) * 0.7).sin() * ((y as f64) * 0.45).cos();
            v.round() as u8
        })
        .unwrap();
        let neg = GrayImage::new(32, 32, img.pixels().iter().map(|&p| 255 - p).collect()).unwrap();
        let s = ssim(&img, &neg).unwrap();
        assert!(s < 0.0);
        assert!((s - REFERENCE_NEGATIVE).abs() < 1e-9, "{s}");
    }

    const REFERENCE_NEGATIVE: f64 = -0.913931325365841;
}
