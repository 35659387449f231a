use std::fmt;
use std::str::FromStr;

use crate::{Error, GrayImage, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FilterKind {
    Mean,
    Median,
    Gaussian,
}

impl fmt::Display for FilterKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            FilterKind::Mean => "mean",
            FilterKind::Median => "median",
            FilterKind::Gaussian => "gaussian",
        })
    }
}

impl FromStr for FilterKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "mean" => Ok(FilterKind::Mean),
            "median" => Ok(FilterKind::Median),
            "gaussian" => Ok(FilterKind::Gaussian),
            other => Err(Error::InvalidParameter(format!("unknown filter '{other}'"))),
        }
    }
}

/// Window shape for [`spatial_filter`]. `size` is the odd side length;
/// `sigma` only matters for the Gaussian kind.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct KernelSpec {
    kind: FilterKind,
    size: usize,
    sigma: f64,
}

impl KernelSpec {
    pub fn new(kind: FilterKind, size: usize, sigma: f64) -> Result<Self> {
        if size < 3 || size.is_multiple_of(2) {
            return Err(Error::InvalidParameter(format!(
                "kernel size must be odd and >= 3, got {size}"
            )));
        }
        if kind == FilterKind::Gaussian && !(sigma.is_finite() && sigma > 0.0) {
            return Err(Error::InvalidParameter(format!(
                "gaussian sigma must be > 0, got {sigma}"
            )));
        }
        Ok(Self { kind, size, sigma })
    }

    pub fn mean(size: usize) -> Result<Self> {
        Self::new(FilterKind::Mean, size, 0.0)
    }

    pub fn median(size: usize) -> Result<Self> {
        Self::new(FilterKind::Median, size, 0.0)
    }

    pub fn gaussian(size: usize, sigma: f64) -> Result<Self> {
        Self::new(FilterKind::Gaussian, size, sigma)
    }

    pub fn kind(&self) -> FilterKind {
        self.kind
    }

    pub fn size(&self) -> usize {
        self.size
    }

    pub fn sigma(&self) -> f64 {
        self.sigma
    }
}

/// Border-replicated sample.
#[inline]
fn clamped(img: &GrayImage, x: isize, y: isize) -> u8 {
    let cx = x.clamp(0, img.width() as isize - 1) as usize;
    let cy = y.clamp(0, img.height() as isize - 1) as usize;
    img.get(cx, cy)
}

pub fn spatial_filter(img: &GrayImage, spec: &KernelSpec) -> Result<GrayImage> {
    let (w, h) = img.dims();
    if w < spec.size || h < spec.size {
        return Err(Error::ImageTooSmall {
            width: w,
            height: h,
            min: spec.size,
        });
    }
    let out = match spec.kind {
        FilterKind::Mean => mean_filter(img, spec.size),
        FilterKind::Median => median_filter(img, spec.size),
        FilterKind::Gaussian => gaussian_filter(img, spec.size, spec.sigma),
    };
    Ok(out)
}

fn mean_filter(img: &GrayImage, size: usize) -> GrayImage {
    let r = (size / 2) as isize;
    let n = (size * size) as u32;
    let (w, h) = img.dims();
    GrayImage::from_fn(w, h, |x, y| {
        let mut sum = 0u32;
        for dy in -r..=r {
            for dx in -r..=r {
                sum += u32::from(clamped(img, x as isize + dx, y as isize + dy));
            }
        }
        // round half up on a non-negative ratio
        ((2 * sum + n) / (2 * n)) as u8
    })
    .expect("same dimensions")
}

fn median_filter(img: &GrayImage, size: usize) -> GrayImage {
    let r = (size / 2) as isize;
    let mut window = Vec::with_capacity(size * size);
    let (w, h) = img.dims();
    GrayImage::from_fn(w, h, |x, y| {
        window.clear();
        for dy in -r..=r {
            for dx in -r..=r {
                window.push(clamped(img, x as isize + dx, y as isize + dy));
            }
        }
        let mid = window.len() / 2;
        *window.select_nth_unstable(mid).1
    })
    .expect("same dimensions")
}

fn gaussian_weights(size: usize, sigma: f64) -> Vec<f64> {
    let r = (size / 2) as f64;
    let raw: Vec<f64> = (0..size)
        .map(|i| {
            let d = i as f64 - r;
            (-d * d / (2.0 * sigma * sigma)).exp()
        })
        .collect();
    let total: f64 = raw.iter().sum();
    raw.into_iter().map(|v| v / total).collect()
}

/// Separable normalized Gaussian blur with border replication.
pub(crate) fn gaussian_blur_f64(img: &GrayImage, size: usize, sigma: f64) -> Vec<f64> {
    let weights = gaussian_weights(size, sigma);
    let r = (size / 2) as isize;
    let (w, h) = img.dims();
    let mut horizontal = vec![0.0; w * h];
    for y in 0..h {
        for x in 0..w {
            horizontal[y * w + x] = weights
                .iter()
                .enumerate()
                .map(|(k, wt)| wt * f64::from(clamped(img, x as isize + k as isize - r, y as isize)))
                .sum();
        }
    }
    let mut out = vec![0.0; w * h];
    for y in 0..h {
        for x in 0..w {
            out[y * w + x] = weights
                .iter()
                .enumerate()
                .map(|(k, wt)| {
                    let sy = (y as isize + k as isize - r).clamp(0, h as isize - 1) as usize;
                    wt * horizontal[sy * w + x]
                })
                .sum();
        }
    }
    out
}

fn gaussian_filter(img: &GrayImage, size: usize, sigma: f64) -> GrayImage {
    let blurred = gaussian_blur_f64(img, size, sigma);
    let pixels = blurred
        .into_iter()
        .map(|v| v.round().clamp(0.0, 255.0) as u8)
        .collect();
    GrayImage::new(img.width(), img.height(), pixels).expect("same dimensions")
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn specs() -> Vec<KernelSpec> {
        vec![
            KernelSpec::mean(3).unwrap(),
            KernelSpec::median(3).unwrap(),
            KernelSpec::gaussian(3, 1.0).unwrap(),
            KernelSpec::mean(5).unwrap(),
            KernelSpec::median(7).unwrap(),
            KernelSpec::gaussian(9, 2.0).unwrap(),
        ]
    }

    #[test]
    fn constants_are_preserved() {
        for value in [0u8, 17, 128, 255] {
            let img = GrayImage::filled(12, 9, value).unwrap();
            for spec in specs() {
                assert_eq!(spatial_filter(&img, &spec).unwrap(), img, "{spec:?}");
            }
        }
    }

    #[test]
    fn median_removes_impulse() {
        let mut img = GrayImage::filled(5, 5, 0).unwrap();
        img.set(2, 2, 255);
        let out = spatial_filter(&img, &KernelSpec::median(3).unwrap()).unwrap();
        assert_eq!(out.get(2, 2), 0);
        assert!(out.pixels().iter().all(|&p| p == 0));
    }

    #[test]
    fn mean_center_matches_hand_average() {
        let vals: [u8; 25] = [
            10, 20, 30, 40, 50, //
            60, 70, 80, 90, 100, //
            11, 22, 33, 44, 55, //
            66, 77, 88, 99, 110, //
            1, 2, 3, 4, 5,
        ];
        let img = GrayImage::new(5, 5, vals.to_vec()).unwrap();
        let out = spatial_filter(&img, &KernelSpec::mean(3).unwrap()).unwrap();
        // window rows 1..=3, cols 1..=3: 70+80+90+22+33+44+77+88+99 = 603
        let avg = 603.0f64 / 9.0;
        assert_eq!(f64::from(out.get(2, 2)), avg.round());
        assert_eq!(out.get(2, 2), 67);
    }

    #[test]
    fn corner_uses_replicated_border() {
        let img = GrayImage::from_fn(3, 3, |x, y| (x + 3 * y) as u8 * 10).unwrap();
        let out = spatial_filter(&img, &KernelSpec::mean(3).unwrap()).unwrap();
        // top-left window after replication: 0 0 10 / 0 0 10 / 30 30 40
        assert_eq!(out.get(0, 0), ((120.0f64) / 9.0).round() as u8);
    }

    #[test]
    fn rejects_small_images_and_bad_specs() {
        let img = GrayImage::filled(4, 8, 1).unwrap();
        assert!(matches!(
            spatial_filter(&img, &KernelSpec::mean(5).unwrap()),
            Err(Error::ImageTooSmall { .. })
        ));
        assert!(KernelSpec::mean(4).is_err());
        assert!(KernelSpec::median(1).is_err());
        assert!(KernelSpec::gaussian(3, 0.0).is_err());
    }

    #[test]
    fn parses_kinds() {
        assert_eq!("median".parse::<FilterKind>().unwrap(), FilterKind::Median);
        assert!("box".parse::<FilterKind>().is_err());
        assert_eq!(FilterKind::Gaussian.to_string(), "gaussian");
    }

    fn window_values(img: &GrayImage, x: usize, y: usize, size: usize) -> Vec<u8> {
        let r = (size / 2) as isize;
        let mut v = Vec::new();
        for dy in -r..=r {
            for dx in -r..=r {
                v.push(clamped(img, x as isize + dx, y as isize + dy));
            }
        }
        v
    }

    proptest! {
        #[test]
        fn smoothing_filters_stay_within_range(
            pixels in proptest::collection::vec(any::<u8>(), 100),
            sigma in 0.3f64..3.0,
        ) {
            let img = GrayImage::new(10, 10, pixels).unwrap();
            let (lo, hi) = (i16::from(img.min()), i16::from(img.max()));
            for spec in [KernelSpec::mean(3).unwrap(), KernelSpec::gaussian(5, sigma).unwrap()] {
                let out = spatial_filter(&img, &spec).unwrap();
                for &p in out.pixels() {
                    prop_assert!(i16::from(p) >= lo - 1 && i16::from(p) <= hi + 1);
                }
            }
        }

        #[test]
        fn median_outputs_window_members(pixels in proptest::collection::vec(any::<u8>(), 81)) {
            let img = GrayImage::new(9, 9, pixels).unwrap();
            let out = spatial_filter(&img, &KernelSpec::median(3).unwrap()).unwrap();
            for y in 0..9 {
                for x in 0..9 {
                    prop_assert!(window_values(&img, x, y, 3).contains(&out.get(x, y)));
                }
            }
        }
    }
}
