//! Universal image quality index: mean of
//! `Q = 4 cov(a, b) mean(a) mean(b) / ((var a + var b)(mean(a)^2 + mean(b)^2))`
//! over every 8x8 window position (stride 1).
//!
//! Each window is evaluated from integer sums, so a zero denominator is
//! detected exactly. Such windows score 1 when both windows are identical and
//! 0 otherwise.

use crate::{Error, GrayImage, Result};

const WINDOW: usize = 8;

/// Window sums `[a, b, a^2, b^2, ab]` for every valid top-left corner.
fn window_sums(a: &GrayImage, b: &GrayImage) -> Vec<[i64; 5]> {
    let (w, h) = a.dims();
    let ow = w - WINDOW + 1;
    let oh = h - WINDOW + 1;
    let terms = |i: usize| -> [i64; 5] {
        let x = i64::from(a.pixels()[i]);
        let y = i64::from(b.pixels()[i]);
        [x, y, x * x, y * y, x * y]
    };
    // horizontal running sums, then vertical
    let mut rows = vec![[0i64; 5]; ow * h];
    for y in 0..h {
        let mut acc = [0i64; 5];
        for x in 0..w {
            let t = terms(y * w + x);
            for k in 0..5 {
                acc[k] += t[k];
            }
            if x >= WINDOW {
                let old = terms(y * w + x - WINDOW);
                for k in 0..5 {
                    acc[k] -= old[k];
                }
            }
            if x + 1 >= WINDOW {
                rows[y * ow + x + 1 - WINDOW] = acc;
            }
        }
    }
    let mut out = vec![[0i64; 5]; ow * oh];
    for x in 0..ow {
        let mut acc = [0i64; 5];
        for y in 0..h {
            let t = rows[y * ow + x];
            for k in 0..5 {
                acc[k] += t[k];
            }
            if y >= WINDOW {
                let old = rows[(y - WINDOW) * ow + x];
                for k in 0..5 {
                    acc[k] -= old[k];
                }
            }
            if y + 1 >= WINDOW {
                out[(y + 1 - WINDOW) * ow + x] = acc;
            }
        }
    }
    out
}

fn windows_identical(a: &GrayImage, b: &GrayImage, x0: usize, y0: usize) -> bool {
    let w = a.width();
    (y0..y0 + WINDOW).all(|y| a.pixels()[y * w + x0..y * w + x0 + WINDOW] == b.pixels()[y * w + x0..y * w + x0 + WINDOW])
}

pub fn uiqi(a: &GrayImage, b: &GrayImage) -> Result<f64> {
    a.ensure_same_dims(b)?;
    let (w, h) = a.dims();
    if w < WINDOW || h < WINDOW {
        return Err(Error::ImageTooSmall {
            width: w,
            height: h,
            min: WINDOW,
        });
    }
    let ow = w - WINDOW + 1;
    let n = (WINDOW * WINDOW) as i128;
    let sums = window_sums(a, b);
    let total: f64 = sums
        .iter()
        .enumerate()
        .map(|(i, s)| {
            let [sa, sb, saa, sbb, sab] = s.map(i128::from);
            // Q with every mean/variance scaled by n^2; the factors cancel
            let numerator = 4 * (n * sab - sa * sb) * sa * sb;
            let denominator = (n * saa - sa * sa + n * sbb - sb * sb) * (sa * sa + sb * sb);
            if denominator == 0 {
                if windows_identical(a, b, i % ow, i / ow) {
                    1.0
                } else {
                    0.0
                }
            } else {
                numerator as f64 / denominator as f64
            }
        })
        .sum();
    Ok(total / sums.len() as f64)
}
