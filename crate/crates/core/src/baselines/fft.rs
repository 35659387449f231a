use num_complex::Complex64;

use crate::GrayImage;

/// Iterative radix-2 Cooley-Tukey FFT. `data.len()` must be a power of two.
pub fn fft_in_place(data: &mut [Complex64]) {
    let n = data.len();
    assert!(n.is_power_of_two(), "FFT length {n} is not a power of two");
    if n < 2 {
        return;
    }
    let bits = n.trailing_zeros();
    for i in 0..n {
        let j = i.reverse_bits() >> (usize::BITS - bits);
        if j > i {
            data.swap(i, j);
        }
    }
    let mut len = 2;
    while len <= n {
        let angle = -std::f64::consts::TAU / len as f64;
        let half = len / 2;
        let twiddles: Vec<Complex64> = (0..half)
            .map(|k| Complex64::from_polar(1.0, angle * k as f64))
            .collect();
        for chunk in data.chunks_exact_mut(len) {
            let (lo, hi) = chunk.split_at_mut(half);
            for ((a, b), tw) in lo.iter_mut().zip(hi.iter_mut()).zip(&twiddles) {
                let t = *b * tw;
                *b = *a - t;
                *a += t;
            }
        }
        len <<= 1;
    }
}

/// Forward 2D transform of an `n x n` row-major grid (rows, then columns).
pub fn fft_2d(data: &mut [Complex64], n: usize) {
    assert_eq!(data.len(), n * n);
    for row in data.chunks_exact_mut(n) {
        fft_in_place(row);
    }
    let mut column = vec![Complex64::new(0.0, 0.0); n];
    for x in 0..n {
        for (y, c) in column.iter_mut().enumerate() {
            *c = data[y * n + x];
        }
        fft_in_place(&mut column);
        for (y, c) in column.iter().enumerate() {
            data[y * n + x] = *c;
        }
    }
}

/// Spectrum image plus the `log(1 + |F|)` range that was mapped onto
/// `[0, 255]`. The scale is per image, so two views are only comparable
/// through these bounds.
#[derive(Debug, Clone, PartialEq)]
pub struct SpectrumView {
    pub image: GrayImage,
    pub log_min: f64,
    pub log_max: f64,
}

/// Zero-pads to the next power-of-two square, transforms, takes
/// `log(1 + |F|)`, moves DC to `(n/2, n/2)` and min-max rescales to 8 bits.
pub fn fft_log_magnitude(img: &GrayImage) -> SpectrumView {
    let n = img.width().max(img.height()).next_power_of_two();
    let mut grid = vec![Complex64::new(0.0, 0.0); n * n];
    for (y, row) in img.rows().enumerate() {
        for (x, &p) in row.iter().enumerate() {
            grid[y * n + x] = Complex64::new(f64::from(p), 0.0);
        }
    }
    fft_2d(&mut grid, n);

    let half = n / 2;
    let mut shifted = vec![0.0; n * n];
    for y in 0..n {
        for x in 0..n {
            let sy = (y + half) % n;
            let sx = (x + half) % n;
            shifted[sy * n + sx] = grid[y * n + x].norm().ln_1p();
        }
    }
    let log_min = shifted.iter().copied().fold(f64::INFINITY, f64::min);
    let log_max = shifted.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let span = log_max - log_min;
    let pixels = shifted
        .iter()
        .map(|&v| {
            if span > 0.0 {
                (255.0 * (v - log_min) / span).round() as u8
            } else {
                0
            }
        })
        .collect();
    SpectrumView {
        image: GrayImage::new(n, n, pixels).expect("square grid"),
        log_min,
        log_max,
    }
}
