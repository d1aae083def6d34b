//! Separable Gaussian filtering with edge-clamped borders.

use super::Plane;

/// Kernel half-width in standard deviations.
const TRUNCATE: f64 = 4.0;

/// Sampled, normalized 1D Gaussian of radius `ceil(4σ)`. `σ = 0` gives the
/// identity kernel `[1.0]`.
pub fn gaussian_kernel(sigma: f64) -> Vec<f64> {
    assert!(
        sigma >= 0.0 && sigma.is_finite(),
        "sigma must be finite and >= 0"
    );
    if sigma == 0.0 {
        return vec![1.0];
    }
    let radius = (TRUNCATE * sigma).ceil() as i64;
    let denom = 2.0 * sigma * sigma;
    let mut k: Vec<f64> = (-radius..=radius)
        .map(|i| (-((i * i) as f64) / denom).exp())
        .collect();
    let sum: f64 = k.iter().sum();
    k.iter_mut().for_each(|v| *v /= sum);
    k
}

fn convolve_rows(src: &[f64], dst: &mut [f64], width: usize, height: usize, kernel: &[f64]) {
    let radius = (kernel.len() / 2) as isize;
    let last = width as isize - 1;
    for y in 0..height {
        let row = &src[y * width..(y + 1) * width];
        let out = &mut dst[y * width..(y + 1) * width];
        for (x, o) in out.iter_mut().enumerate() {
            let mut acc = 0.0;
            for (k, &w) in kernel.iter().enumerate() {
                let sx = (x as isize + k as isize - radius).clamp(0, last) as usize;
                acc += w * row[sx];
            }
            *o = acc;
        }
    }
}

fn convolve_cols(src: &[f64], dst: &mut [f64], width: usize, height: usize, kernel: &[f64]) {
    let radius = (kernel.len() / 2) as isize;
    let last = height as isize - 1;
    for y in 0..height {
        let out = &mut dst[y * width..(y + 1) * width];
        out.iter_mut().for_each(|v| *v = 0.0);
        for (k, &w) in kernel.iter().enumerate() {
            let sy = (y as isize + k as isize - radius).clamp(0, last) as usize;
            let row = &src[sy * width..(sy + 1) * width];
            for (o, &s) in out.iter_mut().zip(row) {
                *o += w * s;
            }
        }
    }
}

/// Separable Gaussian blur, edge clamp at all borders.
pub fn gaussian_blur(plane: &Plane, sigma: f64) -> Plane {
    if sigma == 0.0 {
        return plane.clone();
    }
    let kernel = gaussian_kernel(sigma);
    let (w, h) = plane.dims();
    let mut tmp = vec![0.0; w * h];
    let mut out = vec![0.0; w * h];
    convolve_rows(plane.data(), &mut tmp, w, h, &kernel);
    convolve_cols(&tmp, &mut out, w, h, &kernel);
    Plane::from_raw(w, h, out)
}
