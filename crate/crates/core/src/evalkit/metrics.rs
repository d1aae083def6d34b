use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::imgcore::color::luma;
use crate::imgcore::filter::gaussian_kernel;
use crate::imgcore::{ImageBuf, Plane};

/// Returned by [`psnr`] for identical images, and the ceiling for all others.
pub const PSNR_CAP_DB: f64 = 99.0;
pub const SSIM_WINDOW: usize = 11;
pub const SSIM_SIGMA: f64 = 1.5;
const SSIM_K1: f64 = 0.01;
const SSIM_K2: f64 = 0.03;

/// Mean absolute difference over every sample.
pub fn l1_pixel(a: &ImageBuf, b: &ImageBuf) -> Result<f64> {
    a.ensure_same_dims(b)?;
    let total: f64 = a
        .data()
        .iter()
        .zip(b.data())
        .map(|(&x, &y)| (f64::from(x) - f64::from(y)).abs())
        .sum();
    Ok(total / a.data().len() as f64)
}

pub fn mse(a: &ImageBuf, b: &ImageBuf) -> Result<f64> {
    a.ensure_same_dims(b)?;
    let total: f64 = a
        .data()
        .iter()
        .zip(b.data())
        .map(|(&x, &y)| (f64::from(x) - f64::from(y)).powi(2))
        .sum();
    Ok(total / a.data().len() as f64)
}

/// `10 log10(peak² / MSE)`, capped at [`PSNR_CAP_DB`].
pub fn psnr(a: &ImageBuf, b: &ImageBuf, peak: f64) -> Result<f64> {
    let e = mse(a, b)?;
    if e == 0.0 {
        return Ok(PSNR_CAP_DB);
    }
    Ok((10.0 * (peak * peak / e).log10()).min(PSNR_CAP_DB))
}

fn luma_plane(img: &ImageBuf) -> Plane {
    let data = img.pixels().map(luma).collect();
    Plane::from_raw(img.width(), img.height(), data)
}

/// Valid-mode separable filtering; output shrinks by `k.len() - 1`.
fn filter_valid(src: &[f64], w: usize, h: usize, k: &[f64]) -> (Vec<f64>, usize, usize) {
    let n = k.len();
    let (ow, oh) = (w + 1 - n, h + 1 - n);
    let mut tmp = vec![0.0; ow * h];
    for y in 0..h {
        for x in 0..ow {
            tmp[y * ow + x] = (0..n).map(|i| k[i] * src[y * w + x + i]).sum();
        }
    }
    let mut out = vec![0.0; ow * oh];
    for y in 0..oh {
        for x in 0..ow {
            out[y * ow + x] = (0..n).map(|i| k[i] * tmp[(y + i) * ow + x]).sum();
        }
    }
    (out, ow, oh)
}

/// Mean SSIM of the Rec. 709 luma over every fully contained 11×11
/// Gaussian window (σ = 1.5), dynamic range 1.
pub fn ssim(a: &ImageBuf, b: &ImageBuf) -> Result<f64> {
    a.ensure_same_dims(b)?;
    let (w, h) = a.dims();
    if w < SSIM_WINDOW || h < SSIM_WINDOW {
        return Err(Error::TooSmall {
            width: w,
            height: h,
            min: SSIM_WINDOW,
        });
    }
    let kernel = gaussian_kernel(SSIM_SIGMA);
    let trim = (kernel.len() - SSIM_WINDOW) / 2;
    let kernel = &kernel[trim..trim + SSIM_WINDOW];
    let norm: f64 = kernel.iter().sum();
    let kernel: Vec<f64> = kernel.iter().map(|v| v / norm).collect();

    let x = luma_plane(a);
    let y = luma_plane(b);
    let xs = x.data();
    let ys = y.data();
    let prod = |f: &dyn Fn(usize) -> f64| (0..xs.len()).map(f).collect::<Vec<f64>>();
    let (mx, ow, oh) = filter_valid(xs, w, h, &kernel);
    let (my, ..) = filter_valid(ys, w, h, &kernel);
    let (xx, ..) = filter_valid(&prod(&|i| xs[i] * xs[i]), w, h, &kernel);
    let (yy, ..) = filter_valid(&prod(&|i| ys[i] * ys[i]), w, h, &kernel);
    let (xy, ..) = filter_valid(&prod(&|i| xs[i] * ys[i]), w, h, &kernel);

    let c1 = SSIM_K1 * SSIM_K1;
    let c2 = SSIM_K2 * SSIM_K2;
    let total: f64 = (0..ow * oh)
        .map(|i| {
            let (ux, uy) = (mx[i], my[i]);
            let vx = xx[i] - ux * ux;
            let vy = yy[i] - uy * uy;
            let cov = xy[i] - ux * uy;
            ((2.0 * ux * uy + c1) * (2.0 * cov + c2)) / ((ux * ux + uy * uy + c1) * (vx + vy + c2))
        })
        .sum();
    Ok(total / (ow * oh) as f64)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MetricSet {
    pub psnr: f64,
    pub ssim: f64,
    pub l1: f64,
}

pub fn evaluate(pred: &ImageBuf, truth: &ImageBuf) -> Result<MetricSet> {
    Ok(MetricSet {
        psnr: psnr(pred, truth, 1.0)?,
        ssim: ssim(pred, truth)?,
        l1: l1_pixel(pred, truth)?,
    })
}
