//! Evaluation: the affine output head, pixel metrics, and homography
//! alignment against candidate ground-truth frames.

pub mod align;
pub mod metrics;

use crate::error::{Error, Result};
use crate::imgcore::ImageBuf;

pub use align::{
    dlt_homography, select_counterpart, warp_homography, warp_homography_into, Correspondence,
    Counterpart, Homography, HomographyFit,
};
pub use metrics::{evaluate, l1_pixel, mse, psnr, ssim, MetricSet, PSNR_CAP_DB};

/// Per-pixel scale `A` and offset `B`.
#[derive(Debug, Clone, PartialEq)]
pub struct AffineOutput {
    pub scale: ImageBuf,
    pub offset: ImageBuf,
}

impl AffineOutput {
    pub fn new(scale: ImageBuf, offset: ImageBuf) -> Result<Self> {
        scale.ensure_same_dims(&offset)?;
        Ok(Self { scale, offset })
    }
}

/// `I_out = I_in ∘ A + B`, unclamped.
pub fn apply_affine(input: &ImageBuf, out: &AffineOutput) -> Result<ImageBuf> {
    input.ensure_same_dims(&out.scale)?;
    input.ensure_same_dims(&out.offset)?;
    let data = input
        .data()
        .iter()
        .zip(out.scale.data())
        .zip(out.offset.data())
        .map(|((&i, &a), &b)| (f64::from(i) * f64::from(a) + f64::from(b)) as f32)
        .collect();
    ImageBuf::new(input.width(), input.height(), data).map_err(|_| Error::NonFinite { index: 0 })
}
