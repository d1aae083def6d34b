use serde::{Deserialize, Serialize};

use super::ImageBuf;
use crate::error::{Error, Result};

/// Output edge length of every face crop.
pub const FACE_CROP_SIZE: usize = 256;

/// Face bounding box in source pixel indices; the box spans pixel indices
/// `x ..= x + w - 1` horizontally.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FaceCrop {
    pub x: f64,
    pub y: f64,
    pub w: f64,
    pub h: f64,
}

impl FaceCrop {
    pub fn validate(&self, width: usize, height: usize) -> Result<()> {
        let checks = [
            ("x >= 0", self.x, 0.0, self.x >= 0.0),
            ("y >= 0", self.y, 0.0, self.y >= 0.0),
            ("w >= 1", self.w, 1.0, self.w >= 1.0),
            ("h >= 1", self.h, 1.0, self.h >= 1.0),
            (
                "x + w <= width",
                self.x + self.w,
                width as f64,
                self.x + self.w <= width as f64,
            ),
            (
                "y + h <= height",
                self.y + self.h,
                height as f64,
                self.y + self.h <= height as f64,
            ),
        ];
        for (bound, value, limit, ok) in checks {
            if !ok || !value.is_finite() {
                return Err(Error::CropOutOfBounds {
                    bound,
                    value,
                    limit,
                });
            }
        }
        Ok(())
    }

    /// Largest centered square inside a `width`×`height` frame.
    pub fn centered_square(width: usize, height: usize) -> Self {
        let side = width.min(height) as f64;
        Self {
            x: ((width as f64 - side) / 2.0).floor(),
            y: ((height as f64 - side) / 2.0).floor(),
            w: side,
            h: side,
        }
    }
}

/// Bilinear resample of the crop box to 256×256.
///
/// Corner pixels of the box land exactly on corner pixels of the output,
/// so a 256-pixel box is an exact copy and ramps keep their endpoints.
pub fn resize_crop_face(img: &ImageBuf, crop: &FaceCrop) -> Result<ImageBuf> {
    crop.validate(img.width(), img.height())?;
    let n = FACE_CROP_SIZE;
    let step_x = (crop.w - 1.0) / (n - 1) as f64;
    let step_y = (crop.h - 1.0) / (n - 1) as f64;
    let mut data = Vec::with_capacity(n * n * 3);
    for r in 0..n {
        let sy = crop.y + r as f64 * step_y;
        for c in 0..n {
            let sx = crop.x + c as f64 * step_x;
            data.extend_from_slice(&img.sample(sx, sy));
        }
    }
    Ok(ImageBuf::from_raw(n, n, data))
}
