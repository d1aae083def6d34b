//! Random color correction for the shadowed image: a diagonal gain that
//! darkens and skews toward blue, times a small random perturbation.

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::imgcore::ImageBuf;
use crate::rng;

/// A 3×3 color correction matrix on linear RGB.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ColorJitter {
    pub matrix: [[f64; 3]; 3],
    /// Diagonal gain the matrix was built from; all ones for matrices
    /// supplied directly.
    pub gains: [f64; 3],
}

impl ColorJitter {
    pub fn from_matrix(matrix: [[f64; 3]; 3]) -> Result<Self> {
        if matrix.iter().flatten().any(|v| !v.is_finite()) {
            return Err(Error::param("ccm", "entries must be finite"));
        }
        Ok(Self {
            matrix,
            gains: [1.0; 3],
        })
    }

    pub fn identity() -> Self {
        Self::scaled(1.0)
    }

    /// `gain * I₃`.
    pub fn scaled(gain: f64) -> Self {
        let mut matrix = [[0.0; 3]; 3];
        for (i, row) in matrix.iter_mut().enumerate() {
            row[i] = gain;
        }
        Self {
            matrix,
            gains: [gain; 3],
        }
    }

    pub fn apply(&self, rgb: [f64; 3]) -> [f64; 3] {
        let m = &self.matrix;
        [0, 1, 2].map(|r| m[r][0] * rgb[0] + m[r][1] * rgb[1] + m[r][2] * rgb[2])
    }
}

/// Distribution of color jitters `D · (I₃ + E)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CcmSampler {
    /// Overall darkening gain `g`.
    pub gain: (f64, f64),
    /// Blue tint `t`: gains are `(g(1-t), g, g(1+t))`.
    pub blue_tint: (f64, f64),
    /// Entries of `E` are drawn from `U[-p, p]`.
    pub perturbation: f64,
}

impl Default for CcmSampler {
    fn default() -> Self {
        Self {
            gain: (0.25, 0.75),
            blue_tint: (0.0, 0.15),
            perturbation: 0.05,
        }
    }
}

impl CcmSampler {
    /// Rejects ranges that could brighten white above unit luminance.
    pub fn validate(&self) -> Result<()> {
        let (g0, g1) = self.gain;
        let (t0, t1) = self.blue_tint;
        if !(0.0 <= g0 && g0 <= g1) || !(0.0 <= t0 && t0 <= t1 && t1 < 1.0) {
            return Err(Error::param(
                "ccm",
                "gain and tint ranges must be ordered and non-negative",
            ));
        }
        if !(0.0..1.0).contains(&self.perturbation) {
            return Err(Error::param("ccm", "perturbation must be in [0, 1)"));
        }
        let worst = g1 * (1.0 + t1) * (1.0 + 3.0 * self.perturbation);
        if worst > 1.0 {
            return Err(Error::param(
                "ccm",
                format!("worst-case channel gain {worst:.4} exceeds 1"),
            ));
        }
        Ok(())
    }

    pub fn sample(&self, seed: u64) -> ColorJitter {
        let mut rng = rng::stream(seed);
        let g = rng.random_range(self.gain.0..=self.gain.1);
        let t = rng.random_range(self.blue_tint.0..=self.blue_tint.1);
        let gains = [g * (1.0 - t), g, g * (1.0 + t)];
        let p = self.perturbation;
        let mut matrix = [[0.0; 3]; 3];
        for (r, row) in matrix.iter_mut().enumerate() {
            for (c, v) in row.iter_mut().enumerate() {
                let e = if p > 0.0 {
                    rng.random_range(-p..=p)
                } else {
                    0.0
                };
                let delta = if r == c { 1.0 } else { 0.0 };
                *v = gains[r] * (delta + e);
            }
        }
        ColorJitter { matrix, gains }
    }
}

pub fn sample_ccm(seed: u64) -> ColorJitter {
    CcmSampler::default().sample(seed)
}

/// Per-pixel matrix multiply, clamped to [0, 1].
pub fn apply_ccm(lit: &ImageBuf, jitter: &ColorJitter) -> ImageBuf {
    let mut data = Vec::with_capacity(lit.data().len());
    for p in lit.pixels() {
        let out = jitter.apply(p.map(f64::from));
        data.extend(out.iter().map(|&v| v.clamp(0.0, 1.0) as f32));
    }
    ImageBuf::from_raw(lit.width(), lit.height(), data)
}
