//! Spatially varying blur and intensity applied to the scattered mask.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::imgcore::filter::gaussian_blur;
use crate::imgcore::{Plane, ShadowMask};
use crate::maskgen::perlin::raw_field;
use crate::maskgen::{PerlinSampler, PerlinSpec};
use crate::rng;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct VariationParams {
    pub noise: PerlinSampler,
    /// Blur sigma range in pixels.
    pub sigma_range: (f64, f64),
    /// Lowest intensity multiplier.
    pub intensity_floor: f64,
    /// Spacing of the pre-blurred scale stack in sigma.
    pub stack_step: f64,
}

impl Default for VariationParams {
    fn default() -> Self {
        Self {
            noise: PerlinSampler::spatial_variation(),
            sigma_range: (0.0, 8.0),
            intensity_floor: 0.4,
            stack_step: 0.5,
        }
    }
}

/// Parameters of a drawn [`SpatialVariation`], as written to provenance.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct VariationRecord {
    pub blur_noise: PerlinSpec,
    pub intensity_noise: PerlinSpec,
    pub sigma_range: (f64, f64),
    pub intensity_floor: f64,
    pub stack_step: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SpatialVariation {
    pub sigma: Plane,
    pub intensity: Plane,
    pub stack_step: f64,
    /// `None` for hand-built fields.
    pub record: Option<VariationRecord>,
}

impl SpatialVariation {
    pub fn new(sigma: Plane, intensity: Plane, stack_step: f64) -> Result<Self> {
        if sigma.dims() != intensity.dims() {
            return Err(Error::ShapeMismatch {
                expected: sigma.dims(),
                got: intensity.dims(),
            });
        }
        if sigma.data().iter().any(|&s| s < 0.0) {
            return Err(Error::param("sigma", "field must be non-negative"));
        }
        if intensity.data().iter().any(|&v| !(0.0..=1.0).contains(&v)) {
            return Err(Error::param("intensity", "field must lie in [0, 1]"));
        }
        if !(stack_step > 0.0 && stack_step.is_finite()) {
            return Err(Error::param("stack_step", "must be positive"));
        }
        Ok(Self {
            sigma,
            intensity,
            stack_step,
            record: None,
        })
    }

    pub fn constant(width: usize, height: usize, sigma: f64, intensity: f64) -> Result<Self> {
        Self::new(
            Plane::filled(width, height, sigma)?,
            Plane::filled(width, height, intensity)?,
            VariationParams::default().stack_step,
        )
    }

    pub fn dims(&self) -> (usize, usize) {
        self.sigma.dims()
    }
}

impl VariationParams {
    pub fn validate(&self) -> Result<()> {
        self.noise.validate()?;
        let (lo, hi) = self.sigma_range;
        if !(0.0 <= lo && lo <= hi && hi.is_finite()) {
            return Err(Error::param(
                "sv_sigma",
                format!("invalid range [{lo}, {hi}]"),
            ));
        }
        if !(0.0..=1.0).contains(&self.intensity_floor) {
            return Err(Error::param("sv_intensity_floor", "must be in [0, 1]"));
        }
        if !(self.stack_step > 0.0 && self.stack_step.is_finite()) {
            return Err(Error::param("stack_step", "must be positive"));
        }
        Ok(())
    }

    /// Draws the sigma and intensity fields from independent substreams
    /// of `seed`.
    pub fn fields(&self, seed: u64, width: usize, height: usize) -> Result<SpatialVariation> {
        self.validate()?;
        let blur_noise = self.noise.sample(rng::derive_seed(seed, "sv-blur"));
        let intensity_noise = self.noise.sample(rng::derive_seed(seed, "sv-intensity"));
        let (lo, hi) = self.sigma_range;
        let floor = self.intensity_floor;
        let sigma = raw_field(&blur_noise, width, height)?
            .normalized()
            .map(|t| (lo + t * (hi - lo)).clamp(lo, hi));
        let intensity = raw_field(&intensity_noise, width, height)?
            .normalized()
            .map(|t| (floor + t * (1.0 - floor)).clamp(floor, 1.0));
        Ok(SpatialVariation {
            sigma,
            intensity,
            stack_step: self.stack_step,
            record: Some(VariationRecord {
                blur_noise,
                intensity_noise,
                sigma_range: self.sigma_range,
                intensity_floor: floor,
                stack_step: self.stack_step,
            }),
        })
    }
}

pub fn spatial_variation_fields(
    seed: u64,
    width: usize,
    height: usize,
) -> Result<SpatialVariation> {
    VariationParams::default().fields(seed, width, height)
}

/// Per-pixel Gaussian blur with a varying sigma.
///
/// Copies of `plane` are blurred at sigmas `k * step`; each pixel linearly
/// interpolates between the two levels that bracket its sigma. Only levels
/// actually referenced are computed.
pub fn variable_blur(plane: &Plane, sigma: &Plane, step: f64) -> Result<Plane> {
    if plane.dims() != sigma.dims() {
        return Err(Error::ShapeMismatch {
            expected: plane.dims(),
            got: sigma.dims(),
        });
    }
    let placement: Vec<(usize, f64)> = sigma
        .data()
        .iter()
        .map(|&s| {
            let pos = s.max(0.0) / step;
            let k = pos.floor();
            let t = pos - k;
            (k as usize, t)
        })
        .collect();
    let top = placement
        .iter()
        .map(|&(k, t)| if t > 0.0 { k + 1 } else { k })
        .max()
        .unwrap_or(0);
    let mut needed = vec![false; top + 1];
    for &(k, t) in &placement {
        needed[k] = true;
        if t > 0.0 {
            needed[k + 1] = true;
        }
    }
    let levels: Vec<Option<Plane>> = needed
        .iter()
        .enumerate()
        .map(|(k, &n)| n.then(|| gaussian_blur(plane, k as f64 * step)))
        .collect();
    let data = placement
        .iter()
        .enumerate()
        .map(|(i, &(k, t))| {
            let a = levels[k].as_ref().expect("level computed").data()[i];
            if t > 0.0 {
                let b = levels[k + 1].as_ref().expect("level computed").data()[i];
                a + t * (b - a)
            } else {
                a
            }
        })
        .collect();
    let (w, h) = plane.dims();
    Ok(Plane::from_raw(w, h, data))
}

/// Spatially varying blur followed by the per-pixel intensity multiply.
pub fn apply_spatial_variation(m_ss: &ShadowMask, sv: &SpatialVariation) -> Result<ShadowMask> {
    if m_ss.dims() != sv.dims() {
        return Err(Error::ShapeMismatch {
            expected: m_ss.dims(),
            got: sv.dims(),
        });
    }
    let mut out = Vec::with_capacity(3);
    for c in 0..3 {
        let blurred = variable_blur(&m_ss.channel(c), &sv.sigma, sv.stack_step)?;
        let data = blurred
            .data()
            .iter()
            .zip(sv.intensity.data())
            .map(|(&m, &i)| (m * i).clamp(0.0, 1.0))
            .collect();
        out.push(Plane::from_raw(blurred.width(), blurred.height(), data));
    }
    ShadowMask::from_planes([&out[0], &out[1], &out[2]])
}
