//! Desk-scale stand-in for light-stage captures: a Lambertian sphere with a
//! nose ridge, lit by each rig light in turn, with ray-marched cast shadows.

use nalgebra::Vector3;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::rig::LightRig;
use super::scan::OlatScan;
use crate::error::{Error, Result};
use crate::imgcore::{ImageBuf, LandmarkSet};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SyntheticHead {
    pub size: usize,
    /// Sphere radius relative to half the frame.
    pub radius: f64,
    pub nose_height: f64,
    /// Horizontal and vertical spread of the nose bump.
    pub nose_spread: (f64, f64),
    pub albedo: [f64; 3],
}

impl Default for SyntheticHead {
    fn default() -> Self {
        Self {
            size: 128,
            radius: 0.8,
            nose_height: 0.3,
            nose_spread: (0.07, 0.16),
            albedo: [0.75, 0.55, 0.45],
        }
    }
}

const NOSE_CENTER_Y: f64 = -0.05;

impl SyntheticHead {
    pub fn with_size(size: usize) -> Self {
        Self {
            size,
            ..Self::default()
        }
    }

    fn validate(&self) -> Result<()> {
        if self.size < 8 {
            return Err(Error::TooSmall {
                width: self.size,
                height: self.size,
                min: 8,
            });
        }
        if !(self.radius > 0.0 && self.radius <= 1.0) {
            return Err(Error::param("radius", "must be in (0, 1]"));
        }
        if !(self.nose_spread.0 > 0.0 && self.nose_spread.1 > 0.0) {
            return Err(Error::param("nose_spread", "must be positive"));
        }
        Ok(())
    }

    /// Height above the image plane and its gradient, or `None` off the head.
    fn surface(&self, x: f64, y: f64) -> Option<(f64, f64, f64)> {
        let r2 = self.radius * self.radius - x * x - y * y;
        if r2 <= 0.0 {
            return None;
        }
        let s = r2.sqrt().max(1e-6);
        let (sx, sy) = self.nose_spread;
        let dy = y - NOSE_CENTER_Y;
        let bump =
            self.nose_height * (-(x * x) / (2.0 * sx * sx) - dy * dy / (2.0 * sy * sy)).exp();
        let h = s + bump;
        let hx = -x / s - bump * x / (sx * sx);
        let hy = -y / s - bump * dy / (sy * sy);
        Some((h, hx, hy))
    }

    fn albedo_at(&self, x: f64, y: f64) -> [f64; 3] {
        // symmetric rosy cheeks
        let cheek = (-((x.abs() - 0.35).powi(2) + (y + 0.15).powi(2)) / 0.02).exp();
        [
            self.albedo[0] * (1.0 + 0.12 * cheek),
            self.albedo[1] * (1.0 - 0.05 * cheek),
            self.albedo[2] * (1.0 - 0.05 * cheek),
        ]
    }

    fn plane_coords(&self, col: usize, row: usize) -> (f64, f64) {
        let n = self.size as f64;
        (
            (col as f64 + 0.5) / n * 2.0 - 1.0,
            1.0 - (row as f64 + 0.5) / n * 2.0,
        )
    }

    fn occluded(&self, x: f64, y: f64, h: f64, light: &Vector3<f64>) -> bool {
        let planar = (light.x * light.x + light.y * light.y).sqrt();
        if planar < 1e-9 {
            return false;
        }
        let (dx, dy) = (light.x / planar, light.y / planar);
        let rise = light.z / planar;
        let top = self.radius + self.nose_height;
        let step = 1.0 / self.size as f64;
        let mut t = step;
        loop {
            let z = h + rise * t;
            if z > top {
                return false;
            }
            match self.surface(x + dx * t, y + dy * t) {
                Some((hs, _, _)) if hs > z + 1e-4 => return true,
                Some(_) => {}
                None => return false,
            }
            t += step;
        }
    }

    /// The image of the head lit by a single unit-power light arriving
    /// along `incoming` (from the light toward the subject), expressed in
    /// the image frame (x right, y up, z toward the camera).
    pub fn render_light(&self, incoming: &Vector3<f64>) -> Result<ImageBuf> {
        self.validate()?;
        let l = -incoming.normalize();
        ImageBuf::from_fn(self.size, self.size, |col, row| {
            let (x, y) = self.plane_coords(col, row);
            let Some((h, hx, hy)) = self.surface(x, y) else {
                return [0.0; 3];
            };
            let normal = Vector3::new(-hx, -hy, 1.0).normalize();
            let shade = normal.dot(&l);
            if shade <= 0.0 || self.occluded(x, y, h, &l) {
                return [0.0; 3];
            }
            self.albedo_at(x, y).map(|a| (a * shade) as f32)
        })
    }

    /// One image per active light of `rig`.
    pub fn render(&self, rig: &LightRig, subject: &str) -> Result<OlatScan> {
        self.validate()?;
        let frame = camera_frame(&rig.camera_axis());
        let images = rig
            .active_indices()
            .par_iter()
            .map(|&i| {
                let d = rig.direction(i);
                self.render_light(&Vector3::new(
                    d.dot(&frame[0]),
                    d.dot(&frame[1]),
                    d.dot(&frame[2]),
                ))
            })
            .collect::<Result<Vec<_>>>()?;
        OlatScan::for_rig(rig, subject, images)
    }

    /// The canonical 468-point layout fitted to the rendered face; left and
    /// right sides mirror about the vertical center line.
    pub fn landmarks(&self) -> LandmarkSet {
        let n = self.size as f64;
        let side = self.radius * n * 0.85;
        let origin = (n - side) / 2.0;
        LandmarkSet::canonical_face(origin, origin, side, side)
    }
}

/// Right, up and toward-camera axes for a camera looking along `axis`.
pub fn camera_frame(axis: &Vector3<f64>) -> [Vector3<f64>; 3] {
    let back = -axis.normalize();
    let up_hint = if back.y.abs() > 0.99 {
        Vector3::x()
    } else {
        Vector3::y()
    };
    let right = up_hint.cross(&back).normalize();
    let up = back.cross(&right);
    [right, up, back]
}
