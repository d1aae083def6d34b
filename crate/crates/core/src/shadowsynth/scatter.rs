//! Subsurface-scattering approximation: each mask channel is blurred with
//! its own weighted sum of Gaussians, red widest.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::imgcore::filter::gaussian_blur;
use crate::imgcore::{Plane, ShadowMask};

const WEIGHT_TOLERANCE: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ScatterLobe {
    /// Standard deviation in pixels.
    pub sigma: f64,
    pub weight: f64,
}

/// Per-channel Gaussian mixtures (R, G, B).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScatterProfile {
    channels: [Vec<ScatterLobe>; 3],
}

impl ScatterProfile {
    pub fn new(channels: [Vec<ScatterLobe>; 3]) -> Result<Self> {
        for (c, lobes) in channels.iter().enumerate() {
            if lobes.is_empty() {
                return Err(Error::param("scatter", format!("channel {c} has no lobes")));
            }
            if lobes
                .iter()
                .any(|l| !(l.sigma > 0.0 && l.sigma.is_finite()))
            {
                return Err(Error::param(
                    "scatter",
                    format!("channel {c} has a non-positive sigma"),
                ));
            }
            if lobes
                .iter()
                .any(|l| !(l.weight >= 0.0 && l.weight.is_finite()))
            {
                return Err(Error::param(
                    "scatter",
                    format!("channel {c} has a negative weight"),
                ));
            }
            let sum: f64 = lobes.iter().map(|l| l.weight).sum();
            if (sum - 1.0).abs() > WEIGHT_TOLERANCE {
                return Err(Error::param(
                    "scatter",
                    format!("channel {c} weights sum to {sum}, not 1"),
                ));
            }
        }
        let profile = Self { channels };
        let [r, g, b] = [0, 1, 2].map(|c| profile.effective_radius(c));
        if !(r >= g && g >= b) {
            return Err(Error::param(
                "scatter",
                format!(
                    "effective radii must satisfy red >= green >= blue, got {r:.3}, {g:.3}, {b:.3}"
                ),
            ));
        }
        Ok(profile)
    }

    /// Equal weights over the given sigmas in each channel.
    pub fn uniform(sigmas: [&[f64]; 3]) -> Result<Self> {
        Self::new(sigmas.map(|s| {
            let w = 1.0 / s.len() as f64;
            s.iter()
                .map(|&sigma| ScatterLobe { sigma, weight: w })
                .collect()
        }))
    }

    /// Default skin profile at 256×256: red {2, 6, 12}, green {2, 4, 8},
    /// blue {2, 3, 6} pixels, equal weights.
    pub fn skin() -> Self {
        Self::uniform([&[2.0, 6.0, 12.0], &[2.0, 4.0, 8.0], &[2.0, 3.0, 6.0]])
            .expect("default profile is valid")
    }

    pub fn lobes(&self, channel: usize) -> &[ScatterLobe] {
        &self.channels[channel]
    }

    /// `sqrt(Σ w σ²)`.
    pub fn effective_radius(&self, channel: usize) -> f64 {
        self.channels[channel]
            .iter()
            .map(|l| l.weight * l.sigma * l.sigma)
            .sum::<f64>()
            .sqrt()
    }

    /// Analytic 2D kernel value at squared radius `r2`.
    pub fn kernel_value(&self, channel: usize, r2: f64) -> f64 {
        self.channels[channel]
            .iter()
            .map(|l| {
                let s2 = l.sigma * l.sigma;
                l.weight / (2.0 * std::f64::consts::PI * s2) * (-r2 / (2.0 * s2)).exp()
            })
            .sum()
    }
}

fn blur_mixture(plane: &Plane, lobes: &[ScatterLobe], cache: &mut Vec<(u64, Plane)>) -> Plane {
    let mut acc = vec![0.0; plane.data().len()];
    for lobe in lobes {
        let key = lobe.sigma.to_bits();
        let idx = match cache.iter().position(|(k, _)| *k == key) {
            Some(i) => i,
            None => {
                cache.push((key, gaussian_blur(plane, lobe.sigma)));
                cache.len() - 1
            }
        };
        for (a, &v) in acc.iter_mut().zip(cache[idx].1.data()) {
            *a += lobe.weight * v;
        }
    }
    let (w, h) = plane.dims();
    Plane::from_raw(w, h, acc)
}

/// `M_c = Σ_k (M_in,c * G(σ_c,k)) w_c,k` with edge-clamped borders.
pub fn ss_blur(mask: &ShadowMask, profile: &ScatterProfile) -> ShadowMask {
    let planes = [0, 1, 2].map(|c| mask.channel(c));
    let shared = planes[0] == planes[1] && planes[1] == planes[2];
    let mut shared_cache = Vec::new();
    let out: Vec<Plane> = (0..3)
        .map(|c| {
            if shared {
                blur_mixture(&planes[0], profile.lobes(c), &mut shared_cache)
            } else {
                blur_mixture(&planes[c], profile.lobes(c), &mut Vec::new())
            }
        })
        .collect();
    ShadowMask::from_planes([&out[0], &out[1], &out[2]]).expect("blur preserves shape")
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::imgcore::ImageBuf;

    fn impulse(n: usize) -> ShadowMask {
        let c = n / 2;
        ShadowMask::new(
            ImageBuf::from_fn(
                n,
                n,
                |x, y| if x == c && y == c { [1.0; 3] } else { [0.0; 3] },
            )
            .unwrap(),
        )
        .unwrap()
    }

    #[test]
    fn constant_mask_is_unchanged() {
        for c in [0.0f32, 0.25, 0.7, 1.0] {
            let m = ShadowMask::filled(40, 30, c).unwrap();
            let out = ss_blur(&m, &ScatterProfile::skin());
            let err = out
                .data()
                .iter()
                .map(|&v| (f64::from(v) - f64::from(c)).abs())
                .fold(0.0, f64::max);
            assert!(err <= 1e-9, "c {c}: {err}");
        }
    }

    #[test]
    fn impulse_response_matches_analytic_mixture() {
        let n = 129;
        let p = ScatterProfile::skin();
        let out = ss_blur(&impulse(n), &p);
        let c = (n / 2) as f64;
        for ch in 0..3 {
            let plane = out.channel(ch);
            let mut max_err: f64 = 0.0;
            for y in 0..n {
                for x in 0..n {
                    let r2 = (x as f64 - c).powi(2) + (y as f64 - c).powi(2);
                    max_err = max_err.max((plane.get(x, y) - p.kernel_value(ch, r2)).abs());
                }
            }
            assert!(max_err <= 1e-4, "channel {ch}: {max_err}");
        }
    }

    #[test]
    fn red_scatters_furthest() {
        let n = 129;
        let out = ss_blur(&impulse(n), &ScatterProfile::skin());
        let c = (n / 2) as f64;
        let moments: Vec<f64> = (0..3)
            .map(|ch| {
                let plane = out.channel(ch);
                let mut m = 0.0;
                for y in 0..n {
                    for x in 0..n {
                        m += plane.get(x, y) * ((x as f64 - c).powi(2) + (y as f64 - c).powi(2));
                    }
                }
                m
            })
            .collect();
        assert!(
            moments[0] >= moments[1] && moments[1] >= moments[2],
            "{moments:?}"
        );
    }

    #[test]
    fn interior_mass_is_preserved() {
        let m = ShadowMask::new(
            ImageBuf::from_fn(160, 160, |x, y| {
                let d = ((x as f64 - 80.0).powi(2) + (y as f64 - 75.0).powi(2)).sqrt();
                [if d < 25.0 { 1.0 } else { 0.0 }; 3]
            })
            .unwrap(),
        )
        .unwrap();
        let out = ss_blur(&m, &ScatterProfile::skin());
        for c in 0..3 {
            assert!((out.channel(c).mean() - m.channel(c).mean()).abs() <= 1e-3);
        }
    }

    #[test]
    fn profile_validation() {
        let lobe = |sigma, weight| ScatterLobe { sigma, weight };
        assert!(ScatterProfile::new([
            vec![lobe(2.0, 0.5)],
            vec![lobe(1.0, 1.0)],
            vec![lobe(1.0, 1.0)]
        ])
        .is_err());
        assert!(ScatterProfile::new([
            vec![lobe(0.0, 1.0)],
            vec![lobe(1.0, 1.0)],
            vec![lobe(1.0, 1.0)]
        ])
        .is_err());
        // blue wider than red
        assert!(ScatterProfile::uniform([&[1.0], &[1.0], &[3.0]]).is_err());
        assert!(ScatterProfile::uniform([&[3.0], &[2.0], &[1.0]]).is_ok());
    }
}
