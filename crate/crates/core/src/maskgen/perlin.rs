//! Classic 2D gradient-lattice (Perlin) noise with quintic fade, summed
//! over octaves as fractal Brownian motion.

use rand::seq::SliceRandom;
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::imgcore::{Plane, ShadowMask};
use crate::rng;

/// Lattice cycles across the longer image edge at octave 0.
pub const DEFAULT_BASE_FREQUENCY: f64 = 4.0;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PerlinSpec {
    /// Seed of the permutation table.
    pub seed: u64,
    pub octaves: u32,
    pub persistence: f64,
    pub initial_amplitude: f64,
    pub base_frequency: f64,
}

impl PerlinSpec {
    pub fn validate(&self) -> Result<()> {
        if self.octaves < 1 {
            return Err(Error::param("octaves", "must be >= 1"));
        }
        if !(0.0..=1.0).contains(&self.persistence) {
            return Err(Error::param(
                "persistence",
                format!("{} not in [0, 1]", self.persistence),
            ));
        }
        if !self.initial_amplitude.is_finite() {
            return Err(Error::param("initial_amplitude", "must be finite"));
        }
        if !(self.base_frequency > 0.0 && self.base_frequency.is_finite()) {
            return Err(Error::param("base_frequency", "must be positive"));
        }
        Ok(())
    }

    /// Amplitude of octave `k` is `initial_amplitude * persistence^k`.
    pub fn octave_amplitudes(&self) -> Vec<f64> {
        (0..self.octaves)
            .map(|k| self.initial_amplitude * self.persistence.powi(k as i32))
            .collect()
    }
}

/// Seeded gradient-lattice noise.
#[derive(Clone)]
pub struct PerlinNoise {
    perm: [u8; 512],
}

fn fade(t: f64) -> f64 {
    t * t * t * (t * (t * 6.0 - 15.0) + 10.0)
}

fn lerp(t: f64, a: f64, b: f64) -> f64 {
    a + t * (b - a)
}

fn grad(hash: u8, x: f64, y: f64) -> f64 {
    match hash & 7 {
        0 => x + y,
        1 => -x + y,
        2 => x - y,
        3 => -x - y,
        4 => x,
        5 => -x,
        6 => y,
        _ => -y,
    }
}

impl PerlinNoise {
    pub fn new(seed: u64) -> Self {
        let mut table: Vec<u8> = (0..=255).collect();
        table.shuffle(&mut rng::stream(seed));
        let mut perm = [0u8; 512];
        for (i, p) in perm.iter_mut().enumerate() {
            *p = table[i & 255];
        }
        Self { perm }
    }

    fn hash(&self, ix: i64, iy: i64) -> u8 {
        let a = self.perm[(ix & 255) as usize] as usize;
        self.perm[a + (iy & 255) as usize]
    }

    /// Single-octave noise; exactly zero at integer lattice points.
    pub fn noise(&self, x: f64, y: f64) -> f64 {
        let x0 = x.floor();
        let y0 = y.floor();
        let (ix, iy) = (x0 as i64, y0 as i64);
        let (fx, fy) = (x - x0, y - y0);
        let (u, v) = (fade(fx), fade(fy));
        let n00 = grad(self.hash(ix, iy), fx, fy);
        let n10 = grad(self.hash(ix + 1, iy), fx - 1.0, fy);
        let n01 = grad(self.hash(ix, iy + 1), fx, fy - 1.0);
        let n11 = grad(self.hash(ix + 1, iy + 1), fx - 1.0, fy - 1.0);
        lerp(v, lerp(u, n00, n10), lerp(u, n01, n11))
    }
}

/// Un-normalized octave sum sampled at pixel centers.
pub fn raw_field(spec: &PerlinSpec, width: usize, height: usize) -> Result<Plane> {
    spec.validate()?;
    let noise = PerlinNoise::new(spec.seed);
    let amps = spec.octave_amplitudes();
    let scale = spec.base_frequency / width.max(height) as f64;
    Plane::from_fn(width, height, |x, y| {
        let u = (x as f64 + 0.5) * scale;
        let v = (y as f64 + 0.5) * scale;
        let mut freq = 1.0;
        let mut acc = 0.0;
        for &a in &amps {
            acc += a * noise.noise(u * freq, v * freq);
            freq *= 2.0;
        }
        acc
    })
}

/// Octave noise affinely normalized to [0, 1] and replicated to 3 channels.
pub fn perlin_field(spec: &PerlinSpec, width: usize, height: usize) -> Result<ShadowMask> {
    ShadowMask::from_plane(&raw_field(spec, width, height)?.normalized())
}

/// Distribution over [`PerlinSpec`]s.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PerlinSampler {
    pub octaves: u32,
    pub persistence: (f64, f64),
    pub initial_amplitude: f64,
    pub base_frequency: f64,
}

impl PerlinSampler {
    /// Shadow-shape masks: 4 octaves, persistence ~ U[0, 0.85].
    pub fn shadow_shape() -> Self {
        Self {
            octaves: 4,
            persistence: (0.0, 0.85),
            initial_amplitude: 1.0,
            base_frequency: DEFAULT_BASE_FREQUENCY,
        }
    }

    /// Spatial-variation fields: 2 octaves, persistence ~ U[0.05, 0.25].
    pub fn spatial_variation() -> Self {
        Self {
            octaves: 2,
            persistence: (0.05, 0.25),
            initial_amplitude: 1.0,
            base_frequency: DEFAULT_BASE_FREQUENCY,
        }
    }

    pub fn validate(&self) -> Result<()> {
        let (lo, hi) = self.persistence;
        if !(0.0 <= lo && lo <= hi && hi <= 1.0) {
            return Err(Error::param(
                "persistence",
                format!("range [{lo}, {hi}] not within [0, 1]"),
            ));
        }
        self.spec_with(0, lo).validate()
    }

    fn spec_with(&self, seed: u64, persistence: f64) -> PerlinSpec {
        PerlinSpec {
            seed,
            octaves: self.octaves,
            persistence,
            initial_amplitude: self.initial_amplitude,
            base_frequency: self.base_frequency,
        }
    }

    pub fn sample(&self, seed: u64) -> PerlinSpec {
        let mut rng = rng::stream(seed);
        let (lo, hi) = self.persistence;
        let persistence = if lo == hi {
            lo
        } else {
            rng.random_range(lo..=hi)
        };
        let noise_seed = rng.random::<u64>();
        self.spec_with(noise_seed, persistence)
    }
}

/// Draws a shadow-shape Perlin spec and renders it.
pub fn sample_perlin_mask(
    seed: u64,
    width: usize,
    height: usize,
) -> Result<(ShadowMask, PerlinSpec)> {
    let spec = PerlinSampler::shadow_shape().sample(seed);
    Ok((perlin_field(&spec, width, height)?, spec))
}
