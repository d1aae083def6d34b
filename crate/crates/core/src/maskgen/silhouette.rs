//! Randomly rotated, scaled and periodically tiled silhouettes.

use std::f64::consts::PI;
use std::path::Path;

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::imgcore::{color::luma, io::load_png, ImageBuf, ShadowMask};
use crate::rng;

/// Binary coverage map of one occluder.
#[derive(Debug, Clone, PartialEq)]
pub struct Silhouette {
    width: usize,
    height: usize,
    coverage: Vec<bool>,
}

impl Silhouette {
    pub fn new(width: usize, height: usize, coverage: Vec<bool>) -> Result<Self> {
        if width == 0 || height == 0 {
            return Err(Error::EmptyImage { width, height });
        }
        if coverage.len() != width * height {
            return Err(Error::BufferLength {
                width,
                height,
                channels: 1,
                got: coverage.len(),
            });
        }
        Ok(Self {
            width,
            height,
            coverage,
        })
    }

    pub fn from_fn(width: usize, height: usize, f: impl Fn(usize, usize) -> bool) -> Result<Self> {
        let coverage = (0..width * height)
            .map(|i| f(i % width, i / width))
            .collect();
        Self::new(width, height, coverage)
    }

    /// Thresholds luma at 0.5.
    pub fn from_image(img: &ImageBuf) -> Self {
        Self {
            width: img.width(),
            height: img.height(),
            coverage: img.pixels().map(|p| luma(p) > 0.5).collect(),
        }
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn covered(&self, x: usize, y: usize) -> bool {
        self.coverage[y * self.width + x]
    }

    pub fn coverage_fraction(&self) -> f64 {
        self.coverage.iter().filter(|&&c| c).count() as f64 / self.coverage.len() as f64
    }

    pub fn to_image(&self) -> ImageBuf {
        ImageBuf::from_raw(
            self.width,
            self.height,
            self.coverage
                .iter()
                .flat_map(|&c| [if c { 1.0 } else { 0.0 }; 3])
                .collect(),
        )
    }
}

/// Read-only set of named silhouettes.
#[derive(Debug, Clone, Default)]
pub struct SilhouetteCorpus {
    items: Vec<(String, Silhouette)>,
}

impl SilhouetteCorpus {
    pub fn new(items: Vec<(String, Silhouette)>) -> Self {
        Self { items }
    }

    /// Loads every `*.png` in `dir`, sorted by file name.
    pub fn load_dir(dir: impl AsRef<Path>) -> Result<Self> {
        let mut paths: Vec<_> = std::fs::read_dir(dir.as_ref())?
            .filter_map(|e| e.ok().map(|e| e.path()))
            .filter(|p| {
                p.extension()
                    .and_then(|e| e.to_str())
                    .is_some_and(|e| e.eq_ignore_ascii_case("png"))
            })
            .collect();
        paths.sort();
        let mut items = Vec::with_capacity(paths.len());
        for p in paths {
            let name = p
                .file_name()
                .unwrap_or_default()
                .to_string_lossy()
                .into_owned();
            items.push((name, Silhouette::from_image(&load_png(&p)?)));
        }
        Ok(Self { items })
    }

    pub fn len(&self) -> usize {
        self.items.len()
    }

    pub fn is_empty(&self) -> bool {
        self.items.is_empty()
    }

    pub fn get(&self, id: usize) -> Option<&Silhouette> {
        self.items.get(id).map(|(_, s)| s)
    }

    pub fn name(&self, id: usize) -> Option<&str> {
        self.items.get(id).map(|(n, _)| n.as_str())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SilhouetteSpec {
    pub seed: u64,
    pub silhouette_id: usize,
    /// Output pixels per silhouette pixel.
    pub scale: f64,
    /// Horizontal and vertical tile period in output pixels.
    pub tile_period: [usize; 2],
    /// Counter-clockwise rotation in radians.
    pub rotation: f64,
    /// Phase offset of the tiling in output pixels.
    pub phase: [usize; 2],
}

/// Hard {0, 1} coverage of the tiled silhouette over the frame.
///
/// Output pixel `(x, y)` falls in tile cell `((x + phase_x) mod period_x,
/// (y + phase_y) mod period_y)`. The cell center maps to the silhouette
/// center; cell offsets are inverse-rotated, divided by `scale`, and
/// sampled nearest-neighbor. Points outside the silhouette are uncovered.
pub fn silhouette_mask(
    corpus: &SilhouetteCorpus,
    spec: &SilhouetteSpec,
    width: usize,
    height: usize,
) -> Result<ShadowMask> {
    if corpus.is_empty() {
        return Err(Error::EmptyCorpus);
    }
    let sil = corpus.get(spec.silhouette_id).ok_or_else(|| {
        Error::param(
            "silhouette_id",
            format!(
                "{} out of range for corpus of {}",
                spec.silhouette_id,
                corpus.len()
            ),
        )
    })?;
    if !(spec.scale > 0.0 && spec.scale.is_finite()) {
        return Err(Error::param(
            "scale",
            format!("degenerate scale {}", spec.scale),
        ));
    }
    let [px, py] = spec.tile_period;
    if px == 0 || py == 0 {
        return Err(Error::param("tile_period", "must be >= 1 in both axes"));
    }
    if !spec.rotation.is_finite() {
        return Err(Error::param("rotation", "must be finite"));
    }
    if width == 0 || height == 0 {
        return Err(Error::EmptyImage { width, height });
    }

    let (sin, cos) = if spec.rotation == 0.0 {
        (0.0, 1.0)
    } else {
        spec.rotation.sin_cos()
    };
    let (half_px, half_py) = (px as f64 / 2.0, py as f64 / 2.0);
    let (half_sw, half_sh) = (sil.width() as f64 / 2.0, sil.height() as f64 / 2.0);
    let inv_scale = 1.0 / spec.scale;

    let mut data = Vec::with_capacity(width * height * 3);
    for y in 0..height {
        let ty = (y + spec.phase[1]) % py;
        let ly = ty as f64 + 0.5 - half_py;
        for x in 0..width {
            let tx = (x + spec.phase[0]) % px;
            let lx = tx as f64 + 0.5 - half_px;
            let rx = cos * lx + sin * ly;
            let ry = -sin * lx + cos * ly;
            let sx = rx * inv_scale + half_sw;
            let sy = ry * inv_scale + half_sh;
            let covered = sx >= 0.0
                && sy >= 0.0
                && (sx as usize) < sil.width()
                && (sy as usize) < sil.height()
                && sil.covered(sx as usize, sy as usize);
            let v = if covered { 1.0 } else { 0.0 };
            data.extend_from_slice(&[v; 3]);
        }
    }
    ShadowMask::new(ImageBuf::from_raw(width, height, data))
}

/// Distribution over [`SilhouetteSpec`]s for a given corpus and frame.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SilhouetteSampler {
    /// Silhouette's longer edge relative to the frame's shorter edge.
    pub relative_size: (f64, f64),
    /// Tile period relative to the scaled silhouette's longer edge.
    pub period_ratio: (f64, f64),
}

impl Default for SilhouetteSampler {
    fn default() -> Self {
        Self {
            relative_size: (0.3, 1.0),
            period_ratio: (1.0, 1.8),
        }
    }
}

impl SilhouetteSampler {
    pub fn sample(
        &self,
        seed: u64,
        corpus: &SilhouetteCorpus,
        width: usize,
        height: usize,
    ) -> Result<SilhouetteSpec> {
        if corpus.is_empty() {
            return Err(Error::EmptyCorpus);
        }
        let mut rng = rng::stream(seed);
        let silhouette_id = rng.random_range(0..corpus.len());
        let sil = corpus.get(silhouette_id).expect("id in range");
        let sil_edge = sil.width().max(sil.height()) as f64;
        let frame_edge = width.min(height) as f64;
        let rel = rng.random_range(self.relative_size.0..=self.relative_size.1);
        let scale = rel * frame_edge / sil_edge;
        let ratio = rng.random_range(self.period_ratio.0..=self.period_ratio.1);
        let period = ((scale * sil_edge * ratio).ceil() as usize).max(1);
        let rotation = rng.random_range(0.0..2.0 * PI);
        let phase = [rng.random_range(0..period), rng.random_range(0..period)];
        Ok(SilhouetteSpec {
            seed,
            silhouette_id,
            scale,
            tile_period: [period, period],
            rotation,
            phase,
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn blob(w: usize, h: usize) -> Silhouette {
        Silhouette::from_fn(w, h, |x, y| {
            let dx = x as f64 - w as f64 * 0.4;
            let dy = y as f64 - h as f64 * 0.55;
            dx * dx / (w * w) as f64 * 6.0 + dy * dy / (h * h) as f64 * 9.0 < 1.0 || x == y
        })
        .unwrap()
    }

    fn corpus(s: Silhouette) -> SilhouetteCorpus {
        SilhouetteCorpus::new(vec![("s".into(), s)])
    }

    fn spec(period: [usize; 2], rotation: f64, scale: f64) -> SilhouetteSpec {
        SilhouetteSpec {
            seed: 0,
            silhouette_id: 0,
            scale,
            tile_period: period,
            rotation,
            phase: [0, 0],
        }
    }

    #[test]
    fn full_coverage_stays_full() {
        let c = corpus(Silhouette::from_fn(32, 32, |_, _| true).unwrap());
        for (rot, scale) in [(0.0, 1.0), (0.7, 2.3), (2.0, 0.9)] {
            let m = silhouette_mask(&c, &spec([20, 20], rot, scale), 64, 48).unwrap();
            assert!(
                m.data().iter().all(|&v| v == 1.0),
                "rot {rot} scale {scale}"
            );
        }
    }

    #[test]
    fn unit_scale_tiling_repeats_the_source() {
        let s = blob(24, 16);
        let c = corpus(s.clone());
        let m = silhouette_mask(&c, &spec([24, 16], 0.0, 1.0), 72, 48).unwrap();
        for y in 0..48 {
            for x in 0..72 {
                let expected = if s.covered(x % 24, y % 16) { 1.0 } else { 0.0 };
                assert_eq!(m.image().pixel(x, y), [expected; 3], "({x}, {y})");
            }
        }
    }

    #[test]
    fn tiled_coverage_matches_single_tile() {
        let s = blob(20, 20);
        let c = corpus(s.clone());
        let sp = SilhouetteSpec {
            phase: [7, 3],
            ..spec([20, 20], 0.0, 1.0)
        };
        let m = silhouette_mask(&c, &sp, 100, 60).unwrap();
        let covered = m.channel(0).data().iter().filter(|&&v| v == 1.0).count();
        let frac = covered as f64 / 6000.0;
        assert!(
            (frac - s.coverage_fraction()).abs() <= 0.02,
            "{frac} vs {}",
            s.coverage_fraction()
        );
    }

    #[test]
    fn output_is_binary() {
        let c = corpus(blob(30, 30));
        let m = silhouette_mask(&c, &spec([37, 41], 1.1, 1.7), 64, 64).unwrap();
        assert!(m.data().iter().all(|&v| v == 0.0 || v == 1.0));
    }

    #[test]
    fn errors() {
        let empty = SilhouetteCorpus::default();
        assert!(matches!(
            silhouette_mask(&empty, &spec([4, 4], 0.0, 1.0), 8, 8),
            Err(Error::EmptyCorpus)
        ));
        let c = corpus(blob(8, 8));
        assert!(silhouette_mask(&c, &spec([4, 4], 0.0, 0.0), 8, 8).is_err());
        assert!(silhouette_mask(&c, &spec([4, 4], 0.0, f64::NAN), 8, 8).is_err());
        assert!(silhouette_mask(&c, &spec([0, 4], 0.0, 1.0), 8, 8).is_err());
        assert!(SilhouetteSampler::default()
            .sample(1, &empty, 8, 8)
            .is_err());
    }

    #[test]
    fn sampler_is_deterministic_and_valid() {
        let c = SilhouetteCorpus::new(vec![("a".into(), blob(40, 30)), ("b".into(), blob(10, 50))]);
        for seed in 0..200 {
            let a = SilhouetteSampler::default()
                .sample(seed, &c, 256, 256)
                .unwrap();
            assert_eq!(
                a,
                SilhouetteSampler::default()
                    .sample(seed, &c, 256, 256)
                    .unwrap()
            );
            assert!(a.scale > 0.0 && a.tile_period[0] >= 1);
            assert!(a.phase[0] < a.tile_period[0]);
            silhouette_mask(&c, &a, 64, 64).unwrap();
        }
    }
}
