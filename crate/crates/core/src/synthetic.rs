//! Procedural stand-ins for the face and occluder corpora, for tests and
//! demos. Faces are left-right symmetric and shadow-free.

use rand::Rng;

use crate::imgcore::{FaceCrop, ImageBuf, LandmarkSet};
use crate::maskgen::Silhouette;
use crate::rng;

/// Landmark box of a synthetic face of side `size`.
pub fn face_box(size: usize) -> FaceCrop {
    let n = size as f64;
    FaceCrop {
        x: 0.2 * n,
        y: 0.15 * n,
        w: 0.6 * n,
        h: 0.7 * n,
    }
}

pub fn face_landmarks(size: usize) -> LandmarkSet {
    let b = face_box(size);
    LandmarkSet::canonical_face(b.x, b.y, b.w, b.h)
}

/// A linear-light face: skin ellipse with eyes, brows and mouth over a
/// soft background. Skin tone and background vary with `seed`.
pub fn synthetic_face(seed: u64, size: usize) -> ImageBuf {
    let mut rng = rng::stream(rng::derive_seed(seed, "face"));
    let tone: f64 = rng.random_range(0.25..0.75);
    let skin = [0.45 + 0.35 * tone, 0.30 + 0.30 * tone, 0.22 + 0.25 * tone];
    let bg = [
        rng.random_range(0.05..0.4),
        rng.random_range(0.05..0.4),
        rng.random_range(0.05..0.4),
    ];
    let n = size as f64;
    ImageBuf::from_fn(size, size, |c, r| {
        let x = (c as f64 + 0.5) / n - 0.5;
        let y = (r as f64 + 0.5) / n - 0.5;
        let ax = x.abs();
        let face = (x / 0.3).powi(2) + ((y - 0.0) / 0.36).powi(2);
        if face > 1.0 {
            let v = 1.0 - 0.3 * (y + 0.5);
            return bg.map(|b| (b * v) as f32);
        }
        let shade = 1.0 - 0.25 * face;
        let mut px = skin.map(|s| s * shade);
        let eye = ((ax - 0.11) / 0.05).powi(2) + ((y + 0.06) / 0.025).powi(2);
        if eye < 1.0 {
            px = [0.08, 0.06, 0.05];
        }
        let brow = ((ax - 0.11) / 0.07).powi(2) + ((y + 0.13) / 0.012).powi(2);
        if brow < 1.0 {
            px = px.map(|v| v * 0.45);
        }
        let mouth = (x / 0.09).powi(2) + ((y - 0.18) / 0.02).powi(2);
        if mouth < 1.0 {
            px = [0.45, 0.15, 0.15];
        }
        let cheek = (-((ax - 0.15).powi(2) + (y - 0.07).powi(2)) / 0.004).exp();
        px[0] *= 1.0 + 0.15 * cheek;
        px.map(|v| v.clamp(0.0, 1.0) as f32)
    })
    .expect("size is positive")
}

/// A random star-shaped occluder silhouette.
pub fn silhouette_blob(seed: u64, size: usize) -> Silhouette {
    let mut rng = rng::stream(rng::derive_seed(seed, "silhouette"));
    let harmonics: Vec<(f64, f64, f64)> = (1..=5)
        .map(|k| {
            (
                k as f64 + rng.random_range(0.0..2.0f64).floor(),
                rng.random_range(0.0..0.25) / k as f64 * 2.0,
                rng.random_range(0.0..std::f64::consts::TAU),
            )
        })
        .collect();
    let base = rng.random_range(0.25..0.38);
    let half = size as f64 / 2.0;
    Silhouette::from_fn(size, size, |x, y| {
        let dx = (x as f64 + 0.5 - half) / size as f64;
        let dy = (y as f64 + 0.5 - half) / size as f64;
        let theta = dy.atan2(dx);
        let radius = base
            * (1.0
                + harmonics
                    .iter()
                    .map(|&(f, a, p)| a * (f * theta + p).sin())
                    .sum::<f64>());
        (dx * dx + dy * dy).sqrt() < radius.min(0.49)
    })
    .expect("size is positive")
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn faces_are_symmetric_and_seeded() {
        let a = synthetic_face(3, 64);
        assert_eq!(a, synthetic_face(3, 64));
        assert_ne!(a, synthetic_face(4, 64));
        for y in 0..64 {
            for x in 0..32 {
                assert_eq!(a.pixel(x, y), a.pixel(63 - x, y));
            }
        }
        face_landmarks(64).check_bounds(64, 64).unwrap();
    }

    #[test]
    fn blobs_cover_a_fair_share() {
        for seed in 0..20 {
            let s = silhouette_blob(seed, 64);
            let f = s.coverage_fraction();
            assert!((0.05..0.8).contains(&f), "seed {seed}: {f}");
        }
    }
}
