//! Adaptive-RBF mirror warp: every pixel is resampled from the position its
//! bilaterally symmetric counterpart occupies, interpolated from the
//! mirrored landmark table.
//!
//! Pixel `(c, r)` sits at `(c + 0.5, r + 0.5)`, the same frame as landmark
//! coordinates.

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::imgcore::{ChannelStack, ImageBuf, LandmarkSet};

/// Neighbor rank used for the per-vertex bandwidth.
pub const DEFAULT_K_SIGMA: usize = 4;

/// Whether a vertex's zero distance to itself counts toward the K-th
/// smallest distance.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum SelfDistance {
    #[default]
    Exclude,
    Include,
}

fn sq_dist(a: [f64; 2], b: [f64; 2]) -> f64 {
    (a[0] - b[0]).powi(2) + (a[1] - b[1]).powi(2)
}

/// Per-vertex bandwidth: the `k`-th smallest squared distance from each
/// vertex to the others.
pub fn vertex_sigmas(landmarks: &LandmarkSet, k: usize) -> Result<Vec<f64>> {
    vertex_sigmas_with(landmarks, k, SelfDistance::Exclude)
}

pub fn vertex_sigmas_with(
    landmarks: &LandmarkSet,
    k: usize,
    self_distance: SelfDistance,
) -> Result<Vec<f64>> {
    let pts = landmarks.points();
    let n = pts.len();
    let candidates = match self_distance {
        SelfDistance::Exclude => n - 1,
        SelfDistance::Include => n,
    };
    if k == 0 || k > candidates {
        return Err(Error::param(
            "k_sigma",
            format!("{k} needs at least {} vertices, have {n}", k + 1),
        ));
    }
    let mut row = Vec::with_capacity(n);
    let mut sigmas = Vec::with_capacity(n);
    for (j, &p) in pts.iter().enumerate() {
        row.clear();
        row.extend(
            pts.iter()
                .enumerate()
                .filter(|&(i, _)| self_distance == SelfDistance::Include || i != j)
                .map(|(_, &q)| sq_dist(p, q)),
        );
        let (_, &mut kth, _) = row.select_nth_unstable_by(k - 1, f64::total_cmp);
        if kth.is_nan() || kth <= 0.0 {
            let second = (0..n)
                .find(|&i| i != j && sq_dist(p, pts[i]) == 0.0)
                .unwrap_or(j);
            return Err(Error::CoincidentLandmarks { first: j, second });
        }
        sigmas.push(kth);
    }
    Ok(sigmas)
}

/// Normalized Gaussian weights of one point against every vertex. Returns
/// how far below zero the largest exponent was before max-subtraction.
pub fn pixel_weights(
    point: [f64; 2],
    landmarks: &[[f64; 2]],
    sigmas: &[f64],
    out: &mut Vec<f64>,
) -> f64 {
    out.clear();
    out.extend(
        landmarks
            .iter()
            .zip(sigmas)
            .map(|(&v, &s)| -sq_dist(point, v) / s),
    );
    let peak = out.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let mut total = 0.0;
    for w in out.iter_mut() {
        *w = (*w - peak).exp();
        total += *w;
    }
    for w in out.iter_mut() {
        *w /= total;
    }
    -peak
}

/// Dense `points × vertices` weight matrix, row-major.
pub fn weight_matrix(
    points: &[[f64; 2]],
    landmarks: &LandmarkSet,
    sigmas: &[f64],
) -> Result<Vec<Vec<f64>>> {
    check_sigmas(landmarks, sigmas)?;
    let mut buf = Vec::new();
    Ok(points
        .iter()
        .map(|&p| {
            pixel_weights(p, landmarks.points(), sigmas, &mut buf);
            buf.clone()
        })
        .collect())
}

fn check_sigmas(landmarks: &LandmarkSet, sigmas: &[f64]) -> Result<()> {
    if sigmas.len() != landmarks.len() {
        return Err(Error::LengthMismatch {
            expected: landmarks.len(),
            got: sigmas.len(),
        });
    }
    if let Some(j) = sigmas.iter().position(|&s| !(s > 0.0 && s.is_finite())) {
        return Err(Error::param(
            "sigma",
            format!("vertex {j} has non-positive bandwidth"),
        ));
    }
    Ok(())
}

/// Mirrored source coordinate of every pixel.
#[derive(Debug, Clone, PartialEq)]
pub struct WarpField {
    width: usize,
    height: usize,
    targets: Vec<[f64; 2]>,
    sigmas: Vec<f64>,
    /// Largest exponent deficit removed by max-subtraction over all pixels.
    pub max_exponent_shift: f64,
}

impl WarpField {
    pub fn dims(&self) -> (usize, usize) {
        (self.width, self.height)
    }

    pub fn target(&self, x: usize, y: usize) -> [f64; 2] {
        self.targets[y * self.width + x]
    }

    pub fn targets(&self) -> &[[f64; 2]] {
        &self.targets
    }

    pub fn sigmas(&self) -> &[f64] {
        &self.sigmas
    }

    /// Largest distance between the targets of horizontally or vertically
    /// adjacent pixels.
    pub fn max_neighbor_step(&self) -> f64 {
        let mut worst: f64 = 0.0;
        for y in 0..self.height {
            for x in 0..self.width {
                let t = self.target(x, y);
                if x + 1 < self.width {
                    worst = worst.max(sq_dist(t, self.target(x + 1, y)).sqrt());
                }
                if y + 1 < self.height {
                    worst = worst.max(sq_dist(t, self.target(x, y + 1)).sqrt());
                }
            }
        }
        worst
    }
}

/// `x̄_i = Σ_j W_ij u_mirror(j)`, `ȳ_i = Σ_j W_ij v_mirror(j)` for every pixel.
pub fn warp_field(
    width: usize,
    height: usize,
    landmarks: &LandmarkSet,
    k: usize,
) -> Result<WarpField> {
    landmarks.check_involution()?;
    let sigmas = vertex_sigmas(landmarks, k)?;
    warp_field_with_sigmas(width, height, landmarks, sigmas)
}

/// [`warp_field`] with caller-supplied bandwidths.
pub fn warp_field_with_sigmas(
    width: usize,
    height: usize,
    landmarks: &LandmarkSet,
    sigmas: Vec<f64>,
) -> Result<WarpField> {
    if width == 0 || height == 0 {
        return Err(Error::EmptyImage { width, height });
    }
    landmarks.check_involution()?;
    check_sigmas(landmarks, &sigmas)?;
    let pts = landmarks.points();
    let mirrored: Vec<[f64; 2]> = (0..landmarks.len())
        .map(|j| landmarks.mirrored_point(j))
        .collect();
    let rows: Vec<(Vec<[f64; 2]>, f64)> = (0..height)
        .into_par_iter()
        .map(|r| {
            let mut w = Vec::with_capacity(pts.len());
            let mut shift: f64 = 0.0;
            let row = (0..width)
                .map(|c| {
                    let p = [c as f64 + 0.5, r as f64 + 0.5];
                    shift = shift.max(pixel_weights(p, pts, &sigmas, &mut w));
                    let mut t = [0.0; 2];
                    for (wj, m) in w.iter().zip(&mirrored) {
                        t[0] += wj * m[0];
                        t[1] += wj * m[1];
                    }
                    t
                })
                .collect();
            (row, shift)
        })
        .collect();
    let max_exponent_shift = rows.iter().map(|r| r.1).fold(0.0, f64::max);
    Ok(WarpField {
        width,
        height,
        targets: rows.into_iter().flat_map(|r| r.0).collect(),
        sigmas,
        max_exponent_shift,
    })
}

/// Bilinear resampling of `img` at each warp target, edge-clamped.
pub fn apply_warp(img: &ImageBuf, field: &WarpField) -> Result<ImageBuf> {
    if img.dims() != field.dims() {
        return Err(Error::ShapeMismatch {
            expected: field.dims(),
            got: img.dims(),
        });
    }
    let data = field
        .targets
        .iter()
        .flat_map(|&[x, y]| img.sample_at_center_coords(x, y))
        .collect();
    Ok(ImageBuf::from_raw(img.width(), img.height(), data))
}

pub fn mirror_warp(img: &ImageBuf, landmarks: &LandmarkSet) -> Result<ImageBuf> {
    mirror_warp_with(img, landmarks, DEFAULT_K_SIGMA)
}

pub fn mirror_warp_with(img: &ImageBuf, landmarks: &LandmarkSet, k: usize) -> Result<ImageBuf> {
    let field = warp_field(img.width(), img.height(), landmarks, k)?;
    apply_warp(img, &field)
}

/// Six-channel network input: the image followed by its mirror.
pub fn concat_mirrored(img: &ImageBuf, mirrored: &ImageBuf) -> Result<ChannelStack> {
    ChannelStack::concat(&[img, mirrored])
}

/// `|I - Ī|` per sample.
pub fn asymmetry(img: &ImageBuf, mirrored: &ImageBuf) -> Result<ImageBuf> {
    img.ensure_same_dims(mirrored)?;
    let data = img
        .data()
        .iter()
        .zip(mirrored.data())
        .map(|(a, b)| (a - b).abs())
        .collect();
    Ok(ImageBuf::from_raw(img.width(), img.height(), data))
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn collinear() -> LandmarkSet {
        LandmarkSet::without_mirror((0..5).map(|i| [i as f64, 0.0]).collect()).unwrap()
    }

    /// Points symmetric about x = c, with mirror pairs.
    fn symmetric(c: f64) -> LandmarkSet {
        let half = [
            [10.0, 12.0],
            [14.0, 30.0],
            [20.0, 8.0],
            [6.0, 40.0],
            [17.0, 22.0],
        ];
        let mut pts = Vec::new();
        let mut mirror = Vec::new();
        for (i, &[x, y]) in half.iter().enumerate() {
            pts.push([c - x, y]);
            pts.push([c + x, y]);
            mirror.extend([2 * i + 1, 2 * i]);
        }
        pts.push([c, 26.0]);
        mirror.push(10);
        LandmarkSet::new(pts, mirror).unwrap()
    }

    #[test]
    fn collinear_endpoint_sigma() {
        let s = vertex_sigmas(&collinear(), 4).unwrap();
        assert_eq!(s[0], 16.0);
        assert_eq!(s[4], 16.0);
        // middle vertex: {1, 1, 4, 4}
        assert_eq!(s[2], 4.0);
        // including self, the 4th smallest at an endpoint is 9
        assert_eq!(
            vertex_sigmas_with(&collinear(), 4, SelfDistance::Include).unwrap()[0],
            9.0
        );
    }

    #[test]
    fn grid_interior_sigmas_equal() {
        let pts: Vec<[f64; 2]> = (0..49)
            .map(|i| [(i % 7) as f64 * 3.0, (i / 7) as f64 * 3.0])
            .collect();
        let s = vertex_sigmas(&LandmarkSet::without_mirror(pts).unwrap(), 4).unwrap();
        let interior: Vec<f64> = (0..49)
            .filter(|i| (1..6).contains(&(i % 7)) && (1..6).contains(&(i / 7)))
            .map(|i| s[i])
            .collect();
        assert!(interior.iter().all(|&v| v == interior[0]));
    }

    #[test]
    fn sigmas_scale_quadratically_and_ignore_translation() {
        let lm = symmetric(50.0);
        let base = vertex_sigmas(&lm, 4).unwrap();
        let scaled = vertex_sigmas(&lm.map_points(|[x, y]| [2.5 * x, 2.5 * y]), 4).unwrap();
        let moved = vertex_sigmas(&lm.map_points(|[x, y]| [x + 7.25, y - 3.5]), 4).unwrap();
        for j in 0..base.len() {
            assert!((scaled[j] - 6.25 * base[j]).abs() <= 1e-9 * scaled[j]);
            assert!((moved[j] - base[j]).abs() <= 1e-9 * base[j]);
        }
    }

    #[test]
    fn coincident_landmarks_are_named() {
        let pts = vec![[1.0, 1.0]; 5];
        match vertex_sigmas(&LandmarkSet::without_mirror(pts).unwrap(), 4) {
            Err(Error::CoincidentLandmarks {
                first: 0,
                second: 1,
            }) => {}
            other => panic!("{other:?}"),
        }
        assert!(vertex_sigmas(&collinear(), 5).is_err());
    }

    #[test]
    fn single_vertex_weight_is_one() {
        let lm = LandmarkSet::without_mirror(vec![[3.0, 4.0]]).unwrap();
        let w = weight_matrix(&[[0.0, 0.0], [100.0, -50.0], [1e4, 1e4]], &lm, &[0.5]).unwrap();
        assert!(w.iter().all(|row| row == &vec![1.0]));
    }

    #[test]
    fn coincident_pixel_takes_row_maximum() {
        let lm = symmetric(40.0);
        let sigmas = vec![9.0; lm.len()];
        let w = weight_matrix(lm.points(), &lm, &sigmas).unwrap();
        for (j, row) in w.iter().enumerate() {
            let max = row.iter().copied().fold(0.0, f64::max);
            assert_eq!(row[j], max);
        }
    }

    proptest! {
        #[test]
        fn rows_sum_to_one(px in -200.0..400.0f64, py in -200.0..400.0f64, c in 20.0..80.0f64) {
            let lm = symmetric(c);
            let sigmas = vertex_sigmas(&lm, 4).unwrap();
            let w = weight_matrix(&[[px, py]], &lm, &sigmas).unwrap();
            prop_assert!((w[0].iter().sum::<f64>() - 1.0).abs() <= 1e-9);
        }

        #[test]
        fn weights_follow_joint_translation(px in 0.0..100.0f64, py in 0.0..60.0f64, dx in -30.0..30.0f64, dy in -30.0..30.0f64) {
            let lm = symmetric(50.0);
            let moved = lm.map_points(|[x, y]| [x + dx, y + dy]);
            let a = weight_matrix(&[[px, py]], &lm, &vertex_sigmas(&lm, 4).unwrap()).unwrap();
            let b = weight_matrix(&[[px + dx, py + dy]], &moved, &vertex_sigmas(&moved, 4).unwrap()).unwrap();
            for (x, y) in a[0].iter().zip(&b[0]) {
                prop_assert!((x - y).abs() <= 1e-9);
            }
        }
    }

    #[test]
    fn symmetric_landmarks_reflect_targets() {
        let c = 48.5;
        let lm = symmetric(c);
        let field = warp_field(96, 64, &lm, 4).unwrap();
        let sigmas = vertex_sigmas(&lm, 4).unwrap();
        let mut w = Vec::new();
        for y in 0..64 {
            for x in 0..96 {
                pixel_weights(
                    [x as f64 + 0.5, y as f64 + 0.5],
                    lm.points(),
                    &sigmas,
                    &mut w,
                );
                let su: f64 = w.iter().zip(lm.points()).map(|(a, p)| a * p[0]).sum();
                let sv: f64 = w.iter().zip(lm.points()).map(|(a, p)| a * p[1]).sum();
                let t = field.target(x, y);
                assert!((t[0] - (2.0 * c - su)).abs() <= 1e-6);
                assert!((t[1] - sv).abs() <= 1e-6);
            }
        }
    }

    #[test]
    fn identity_mirror_targets_are_landmark_blend() {
        let pts = symmetric(40.0).points().to_vec();
        let lm = LandmarkSet::without_mirror(pts).unwrap();
        let field = warp_field(80, 48, &lm, 4).unwrap();
        let mut w = Vec::new();
        for (i, t) in field.targets().iter().enumerate() {
            let p = [(i % 80) as f64 + 0.5, (i / 80) as f64 + 0.5];
            pixel_weights(p, lm.points(), field.sigmas(), &mut w);
            let su: f64 = w.iter().zip(lm.points()).map(|(a, q)| a * q[0]).sum();
            let sv: f64 = w.iter().zip(lm.points()).map(|(a, q)| a * q[1]).sum();
            assert!((t[0] - su).abs() <= 1e-9 && (t[1] - sv).abs() <= 1e-9);
        }
    }

    #[test]
    fn single_identity_vertex_gives_constant_image() {
        let img =
            ImageBuf::from_fn(20, 16, |x, y| [x as f32 / 20.0, y as f32 / 16.0, 0.3]).unwrap();
        let single = LandmarkSet::without_mirror(vec![[7.5, 4.5]]).unwrap();
        assert!(mirror_warp(&img, &single).is_err());
        let field = warp_field_with_sigmas(20, 16, &single, vec![1.0]).unwrap();
        let out = apply_warp(&img, &field).unwrap();
        assert!(out.pixels().all(|p| p == img.pixel(7, 4)));
    }

    #[test]
    fn constant_image_stays_constant() {
        let img = ImageBuf::filled(64, 48, [0.2, 0.5, 0.7]).unwrap();
        let out = mirror_warp(&img, &symmetric(31.0)).unwrap();
        assert_eq!(out, img);
    }

    #[test]
    fn targets_vary_smoothly() {
        let lm = LandmarkSet::canonical_face(32.0, 32.0, 192.0, 192.0);
        let field = warp_field(256, 256, &lm, 4).unwrap();
        // an exact mirror moves one pixel per pixel; the RBF blend may
        // stretch that inside the face, more so far from any landmark
        let mut inside: f64 = 0.0;
        for y in 48..208 {
            for x in 48..208 {
                let t = field.target(x, y);
                inside = inside.max(sq_dist(t, field.target(x + 1, y)).sqrt());
                inside = inside.max(sq_dist(t, field.target(x, y + 1)).sqrt());
            }
        }
        assert!(inside < 3.0, "{inside}");
        assert!(
            field.max_neighbor_step() < 8.0,
            "{}",
            field.max_neighbor_step()
        );
        assert!(field.max_exponent_shift.is_finite() && field.max_exponent_shift > 0.0);
    }

    #[test]
    fn concat_and_asymmetry() {
        let a = ImageBuf::from_fn(12, 12, |x, y| [x as f32 / 12.0, y as f32 / 12.0, 0.5]).unwrap();
        let b = a.map(|v| 1.0 - v).unwrap();
        let stack = concat_mirrored(&a, &b).unwrap();
        assert_eq!(stack.channels(), 6);
        for y in 0..12 {
            for x in 0..12 {
                for c in 0..3 {
                    assert_eq!(stack.get(x, y, c), a.pixel(x, y)[c]);
                    assert_eq!(stack.get(x, y, c + 3), b.pixel(x, y)[c]);
                }
            }
        }
        assert!(concat_mirrored(&a, &ImageBuf::filled(11, 12, [0.0; 3]).unwrap()).is_err());
        assert!(asymmetry(&a, &a).unwrap().data().iter().all(|&v| v == 0.0));
    }
}
