//! Homography alignment of a shadowed photo to its candidate lit frames.

use nalgebra::{DMatrix, Matrix3, Vector3};
use serde::{Deserialize, Serialize};

use super::metrics::l1_pixel;
use crate::error::{Error, Result};
use crate::imgcore::ImageBuf;

/// `(source, destination)` point pair.
pub type Correspondence = ([f64; 2], [f64; 2]);

/// Projective map normalized so the bottom-right entry is 1. Serialized as
/// row-major nested arrays.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(into = "[[f64; 3]; 3]", try_from = "[[f64; 3]; 3]")]
pub struct Homography {
    matrix: Matrix3<f64>,
}

impl From<Homography> for [[f64; 3]; 3] {
    fn from(h: Homography) -> Self {
        [0, 1, 2].map(|r| [0, 1, 2].map(|c| h.matrix[(r, c)]))
    }
}

impl TryFrom<[[f64; 3]; 3]> for Homography {
    type Error = Error;

    fn try_from(rows: [[f64; 3]; 3]) -> Result<Self> {
        Self::new(Matrix3::from_fn(|r, c| rows[r][c]))
    }
}

impl Homography {
    pub fn new(matrix: Matrix3<f64>) -> Result<Self> {
        if matrix.iter().any(|v| !v.is_finite()) {
            return Err(Error::SingularHomography);
        }
        let scale = matrix[(2, 2)];
        let det = matrix.determinant();
        if scale.abs() < 1e-12 * matrix.norm() || det.abs() < 1e-12 * matrix.norm().powi(3) {
            return Err(Error::SingularHomography);
        }
        Ok(Self {
            matrix: matrix / scale,
        })
    }

    pub fn identity() -> Self {
        Self {
            matrix: Matrix3::identity(),
        }
    }

    pub fn translation(dx: f64, dy: f64) -> Self {
        let mut m = Matrix3::identity();
        m[(0, 2)] = dx;
        m[(1, 2)] = dy;
        Self { matrix: m }
    }

    pub fn matrix(&self) -> &Matrix3<f64> {
        &self.matrix
    }

    pub fn inverse(&self) -> Result<Self> {
        Self::new(self.matrix.try_inverse().ok_or(Error::SingularHomography)?)
    }

    /// Maps a point; `None` when it lands at infinity.
    pub fn apply(&self, p: [f64; 2]) -> Option<[f64; 2]> {
        let v = self.matrix * Vector3::new(p[0], p[1], 1.0);
        (v.z.abs() > 1e-12).then(|| [v.x / v.z, v.y / v.z])
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct HomographyFit {
    pub homography: Homography,
    /// Root-mean-square reprojection error in pixels.
    pub rms: f64,
}

fn cross(o: [f64; 2], a: [f64; 2], b: [f64; 2]) -> f64 {
    (a[0] - o[0]) * (b[1] - o[1]) - (a[1] - o[1]) * (b[0] - o[0])
}

fn check_minimal(points: &[[f64; 2]]) -> Result<()> {
    let scale = points
        .iter()
        .flat_map(|p| points.iter().map(move |q| (p[0] - q[0]).hypot(p[1] - q[1])))
        .fold(0.0, f64::max);
    let tol = 1e-9 * scale * scale;
    for i in 0..points.len() {
        for j in i + 1..points.len() {
            for k in j + 1..points.len() {
                if cross(points[i], points[j], points[k]).abs() <= tol {
                    return Err(Error::DegenerateCorrespondences(format!(
                        "points {i}, {j} and {k} are collinear"
                    )));
                }
            }
        }
    }
    Ok(())
}

/// Similarity transform taking the centroid to the origin and the mean
/// distance from it to sqrt(2).
fn normalizer(points: &[[f64; 2]]) -> Result<Matrix3<f64>> {
    let n = points.len() as f64;
    let cx = points.iter().map(|p| p[0]).sum::<f64>() / n;
    let cy = points.iter().map(|p| p[1]).sum::<f64>() / n;
    let mean = points
        .iter()
        .map(|p| (p[0] - cx).hypot(p[1] - cy))
        .sum::<f64>()
        / n;
    if !(mean > 0.0 && mean.is_finite()) {
        return Err(Error::DegenerateCorrespondences(
            "all points coincide".into(),
        ));
    }
    let s = std::f64::consts::SQRT_2 / mean;
    Ok(Matrix3::new(
        s,
        0.0,
        -s * cx,
        0.0,
        s,
        -s * cy,
        0.0,
        0.0,
        1.0,
    ))
}

fn transform(m: &Matrix3<f64>, p: [f64; 2]) -> [f64; 2] {
    let v = m * Vector3::new(p[0], p[1], 1.0);
    [v.x / v.z, v.y / v.z]
}

/// Least-squares direct linear transform with normalized coordinates.
pub fn dlt_homography(pairs: &[Correspondence]) -> Result<HomographyFit> {
    if pairs.len() < 4 {
        return Err(Error::DegenerateCorrespondences(format!(
            "need at least 4 correspondences, got {}",
            pairs.len()
        )));
    }
    let src: Vec<[f64; 2]> = pairs.iter().map(|p| p.0).collect();
    let dst: Vec<[f64; 2]> = pairs.iter().map(|p| p.1).collect();
    if src.iter().chain(&dst).flatten().any(|v| !v.is_finite()) {
        return Err(Error::DegenerateCorrespondences(
            "non-finite coordinate".into(),
        ));
    }
    if pairs.len() == 4 {
        check_minimal(&src)?;
        check_minimal(&dst)?;
    }
    let ts = normalizer(&src)?;
    let td = normalizer(&dst)?;

    // Zero rows pad the system to at least 9 equations so the SVD exposes
    // the full right null space.
    let rows = (2 * pairs.len()).max(9);
    let mut a = DMatrix::<f64>::zeros(rows, 9);
    for (i, (s, d)) in src.iter().zip(&dst).enumerate() {
        let [x, y] = transform(&ts, *s);
        let [u, v] = transform(&td, *d);
        let r = 2 * i;
        a.row_mut(r)
            .copy_from_slice(&[-x, -y, -1.0, 0.0, 0.0, 0.0, u * x, u * y, u]);
        a.row_mut(r + 1)
            .copy_from_slice(&[0.0, 0.0, 0.0, -x, -y, -1.0, v * x, v * y, v]);
    }
    let svd = a.svd(false, true);
    let vt = svd.v_t.expect("requested V^T");
    let mut order: Vec<usize> = (0..svd.singular_values.len()).collect();
    order.sort_by(|&i, &j| svd.singular_values[i].total_cmp(&svd.singular_values[j]));
    let (smallest, runner_up) = (order[0], order[1]);
    let largest = svd.singular_values[order[order.len() - 1]];
    if svd.singular_values[runner_up] <= 1e-10 * largest {
        return Err(Error::DegenerateCorrespondences(
            "solution is not unique".into(),
        ));
    }
    let h = vt.row(smallest);
    let hn = Matrix3::new(h[0], h[1], h[2], h[3], h[4], h[5], h[6], h[7], h[8]);
    let td_inv = td.try_inverse().ok_or(Error::SingularHomography)?;
    let homography = Homography::new(td_inv * hn * ts)?;

    let sq: f64 = pairs
        .iter()
        .map(|(s, d)| match homography.apply(*s) {
            Some(p) => (p[0] - d[0]).powi(2) + (p[1] - d[1]).powi(2),
            None => f64::INFINITY,
        })
        .sum();
    Ok(HomographyFit {
        homography,
        rms: (sq / pairs.len() as f64).sqrt(),
    })
}

/// Inverse-mapped bilinear warp into a `width × height` frame, edge-clamped.
/// `h` maps input coordinates to output coordinates (pixel centers at
/// half-integers).
pub fn warp_homography_into(
    img: &ImageBuf,
    h: &Homography,
    width: usize,
    height: usize,
) -> Result<ImageBuf> {
    let inv = h.inverse()?;
    ImageBuf::from_fn(width, height, |c, r| {
        match inv.apply([c as f64 + 0.5, r as f64 + 0.5]) {
            Some([x, y]) => img.sample_at_center_coords(x, y),
            None => [0.0; 3],
        }
    })
}

pub fn warp_homography(img: &ImageBuf, h: &Homography) -> Result<ImageBuf> {
    warp_homography_into(img, h, img.width(), img.height())
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Counterpart {
    pub index: usize,
    /// Mean absolute error of the aligned image against each candidate.
    pub errors: Vec<f64>,
    pub fits: Vec<HomographyFit>,
}

/// Aligns `shadow` to every candidate and picks the one with the lowest
/// mean absolute pixel error; ties go to the lowest index.
pub fn select_counterpart(
    shadow: &ImageBuf,
    candidates: &[ImageBuf],
    correspondences: &[Vec<Correspondence>],
) -> Result<Counterpart> {
    if candidates.is_empty() {
        return Err(Error::NoCandidates);
    }
    if correspondences.len() != candidates.len() {
        return Err(Error::LengthMismatch {
            expected: candidates.len(),
            got: correspondences.len(),
        });
    }
    let mut errors = Vec::with_capacity(candidates.len());
    let mut fits = Vec::with_capacity(candidates.len());
    for (cand, pairs) in candidates.iter().zip(correspondences) {
        let fit = dlt_homography(pairs)?;
        let aligned = warp_homography_into(shadow, &fit.homography, cand.width(), cand.height())?;
        errors.push(l1_pixel(&aligned, cand)?);
        fits.push(fit);
    }
    let index = (0..errors.len())
        .min_by(|&a, &b| errors[a].total_cmp(&errors[b]).then(a.cmp(&b)))
        .expect("non-empty");
    Ok(Counterpart {
        index,
        errors,
        fits,
    })
}
