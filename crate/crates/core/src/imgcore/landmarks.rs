use std::sync::OnceLock;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Vertex count of the face-mesh topology.
pub const FACE_MESH_VERTICES: usize = 468;

/// 2D facial landmarks plus the bilateral mirror table `j -> j̄`.
///
/// Points are in continuous pixel coordinates (pixel `(c, r)` is centered
/// at `(c + 0.5, r + 0.5)`).
#[derive(Debug, Clone, PartialEq)]
pub struct LandmarkSet {
    points: Vec<[f64; 2]>,
    mirror: Vec<usize>,
}

#[derive(Serialize, Deserialize)]
struct LandmarkDoc {
    version: u32,
    points: Vec<[f64; 2]>,
    mirror: Vec<usize>,
}

#[derive(Deserialize)]
struct MeshAsset {
    uv: Vec<[f64; 2]>,
    mirror: Vec<usize>,
}

fn mesh_asset() -> &'static MeshAsset {
    static ASSET: OnceLock<MeshAsset> = OnceLock::new();
    ASSET.get_or_init(|| {
        serde_json::from_str(include_str!("../../assets/face_mesh_468.json"))
            .expect("bundled face mesh asset is valid JSON")
    })
}

impl LandmarkSet {
    pub fn new(points: Vec<[f64; 2]>, mirror: Vec<usize>) -> Result<Self> {
        if points.is_empty() {
            return Err(Error::param("points", "at least one landmark is required"));
        }
        if mirror.len() != points.len() {
            return Err(Error::LengthMismatch {
                expected: points.len(),
                got: mirror.len(),
            });
        }
        if let Some(j) = points
            .iter()
            .position(|p| !p[0].is_finite() || !p[1].is_finite())
        {
            return Err(Error::NonFinite { index: j });
        }
        let set = Self { points, mirror };
        set.check_involution()?;
        Ok(set)
    }

    /// Landmarks whose mirror table is the identity.
    pub fn without_mirror(points: Vec<[f64; 2]>) -> Result<Self> {
        let mirror = (0..points.len()).collect();
        Self::new(points, mirror)
    }

    /// The bundled 468-vertex canonical face layout mapped into a box.
    pub fn canonical_face(x: f64, y: f64, w: f64, h: f64) -> Self {
        let asset = mesh_asset();
        let points = asset
            .uv
            .iter()
            .map(|[u, v]| [x + u * w, y + v * h])
            .collect();
        Self {
            points,
            mirror: asset.mirror.clone(),
        }
    }

    /// The bundled bilateral mirror table for the 468-vertex topology.
    pub fn face_mesh_mirror() -> &'static [usize] {
        &mesh_asset().mirror
    }

    pub fn check_involution(&self) -> Result<()> {
        let n = self.mirror.len();
        for (j, &m) in self.mirror.iter().enumerate() {
            if m >= n || self.mirror[m] != j {
                return Err(Error::MirrorNotInvolution { index: j });
            }
        }
        Ok(())
    }

    pub fn check_bounds(&self, width: usize, height: usize) -> Result<()> {
        for (index, &[u, v]) in self.points.iter().enumerate() {
            if !(0.0..=width as f64).contains(&u) || !(0.0..=height as f64).contains(&v) {
                return Err(Error::LandmarkOutOfBounds {
                    index,
                    u,
                    v,
                    width,
                    height,
                });
            }
        }
        Ok(())
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn points(&self) -> &[[f64; 2]] {
        &self.points
    }

    pub fn mirror(&self) -> &[usize] {
        &self.mirror
    }

    pub fn mirrored_point(&self, j: usize) -> [f64; 2] {
        self.points[self.mirror[j]]
    }

    pub fn map_points(&self, f: impl Fn([f64; 2]) -> [f64; 2]) -> Self {
        Self {
            points: self.points.iter().map(|&p| f(p)).collect(),
            mirror: self.mirror.clone(),
        }
    }

    /// Parses `{"version":1,"points":[[u,v]×468],"mirror":[j̄×468]}`.
    pub fn from_json(text: &str) -> Result<Self> {
        let doc: LandmarkDoc = serde_json::from_str(text)?;
        if doc.version != 1 {
            return Err(Error::Malformed {
                format: "landmark JSON",
                reason: format!("unsupported version {}", doc.version),
            });
        }
        if doc.points.len() != FACE_MESH_VERTICES {
            return Err(Error::Malformed {
                format: "landmark JSON",
                reason: format!(
                    "expected {FACE_MESH_VERTICES} points, got {}",
                    doc.points.len()
                ),
            });
        }
        Self::new(doc.points, doc.mirror)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string(&LandmarkDoc {
            version: 1,
            points: self.points.clone(),
            mirror: self.mirror.clone(),
        })
        .expect("landmarks serialize")
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn bundled_table_is_an_involution() {
        let set = LandmarkSet::canonical_face(0.0, 0.0, 256.0, 256.0);
        assert_eq!(set.len(), FACE_MESH_VERTICES);
        set.check_involution().unwrap();
        set.check_bounds(256, 256).unwrap();
        // Mirror pairs sit on opposite sides of the vertical midline.
        for j in 0..set.len() {
            let [u, v] = set.points()[j];
            let [mu, mv] = set.mirrored_point(j);
            assert!((u + mu - 256.0).abs() < 0.5, "vertex {j}");
            assert!((v - mv).abs() < 0.5, "vertex {j}");
        }
    }

    #[test]
    fn rejects_non_involution() {
        let err = LandmarkSet::new(vec![[0.0, 0.0], [1.0, 0.0], [2.0, 0.0]], vec![1, 2, 0]);
        assert!(matches!(err, Err(Error::MirrorNotInvolution { index: 0 })));
    }

    #[test]
    fn json_round_trip_and_validation() {
        let set = LandmarkSet::canonical_face(10.0, 20.0, 200.0, 210.0);
        let back = LandmarkSet::from_json(&set.to_json()).unwrap();
        assert_eq!(back, set);
        assert!(LandmarkSet::from_json(r#"{"version":1,"points":[[0,0]],"mirror":[0]}"#).is_err());
        assert!(LandmarkSet::from_json(r#"{"version":2,"points":[],"mirror":[]}"#).is_err());
    }

    #[test]
    fn bounds_are_checked() {
        let set = LandmarkSet::without_mirror(vec![[5.0, 5.0], [300.0, 5.0]]).unwrap();
        assert!(matches!(
            set.check_bounds(256, 256),
            Err(Error::LandmarkOutOfBounds { index: 1, .. })
        ));
    }
}
