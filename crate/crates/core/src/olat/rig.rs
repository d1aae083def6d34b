use std::path::Path;

use nalgebra::Vector3;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

const UNIT_TOLERANCE: f64 = 1e-9;

/// Light positions and the camera axis.
///
/// `dir` of each light points from the light toward the subject center and
/// `camera_axis` points from the camera toward the subject, so a light
/// mounted at the camera has `dir == camera_axis`.
#[derive(Debug, Clone, PartialEq)]
pub struct LightRig {
    directions: Vec<Vector3<f64>>,
    active: Vec<bool>,
    camera_axis: Vector3<f64>,
}

#[derive(Serialize, Deserialize)]
struct RigFile {
    n: [f64; 3],
    lights: Vec<LightEntry>,
}

#[derive(Serialize, Deserialize)]
struct LightEntry {
    dir: [f64; 3],
    active: bool,
}

fn check_unit(v: &Vector3<f64>, what: &'static str, tol: f64) -> Result<()> {
    let n = v.norm();
    if !n.is_finite() || (n - 1.0).abs() > tol {
        return Err(Error::param(what, format!("expected unit length, got {n}")));
    }
    Ok(())
}

impl LightRig {
    pub fn new(
        directions: Vec<Vector3<f64>>,
        active: Vec<bool>,
        camera_axis: Vector3<f64>,
    ) -> Result<Self> {
        if directions.len() != active.len() {
            return Err(Error::LengthMismatch {
                expected: directions.len(),
                got: active.len(),
            });
        }
        for d in &directions {
            check_unit(d, "light direction", UNIT_TOLERANCE)?;
        }
        check_unit(&camera_axis, "camera axis", UNIT_TOLERANCE)?;
        if !active.iter().any(|&a| a) {
            return Err(Error::param("lights", "rig has no active lights"));
        }
        Ok(Self {
            directions,
            active,
            camera_axis,
        })
    }

    /// `count` lights spread evenly over the sphere on a Fibonacci lattice,
    /// camera on +z looking down -z. The `inactive` lights furthest behind
    /// the subject are switched off.
    pub fn spherical(count: usize, inactive: usize) -> Result<Self> {
        if count == 0 || inactive >= count {
            return Err(Error::param(
                "rig_lights",
                format!("{count} lights with {inactive} inactive"),
            ));
        }
        let golden = std::f64::consts::PI * (3.0 - 5f64.sqrt());
        let directions: Vec<Vector3<f64>> = (0..count)
            .map(|i| {
                let y = 1.0 - 2.0 * (i as f64 + 0.5) / count as f64;
                let r = (1.0 - y * y).sqrt();
                let theta = golden * i as f64;
                let position = Vector3::new(r * theta.cos(), y, r * theta.sin());
                -position.normalize()
            })
            .collect();
        let camera_axis = Vector3::new(0.0, 0.0, -1.0);
        // Lights behind the subject sit at negative z, so their directions
        // have the smallest dot product with the camera axis.
        let mut order: Vec<usize> = (0..count).collect();
        order.sort_by(|&a, &b| {
            directions[a]
                .dot(&camera_axis)
                .total_cmp(&directions[b].dot(&camera_axis))
                .then(a.cmp(&b))
        });
        let mut active = vec![true; count];
        for &i in &order[..inactive] {
            active[i] = false;
        }
        Self::new(directions, active, camera_axis)
    }

    pub fn len(&self) -> usize {
        self.directions.len()
    }

    pub fn is_empty(&self) -> bool {
        self.directions.is_empty()
    }

    pub fn direction(&self, index: usize) -> Vector3<f64> {
        self.directions[index]
    }

    pub fn directions(&self) -> &[Vector3<f64>] {
        &self.directions
    }

    pub fn is_active(&self, index: usize) -> bool {
        self.active.get(index).copied().unwrap_or(false)
    }

    pub fn active_indices(&self) -> Vec<usize> {
        (0..self.len()).filter(|&i| self.active[i]).collect()
    }

    pub fn active_count(&self) -> usize {
        self.active.iter().filter(|&&a| a).count()
    }

    pub fn camera_axis(&self) -> Vector3<f64> {
        self.camera_axis
    }

    pub(crate) fn check_active(&self, index: usize) -> Result<()> {
        if index >= self.len() {
            return Err(Error::MissingLight { index });
        }
        if !self.active[index] {
            return Err(Error::InactiveLight { index });
        }
        Ok(())
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let file: RigFile = serde_json::from_str(text)?;
        let (directions, active) = file
            .lights
            .iter()
            .map(|l| (Vector3::from(l.dir), l.active))
            .unzip();
        Self::new(directions, active, Vector3::from(file.n))
    }

    pub fn to_json(&self) -> String {
        let file = RigFile {
            n: self.camera_axis.into(),
            lights: self
                .directions
                .iter()
                .zip(&self.active)
                .map(|(d, &active)| LightEntry {
                    dir: (*d).into(),
                    active,
                })
                .collect(),
        };
        serde_json::to_string_pretty(&file).expect("rig serializes")
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        Self::from_json(&std::fs::read_to_string(path)?)
    }

    pub fn save(&self, path: impl AsRef<Path>) -> Result<()> {
        std::fs::write(path, self.to_json())?;
        Ok(())
    }
}

/// The `m` active lights closest in angle to `center`, nearest first.
/// Ties go to the lower index.
pub fn neighbors(rig: &LightRig, center: &Vector3<f64>, m: usize) -> Result<Vec<usize>> {
    let active = rig.active_count();
    if m == 0 || m > active {
        return Err(Error::param("m", format!("{m} not in 1..={active}")));
    }
    let mut scored: Vec<(f64, usize)> = rig
        .active_indices()
        .into_iter()
        .map(|i| (rig.direction(i).dot(center), i))
        .collect();
    scored.sort_by(|a, b| b.0.total_cmp(&a.0).then(a.1.cmp(&b.1)));
    Ok(scored.into_iter().take(m).map(|(_, i)| i).collect())
}

/// Reflection of the key direction about the camera axis:
/// `2 (key · n) n - key`.
pub fn fill_direction(key: &Vector3<f64>, n: &Vector3<f64>) -> Result<Vector3<f64>> {
    check_unit(key, "key direction", 1e-6)?;
    check_unit(n, "camera axis", 1e-6)?;
    Ok(2.0 * key.dot(n) * n - key)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn spherical_rig_layout() {
        let rig = LightRig::spherical(304, 20).unwrap();
        assert_eq!(rig.len(), 304);
        assert_eq!(rig.active_count(), 284);
        let n = rig.camera_axis();
        let worst_active = rig
            .active_indices()
            .iter()
            .map(|&i| rig.direction(i).dot(&n))
            .fold(f64::MAX, f64::min);
        for i in (0..304).filter(|&i| !rig.is_active(i)) {
            assert!(rig.direction(i).dot(&n) <= worst_active);
        }
    }

    #[test]
    fn json_round_trip_and_validation() {
        let rig = LightRig::spherical(40, 3).unwrap();
        assert_eq!(LightRig::from_json(&rig.to_json()).unwrap(), rig);
        let bad = r#"{"n":[0,0,-1],"lights":[{"dir":[0,0,2],"active":true}]}"#;
        assert!(LightRig::from_json(bad).is_err());
        let none = r#"{"n":[0,0,-1],"lights":[{"dir":[0,0,1],"active":false}]}"#;
        assert!(LightRig::from_json(none).is_err());
    }

    #[test]
    fn neighbors_basics() {
        let rig = LightRig::spherical(100, 10).unwrap();
        let k = rig.active_indices()[7];
        assert_eq!(neighbors(&rig, &rig.direction(k), 1).unwrap(), vec![k]);
        let mut all = neighbors(&rig, &rig.direction(k), 90).unwrap();
        all.sort_unstable();
        assert_eq!(all, rig.active_indices());
        assert!(neighbors(&rig, &rig.direction(k), 0).is_err());
        assert!(neighbors(&rig, &rig.direction(k), 91).is_err());
    }

    #[test]
    fn neighbors_match_exhaustive_sort() {
        let rig = LightRig::spherical(304, 20).unwrap();
        for &k in rig.active_indices().iter().step_by(17) {
            let c = rig.direction(k);
            let got = neighbors(&rig, &c, 10).unwrap();
            // oracle: rank every active light by how many others beat it
            let act = rig.active_indices();
            let beats = |a: usize, b: usize| {
                let (da, db) = (rig.direction(a).dot(&c), rig.direction(b).dot(&c));
                da > db || (da == db && a < b)
            };
            let mut oracle: Vec<(usize, usize)> = act
                .iter()
                .map(|&i| (act.iter().filter(|&&j| beats(j, i)).count(), i))
                .collect();
            oracle.sort_unstable();
            let want: Vec<usize> = oracle.iter().take(10).map(|&(_, i)| i).collect();
            assert_eq!(got, want);
        }
    }

    #[test]
    fn neighbor_ties_go_to_lower_index() {
        let d = |x: f64, y: f64, z: f64| Vector3::new(x, y, z).normalize();
        let rig = LightRig::new(
            vec![
                d(1.0, 0.0, 0.0),
                d(0.0, 1.0, 0.0),
                d(-1.0, 0.0, 0.0),
                d(0.0, -1.0, 0.0),
            ],
            vec![true; 4],
            d(0.0, 0.0, 1.0),
        )
        .unwrap();
        assert_eq!(neighbors(&rig, &d(0.0, 0.0, 1.0), 2).unwrap(), vec![0, 1]);
    }

    #[test]
    fn fill_direction_fixed_cases() {
        let n = Vector3::new(0.0, 0.0, -1.0);
        assert!((fill_direction(&n, &n).unwrap() - n).norm() < 1e-15);
        let perp = Vector3::new(1.0, 0.0, 0.0);
        assert!((fill_direction(&perp, &n).unwrap() + perp).norm() < 1e-15);
        assert!(fill_direction(&Vector3::new(1.0, 1.0, 0.0), &n).is_err());
    }

    fn unit(theta: f64, z: f64) -> Vector3<f64> {
        let r = (1.0 - z * z).sqrt();
        Vector3::new(r * theta.cos(), r * theta.sin(), z)
    }

    proptest! {
        #[test]
        fn reflection_invariants(t1 in 0.0..std::f64::consts::TAU, z1 in -1.0..1.0f64, t2 in 0.0..std::f64::consts::TAU, z2 in -1.0..1.0f64) {
            let key = unit(t1, z1);
            let n = unit(t2, z2);
            let fill = fill_direction(&key, &n).unwrap();
            prop_assert!((fill.norm() - 1.0).abs() <= 1e-9);
            prop_assert!((fill.dot(&n) - key.dot(&n)).abs() <= 1e-9);
            let back = fill_direction(&fill, &n).unwrap();
            prop_assert!((back - key).norm() <= 1e-9);
        }
    }
}
