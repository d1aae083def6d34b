use serde::{Deserialize, Serialize};

use super::rig::{fill_direction, neighbors, LightRig};
use crate::error::{Error, Result};

/// Allowed key-light neighborhood sizes.
pub const LIGHT_SIZES: [usize; 5] = [5, 10, 20, 30, 40];
/// Lights around the fill direction that receive fill energy.
pub const FILL_NEIGHBORHOOD: usize = 20;

/// Non-negative weight per rig light, indexed like the rig. Inactive lights
/// always carry zero.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct WeightVector(Vec<f64>);

impl WeightVector {
    pub fn new(weights: Vec<f64>) -> Result<Self> {
        if let Some(index) = weights.iter().position(|w| !w.is_finite()) {
            return Err(Error::NonFinite { index });
        }
        if let Some(i) = weights.iter().position(|&w| w < 0.0) {
            return Err(Error::param("weights", format!("weight {i} is negative")));
        }
        Ok(Self(weights))
    }

    pub fn one_hot(len: usize, index: usize, value: f64) -> Result<Self> {
        let mut w = vec![0.0; len];
        *w.get_mut(index).ok_or(Error::MissingLight { index })? = value;
        Self::new(w)
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.0
    }

    pub fn sum(&self) -> f64 {
        self.0.iter().sum()
    }

    pub fn scaled(&self, k: f64) -> Result<Self> {
        Self::new(self.0.iter().map(|w| w * k).collect())
    }
}

fn check_energy(p_key: f64, epsilon: f64) -> Result<()> {
    if epsilon.is_nan() || epsilon <= 0.0 {
        return Err(Error::param("epsilon", "ambient weight must be positive"));
    }
    if !(p_key > epsilon && p_key.is_finite()) {
        return Err(Error::param(
            "p_key",
            format!("{p_key} must exceed epsilon {epsilon}"),
        ));
    }
    Ok(())
}

fn ambient(rig: &LightRig, epsilon: f64) -> Vec<f64> {
    (0..rig.len())
        .map(|i| if rig.is_active(i) { epsilon } else { 0.0 })
        .collect()
}

/// `P_key` on the key light and `epsilon` on every other active light.
pub fn harsh_weights(rig: &LightRig, key: usize, p_key: f64, epsilon: f64) -> Result<WeightVector> {
    rig.check_active(key)?;
    check_energy(p_key, epsilon)?;
    let mut w = ambient(rig, epsilon);
    w[key] = p_key;
    WeightVector::new(w)
}

/// Key energy spread evenly over the `m` lights nearest the key, fill
/// energy on the lights nearest the reflected direction, ambient elsewhere.
///
/// Key lights take precedence where the two neighborhoods overlap. Fill
/// lights never drop below the ambient level.
pub fn soft_weights(
    rig: &LightRig,
    key: usize,
    p_key: f64,
    m: usize,
    p_fill: f64,
    epsilon: f64,
) -> Result<WeightVector> {
    soft_weights_with(rig, key, p_key, m, p_fill, epsilon, FILL_NEIGHBORHOOD)
}

pub fn soft_weights_with(
    rig: &LightRig,
    key: usize,
    p_key: f64,
    m: usize,
    p_fill: f64,
    epsilon: f64,
    fill_count: usize,
) -> Result<WeightVector> {
    rig.check_active(key)?;
    check_energy(p_key, epsilon)?;
    if !LIGHT_SIZES.contains(&m) {
        return Err(Error::param("m", format!("{m} not in {LIGHT_SIZES:?}")));
    }
    if !(0.0..=p_key / 10.0).contains(&p_fill) {
        return Err(Error::param(
            "p_fill",
            format!("{p_fill} not in [0, {}]", p_key / 10.0),
        ));
    }
    let key_dir = rig.direction(key);
    let key_set = neighbors(rig, &key_dir, m)?;
    let fill_dir = fill_direction(&key_dir, &rig.camera_axis())?;
    let fill_set = neighbors(rig, &fill_dir, fill_count)?;

    let mut w = ambient(rig, epsilon);
    for &i in &fill_set {
        w[i] = p_fill.max(epsilon);
    }
    let share = p_key / m as f64;
    for &i in &key_set {
        w[i] = share;
    }
    WeightVector::new(w)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn rig() -> LightRig {
        LightRig::spherical(304, 20).unwrap()
    }

    #[test]
    fn harsh_definition() {
        let rig = rig();
        let key = rig.active_indices()[40];
        let w = harsh_weights(&rig, key, 1.1, 0.01).unwrap();
        for i in 0..rig.len() {
            let want = if i == key {
                1.1
            } else if rig.is_active(i) {
                0.01
            } else {
                0.0
            };
            assert_eq!(w.as_slice()[i], want);
        }
        let n = rig.active_count() as f64;
        assert!((w.sum() - (1.1 + (n - 1.0) * 0.01)).abs() < 1e-12);
        assert!(harsh_weights(&rig, key, 1.0, 0.0).is_err());
        assert!(harsh_weights(&rig, key, 0.01, 0.01).is_err());
        let off = (0..rig.len()).find(|&i| !rig.is_active(i)).unwrap();
        assert!(matches!(
            harsh_weights(&rig, off, 1.0, 0.01),
            Err(Error::InactiveLight { .. })
        ));
    }

    #[test]
    fn key_energy_is_conserved() {
        let rig = rig();
        let key = rig.active_indices()[100];
        for m in LIGHT_SIZES {
            let w = soft_weights(&rig, key, 0.9, m, 0.05, 0.0045).unwrap();
            let omega = neighbors(&rig, &rig.direction(key), m).unwrap();
            let total: f64 = omega.iter().map(|&i| w.as_slice()[i]).sum();
            assert!((total - 0.9).abs() < 1e-12, "m {m}");
            assert!(omega.iter().all(|&i| w.as_slice()[i] == 0.9 / m as f64));
        }
        let w = soft_weights(&rig, key, 1.0, 5, 0.0, 0.005).unwrap();
        assert_eq!(w.as_slice().iter().filter(|&&v| v == 0.2).count(), 5);
    }

    #[test]
    fn invalid_soft_parameters() {
        let rig = rig();
        let key = rig.active_indices()[0];
        assert!(soft_weights(&rig, key, 1.0, 7, 0.0, 0.005).is_err());
        assert!(soft_weights(&rig, key, 1.0, 5, 0.2, 0.005).is_err());
        assert!(soft_weights(&rig, key, 1.0, 5, -0.01, 0.005).is_err());
    }

    /// Direct case-by-case evaluation of the piecewise weights.
    fn piecewise(
        rig: &LightRig,
        key: usize,
        p_key: f64,
        m: usize,
        p_fill: f64,
        eps: f64,
        fill_count: usize,
    ) -> Vec<f64> {
        let kd = rig.direction(key);
        let n = rig.camera_axis();
        let fd = 2.0 * kd.dot(&n) * n - kd;
        let in_key = neighbors(rig, &kd, m).unwrap();
        let in_fill = neighbors(rig, &fd, fill_count).unwrap();
        (0..rig.len())
            .map(|i| {
                if !rig.is_active(i) {
                    0.0
                } else if in_key.contains(&i) {
                    p_key / m as f64
                } else if in_fill.contains(&i) {
                    p_fill.max(eps)
                } else {
                    eps
                }
            })
            .collect()
    }

    #[test]
    fn overlap_resolves_key_first() {
        let rig = rig();
        // a key near the camera axis reflects onto itself, so the two
        // neighborhoods overlap
        let n = rig.camera_axis();
        let key = neighbors(&rig, &n, 1).unwrap()[0];
        let kd = rig.direction(key);
        let fd = 2.0 * kd.dot(&n) * n - kd;
        let key_set = neighbors(&rig, &kd, 40).unwrap();
        let fill_set = neighbors(&rig, &fd, FILL_NEIGHBORHOOD).unwrap();
        assert!(fill_set.iter().any(|i| key_set.contains(i)));
        for m in LIGHT_SIZES {
            let got = soft_weights(&rig, key, 1.0, m, 0.08, 0.005).unwrap();
            assert_eq!(
                got.as_slice(),
                piecewise(&rig, key, 1.0, m, 0.08, 0.005, FILL_NEIGHBORHOOD).as_slice()
            );
        }
    }

    #[test]
    fn matches_piecewise_on_many_keys() {
        let rig = rig();
        for (t, &key) in rig.active_indices().iter().enumerate().step_by(23) {
            let m = LIGHT_SIZES[t % 5];
            let got = soft_weights(&rig, key, 1.2, m, 0.1, 0.006).unwrap();
            assert_eq!(
                got.as_slice(),
                piecewise(&rig, key, 1.2, m, 0.1, 0.006, FILL_NEIGHBORHOOD).as_slice()
            );
        }
    }

    #[test]
    fn weight_vector_validation() {
        assert!(WeightVector::new(vec![0.0, -1.0]).is_err());
        assert!(WeightVector::new(vec![f64::NAN]).is_err());
        assert!(WeightVector::one_hot(3, 3, 1.0).is_err());
    }
}
