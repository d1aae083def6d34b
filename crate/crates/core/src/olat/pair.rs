use rand::Rng;
use serde::{Deserialize, Serialize};

use super::rig::LightRig;
use super::scan::OlatScan;
use super::weights::{harsh_weights, soft_weights_with, FILL_NEIGHBORHOOD, LIGHT_SIZES};
use crate::error::{Error, Result};
use crate::imgcore::ImageBuf;
use crate::rng;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PairSampler {
    pub p_key: (f64, f64),
    /// Ambient weight as a fraction of the drawn key power.
    pub epsilon_ratio: f64,
    /// Upper bound of the fill power as a fraction of the key power.
    pub p_fill_ratio: f64,
    pub light_sizes: Vec<usize>,
    pub fill_neighborhood: usize,
}

impl Default for PairSampler {
    fn default() -> Self {
        Self {
            p_key: (0.7, 1.3),
            epsilon_ratio: 0.005,
            p_fill_ratio: 0.1,
            light_sizes: LIGHT_SIZES.to_vec(),
            fill_neighborhood: FILL_NEIGHBORHOOD,
        }
    }
}

/// Parameters of one harsh/soft pair.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PairRecord {
    pub seed: u64,
    pub key: usize,
    pub p_key: f64,
    pub epsilon: f64,
    /// Light size: number of lights sharing the key energy.
    pub m: usize,
    pub p_fill: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct FacialPair {
    pub harsh: ImageBuf,
    pub soft: ImageBuf,
    pub record: PairRecord,
}

impl PairSampler {
    pub fn validate(&self) -> Result<()> {
        let (lo, hi) = self.p_key;
        if !(0.0 < lo && lo <= hi && hi.is_finite()) {
            return Err(Error::param("p_key", format!("invalid range [{lo}, {hi}]")));
        }
        if !(self.epsilon_ratio > 0.0 && self.epsilon_ratio < 1.0) {
            return Err(Error::param("epsilon_ratio", "must be in (0, 1)"));
        }
        if !(0.0..=0.1).contains(&self.p_fill_ratio) {
            return Err(Error::param("p_fill_ratio", "must be in [0, 0.1]"));
        }
        if self.light_sizes.is_empty() || self.light_sizes.iter().any(|m| !LIGHT_SIZES.contains(m))
        {
            return Err(Error::param(
                "m_set",
                format!("light sizes must be drawn from {LIGHT_SIZES:?}"),
            ));
        }
        if self.fill_neighborhood == 0 {
            return Err(Error::param("fill_neighborhood", "must be positive"));
        }
        Ok(())
    }

    /// Draws the pair parameters for `seed` without rendering.
    pub fn draw(&self, rig: &LightRig, seed: u64) -> Result<PairRecord> {
        self.validate()?;
        let mut rng = rng::stream(rng::derive_seed(seed, "pair"));
        let active = rig.active_indices();
        let key = active[rng.random_range(0..active.len())];
        let p_key = rng.random_range(self.p_key.0..=self.p_key.1);
        let m = self.light_sizes[rng.random_range(0..self.light_sizes.len())];
        let p_fill = rng.random_range(0.0..=p_key * self.p_fill_ratio);
        Ok(PairRecord {
            seed,
            key,
            p_key,
            epsilon: self.epsilon_ratio * p_key,
            m,
            p_fill,
        })
    }

    pub fn render(
        &self,
        scan: &OlatScan,
        rig: &LightRig,
        record: &PairRecord,
    ) -> Result<FacialPair> {
        scan.check_rig(rig)?;
        let harsh = scan.relight(&harsh_weights(
            rig,
            record.key,
            record.p_key,
            record.epsilon,
        )?)?;
        let soft_w = soft_weights_with(
            rig,
            record.key,
            record.p_key,
            record.m,
            record.p_fill,
            record.epsilon,
            self.fill_neighborhood,
        )?;
        let soft = scan.relight(&soft_w)?;
        Ok(FacialPair {
            harsh,
            soft,
            record: *record,
        })
    }

    pub fn make_pair(&self, scan: &OlatScan, rig: &LightRig, seed: u64) -> Result<FacialPair> {
        let record = self.draw(rig, seed)?;
        self.render(scan, rig, &record)
    }
}

pub fn make_pair(scan: &OlatScan, rig: &LightRig, seed: u64) -> Result<FacialPair> {
    PairSampler::default().make_pair(scan, rig, seed)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::olat::render::SyntheticHead;
    use crate::olat::rig::neighbors;
    use crate::olat::weights::WeightVector;

    fn setup() -> (LightRig, OlatScan) {
        let rig = LightRig::spherical(304, 20).unwrap();
        let scan = SyntheticHead::with_size(24).render(&rig, "head").unwrap();
        (rig, scan)
    }

    #[test]
    fn draws_respect_ranges() {
        let rig = LightRig::spherical(304, 20).unwrap();
        let sampler = PairSampler::default();
        let mut seen = [false; 5];
        for seed in 0..10_000 {
            let r = sampler.draw(&rig, seed).unwrap();
            let slot = LIGHT_SIZES
                .iter()
                .position(|&m| m == r.m)
                .expect("m in set");
            seen[slot] = true;
            assert!(rig.is_active(r.key));
            assert!((0.7..=1.3).contains(&r.p_key));
            assert!(r.p_fill >= 0.0 && r.p_fill <= r.p_key / 10.0);
            assert!(r.epsilon > 0.0 && r.epsilon < r.p_key);
        }
        assert!(seen.iter().all(|&s| s));
    }

    #[test]
    fn deterministic_in_seed() {
        let (rig, scan) = setup();
        assert_eq!(
            make_pair(&scan, &rig, 9).unwrap(),
            make_pair(&scan, &rig, 9).unwrap()
        );
    }

    #[test]
    fn zero_fill_equals_key_splat() {
        let (rig, scan) = setup();
        let sampler = PairSampler::default();
        let mut record = sampler.draw(&rig, 4).unwrap();
        record.p_fill = 0.0;
        let pair = sampler.render(&scan, &rig, &record).unwrap();
        let omega = neighbors(&rig, &rig.direction(record.key), record.m).unwrap();
        let splat: Vec<f64> = (0..rig.len())
            .map(|i| {
                if omega.contains(&i) {
                    record.p_key / record.m as f64
                } else if rig.is_active(i) {
                    record.epsilon
                } else {
                    0.0
                }
            })
            .collect();
        let want = scan.relight(&WeightVector::new(splat).unwrap()).unwrap();
        assert_eq!(pair.soft, want);
    }

    #[test]
    fn harsh_and_soft_differ() {
        let (rig, scan) = setup();
        for seed in 0..5 {
            let pair = make_pair(&scan, &rig, seed).unwrap();
            assert!(pair.record.m > 1);
            assert_ne!(pair.harsh, pair.soft);
        }
    }

    #[test]
    fn inconsistent_scan_is_rejected() {
        let (_, scan) = setup();
        let other = LightRig::spherical(300, 20).unwrap();
        assert!(make_pair(&scan, &other, 1).is_err());
    }
}
