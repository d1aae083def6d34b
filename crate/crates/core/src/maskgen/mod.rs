//! Input shadow masks: half tiled natural-object silhouettes, half
//! multi-octave Perlin noise.

pub mod perlin;
pub mod silhouette;

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::rng;

pub use perlin::{perlin_field, sample_perlin_mask, PerlinNoise, PerlinSampler, PerlinSpec};
pub use silhouette::{
    silhouette_mask, Silhouette, SilhouetteCorpus, SilhouetteSampler, SilhouetteSpec,
};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum MaskSource {
    Silhouette,
    Perlin,
}

/// Fair coin between the two mask families on the seeded stream.
pub fn sample_mask_source(seed: u64) -> MaskSource {
    if rng::stream(seed).random_bool(0.5) {
        MaskSource::Silhouette
    } else {
        MaskSource::Perlin
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::derive_seed;

    #[test]
    fn split_is_even() {
        let n = 10_000u64;
        let silhouettes = (0..n)
            .filter(|&s| {
                sample_mask_source(derive_seed(s, "mask-source")) == MaskSource::Silhouette
            })
            .count();
        let freq = silhouettes as f64 / n as f64;
        assert!((0.48..=0.52).contains(&freq), "frequency {freq}");
    }

    #[test]
    fn fixed_seed_fixed_choice() {
        for s in 0..50 {
            assert_eq!(sample_mask_source(s), sample_mask_source(s));
        }
    }

    #[test]
    fn disjoint_streams_are_independent() {
        // 2x2 contingency table of coin draws from two named substreams.
        let mut table = [[0f64; 2]; 2];
        for s in 0..10_000u64 {
            let a = sample_mask_source(derive_seed(s, "mask-source")) == MaskSource::Silhouette;
            let b = sample_mask_source(derive_seed(s, "ccm")) == MaskSource::Silhouette;
            table[a as usize][b as usize] += 1.0;
        }
        let total: f64 = table.iter().flatten().sum();
        let rows = [table[0][0] + table[0][1], table[1][0] + table[1][1]];
        let cols = [table[0][0] + table[1][0], table[0][1] + table[1][1]];
        let mut chi2 = 0.0;
        for i in 0..2 {
            for j in 0..2 {
                let e = rows[i] * cols[j] / total;
                chi2 += (table[i][j] - e).powi(2) / e;
            }
        }
        // 1 degree of freedom, p = 0.001.
        assert!(chi2 < 10.83, "chi-square {chi2}");
    }
}
