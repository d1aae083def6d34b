//! Foreign-shadow synthesis: a shadow image from color jitter, a mask
//! softened by subsurface scattering and spatial variation, and the linear
//! blend `I = I_lit (1 - M) + I_shadow M`.

pub mod ccm;
pub mod scatter;
pub mod variation;

use serde::{Deserialize, Serialize};

pub use ccm::{apply_ccm, sample_ccm, CcmSampler, ColorJitter};
pub use scatter::{ss_blur, ScatterLobe, ScatterProfile};
pub use variation::{
    apply_spatial_variation, spatial_variation_fields, variable_blur, SpatialVariation,
    VariationParams, VariationRecord,
};

use crate::error::{Error, Result};
use crate::imgcore::{ImageBuf, ShadowMask};
use crate::maskgen::{
    perlin_field, sample_mask_source, silhouette_mask, MaskSource, PerlinSampler, PerlinSpec,
    SilhouetteCorpus, SilhouetteSampler, SilhouetteSpec,
};
use crate::rng::derive_seed;

/// Per-channel linear blend. Computed in f64 and rounded once, so the same
/// inputs always reproduce the same output bits.
pub fn blend(lit: &ImageBuf, shadow: &ImageBuf, mask: &ShadowMask) -> Result<ImageBuf> {
    lit.ensure_same_dims(shadow)?;
    lit.ensure_same_dims(mask.image())?;
    let data = lit
        .data()
        .iter()
        .zip(shadow.data())
        .zip(mask.data())
        .map(|((&l, &s), &m)| {
            let (l, s, m) = (f64::from(l), f64::from(s), f64::from(m));
            (l * (1.0 - m) + s * m) as f32
        })
        .collect();
    Ok(ImageBuf::from_raw(lit.width(), lit.height(), data))
}

/// Stages to skip.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct Ablation {
    pub no_sv: bool,
    pub no_ss: bool,
    pub no_color: bool,
}

impl Ablation {
    pub const FULL: Self = Self {
        no_sv: false,
        no_ss: false,
        no_color: false,
    };

    pub fn all() -> Self {
        Self {
            no_sv: true,
            no_ss: true,
            no_color: true,
        }
    }

    /// Short label: `full`, or the skipped stages joined by `+`.
    pub fn label(&self) -> String {
        let parts: Vec<&str> = [
            (self.no_sv, "no-sv"),
            (self.no_ss, "no-ss"),
            (self.no_color, "no-color"),
        ]
        .into_iter()
        .filter_map(|(on, name)| on.then_some(name))
        .collect();
        if parts.is_empty() {
            "full".to_owned()
        } else {
            parts.join("+")
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ForeignParams {
    pub shape_noise: PerlinSampler,
    pub silhouettes: SilhouetteSampler,
    pub ccm: CcmSampler,
    pub scatter: ScatterProfile,
    pub variation: VariationParams,
    /// Gain of the gray matrix used when color jitter is ablated.
    pub no_color_gain: f64,
}

impl Default for ForeignParams {
    fn default() -> Self {
        Self {
            shape_noise: PerlinSampler::shadow_shape(),
            silhouettes: SilhouetteSampler::default(),
            ccm: CcmSampler::default(),
            scatter: ScatterProfile::skin(),
            variation: VariationParams::default(),
            no_color_gain: 0.5,
        }
    }
}

impl ForeignParams {
    pub fn validate(&self) -> Result<()> {
        self.shape_noise.validate()?;
        self.ccm.validate()?;
        self.variation.validate()?;
        if !(0.0..=1.0).contains(&self.no_color_gain) {
            return Err(Error::param("no_color_gain", "must be in [0, 1]"));
        }
        Ok(())
    }
}

/// Everything needed to regenerate a sample from its lit image.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ForeignProvenance {
    pub seed: u64,
    pub ablation: Ablation,
    pub mask_source: MaskSource,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub perlin: Option<PerlinSpec>,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub silhouette: Option<SilhouetteSpec>,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub silhouette_name: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub scatter: Option<ScatterProfile>,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub spatial_variation: Option<VariationRecord>,
    pub color: ColorJitter,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ForeignSample {
    /// Composite with the foreign shadow.
    pub input: ImageBuf,
    pub lit: ImageBuf,
    /// Color-jittered copy of `lit`.
    pub shadow: ImageBuf,
    pub mask: ShadowMask,
    pub provenance: ForeignProvenance,
}

impl ForeignSample {
    /// Recomputes the composite from the stored components.
    pub fn reconstruct(&self) -> Result<ImageBuf> {
        let shadow = apply_ccm(&self.lit, &self.provenance.color);
        blend(&self.lit, &shadow, &self.mask)
    }
}

/// Runs the stages after mask sampling. `None` skips a stage.
pub fn compose(
    lit: &ImageBuf,
    mask_in: &ShadowMask,
    color: &ColorJitter,
    scatter: Option<&ScatterProfile>,
    variation: Option<&SpatialVariation>,
) -> Result<(ImageBuf, ImageBuf, ShadowMask)> {
    lit.ensure_same_dims(mask_in.image())?;
    let mut mask = match scatter {
        Some(p) => ss_blur(mask_in, p),
        None => mask_in.clone(),
    };
    if let Some(sv) = variation {
        mask = apply_spatial_variation(&mask, sv)?;
    }
    let shadow = apply_ccm(lit, color);
    let input = blend(lit, &shadow, &mask)?;
    Ok((input, shadow, mask))
}

/// Synthesizes one training triple from a shadow-free linear crop.
///
/// Each stage draws from its own substream of `seed`, so switching a stage
/// off leaves every other draw unchanged. Without a silhouette corpus all
/// masks come from Perlin noise.
pub fn synth_foreign(
    lit: &ImageBuf,
    silhouettes: Option<&SilhouetteCorpus>,
    seed: u64,
    params: &ForeignParams,
    ablation: Ablation,
) -> Result<ForeignSample> {
    params.validate()?;
    let (w, h) = lit.dims();
    let corpus = silhouettes.filter(|c| !c.is_empty());
    let mask_seed = derive_seed(seed, "mask");
    let drawn = sample_mask_source(derive_seed(seed, "mask-source"));
    let mask_source = if corpus.is_some() {
        drawn
    } else {
        MaskSource::Perlin
    };

    let mut provenance = ForeignProvenance {
        seed,
        ablation,
        mask_source,
        perlin: None,
        silhouette: None,
        silhouette_name: None,
        scatter: None,
        spatial_variation: None,
        color: ColorJitter::identity(),
    };

    let mask_in = match (mask_source, corpus) {
        (MaskSource::Silhouette, Some(corpus)) => {
            let spec = params.silhouettes.sample(mask_seed, corpus, w, h)?;
            provenance.silhouette_name = corpus.name(spec.silhouette_id).map(str::to_owned);
            provenance.silhouette = Some(spec);
            silhouette_mask(corpus, &spec, w, h)?
        }
        _ => {
            let spec = params.shape_noise.sample(mask_seed);
            provenance.perlin = Some(spec);
            perlin_field(&spec, w, h)?
        }
    };

    provenance.color = if ablation.no_color {
        ColorJitter::scaled(params.no_color_gain)
    } else {
        params.ccm.sample(derive_seed(seed, "ccm"))
    };
    let scatter = (!ablation.no_ss).then_some(&params.scatter);
    provenance.scatter = scatter.cloned();
    let variation = if ablation.no_sv {
        None
    } else {
        Some(
            params
                .variation
                .fields(derive_seed(seed, "spatial-variation"), w, h)?,
        )
    };
    provenance.spatial_variation = variation.as_ref().and_then(|v| v.record);

    let (input, shadow, mask) = compose(
        lit,
        &mask_in,
        &provenance.color,
        scatter,
        variation.as_ref(),
    )?;
    Ok(ForeignSample {
        input,
        lit: lit.clone(),
        shadow,
        mask,
        provenance,
    })
}
