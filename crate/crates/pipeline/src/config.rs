use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use shadowkit::maskgen::PerlinSampler;
use shadowkit::olat::{LightRig, PairSampler};
use shadowkit::shadowsynth::{
    Ablation, CcmSampler, ForeignParams, ScatterProfile, VariationParams,
};

use crate::error::{DataContext, PipelineError, Result};

/// Flat key/value run configuration, read from TOML.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct PipelineConfig {
    pub seed: u64,
    pub count: usize,
    pub output: PathBuf,
    /// Worker threads; all cores when unset.
    pub workers: Option<usize>,
    /// Maximum tolerated fraction of failed samples.
    pub failure_threshold: f64,

    pub faces: Option<PathBuf>,
    pub silhouettes: Option<PathBuf>,
    /// JSON map from face file name to its crop box.
    pub crops: Option<PathBuf>,
    pub rig: Option<PathBuf>,
    pub scans: Option<PathBuf>,
    /// Directory of `<scan>.json` landmark files. When unset each scan
    /// directory may carry its own `landmarks.json`.
    pub landmarks: Option<PathBuf>,

    pub no_sv: bool,
    pub no_ss: bool,
    pub no_color: bool,

    pub base_frequency: f64,
    pub mask_octaves: u32,
    pub mask_persistence: [f64; 2],
    pub sv_octaves: u32,
    pub sv_persistence: [f64; 2],
    pub sv_sigma: [f64; 2],
    pub sv_intensity_floor: f64,
    pub sv_stack_step: f64,
    pub scatter_red: Vec<f64>,
    pub scatter_green: Vec<f64>,
    pub scatter_blue: Vec<f64>,
    pub ccm_gain: [f64; 2],
    pub ccm_blue_tint: [f64; 2],
    pub ccm_perturbation: f64,
    pub no_color_gain: f64,

    pub p_key: [f64; 2],
    pub epsilon_ratio: f64,
    pub m_set: Vec<usize>,
    pub p_fill_ratio: f64,
    pub fill_neighborhood: usize,
    pub k_sigma: usize,
    /// Synthetic rig size, used when no rig file is given.
    pub rig_lights: usize,
    pub rig_inactive: usize,
}

impl Default for PipelineConfig {
    fn default() -> Self {
        let foreign = ForeignParams::default();
        let pairs = PairSampler::default();
        let lobes = |c: usize| {
            foreign
                .scatter
                .lobes(c)
                .iter()
                .map(|l| l.sigma)
                .collect::<Vec<_>>()
        };
        Self {
            seed: 0,
            count: 100,
            output: PathBuf::from("out"),
            workers: None,
            failure_threshold: 0.01,
            faces: None,
            silhouettes: None,
            crops: None,
            rig: None,
            scans: None,
            landmarks: None,
            no_sv: false,
            no_ss: false,
            no_color: false,
            base_frequency: foreign.shape_noise.base_frequency,
            mask_octaves: foreign.shape_noise.octaves,
            mask_persistence: foreign.shape_noise.persistence.into(),
            sv_octaves: foreign.variation.noise.octaves,
            sv_persistence: foreign.variation.noise.persistence.into(),
            sv_sigma: foreign.variation.sigma_range.into(),
            sv_intensity_floor: foreign.variation.intensity_floor,
            sv_stack_step: foreign.variation.stack_step,
            scatter_red: lobes(0),
            scatter_green: lobes(1),
            scatter_blue: lobes(2),
            ccm_gain: foreign.ccm.gain.into(),
            ccm_blue_tint: foreign.ccm.blue_tint.into(),
            ccm_perturbation: foreign.ccm.perturbation,
            no_color_gain: foreign.no_color_gain,
            p_key: pairs.p_key.into(),
            epsilon_ratio: pairs.epsilon_ratio,
            m_set: pairs.light_sizes,
            p_fill_ratio: pairs.p_fill_ratio,
            fill_neighborhood: pairs.fill_neighborhood,
            k_sigma: shadowkit::symmetry::DEFAULT_K_SIGMA,
            rig_lights: 304,
            rig_inactive: 20,
        }
    }
}

fn config_err(e: shadowkit::Error) -> PipelineError {
    PipelineError::Config(e.to_string())
}

fn require(path: &Option<PathBuf>, key: &str) -> Result<PathBuf> {
    let p = path
        .clone()
        .ok_or_else(|| PipelineError::Config(format!("`{key}` is required for this command")))?;
    if !p.exists() {
        return Err(PipelineError::MissingPath(p));
    }
    Ok(p)
}

impl PipelineConfig {
    pub fn from_toml(text: &str) -> Result<Self> {
        toml::from_str(text).map_err(|e| PipelineError::Config(e.to_string()))
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|_| PipelineError::MissingPath(path.to_owned()))?;
        Self::from_toml(&text)
    }

    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("config serializes")
    }

    pub fn ablation(&self) -> Ablation {
        Ablation {
            no_sv: self.no_sv,
            no_ss: self.no_ss,
            no_color: self.no_color,
        }
    }

    pub fn foreign_params(&self) -> Result<ForeignParams> {
        let scatter =
            ScatterProfile::uniform([&self.scatter_red, &self.scatter_green, &self.scatter_blue])
                .map_err(config_err)?;
        let params = ForeignParams {
            shape_noise: PerlinSampler {
                octaves: self.mask_octaves,
                persistence: self.mask_persistence.into(),
                initial_amplitude: 1.0,
                base_frequency: self.base_frequency,
            },
            silhouettes: Default::default(),
            ccm: CcmSampler {
                gain: self.ccm_gain.into(),
                blue_tint: self.ccm_blue_tint.into(),
                perturbation: self.ccm_perturbation,
            },
            scatter,
            variation: VariationParams {
                noise: PerlinSampler {
                    octaves: self.sv_octaves,
                    persistence: self.sv_persistence.into(),
                    initial_amplitude: 1.0,
                    base_frequency: self.base_frequency,
                },
                sigma_range: self.sv_sigma.into(),
                intensity_floor: self.sv_intensity_floor,
                stack_step: self.sv_stack_step,
            },
            no_color_gain: self.no_color_gain,
        };
        params.validate().map_err(config_err)?;
        Ok(params)
    }

    pub fn pair_sampler(&self) -> Result<PairSampler> {
        let sampler = PairSampler {
            p_key: self.p_key.into(),
            epsilon_ratio: self.epsilon_ratio,
            p_fill_ratio: self.p_fill_ratio,
            light_sizes: self.m_set.clone(),
            fill_neighborhood: self.fill_neighborhood,
        };
        sampler.validate().map_err(config_err)?;
        Ok(sampler)
    }

    /// The rig file if one is configured, else the synthetic sphere.
    pub fn light_rig(&self) -> Result<LightRig> {
        match &self.rig {
            Some(path) => {
                if !path.exists() {
                    return Err(PipelineError::MissingPath(path.clone()));
                }
                LightRig::load(path).context(|| format!("loading rig {}", path.display()))
            }
            None => LightRig::spherical(self.rig_lights, self.rig_inactive).map_err(config_err),
        }
    }

    fn validate_common(&self) -> Result<()> {
        if self.count == 0 {
            return Err(PipelineError::Config("`count` must be at least 1".into()));
        }
        if !(0.0..=1.0).contains(&self.failure_threshold) {
            return Err(PipelineError::Config(
                "`failure_threshold` must be in [0, 1]".into(),
            ));
        }
        if self.workers == Some(0) {
            return Err(PipelineError::Config("`workers` must be at least 1".into()));
        }
        if self.k_sigma == 0 {
            return Err(PipelineError::Config("`k_sigma` must be at least 1".into()));
        }
        Ok(())
    }

    /// Checks everything the foreign-shadow generator needs.
    pub fn validate_foreign(&self) -> Result<()> {
        self.validate_common()?;
        require(&self.faces, "faces")?;
        if self.silhouettes.is_some() {
            require(&self.silhouettes, "silhouettes")?;
        }
        if self.crops.is_some() {
            require(&self.crops, "crops")?;
        }
        self.foreign_params().map(drop)
    }

    /// Checks everything the facial-pair generator needs.
    pub fn validate_facial(&self) -> Result<()> {
        self.validate_common()?;
        require(&self.scans, "scans")?;
        if self.landmarks.is_some() {
            require(&self.landmarks, "landmarks")?;
        }
        if self.rig.is_some() {
            require(&self.rig, "rig")?;
        }
        self.pair_sampler().map(drop)
    }

    pub fn thread_pool(&self) -> Result<rayon::ThreadPool> {
        let mut builder = rayon::ThreadPoolBuilder::new();
        if let Some(n) = self.workers {
            builder = builder.num_threads(n);
        }
        builder
            .build()
            .map_err(|e| PipelineError::Config(format!("worker pool: {e}")))
    }
}
