use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use serde::Deserialize;
use shadowkit::imgcore::io::{self, BitDepth};
use shadowkit::imgcore::{resize_crop_face, FaceCrop};
use shadowkit::maskgen::SilhouetteCorpus;
use shadowkit::shadowsynth::synth_foreign;
use shadowkit::{rng, ImageBuf};

use crate::batch::{finish, run_samples, RunSummary};
use crate::config::PipelineConfig;
use crate::error::{DataContext, PipelineError, Result};
use crate::manifest::{ForeignFiles, Record, VERSION};
use crate::output::{create_dir, relative, sample_dir_name, write_sample_dir};

pub const CURATION_FILE: &str = "curation.json";
pub const MANIFEST: &str = "manifest.jsonl";

#[derive(Deserialize)]
struct Curation {
    shadow_free: Vec<String>,
}

/// Shadow-free face images available for compositing.
#[derive(Debug, Clone)]
pub struct FaceCorpus {
    dir: PathBuf,
    names: Vec<String>,
    crops: BTreeMap<String, FaceCrop>,
}

fn is_image(name: &str) -> bool {
    let lower = name.to_ascii_lowercase();
    lower.ends_with(".png") || lower.ends_with(".pfm")
}

impl FaceCorpus {
    /// Lists images in `dir` by name. When the directory carries a
    /// curation file only the faces it certifies as shadow-free are used.
    pub fn load(dir: &Path, crops: Option<&Path>) -> Result<Self> {
        let mut names: Vec<String> = std::fs::read_dir(dir)
            .map_err(|e| PipelineError::io(dir, e))?
            .filter_map(|e| e.ok())
            .filter(|e| e.path().is_file())
            .map(|e| e.file_name().to_string_lossy().into_owned())
            .filter(|n| is_image(n))
            .collect();
        names.sort();
        let curation = dir.join(CURATION_FILE);
        if curation.exists() {
            let text =
                std::fs::read_to_string(&curation).map_err(|e| PipelineError::io(&curation, e))?;
            let cur: Curation = serde_json::from_str(&text)
                .map_err(|e| PipelineError::Input(format!("{}: {e}", curation.display())))?;
            if let Some(missing) = cur
                .shadow_free
                .iter()
                .find(|n| names.binary_search(n).is_err())
            {
                return Err(PipelineError::Input(format!(
                    "{} lists {missing}, which is not in the corpus",
                    curation.display()
                )));
            }
            let certified: std::collections::BTreeSet<&String> = cur.shadow_free.iter().collect();
            names.retain(|n| certified.contains(n));
        }
        if names.is_empty() {
            return Err(PipelineError::Input(format!(
                "no usable face images in {}",
                dir.display()
            )));
        }
        let crops = match crops {
            Some(path) => {
                let text = std::fs::read_to_string(path).map_err(|e| PipelineError::io(path, e))?;
                serde_json::from_str(&text)
                    .map_err(|e| PipelineError::Input(format!("{}: {e}", path.display())))?
            }
            None => BTreeMap::new(),
        };
        Ok(Self {
            dir: dir.to_owned(),
            names,
            crops,
        })
    }

    pub fn len(&self) -> usize {
        self.names.len()
    }

    pub fn is_empty(&self) -> bool {
        self.names.is_empty()
    }

    pub fn name(&self, i: usize) -> &str {
        &self.names[i]
    }

    /// The 256×256 linear crop of face `i`. Faces without a listed crop
    /// use the largest centered square.
    pub fn crop(&self, i: usize) -> Result<ImageBuf> {
        let name = &self.names[i];
        let img = io::load_image(self.dir.join(name)).context(|| format!("loading face {name}"))?;
        let crop = self
            .crops
            .get(name)
            .copied()
            .unwrap_or_else(|| FaceCrop::centered_square(img.width(), img.height()));
        resize_crop_face(&img, &crop).context(|| format!("cropping face {name}"))
    }
}

/// Composites foreign shadows onto the face corpus and writes
/// `samples/<id>/{composite.png, lit.png, mask.pfm}` plus `manifest.jsonl`.
pub fn gen_foreign(config: &PipelineConfig) -> Result<RunSummary> {
    config.validate_foreign()?;
    let params = config.foreign_params()?;
    let ablation = config.ablation();
    let faces = FaceCorpus::load(
        config.faces.as_deref().expect("validated"),
        config.crops.as_deref(),
    )?;
    let silhouettes = match &config.silhouettes {
        Some(dir) => {
            let corpus = SilhouetteCorpus::load_dir(dir)
                .context(|| format!("loading silhouettes from {}", dir.display()))?;
            if corpus.is_empty() {
                return Err(PipelineError::Input(format!(
                    "no silhouettes in {}",
                    dir.display()
                )));
            }
            Some(corpus)
        }
        None => None,
    };
    let root = config.output.clone();
    let samples = root.join("samples");
    create_dir(&samples)?;
    let pool = config.thread_pool()?;
    log::info!(
        "foreign: {} samples from {} faces ({})",
        config.count,
        faces.len(),
        ablation.label()
    );

    let (records, skips) = run_samples(&pool, config.count, |id| {
        let seed = rng::sample_seed(config.seed, id as u64);
        let face = id % faces.len();
        let lit = faces.crop(face)?;
        let sample = synth_foreign(&lit, silhouettes.as_ref(), seed, &params, ablation)
            .context(|| format!("synthesizing sample {id}"))?;
        write_sample_dir(&samples, id, |dir| {
            io::save_png(&sample.input, dir.join("composite.png"), BitDepth::Sixteen)
                .context(|| "writing composite".into())?;
            io::save_png(&sample.lit, dir.join("lit.png"), BitDepth::Sixteen)
                .context(|| "writing lit".into())?;
            io::save_mask(&sample.mask, dir.join("mask.pfm")).context(|| "writing mask".into())?;
            Ok(())
        })?;
        let rel = |file: &str| relative(&root, &samples.join(sample_dir_name(id)).join(file));
        Ok(Record::Foreign {
            id,
            seed,
            face: faces.name(face).to_owned(),
            files: ForeignFiles {
                composite: rel("composite.png"),
                lit: rel("lit.png"),
                mask: rel("mask.pfm"),
            },
            spec: sample.provenance,
            version: VERSION.to_owned(),
        })
    });
    finish(
        &root,
        &samples,
        MANIFEST,
        records,
        skips,
        config.failure_threshold,
    )
}
