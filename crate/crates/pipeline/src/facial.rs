use std::path::{Path, PathBuf};

use shadowkit::imgcore::io::{self, BitDepth};
use shadowkit::olat::{LightRig, OlatScan};
use shadowkit::rng;

use crate::batch::{finish, run_samples, RunSummary};
use crate::config::PipelineConfig;
use crate::error::{DataContext, PipelineError, Result};
use crate::manifest::{FacialFiles, Record, VERSION};
use crate::output::{create_dir, relative, sample_dir_name, write_sample_dir};

pub const SCAN_LANDMARKS: &str = "landmarks.json";
pub const MANIFEST: &str = "facial.jsonl";

pub struct ScanEntry {
    pub name: String,
    pub scan: OlatScan,
    /// Landmark file relative to the landmark root.
    pub landmarks: Option<String>,
}

/// Where landmark paths in facial records are resolved from.
pub fn landmark_root(config: &PipelineConfig) -> Option<&Path> {
    config.landmarks.as_deref().or(config.scans.as_deref())
}

/// Every scan subdirectory of `dir`, by name, checked against `rig`.
/// Landmarks come from `landmarks/<scan>.json` when a landmark directory is
/// given, else from `<scan>/landmarks.json`.
pub fn load_scans(dir: &Path, rig: &LightRig, landmarks: Option<&Path>) -> Result<Vec<ScanEntry>> {
    let mut subdirs: Vec<PathBuf> = std::fs::read_dir(dir)
        .map_err(|e| PipelineError::io(dir, e))?
        .filter_map(|e| e.ok())
        .map(|e| e.path())
        .filter(|p| p.join("index.json").is_file())
        .collect();
    subdirs.sort();
    if subdirs.is_empty() {
        return Err(PipelineError::Input(format!(
            "no scans under {}",
            dir.display()
        )));
    }
    subdirs
        .into_iter()
        .map(|path| {
            let name = path
                .file_name()
                .expect("subdir")
                .to_string_lossy()
                .into_owned();
            let scan = OlatScan::load_dir(&path).context(|| format!("loading scan {name}"))?;
            scan.check_rig(rig)
                .context(|| format!("scan {name} does not match the rig"))?;
            let landmarks = match landmarks {
                Some(root) => root
                    .join(format!("{name}.json"))
                    .is_file()
                    .then(|| format!("{name}.json")),
                None => path
                    .join(SCAN_LANDMARKS)
                    .is_file()
                    .then(|| format!("{name}/{SCAN_LANDMARKS}")),
            };
            Ok(ScanEntry {
                name,
                scan,
                landmarks,
            })
        })
        .collect()
}

/// Renders harsh/soft pairs and writes `pairs/<id>/{harsh.png, soft.png}`
/// plus `facial.jsonl`.
pub fn gen_facial(config: &PipelineConfig) -> Result<RunSummary> {
    config.validate_facial()?;
    let sampler = config.pair_sampler()?;
    let rig = config.light_rig()?;
    let scans = load_scans(
        config.scans.as_deref().expect("validated"),
        &rig,
        config.landmarks.as_deref(),
    )?;
    let root = config.output.clone();
    let pairs = root.join("pairs");
    create_dir(&pairs)?;
    let pool = config.thread_pool()?;
    log::info!("facial: {} pairs from {} scans", config.count, scans.len());

    let (records, skips) = run_samples(&pool, config.count, |id| {
        let seed = rng::sample_seed(config.seed, id as u64);
        let entry = &scans[id % scans.len()];
        let pair = sampler
            .make_pair(&entry.scan, &rig, seed)
            .context(|| format!("rendering pair {id}"))?;
        write_sample_dir(&pairs, id, |dir| {
            io::save_png(&pair.harsh, dir.join("harsh.png"), BitDepth::Sixteen)
                .context(|| "writing harsh".into())?;
            io::save_png(&pair.soft, dir.join("soft.png"), BitDepth::Sixteen)
                .context(|| "writing soft".into())?;
            Ok(())
        })?;
        let rel = |file: &str| relative(&root, &pairs.join(sample_dir_name(id)).join(file));
        Ok(Record::Facial {
            id,
            seed,
            scan: entry.name.clone(),
            landmarks: entry.landmarks.clone(),
            files: FacialFiles {
                harsh: rel("harsh.png"),
                soft: rel("soft.png"),
            },
            spec: pair.record,
            version: VERSION.to_owned(),
        })
    });
    finish(
        &root,
        &pairs,
        MANIFEST,
        records,
        skips,
        config.failure_threshold,
    )
}
