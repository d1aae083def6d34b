use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use shadowkit::evalkit::{evaluate, MetricSet};
use shadowkit::imgcore::io;

use crate::error::{DataContext, PipelineError, Result};

/// Images keyed by sample id. `DIR` uses the file stems in `DIR`;
/// `DIR:FILE` uses the subdirectories of `DIR` that contain `FILE`.
#[derive(Debug, Clone, PartialEq)]
pub struct ImageSet {
    pub spec: String,
    pub paths: BTreeMap<String, PathBuf>,
}

fn is_image(p: &Path) -> bool {
    p.extension()
        .and_then(|e| e.to_str())
        .is_some_and(|e| e.eq_ignore_ascii_case("png") || e.eq_ignore_ascii_case("pfm"))
}

impl ImageSet {
    pub fn parse(spec: &str) -> Result<Self> {
        let (dir, file) = match spec.rsplit_once(':') {
            Some((d, f)) if !d.is_empty() && !f.contains('/') => (PathBuf::from(d), Some(f)),
            _ => (PathBuf::from(spec), None),
        };
        if !dir.is_dir() {
            return Err(PipelineError::MissingPath(dir));
        }
        let entries = std::fs::read_dir(&dir).map_err(|e| PipelineError::io(&dir, e))?;
        let mut paths = BTreeMap::new();
        for entry in entries {
            let path = entry.map_err(|e| PipelineError::io(&dir, e))?.path();
            match file {
                Some(f) if path.join(f).is_file() => {
                    let id = path
                        .file_name()
                        .expect("entry")
                        .to_string_lossy()
                        .into_owned();
                    paths.insert(id, path.join(f));
                }
                None if path.is_file() && is_image(&path) => {
                    let id = path
                        .file_stem()
                        .expect("file")
                        .to_string_lossy()
                        .into_owned();
                    if let Some(prev) = paths.insert(id.clone(), path.clone()) {
                        return Err(PipelineError::Input(format!(
                            "id {id} appears twice: {} and {}",
                            prev.display(),
                            path.display()
                        )));
                    }
                }
                _ => {}
            }
        }
        if paths.is_empty() {
            return Err(PipelineError::Input(format!("no images in {spec}")));
        }
        Ok(Self {
            spec: spec.to_owned(),
            paths,
        })
    }

    pub fn len(&self) -> usize {
        self.paths.len()
    }

    pub fn is_empty(&self) -> bool {
        self.paths.is_empty()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MetricsSummary {
    pub count: usize,
    pub mean: MetricSet,
    pub per_image: BTreeMap<String, MetricSet>,
}

fn check_ids(pred: &ImageSet, truth: &ImageSet) -> Result<()> {
    if let Some(id) = truth.paths.keys().find(|k| !pred.paths.contains_key(*k)) {
        return Err(PipelineError::Input(format!(
            "id {id} is missing from {}",
            pred.spec
        )));
    }
    if let Some(id) = pred.paths.keys().find(|k| !truth.paths.contains_key(*k)) {
        return Err(PipelineError::Input(format!(
            "id {id} is missing from {}",
            truth.spec
        )));
    }
    Ok(())
}

/// Scores every prediction against the ground truth with the same id.
pub fn metrics(pred: &ImageSet, truth: &ImageSet) -> Result<MetricsSummary> {
    check_ids(pred, truth)?;
    let scored: Vec<(String, MetricSet)> = truth
        .paths
        .par_iter()
        .map(|(id, t)| {
            let p = &pred.paths[id];
            let a = io::load_image(p).context(|| format!("loading {}", p.display()))?;
            let b = io::load_image(t).context(|| format!("loading {}", t.display()))?;
            let m = evaluate(&a, &b).context(|| format!("scoring id {id}"))?;
            Ok((id.clone(), m))
        })
        .collect::<Result<_>>()?;
    let n = scored.len() as f64;
    let mean = MetricSet {
        psnr: scored.iter().map(|s| s.1.psnr).sum::<f64>() / n,
        ssim: scored.iter().map(|s| s.1.ssim).sum::<f64>() / n,
        l1: scored.iter().map(|s| s.1.l1).sum::<f64>() / n,
    };
    Ok(MetricsSummary {
        count: scored.len(),
        mean,
        per_image: scored.into_iter().collect(),
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReportRow {
    pub variant: String,
    pub count: usize,
    pub psnr: f64,
    pub ssim: f64,
    pub l1: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReportTable {
    pub truth: String,
    pub rows: Vec<ReportRow>,
}

impl ReportTable {
    pub fn to_text(&self) -> String {
        let width = self
            .rows
            .iter()
            .map(|r| r.variant.len())
            .chain(["variant".len()])
            .max()
            .unwrap_or(7);
        let mut out = format!(
            "{:<width$}  {:>5}  {:>8}  {:>6}  {:>8}\n",
            "variant", "n", "PSNR", "SSIM", "L1"
        );
        for r in &self.rows {
            let _ = writeln!(
                out,
                "{:<width$}  {:>5}  {:>8.3}  {:>6.4}  {:>8.5}",
                r.variant, r.count, r.psnr, r.ssim, r.l1
            );
        }
        out
    }
}

/// One row of mean metrics per named prediction set.
pub fn report(truth: &ImageSet, variants: &[(String, ImageSet)]) -> Result<ReportTable> {
    if variants.is_empty() {
        return Err(PipelineError::Config(
            "report needs at least one variant".into(),
        ));
    }
    let rows = variants
        .iter()
        .map(|(name, set)| {
            let s = metrics(set, truth)?;
            Ok(ReportRow {
                variant: name.clone(),
                count: s.count,
                psnr: s.mean.psnr,
                ssim: s.mean.ssim,
                l1: s.mean.l1,
            })
        })
        .collect::<Result<_>>()?;
    Ok(ReportTable {
        truth: truth.spec.clone(),
        rows,
    })
}
