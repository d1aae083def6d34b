use std::collections::BTreeSet;
use std::path::{Path, PathBuf};

use rayon::prelude::*;

use crate::error::{PipelineError, Result};
use crate::manifest::{write_jsonl, write_skips, Record, Skip};
use crate::output::prune_samples;

#[derive(Debug, Clone, PartialEq)]
pub struct RunSummary {
    pub manifest: PathBuf,
    pub written: usize,
    pub skipped: Vec<Skip>,
}

/// Runs `job` for every sample id on `pool`, isolating failures. Results
/// come back in id order whatever order the workers finish in.
pub(crate) fn run_samples(
    pool: &rayon::ThreadPool,
    count: usize,
    job: impl Fn(usize) -> Result<Record> + Sync,
) -> (Vec<Record>, Vec<Skip>) {
    let results: Vec<Result<Record>> =
        pool.install(|| (0..count).into_par_iter().map(&job).collect());
    let mut records = Vec::with_capacity(count);
    let mut skips = Vec::new();
    for (id, r) in results.into_iter().enumerate() {
        match r {
            Ok(rec) => records.push(rec),
            Err(e) => {
                log::warn!("sample {id} skipped: {e}");
                skips.push(Skip {
                    id,
                    reason: e.to_string(),
                });
            }
        }
    }
    (records, skips)
}

/// Writes the manifest and skip list, removes stale sample directories and
/// applies the failure threshold.
pub(crate) fn finish(
    root: &Path,
    samples_dir: &Path,
    manifest_name: &str,
    records: Vec<Record>,
    skips: Vec<Skip>,
    threshold: f64,
) -> Result<RunSummary> {
    let keep: BTreeSet<usize> = records.iter().map(Record::id).collect();
    prune_samples(samples_dir, &keep)?;
    let manifest = root.join(manifest_name);
    write_jsonl(&manifest, &records)?;
    let skip_path = root.join(manifest_name.replace(".jsonl", ".skipped.jsonl"));
    write_skips(&skip_path, &skips)?;
    let total = records.len() + skips.len();
    log::info!(
        "{}: {} written, {} skipped",
        manifest.display(),
        records.len(),
        skips.len()
    );
    if skips.len() as f64 > threshold * total as f64 {
        return Err(PipelineError::FailureRate {
            failed: skips.len(),
            total,
            threshold,
        });
    }
    Ok(RunSummary {
        manifest,
        written: records.len(),
        skipped: skips,
    })
}
