use std::collections::BTreeMap;
use std::path::{Path, PathBuf};
use std::sync::{Arc, Mutex};

use rayon::prelude::*;
use shadowkit::imgcore::io::{self, BitDepth};
use shadowkit::symmetry::{apply_warp, warp_field, WarpField};
use shadowkit::LandmarkSet;

use crate::batch::RunSummary;
use crate::config::PipelineConfig;
use crate::error::{DataContext, PipelineError, Result};
use crate::facial;
use crate::manifest::{read_jsonl, write_jsonl, write_skips, Record, Skip, VERSION};
use crate::output::sha256_hex;

pub const MANIFEST: &str = "mirrors.jsonl";
pub const SKIPS: &str = "mirrors.skipped.jsonl";
pub const MIRROR_FILE: &str = "harsh_mirror.png";

/// A value computed once per key, or the reason it could not be.
type Cached<T> = Arc<std::result::Result<T, String>>;

struct Landmarks {
    set: LandmarkSet,
    sha256: String,
}

/// Landmark files are read and validated once, however many pairs share them.
fn load_landmarks(path: &Path) -> std::result::Result<Landmarks, String> {
    let bytes = std::fs::read(path)
        .map_err(|e| format!("cannot read landmarks {}: {e}", path.display()))?;
    let text = std::str::from_utf8(&bytes)
        .map_err(|_| format!("landmarks {} are not UTF-8", path.display()))?;
    let set = LandmarkSet::from_json(text)
        .map_err(|e| format!("invalid landmarks {}: {e}", path.display()))?;
    set.check_involution().map_err(|e| {
        format!(
            "landmarks {} fail the mirror involution check: {e}",
            path.display()
        )
    })?;
    Ok(Landmarks {
        set,
        sha256: sha256_hex(&bytes),
    })
}

/// Writes the mirrored companion of every harsh input listed in
/// `facial.jsonl`. Pairs without usable landmarks are skipped with a reason.
pub fn gen_mirrors(config: &PipelineConfig) -> Result<RunSummary> {
    let root = config.output.clone();
    let lm_root: PathBuf = facial::landmark_root(config)
        .ok_or_else(|| {
            PipelineError::Config("`landmarks` or `scans` is required to locate landmarks".into())
        })?
        .to_owned();
    let facial_manifest = root.join(facial::MANIFEST);
    if !facial_manifest.is_file() {
        return Err(PipelineError::MissingPath(facial_manifest));
    }
    let rows: Vec<Record> = read_jsonl(&facial_manifest)?;
    let pool = config.thread_pool()?;

    let mut files: BTreeMap<String, std::result::Result<Landmarks, String>> = BTreeMap::new();
    for row in &rows {
        if let Record::Facial {
            landmarks: Some(lm),
            ..
        } = row
        {
            files
                .entry(lm.clone())
                .or_insert_with(|| load_landmarks(&lm_root.join(lm)));
        }
    }
    // Warp fields depend on landmarks and frame size only.
    let fields: Mutex<BTreeMap<(String, usize, usize), Cached<WarpField>>> = Default::default();
    let field_for = |lm: &str, set: &LandmarkSet, w: usize, h: usize| {
        let key = (lm.to_owned(), w, h);
        if let Some(f) = fields.lock().expect("cache lock").get(&key) {
            return f.clone();
        }
        let f = Arc::new(
            warp_field(w, h, set, config.k_sigma)
                .map_err(|e| format!("cannot build warp for {lm}: {e}")),
        );
        fields
            .lock()
            .expect("cache lock")
            .entry(key)
            .or_insert(f)
            .clone()
    };

    let results: Vec<(usize, std::result::Result<Record, String>)> = pool.install(|| {
        rows.par_iter()
            .map(|row| {
                let Record::Facial {
                    id,
                    landmarks,
                    files: pair,
                    ..
                } = row
                else {
                    return (
                        row.id(),
                        Err(format!("{} is not a facial record", row.id())),
                    );
                };
                let out = (|| {
                    let lm = landmarks.as_deref().ok_or("no landmarks for this scan")?;
                    let loaded = files[lm].as_ref().map_err(String::clone)?;
                    let harsh = io::load_png(root.join(&pair.harsh))
                        .map_err(|e| format!("cannot read {}: {e}", pair.harsh))?;
                    loaded
                        .set
                        .check_bounds(harsh.width(), harsh.height())
                        .map_err(|e| format!("landmarks {lm} do not fit the image: {e}"))?;
                    let field = field_for(lm, &loaded.set, harsh.width(), harsh.height());
                    let field = field.as_ref().as_ref().map_err(String::clone)?;
                    let mirrored = apply_warp(&harsh, field).map_err(|e| e.to_string())?;
                    let rel = Path::new(&pair.harsh).with_file_name(MIRROR_FILE);
                    let rel = rel.to_string_lossy().replace('\\', "/");
                    let tmp = root.join(format!("{rel}.tmp.png"));
                    io::save_png(&mirrored, &tmp, BitDepth::Sixteen).map_err(|e| e.to_string())?;
                    std::fs::rename(&tmp, root.join(&rel)).map_err(|e| e.to_string())?;
                    Ok(Record::Mirror {
                        id: *id,
                        image: pair.harsh.clone(),
                        mirror: rel,
                        landmarks: lm.to_owned(),
                        landmarks_sha256: loaded.sha256.clone(),
                        k_sigma: config.k_sigma,
                        version: VERSION.to_owned(),
                    })
                })();
                (*id, out)
            })
            .collect()
    });

    let mut records = Vec::new();
    let mut skips = Vec::new();
    for ((id, result), row) in results.into_iter().zip(&rows) {
        match result {
            Ok(r) => records.push(r),
            Err(reason) => {
                log::warn!("mirror {id} skipped: {reason}");
                if let Record::Facial { files, .. } = row {
                    let stale = root.join(Path::new(&files.harsh).with_file_name(MIRROR_FILE));
                    if stale.exists() {
                        std::fs::remove_file(&stale).map_err(|e| PipelineError::io(&stale, e))?;
                    }
                }
                skips.push(Skip { id, reason });
            }
        }
    }
    let manifest = root.join(MANIFEST);
    write_jsonl(&manifest, &records)?;
    write_skips(&root.join(SKIPS), &skips)?;
    log::info!(
        "mirrors: {} written, {} skipped",
        records.len(),
        skips.len()
    );
    Ok(RunSummary {
        manifest,
        written: records.len(),
        skipped: skips,
    })
}

/// Mirrors a single image; returns the warp and, on request, the
/// asymmetry map `|I - Ī|`.
pub fn mirror_one(
    image: &Path,
    landmarks: &Path,
    out: &Path,
    diff: Option<&Path>,
    k_sigma: usize,
) -> Result<()> {
    let img = io::load_image(image).context(|| format!("loading {}", image.display()))?;
    let loaded = load_landmarks(landmarks).map_err(PipelineError::Input)?;
    let field = warp_field(img.width(), img.height(), &loaded.set, k_sigma)
        .context(|| "building warp".into())?;
    let mirrored = apply_warp(&img, &field).context(|| "warping".into())?;
    save_any(&mirrored, out)?;
    if let Some(path) = diff {
        let d = shadowkit::symmetry::asymmetry(&img, &mirrored).context(|| "asymmetry".into())?;
        save_any(&d, path)?;
    }
    Ok(())
}

/// Saves by extension: `.pfm` losslessly, anything else as 16-bit PNG.
pub fn save_any(img: &shadowkit::ImageBuf, path: &Path) -> Result<()> {
    let pfm = path
        .extension()
        .is_some_and(|e| e.eq_ignore_ascii_case("pfm"));
    let tmp = path.with_extension(if pfm { "tmp.pfm" } else { "tmp.png" });
    if pfm {
        io::save_pfm(img, &tmp)
    } else {
        io::save_png(img, &tmp, BitDepth::Sixteen)
    }
    .context(|| format!("writing {}", path.display()))?;
    std::fs::rename(&tmp, path).map_err(|e| PipelineError::io(path, e))
}
