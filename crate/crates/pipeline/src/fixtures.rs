use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use shadowkit::imgcore::io::{self, BitDepth};
use shadowkit::olat::{LightRig, SyntheticHead};
use shadowkit::synthetic::{silhouette_blob, synthetic_face};
use shadowkit::{rng, FaceCrop};

use crate::config::PipelineConfig;
use crate::error::{DataContext, Result};
use crate::facial::SCAN_LANDMARKS;
use crate::foreign::CURATION_FILE;
use crate::output::{create_dir, write_atomic};

/// Shape of a synthetic desk-scale corpus.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FixtureSpec {
    pub seed: u64,
    pub faces: usize,
    pub face_size: usize,
    pub silhouettes: usize,
    pub silhouette_size: usize,
    pub scans: usize,
    pub scan_size: usize,
    pub rig_lights: usize,
    pub rig_inactive: usize,
}

impl Default for FixtureSpec {
    fn default() -> Self {
        Self {
            seed: 0,
            faces: 8,
            face_size: 320,
            silhouettes: 6,
            silhouette_size: 128,
            scans: 2,
            scan_size: 64,
            rig_lights: 304,
            rig_inactive: 20,
        }
    }
}

#[derive(Serialize)]
struct Curation<'a> {
    shadow_free: &'a [String],
}

/// Writes `faces/`, `silhouettes/`, `crops.json`, `rig.json`, `scans/` and
/// a `config.toml` pointing at them under `root`. Every face but one is
/// listed as shadow-free; the extra one carries a painted shadow.
pub fn write_fixtures(root: &Path, spec: &FixtureSpec) -> Result<PipelineConfig> {
    let faces_dir = root.join("faces");
    let sil_dir = root.join("silhouettes");
    let scans_dir = root.join("scans");
    for d in [&faces_dir, &sil_dir, &scans_dir] {
        create_dir(d)?;
    }

    let mut names = Vec::with_capacity(spec.faces);
    let mut crops = BTreeMap::new();
    let n = spec.face_size as f64;
    for i in 0..spec.faces {
        let name = format!("face_{i:03}.png");
        let img = synthetic_face(rng::derive_seed(spec.seed, &name), spec.face_size);
        io::save_png(&img, faces_dir.join(&name), BitDepth::Sixteen)
            .context(|| format!("writing {name}"))?;
        if i % 2 == 0 {
            crops.insert(
                name.clone(),
                FaceCrop {
                    x: (0.1 * n).round(),
                    y: (0.08 * n).round(),
                    w: (0.8 * n).round(),
                    h: (0.8 * n).round(),
                },
            );
        }
        names.push(name);
    }
    let shadowed = synthetic_face(rng::derive_seed(spec.seed, "shadowed"), spec.face_size);
    let half = spec.face_size / 2;
    let shadowed = shadowkit::ImageBuf::from_fn(spec.face_size, spec.face_size, |x, y| {
        let p = shadowed.pixel(x, y);
        if x < half {
            p.map(|v| v * 0.3)
        } else {
            p
        }
    })
    .context(|| "painting shadow".into())?;
    io::save_png(
        &shadowed,
        faces_dir.join("zz_shadowed.png"),
        BitDepth::Sixteen,
    )
    .context(|| "writing zz_shadowed.png".into())?;
    let curation = serde_json::to_vec_pretty(&Curation {
        shadow_free: &names,
    })
    .expect("serializes");
    write_atomic(&faces_dir.join(CURATION_FILE), &curation)?;
    let crops_path = root.join("crops.json");
    write_atomic(
        &crops_path,
        &serde_json::to_vec_pretty(&crops).expect("serializes"),
    )?;

    for i in 0..spec.silhouettes {
        let sil = silhouette_blob(
            rng::derive_seed(spec.seed, &format!("sil{i}")),
            spec.silhouette_size,
        );
        io::save_png(
            &sil.to_image(),
            sil_dir.join(format!("sil_{i:03}.png")),
            BitDepth::Eight,
        )
        .context(|| format!("writing silhouette {i}"))?;
    }

    let rig = LightRig::spherical(spec.rig_lights, spec.rig_inactive)
        .context(|| "building rig".into())?;
    let rig_path = root.join("rig.json");
    rig.save(&rig_path).context(|| "writing rig".into())?;
    for i in 0..spec.scans {
        let name = format!("head_{i:03}");
        let tint = i as f64 / spec.scans.max(1) as f64;
        let head = SyntheticHead {
            albedo: [0.75 - 0.2 * tint, 0.55 - 0.15 * tint, 0.45 - 0.1 * tint],
            nose_height: 0.3 + 0.1 * tint,
            ..SyntheticHead::with_size(spec.scan_size)
        };
        let dir = scans_dir.join(&name);
        head.render(&rig, &name)
            .and_then(|scan| scan.save_dir(&dir))
            .context(|| format!("writing scan {name}"))?;
        write_atomic(
            &dir.join(SCAN_LANDMARKS),
            head.landmarks().to_json().as_bytes(),
        )?;
    }

    let config = PipelineConfig {
        seed: spec.seed,
        output: root.join("out"),
        faces: Some(faces_dir),
        silhouettes: Some(sil_dir),
        crops: Some(crops_path),
        rig: Some(rig_path),
        scans: Some(scans_dir),
        rig_lights: spec.rig_lights,
        rig_inactive: spec.rig_inactive,
        ..PipelineConfig::default()
    };
    write_atomic(&root.join("config.toml"), config.to_toml().as_bytes())?;
    Ok(config)
}

pub fn config_path(root: &Path) -> PathBuf {
    root.join("config.toml")
}
