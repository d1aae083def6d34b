use std::path::Path;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::rig::LightRig;
use super::weights::WeightVector;
use crate::error::{Error, Result};
use crate::imgcore::{io, ImageBuf};

/// One image per captured light.
#[derive(Debug, Clone, PartialEq)]
pub struct OlatScan {
    subject: String,
    /// Rig index of each image.
    light_ids: Vec<usize>,
    images: Vec<ImageBuf>,
    /// Size of the rig the ids refer to.
    light_count: usize,
}

#[derive(Serialize, Deserialize)]
struct ScanIndex {
    subject: String,
    light_count: usize,
    width: usize,
    height: usize,
    lights: Vec<ScanEntry>,
}

#[derive(Serialize, Deserialize)]
struct ScanEntry {
    id: usize,
    file: String,
}

impl OlatScan {
    pub fn new(
        subject: impl Into<String>,
        light_ids: Vec<usize>,
        images: Vec<ImageBuf>,
        light_count: usize,
    ) -> Result<Self> {
        if light_ids.len() != images.len() {
            return Err(Error::LengthMismatch {
                expected: light_ids.len(),
                got: images.len(),
            });
        }
        let first = images
            .first()
            .ok_or_else(|| Error::param("scan", "no images"))?;
        for img in &images[1..] {
            first.ensure_same_dims(img)?;
        }
        let mut seen = vec![false; light_count];
        for &id in &light_ids {
            match seen.get_mut(id) {
                None => return Err(Error::MissingLight { index: id }),
                Some(s) if *s => {
                    return Err(Error::param("scan", format!("light {id} appears twice")))
                }
                Some(s) => *s = true,
            }
        }
        Ok(Self {
            subject: subject.into(),
            light_ids,
            images,
            light_count,
        })
    }

    /// A scan holding one image per active light of `rig`, in index order.
    pub fn for_rig(
        rig: &LightRig,
        subject: impl Into<String>,
        images: Vec<ImageBuf>,
    ) -> Result<Self> {
        let ids = rig.active_indices();
        if ids.len() != images.len() {
            return Err(Error::LengthMismatch {
                expected: ids.len(),
                got: images.len(),
            });
        }
        Self::new(subject, ids, images, rig.len())
    }

    pub fn subject(&self) -> &str {
        &self.subject
    }

    pub fn light_ids(&self) -> &[usize] {
        &self.light_ids
    }

    pub fn images(&self) -> &[ImageBuf] {
        &self.images
    }

    pub fn light_count(&self) -> usize {
        self.light_count
    }

    pub fn dims(&self) -> (usize, usize) {
        self.images[0].dims()
    }

    pub fn image_for(&self, light: usize) -> Option<&ImageBuf> {
        self.light_ids
            .iter()
            .position(|&id| id == light)
            .map(|i| &self.images[i])
    }

    /// Checks that the scan covers exactly the active lights of `rig`.
    pub fn check_rig(&self, rig: &LightRig) -> Result<()> {
        if self.light_count != rig.len() {
            return Err(Error::LengthMismatch {
                expected: rig.len(),
                got: self.light_count,
            });
        }
        let mut ids = self.light_ids.clone();
        ids.sort_unstable();
        let active = rig.active_indices();
        if let Some(&index) = active.iter().find(|i| ids.binary_search(i).is_err()) {
            return Err(Error::MissingLight { index });
        }
        if let Some(&index) = ids.iter().find(|&&i| !rig.is_active(i)) {
            return Err(Error::InactiveLight { index });
        }
        Ok(())
    }

    /// `Σ w_i I_i` in linear light, unclamped. Each sample is accumulated
    /// in f64 in stored light order, so the result does not depend on the
    /// thread schedule.
    pub fn relight(&self, w: &WeightVector) -> Result<ImageBuf> {
        if w.len() != self.light_count {
            return Err(Error::LengthMismatch {
                expected: self.light_count,
                got: w.len(),
            });
        }
        let mut covered = vec![false; self.light_count];
        for &id in &self.light_ids {
            covered[id] = true;
        }
        if let Some(index) = (0..w.len()).find(|&i| !covered[i] && w.as_slice()[i] != 0.0) {
            return Err(Error::MissingLight { index });
        }
        let terms: Vec<(f64, &[f32])> = self
            .light_ids
            .iter()
            .zip(&self.images)
            .map(|(&id, img)| (w.as_slice()[id], img.data()))
            .filter(|(wi, _)| *wi != 0.0)
            .collect();
        let (width, height) = self.dims();
        let row = width * 3;
        let mut data = vec![0f32; row * height];
        data.par_chunks_mut(row).enumerate().for_each(|(y, out)| {
            let mut acc = vec![0f64; row];
            for (wi, img) in &terms {
                for (a, &v) in acc.iter_mut().zip(&img[y * row..(y + 1) * row]) {
                    *a += wi * f64::from(v);
                }
            }
            for (o, a) in out.iter_mut().zip(acc) {
                *o = a as f32;
            }
        });
        Ok(ImageBuf::from_raw(width, height, data))
    }

    /// Writes `index.json` and one PFM per light into `dir`.
    pub fn save_dir(&self, dir: impl AsRef<Path>) -> Result<()> {
        let dir = dir.as_ref();
        std::fs::create_dir_all(dir)?;
        let (width, height) = self.dims();
        let mut lights = Vec::with_capacity(self.images.len());
        for (&id, img) in self.light_ids.iter().zip(&self.images) {
            let file = format!("light_{id:03}.pfm");
            io::save_pfm(img, dir.join(&file))?;
            lights.push(ScanEntry { id, file });
        }
        let index = ScanIndex {
            subject: self.subject.clone(),
            light_count: self.light_count,
            width,
            height,
            lights,
        };
        std::fs::write(
            dir.join("index.json"),
            serde_json::to_string_pretty(&index)?,
        )?;
        Ok(())
    }

    pub fn load_dir(dir: impl AsRef<Path>) -> Result<Self> {
        let dir = dir.as_ref();
        let index: ScanIndex =
            serde_json::from_str(&std::fs::read_to_string(dir.join("index.json"))?)?;
        let mut ids = Vec::with_capacity(index.lights.len());
        let mut images = Vec::with_capacity(index.lights.len());
        for entry in &index.lights {
            let img = io::load_image(dir.join(&entry.file))?;
            if img.dims() != (index.width, index.height) {
                return Err(Error::ShapeMismatch {
                    expected: (index.width, index.height),
                    got: img.dims(),
                });
            }
            ids.push(entry.id);
            images.push(img);
        }
        Self::new(index.subject, ids, images, index.light_count)
    }
}
