use std::collections::BTreeSet;
use std::path::{Path, PathBuf};

use sha2::{Digest, Sha256};

use crate::error::{PipelineError, Result};

pub fn create_dir(path: &Path) -> Result<()> {
    std::fs::create_dir_all(path).map_err(|e| PipelineError::io(path, e))
}

fn remove_dir_if_present(path: &Path) -> Result<()> {
    match std::fs::remove_dir_all(path) {
        Ok(()) => Ok(()),
        Err(e) if e.kind() == std::io::ErrorKind::NotFound => Ok(()),
        Err(e) => Err(PipelineError::io(path, e)),
    }
}

/// Writes `bytes` next to `path` and renames it into place.
pub fn write_atomic(path: &Path, bytes: &[u8]) -> Result<()> {
    let mut tmp = path.as_os_str().to_owned();
    tmp.push(".tmp");
    let tmp = PathBuf::from(tmp);
    std::fs::write(&tmp, bytes).map_err(|e| PipelineError::io(&tmp, e))?;
    std::fs::rename(&tmp, path).map_err(|e| PipelineError::io(path, e))
}

/// Name of the directory holding sample `id`.
pub fn sample_dir_name(id: usize) -> String {
    format!("{id:06}")
}

/// Builds a sample directory under a temporary name, then renames it to
/// `parent/<id>` so readers never see a half-written sample.
pub fn write_sample_dir<T>(
    parent: &Path,
    id: usize,
    fill: impl FnOnce(&Path) -> Result<T>,
) -> Result<T> {
    let name = sample_dir_name(id);
    let tmp = parent.join(format!(".tmp-{name}"));
    let dest = parent.join(&name);
    remove_dir_if_present(&tmp)?;
    create_dir(&tmp)?;
    let value = match fill(&tmp) {
        Ok(v) => v,
        Err(e) => {
            let _ = std::fs::remove_dir_all(&tmp);
            return Err(e);
        }
    };
    remove_dir_if_present(&dest)?;
    std::fs::rename(&tmp, &dest).map_err(|e| PipelineError::io(&dest, e))?;
    Ok(value)
}

/// Removes sample directories under `parent` that are not in `keep`, left
/// over from earlier or larger runs. Only six-digit names and temporaries
/// are touched.
pub fn prune_samples(parent: &Path, keep: &BTreeSet<usize>) -> Result<()> {
    let entries = match std::fs::read_dir(parent) {
        Ok(e) => e,
        Err(e) if e.kind() == std::io::ErrorKind::NotFound => return Ok(()),
        Err(e) => return Err(PipelineError::io(parent, e)),
    };
    for entry in entries {
        let entry = entry.map_err(|e| PipelineError::io(parent, e))?;
        let name = entry.file_name().to_string_lossy().into_owned();
        let stale = if name.starts_with(".tmp-") {
            true
        } else if name.len() == 6 && name.bytes().all(|b| b.is_ascii_digit()) {
            !keep.contains(&name.parse::<usize>().expect("digits"))
        } else {
            false
        };
        if stale {
            remove_dir_if_present(&entry.path())?;
        }
    }
    Ok(())
}

pub fn sha256_hex(bytes: &[u8]) -> String {
    Sha256::digest(bytes)
        .iter()
        .map(|b| format!("{b:02x}"))
        .collect()
}

pub fn sha256_file(path: &Path) -> Result<String> {
    let bytes = std::fs::read(path).map_err(|e| PipelineError::io(path, e))?;
    Ok(sha256_hex(&bytes))
}

/// Path relative to `root` with `/` separators, for manifests.
pub fn relative(root: &Path, path: &Path) -> String {
    let rel = path.strip_prefix(root).unwrap_or(path);
    rel.components()
        .map(|c| c.as_os_str().to_string_lossy())
        .collect::<Vec<_>>()
        .join("/")
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn sha256_known_vector() {
        assert_eq!(
            sha256_hex(b"abc"),
            "ba7816bf8f01cfea414140de5dae2223b00361a396177a9cb410ff61f20015ad"
        );
    }

    #[test]
    fn failed_fill_leaves_nothing_behind() {
        let dir = tempfile::tempdir().unwrap();
        let r: Result<()> = write_sample_dir(dir.path(), 3, |p| {
            std::fs::write(p.join("x"), b"1").unwrap();
            Err(PipelineError::Input("boom".into()))
        });
        assert!(r.is_err());
        assert_eq!(std::fs::read_dir(dir.path()).unwrap().count(), 0);
    }

    #[test]
    fn prune_keeps_listed_and_foreign_names() {
        let dir = tempfile::tempdir().unwrap();
        for name in ["000000", "000001", "000002", ".tmp-000003", "notes"] {
            std::fs::create_dir(dir.path().join(name)).unwrap();
        }
        prune_samples(dir.path(), &[0, 2].into_iter().collect()).unwrap();
        let mut left: Vec<String> = std::fs::read_dir(dir.path())
            .unwrap()
            .map(|e| e.unwrap().file_name().to_string_lossy().into_owned())
            .collect();
        left.sort();
        assert_eq!(left, ["000000", "000002", "notes"]);
    }
}
