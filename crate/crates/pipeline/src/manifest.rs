//! JSON Lines records describing every generated sample.

use std::io::{BufRead, BufReader, Write};
use std::path::Path;

use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};
use shadowkit::olat::PairRecord;
use shadowkit::shadowsynth::ForeignProvenance;

use crate::error::{PipelineError, Result};
use crate::output::write_atomic;

pub const VERSION: &str = env!("CARGO_PKG_VERSION");

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ForeignFiles {
    pub composite: String,
    pub lit: String,
    pub mask: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FacialFiles {
    pub harsh: String,
    pub soft: String,
}

/// One manifest line. Paths are relative to the output root; input names
/// are relative to their corpus directory.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
#[allow(clippy::large_enum_variant)]
pub enum Record {
    Foreign {
        id: usize,
        seed: u64,
        face: String,
        files: ForeignFiles,
        spec: ForeignProvenance,
        version: String,
    },
    Facial {
        id: usize,
        seed: u64,
        scan: String,
        #[serde(skip_serializing_if = "Option::is_none", default)]
        landmarks: Option<String>,
        files: FacialFiles,
        spec: PairRecord,
        version: String,
    },
    Mirror {
        id: usize,
        image: String,
        mirror: String,
        landmarks: String,
        landmarks_sha256: String,
        k_sigma: usize,
        version: String,
    },
}

impl Record {
    pub fn id(&self) -> usize {
        match self {
            Self::Foreign { id, .. } | Self::Facial { id, .. } | Self::Mirror { id, .. } => *id,
        }
    }

    /// Output files this record owns, relative to the output root.
    pub fn files(&self) -> Vec<&str> {
        match self {
            Self::Foreign { files, .. } => vec![&files.composite, &files.lit, &files.mask],
            Self::Facial { files, .. } => vec![&files.harsh, &files.soft],
            Self::Mirror { mirror, .. } => vec![mirror],
        }
    }
}

/// A sample that was not produced, and why.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Skip {
    pub id: usize,
    pub reason: String,
}

pub fn write_jsonl<T: Serialize>(path: &Path, rows: &[T]) -> Result<()> {
    let mut buf = Vec::new();
    for row in rows {
        serde_json::to_writer(&mut buf, row).expect("records serialize");
        buf.write_all(b"\n").expect("in-memory write");
    }
    write_atomic(path, &buf)
}

pub fn read_jsonl<T: DeserializeOwned>(path: &Path) -> Result<Vec<T>> {
    let file = std::fs::File::open(path).map_err(|e| PipelineError::io(path, e))?;
    let mut rows = Vec::new();
    for (n, line) in BufReader::new(file).lines().enumerate() {
        let line = line.map_err(|e| PipelineError::io(path, e))?;
        if line.trim().is_empty() {
            continue;
        }
        rows.push(
            serde_json::from_str(&line)
                .map_err(|e| PipelineError::Input(format!("{}:{}: {e}", path.display(), n + 1)))?,
        );
    }
    Ok(rows)
}

/// Writes the skip list, or removes a stale one when nothing was skipped.
pub fn write_skips(path: &Path, skips: &[Skip]) -> Result<()> {
    if skips.is_empty() {
        match std::fs::remove_file(path) {
            Ok(()) => Ok(()),
            Err(e) if e.kind() == std::io::ErrorKind::NotFound => Ok(()),
            Err(e) => Err(PipelineError::io(path, e)),
        }
    } else {
        write_jsonl(path, skips)
    }
}
