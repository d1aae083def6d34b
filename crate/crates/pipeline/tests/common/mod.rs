#![allow(dead_code)]

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use shadowkit_pipeline::fixtures::{write_fixtures, FixtureSpec};
use shadowkit_pipeline::PipelineConfig;

pub fn small_spec() -> FixtureSpec {
    FixtureSpec {
        faces: 3,
        face_size: 272,
        silhouettes: 3,
        silhouette_size: 64,
        scans: 2,
        scan_size: 32,
        ..FixtureSpec::default()
    }
}

pub fn fixture(root: &Path, spec: &FixtureSpec) -> PipelineConfig {
    write_fixtures(root, spec).expect("fixtures")
}

/// Every file under `root`, relative path to contents.
pub fn tree(root: &Path) -> BTreeMap<PathBuf, Vec<u8>> {
    let mut out = BTreeMap::new();
    let mut stack = vec![root.to_owned()];
    while let Some(dir) = stack.pop() {
        for entry in std::fs::read_dir(&dir).unwrap() {
            let path = entry.unwrap().path();
            if path.is_dir() {
                stack.push(path);
            } else {
                let rel = path.strip_prefix(root).unwrap().to_owned();
                out.insert(rel, std::fs::read(&path).unwrap());
            }
        }
    }
    out
}

pub fn json_rows(path: &Path) -> Vec<serde_json::Value> {
    std::fs::read_to_string(path)
        .unwrap()
        .lines()
        .map(|l| serde_json::from_str(l).unwrap())
        .collect()
}
