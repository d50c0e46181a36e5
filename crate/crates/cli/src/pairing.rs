//! Resolving ground-truth/prediction file pairs.

use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};
use serde::Deserialize;

use segscore::report::SamplePair;

const EXTENSIONS: [&str; 2] = ["png", "mgrid"];

/// Mask files of a directory keyed by file stem (non-recursive).
fn masks_by_stem(dir: &Path) -> Result<BTreeMap<String, PathBuf>> {
    let entries = fs::read_dir(dir).with_context(|| format!("reading directory {}", dir.display()))?;
    let mut out = BTreeMap::new();
    for entry in entries {
        let path = entry.with_context(|| format!("reading directory {}", dir.display()))?.path();
        let ext = path.extension().and_then(|e| e.to_str()).map(str::to_ascii_lowercase);
        if !path.is_file() || !ext.is_some_and(|e| EXTENSIONS.contains(&e.as_str())) {
            continue;
        }
        let Some(stem) = path.file_stem().and_then(|s| s.to_str()) else {
            continue;
        };
        if let Some(prev) = out.insert(stem.to_string(), path.clone()) {
            bail!(
                "two mask files share the stem `{stem}`: {} and {}",
                prev.display(),
                path.display()
            );
        }
    }
    Ok(out)
}

/// Pairs files with identical stems. Files without a partner become
/// one-sided pairs, which evaluation flags.
pub fn pair_by_filename(gt_dir: &Path, pred_dir: &Path) -> Result<Vec<SamplePair>> {
    let mut gt = masks_by_stem(gt_dir)?;
    let mut pred = masks_by_stem(pred_dir)?;
    let mut stems: Vec<String> = gt.keys().chain(pred.keys()).cloned().collect();
    stems.sort();
    stems.dedup();
    Ok(stems
        .into_iter()
        .map(|stem| SamplePair {
            gt: gt.remove(&stem),
            pred: pred.remove(&stem),
            sample_id: stem,
        })
        .collect())
}

#[derive(Debug, Deserialize)]
struct ManifestRow {
    gt_path: String,
    pred_path: String,
    sample_id: String,
}

/// Reads a `gt_path,pred_path,sample_id` CSV. Relative paths resolve
/// against the manifest's directory; an empty path marks a missing side.
pub fn read_manifest(path: &Path) -> Result<Vec<SamplePair>> {
    let dir = path.parent().unwrap_or(Path::new(""));
    let mut reader = csv::ReaderBuilder::new()
        .trim(csv::Trim::All)
        .from_path(path)
        .with_context(|| format!("reading manifest {}", path.display()))?;
    let resolve = |p: String| (!p.is_empty()).then(|| dir.join(p));
    let mut pairs = Vec::new();
    for row in reader.deserialize() {
        let row: ManifestRow = row.with_context(|| format!("parsing manifest {}", path.display()))?;
        pairs.push(SamplePair {
            sample_id: row.sample_id,
            gt: resolve(row.gt_path),
            pred: resolve(row.pred_path),
        });
    }
    Ok(pairs)
}
