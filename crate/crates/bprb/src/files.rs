//! File-level wrappers around the core codecs: instances (canonical text
//! or MPS by extension), 0/1 label files, and predictor weights.

use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};

use bprb_core::gcn::{GcnParams, LabeledExample};
use bprb_core::mip::codec::{parse_instance, serialize_instance};
use bprb_core::mip::mps::{parse_mps, write_mps};
use bprb_core::mip::MipInstance;

pub const INSTANCE_EXT: &str = "bpmip";
pub const LABEL_EXT: &str = "labels";

fn is_mps(path: &Path) -> bool {
    matches!(
        path.extension().and_then(|e| e.to_str()),
        Some(e) if e.eq_ignore_ascii_case("mps")
    )
}

/// Read an instance; `.mps` files go through the MPS importer, everything
/// else through the canonical text format.
pub fn read_instance(path: &Path) -> Result<MipInstance> {
    let text = std::fs::read_to_string(path)
        .with_context(|| format!("reading instance {}", path.display()))?;
    let parsed = if is_mps(path) { parse_mps(&text) } else { parse_instance(&text) };
    parsed.map_err(|e| anyhow::anyhow!("{}: {e}", path.display()))
}

/// Write an instance; `.mps` paths are exported in MPS form.
pub fn write_instance(path: &Path, inst: &MipInstance) -> Result<()> {
    let text = if is_mps(path) { write_mps(inst) } else { serialize_instance(inst) };
    std::fs::write(path, text).with_context(|| format!("writing instance {}", path.display()))
}

/// Labels are one `0` or `1` per line, one line per variable.
pub fn read_labels(path: &Path) -> Result<Vec<bool>> {
    let text = std::fs::read_to_string(path)
        .with_context(|| format!("reading labels {}", path.display()))?;
    text.lines()
        .enumerate()
        .filter(|(_, l)| !l.trim().is_empty())
        .map(|(no, l)| match l.trim() {
            "0" => Ok(false),
            "1" => Ok(true),
            other => bail!("{}: line {}: expected 0 or 1, got {other:?}", path.display(), no + 1),
        })
        .collect()
}

pub fn write_labels(path: &Path, labels: &[bool]) -> Result<()> {
    let mut text = String::with_capacity(labels.len() * 2);
    for &l in labels {
        text.push(if l { '1' } else { '0' });
        text.push('\n');
    }
    std::fs::write(path, text).with_context(|| format!("writing labels {}", path.display()))
}

pub fn read_weights(path: &Path) -> Result<GcnParams> {
    let bytes =
        std::fs::read(path).with_context(|| format!("reading weights {}", path.display()))?;
    GcnParams::from_bytes(&bytes).map_err(|e| anyhow::anyhow!("{}: {e}", path.display()))
}

pub fn write_weights(path: &Path, params: &GcnParams) -> Result<()> {
    std::fs::write(path, params.to_bytes())
        .with_context(|| format!("writing weights {}", path.display()))
}

/// Load every `.bpmip` instance in a directory that has a `.labels` sibling,
/// sorted by file name for reproducibility.
pub fn load_labeled_dir(dir: &Path) -> Result<Vec<LabeledExample>> {
    let mut paths: Vec<PathBuf> = std::fs::read_dir(dir)
        .with_context(|| format!("reading dataset dir {}", dir.display()))?
        .filter_map(|entry| entry.ok().map(|e| e.path()))
        .filter(|p| p.extension().and_then(|e| e.to_str()) == Some(INSTANCE_EXT))
        .collect();
    paths.sort();
    let mut out = Vec::new();
    for path in paths {
        let label_path = path.with_extension(LABEL_EXT);
        if !label_path.exists() {
            continue;
        }
        let instance = read_instance(&path)?;
        let labels = read_labels(&label_path)?;
        let example = LabeledExample::new(instance, labels)
            .map_err(|e| anyhow::anyhow!("{}: {e}", path.display()))?;
        out.push(example);
    }
    if out.is_empty() {
        bail!("no labeled instances found in {}", dir.display());
    }
    Ok(out)
}
