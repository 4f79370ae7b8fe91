//! Dataset ingestion: JSONL (canonical) and BODEGA-style TSV import.

use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::RunnerError;

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct DatasetSample {
    pub id: String,
    pub label: usize,
    pub text: String,
}

/// Load and validate a dataset. `.tsv` files are parsed as
/// `label<TAB>text` lines with line numbers as ids; everything else is
/// treated as JSONL with one `{"id", "label", "text"}` object per line.
///
/// Validation: at least one sample, labels in {0, 1}, unique ids, and
/// non-empty text.
pub fn load_dataset(path: &Path) -> Result<Vec<DatasetSample>, RunnerError> {
    let raw = fs::read_to_string(path)
        .map_err(|e| RunnerError::DatasetInvalid(format!("{}: {e}", path.display())))?;

    let is_tsv = path
        .extension()
        .and_then(|e| e.to_str())
        .is_some_and(|e| e.eq_ignore_ascii_case("tsv"));

    let mut samples = Vec::new();
    for (lineno, line) in raw.lines().enumerate() {
        if line.trim().is_empty() {
            continue;
        }
        let sample = if is_tsv {
            parse_tsv_line(line, lineno)?
        } else {
            serde_json::from_str::<DatasetSample>(line).map_err(|e| {
                RunnerError::DatasetInvalid(format!("line {}: {e}", lineno + 1))
            })?
        };
        samples.push(sample);
    }

    validate(&samples)?;
    Ok(samples)
}

fn parse_tsv_line(line: &str, lineno: usize) -> Result<DatasetSample, RunnerError> {
    let (label, text) = line.split_once('\t').ok_or_else(|| {
        RunnerError::DatasetInvalid(format!("line {}: expected label<TAB>text", lineno + 1))
    })?;
    let label: usize = label.trim().parse().map_err(|_| {
        RunnerError::DatasetInvalid(format!("line {}: label {label:?} is not an integer", lineno + 1))
    })?;
    Ok(DatasetSample {
        id: lineno.to_string(),
        label,
        text: text.to_string(),
    })
}

fn validate(samples: &[DatasetSample]) -> Result<(), RunnerError> {
    if samples.is_empty() {
        return Err(RunnerError::DatasetInvalid("dataset has no samples".to_string()));
    }
    let mut seen = std::collections::BTreeSet::new();
    for sample in samples {
        if sample.label > 1 {
            return Err(RunnerError::DatasetInvalid(format!(
                "sample {:?}: label {} not in {{0, 1}}",
                sample.id, sample.label
            )));
        }
        if sample.text.trim().is_empty() {
            return Err(RunnerError::DatasetInvalid(format!(
                "sample {:?}: text is empty",
                sample.id
            )));
        }
        if !seen.insert(&sample.id) {
            return Err(RunnerError::DatasetInvalid(format!(
                "duplicate sample id {:?}",
                sample.id
            )));
        }
    }
    Ok(())
}

/// Hex SHA-256 of the dataset file bytes, recorded in run manifests.
pub fn fingerprint(path: &Path) -> Result<String, RunnerError> {
    use sha2::{Digest, Sha256};
    let bytes = fs::read(path)?;
    let digest = Sha256::digest(&bytes);
    Ok(digest.iter().map(|b| format!("{b:02x}")).collect())
}
