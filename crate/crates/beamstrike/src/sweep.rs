//! Hyperparameter grid sweeps over `{k, b, h, importance_method}`, run on a
//! seeded random subset of the dataset with one summary row per grid cell.

use std::fs;
use std::path::{Path, PathBuf};

use beamstrike_core::bodega::EvaluationRecord;
use beamstrike_core::importance::ImportanceMethod;
use rand_chacha::ChaCha8Rng;
use rand_core::{RngCore, SeedableRng};
use serde::{Deserialize, Serialize};

use crate::config::RunConfig;
use crate::dataset::{load_dataset, DatasetSample};
use crate::runner::{attack_samples, summarize, Manifest, RunLabels, RunOptions};
use crate::RunnerError;

/// One grid cell's aggregate, in the ablation-table column layout.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SweepRow {
    pub k: usize,
    pub h: usize,
    pub b: usize,
    pub importance_method: ImportanceMethod,
    pub queries_per_example: f64,
    pub success: f64,
    pub semantic: f64,
    pub character: f64,
    pub bodega: f64,
}

pub struct SweepArtifacts {
    pub csv_path: PathBuf,
    pub json_path: PathBuf,
    pub rows: Vec<SweepRow>,
    pub subset_size: usize,
}

/// Sample `count` distinct indices from `0..n` with a seeded generator
/// (partial Fisher-Yates), preserving draw order.
fn seeded_subset(n: usize, count: usize, seed: u64) -> Vec<usize> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut indices: Vec<usize> = (0..n).collect();
    let take = count.min(n);
    for i in 0..take {
        let j = i + (rng.next_u64() as usize) % (n - i);
        indices.swap(i, j);
    }
    indices.truncate(take);
    indices
}

/// The `sweep` command: Cartesian product of the grid lists, each cell
/// attacked on the same seeded subset.
pub fn run_sweep(
    spec_path: &Path,
    dataset_path: &Path,
    out_dir: &Path,
    options: &RunOptions,
) -> Result<SweepArtifacts, RunnerError> {
    let mut config = RunConfig::load(spec_path)?;
    options.apply(&mut config);
    let sweep = config
        .sweep
        .clone()
        .ok_or_else(|| RunnerError::ConfigInvalid("sweep spec needs a [sweep] section".to_string()))?;

    let samples = load_dataset(dataset_path)?;
    fs::create_dir_all(out_dir)?;

    if sweep.subset_size > samples.len() {
        eprintln!(
            "warning: subset_size {} exceeds dataset size {}; clamping",
            sweep.subset_size,
            samples.len()
        );
    }
    let subset: Vec<DatasetSample> = seeded_subset(samples.len(), sweep.subset_size, sweep.seed)
        .into_iter()
        .map(|i| samples[i].clone())
        .collect();

    let task = config.meta.task.clone().unwrap_or_else(|| "sweep".to_string());
    let victim_label = config
        .meta
        .victim_label
        .clone()
        .unwrap_or_else(|| config.victim.label());

    let victim = config.victim.build().map_err(|e| match e {
        RunnerError::VictimUnavailable(d) => RunnerError::VictimUnavailable(d),
        other => other,
    })?;
    let provider = config.provider.build()?;
    let similarity = config.similarity.build();

    let labels = RunLabels {
        task: task.clone(),
        victim: victim_label.clone(),
    };
    let manifest_path = out_dir.join("manifest.json");
    let mut manifest = Manifest::begin(
        "sweep",
        dataset_path,
        samples.len(),
        &labels,
        &config,
        options.workers.max(1),
    )?;
    manifest.save(&manifest_path)?;

    let base = config.attack_config();
    let ks = sweep.grid.k.clone().unwrap_or_else(|| vec![base.beam_size_k]);
    let bs = sweep.grid.b.clone().unwrap_or_else(|| vec![base.branching_b]);
    let hs = sweep
        .grid
        .h
        .clone()
        .unwrap_or_else(|| vec![base.hypothesis_count_h]);
    let methods = sweep
        .grid
        .importance_method
        .clone()
        .unwrap_or_else(|| vec![base.importance_method]);

    let mut rows = Vec::new();
    for &k in &ks {
        for &b in &bs {
            for &h in &hs {
                for &method in &methods {
                    let mut cell = base.clone();
                    cell.beam_size_k = k;
                    cell.branching_b = b;
                    cell.hypothesis_count_h = h;
                    cell.importance_method = method;
                    cell.validate()
                        .map_err(|e| RunnerError::ConfigInvalid(e.to_string()))?;

                    let results = attack_samples(
                        &subset,
                        &victim,
                        &provider,
                        &similarity,
                        &cell,
                        &labels,
                        options.workers.max(1),
                    );
                    let records: Vec<EvaluationRecord> =
                        results.into_iter().map(|(_, r)| r.record).collect();
                    let summary = summarize(&records);
                    rows.push(SweepRow {
                        k,
                        h,
                        b,
                        importance_method: method,
                        queries_per_example: summary.queries_per_example,
                        success: summary.success_rate,
                        semantic: summary.semantic_mean,
                        character: summary.character_mean,
                        bodega: summary.bodega_mean,
                    });
                }
            }
        }
    }

    let csv_path = out_dir.join("sweep_results.csv");
    let json_path = out_dir.join("sweep_results.json");
    write_rows_csv(&csv_path, &rows)?;
    fs::write(&json_path, serde_json::to_string_pretty(&rows).unwrap())?;
    manifest.finalize(
        &manifest_path,
        vec![csv_path.display().to_string(), json_path.display().to_string()],
    )?;

    Ok(SweepArtifacts {
        csv_path,
        json_path,
        rows,
        subset_size: subset.len(),
    })
}

fn write_rows_csv(path: &Path, rows: &[SweepRow]) -> Result<(), RunnerError> {
    let mut writer = csv::Writer::from_path(path)
        .map_err(|e| RunnerError::Other(format!("{}: {e}", path.display())))?;
    writer
        .write_record([
            "k",
            "h",
            "b",
            "importance_method",
            "queries_per_example",
            "success",
            "semantic",
            "character",
            "bodega",
        ])
        .map_err(|e| RunnerError::Other(e.to_string()))?;
    for row in rows {
        writer
            .write_record([
                row.k.to_string(),
                row.h.to_string(),
                row.b.to_string(),
                row.importance_method.to_string(),
                format!("{:.2}", row.queries_per_example),
                format!("{:.4}", row.success),
                format!("{:.4}", row.semantic),
                format!("{:.4}", row.character),
                format!("{:.4}", row.bodega),
            ])
            .map_err(|e| RunnerError::Other(e.to_string()))?;
    }
    writer.flush()?;
    Ok(())
}

/// Console rendering of the sweep table.
pub fn render_rows(rows: &[SweepRow]) -> String {
    let mut out = String::from(
        "k      h      b      method  Q./ex      success  semantic  character  bodega\n",
    );
    for row in rows {
        out.push_str(&format!(
            "{:<6} {:<6} {:<6} {:<7} {:<10.2} {:<8.4} {:<9.4} {:<10.4} {:.4}\n",
            row.k, row.h, row.b, row.importance_method, row.queries_per_example, row.success,
            row.semantic, row.character, row.bodega
        ));
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn subset_is_deterministic_and_clamped() {
        let a = seeded_subset(10, 4, 42);
        let b = seeded_subset(10, 4, 42);
        assert_eq!(a, b);
        assert_eq!(a.len(), 4);
        let all = seeded_subset(3, 10, 7);
        assert_eq!(all.len(), 3);
        let mut sorted = all.clone();
        sorted.sort_unstable();
        sorted.dedup();
        assert_eq!(sorted.len(), 3);
        let different = seeded_subset(10, 4, 43);
        assert_ne!(a, different);
    }
}
