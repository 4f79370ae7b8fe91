//! The per-sample attack loop and run persistence: outcomes, evaluation
//! records, aggregate summary, and the run manifest.

use std::fs;
use std::io::Write;
use std::panic::AssertUnwindSafe;
use std::path::{Path, PathBuf};
use std::sync::atomic::{AtomicUsize, Ordering};
use std::sync::{Arc, Mutex};
use std::time::Instant;

use beamstrike_core::bodega::{aggregate, evaluate_sample, EvaluationRecord, Similarity, Summary};
use beamstrike_core::candidates::CandidateProvider;
use beamstrike_core::victim::Victim;
use beamstrike_core::{attack, tokenize, AttackConfig, AttackOutcome};
use serde::{Deserialize, Serialize};

use crate::adapters::UnavailableVictim;
use crate::config::RunConfig;
use crate::dataset::{fingerprint, load_dataset, DatasetSample};
use crate::RunnerError;

/// CLI-level overrides applied on top of the config file.
#[derive(Debug, Clone, Default)]
pub struct RunOptions {
    pub seed: Option<u64>,
    pub workers: usize,
    pub max_queries: Option<u64>,
}

impl RunOptions {
    pub fn apply(&self, config: &mut RunConfig) {
        if let Some(seed) = self.seed {
            config.lime.rng_seed = seed;
            if let Some(sweep) = config.sweep.as_mut() {
                sweep.seed = seed;
            }
        }
        if let Some(max_queries) = self.max_queries {
            config.attack.max_queries = max_queries;
        }
    }
}

/// One line of `outcomes.jsonl`: the sample identity plus the attack result.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct OutcomeLine {
    pub id: String,
    pub task: String,
    pub victim: String,
    pub gold_label: usize,
    pub original_text: String,
    #[serde(flatten)]
    pub outcome: AttackOutcome,
}

/// One line of `records.jsonl`: the evaluated metrics for a sample.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct RecordLine {
    pub task: String,
    pub victim: String,
    #[serde(flatten)]
    pub record: EvaluationRecord,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Manifest {
    pub schema: String,
    pub command: String,
    pub started_at: String,
    pub finished_at: Option<String>,
    pub dataset_path: String,
    pub dataset_sha256: String,
    pub dataset_samples: usize,
    pub task: String,
    pub victim: String,
    pub provider: String,
    pub similarity: String,
    pub workers: usize,
    pub config: serde_json::Value,
    pub artifacts: Vec<String>,
}

impl Manifest {
    /// Open manifest for a run that is about to start.
    #[allow(clippy::too_many_arguments)]
    pub fn begin(
        command: &str,
        dataset_path: &Path,
        dataset_samples: usize,
        labels: &RunLabels,
        config: &RunConfig,
        workers: usize,
    ) -> Result<Manifest, RunnerError> {
        Ok(Manifest {
            schema: "v1".to_string(),
            command: command.to_string(),
            started_at: now_rfc3339(),
            finished_at: None,
            dataset_path: dataset_path.display().to_string(),
            dataset_sha256: fingerprint(dataset_path)?,
            dataset_samples,
            task: labels.task.clone(),
            victim: labels.victim.clone(),
            provider: config.provider.label(),
            similarity: config.similarity.label(),
            workers,
            config: serde_json::to_value(config).map_err(|e| RunnerError::Other(e.to_string()))?,
            artifacts: Vec::new(),
        })
    }

    pub fn save(&self, path: &Path) -> Result<(), RunnerError> {
        fs::write(path, serde_json::to_string_pretty(self).unwrap())?;
        Ok(())
    }

    pub fn finalize(&mut self, path: &Path, artifacts: Vec<String>) -> Result<(), RunnerError> {
        self.finished_at = Some(now_rfc3339());
        self.artifacts = artifacts;
        self.save(path)
    }
}

pub struct RunArtifacts {
    pub outcomes_path: PathBuf,
    pub records_path: PathBuf,
    pub summary_path: PathBuf,
    pub manifest_path: PathBuf,
    pub summary: Summary,
}

/// Report labels stamped onto every outcome and record line.
#[derive(Debug, Clone)]
pub struct RunLabels {
    pub task: String,
    pub victim: String,
}

/// Attack every sample and evaluate the outcomes. Per-sample faults (victim
/// failures, panics) become failure outcomes; the loop itself never aborts.
pub fn attack_samples(
    samples: &[DatasetSample],
    victim: &Arc<dyn Victim + Send + Sync>,
    provider: &Arc<dyn CandidateProvider + Send + Sync>,
    similarity: &Arc<dyn Similarity + Send + Sync>,
    attack_config: &AttackConfig,
    labels: &RunLabels,
    workers: usize,
) -> Vec<(OutcomeLine, RecordLine)> {
    let cursor = AtomicUsize::new(0);
    let results: Mutex<Vec<Option<(OutcomeLine, RecordLine)>>> =
        Mutex::new((0..samples.len()).map(|_| None).collect());

    let worker_count = workers.max(1).min(samples.len().max(1));
    std::thread::scope(|scope| {
        for _ in 0..worker_count {
            scope.spawn(|| loop {
                let index = cursor.fetch_add(1, Ordering::Relaxed);
                if index >= samples.len() {
                    break;
                }
                let sample = &samples[index];
                let entry = attack_one(
                    sample,
                    victim.as_ref(),
                    provider.as_ref(),
                    similarity.as_ref(),
                    attack_config,
                    labels,
                );
                results.lock().expect("results poisoned")[index] = Some(entry);
            });
        }
    });

    results
        .into_inner()
        .expect("results poisoned")
        .into_iter()
        .map(|entry| entry.expect("every sample produced a result"))
        .collect()
}

fn attack_one(
    sample: &DatasetSample,
    victim: &dyn Victim,
    provider: &dyn CandidateProvider,
    similarity: &dyn Similarity,
    attack_config: &AttackConfig,
    labels: &RunLabels,
) -> (OutcomeLine, RecordLine) {
    let start = Instant::now();
    let doc = tokenize(&sample.text, &sample.id, sample.label)
        .expect("dataset validation rejects empty texts");

    let mut outcome = match std::panic::catch_unwind(AssertUnwindSafe(|| {
        attack(&doc, victim, provider, similarity, attack_config)
    })) {
        Ok(Ok(outcome)) => outcome,
        Ok(Err(config_error)) => failure_outcome(&sample.text, config_error.to_string()),
        Err(panic) => failure_outcome(&sample.text, panic_note(&panic)),
    };
    outcome.wall_time_s = start.elapsed().as_secs_f64();

    let record = match std::panic::catch_unwind(AssertUnwindSafe(|| {
        evaluate_sample(&doc, &outcome, victim, similarity)
    })) {
        Ok(record) => record,
        Err(panic) => invalid_record(&doc, &outcome, panic_note(&panic)),
    };

    (
        OutcomeLine {
            id: sample.id.clone(),
            task: labels.task.clone(),
            victim: labels.victim.clone(),
            gold_label: sample.label,
            original_text: sample.text.clone(),
            outcome,
        },
        RecordLine {
            task: labels.task.clone(),
            victim: labels.victim.clone(),
            record,
        },
    )
}

fn failure_outcome(original_text: &str, note: String) -> AttackOutcome {
    AttackOutcome {
        success: false,
        adversarial_text: original_text.to_string(),
        chosen_edits: Vec::new(),
        hypotheses: Vec::new(),
        queries: Default::default(),
        wall_time_s: 0.0,
        error: Some(note),
    }
}

fn panic_note(panic: &Box<dyn std::any::Any + Send>) -> String {
    let detail = panic
        .downcast_ref::<&str>()
        .map(|s| s.to_string())
        .or_else(|| panic.downcast_ref::<String>().cloned())
        .unwrap_or_else(|| "opaque panic".to_string());
    format!("attack panicked: {detail}")
}

fn invalid_record(
    doc: &beamstrike_core::TokenizedDocument,
    outcome: &AttackOutcome,
    note: String,
) -> EvaluationRecord {
    EvaluationRecord {
        sample_id: doc.id.clone(),
        valid: false,
        confusion: 0,
        semantic: 0.0,
        character: 0.0,
        bodega: 0.0,
        wsr_percent: 0.0,
        queries: outcome.queries.total,
        success_edits: 0,
        wall_time_s: outcome.wall_time_s,
        note: Some(note),
    }
}

/// Summary with zeroed metrics, used when no record survived evaluation.
fn empty_summary(samples: usize) -> Summary {
    Summary {
        bodega_mean: 0.0,
        success_rate: 0.0,
        semantic_mean: 0.0,
        character_mean: 0.0,
        queries_per_example: 0.0,
        bodega_mean_success_only: None,
        samples,
        valid_records: 0,
        invalid_records: samples,
        successes: 0,
    }
}

pub fn summarize(records: &[EvaluationRecord]) -> Summary {
    aggregate(records).unwrap_or_else(|_| empty_summary(records.len()))
}

/// Render the aggregate in the report column order.
pub fn summary_table(summary: &Summary) -> String {
    format!(
        "B.      con     sem     char    Q.\n{:<7.4} {:<7.4} {:<7.4} {:<7.4} {:.1}",
        summary.bodega_mean,
        summary.success_rate,
        summary.semantic_mean,
        summary.character_mean,
        summary.queries_per_example
    )
}

pub fn write_jsonl<T: Serialize>(path: &Path, lines: &[T]) -> Result<(), RunnerError> {
    let mut file = fs::File::create(path)?;
    for line in lines {
        let serialized = serde_json::to_string(line)
            .map_err(|e| RunnerError::Other(format!("serialize {}: {e}", path.display())))?;
        file.write_all(serialized.as_bytes())?;
        file.write_all(b"\n")?;
    }
    Ok(())
}

pub fn read_outcome_lines(path: &Path) -> Result<Vec<OutcomeLine>, RunnerError> {
    let raw = fs::read_to_string(path)?;
    let mut lines = Vec::new();
    for (lineno, line) in raw.lines().enumerate() {
        if line.trim().is_empty() {
            continue;
        }
        let parsed: OutcomeLine = serde_json::from_str(line).map_err(|e| {
            RunnerError::Other(format!("{}:{}: {e}", path.display(), lineno + 1))
        })?;
        lines.push(parsed);
    }
    Ok(lines)
}

fn now_rfc3339() -> String {
    chrono::Utc::now().to_rfc3339()
}

/// The `attack` command: attack every dataset sample and persist outcomes,
/// records, summary, and manifest under `out_dir`.
pub fn run_attack(
    config_path: &Path,
    dataset_path: &Path,
    out_dir: &Path,
    options: &RunOptions,
) -> Result<RunArtifacts, RunnerError> {
    let mut config = RunConfig::load(config_path)?;
    options.apply(&mut config);
    let samples = load_dataset(dataset_path)?;
    fs::create_dir_all(out_dir)?;

    let task = config.meta.task.clone().unwrap_or_else(|| {
        dataset_path
            .file_stem()
            .map(|s| s.to_string_lossy().into_owned())
            .unwrap_or_else(|| "task".to_string())
    });
    let victim_label = config
        .meta
        .victim_label
        .clone()
        .unwrap_or_else(|| config.victim.label());

    // A victim that fails its health probe degrades every sample to a
    // failure outcome instead of aborting the run.
    let victim: Arc<dyn Victim + Send + Sync> = match config.victim.build() {
        Ok(victim) => victim,
        Err(RunnerError::VictimUnavailable(detail)) => {
            eprintln!("warning: victim unavailable, producing failure outcomes: {detail}");
            Arc::new(UnavailableVictim { detail })
        }
        Err(other) => return Err(other),
    };
    let provider = config.provider.build()?;
    let similarity = config.similarity.build();
    let attack_config = config.attack_config();
    attack_config
        .validate()
        .map_err(|e| RunnerError::ConfigInvalid(e.to_string()))?;

    let labels = RunLabels {
        task,
        victim: victim_label,
    };
    let manifest_path = out_dir.join("manifest.json");
    let mut manifest = Manifest::begin(
        "attack",
        dataset_path,
        samples.len(),
        &labels,
        &config,
        options.workers.max(1),
    )?;
    manifest.save(&manifest_path)?;

    let results = attack_samples(
        &samples,
        &victim,
        &provider,
        &similarity,
        &attack_config,
        &labels,
        options.workers.max(1),
    );

    let (outcome_lines, record_lines): (Vec<OutcomeLine>, Vec<RecordLine>) =
        results.into_iter().unzip();

    let outcomes_path = out_dir.join("outcomes.jsonl");
    let records_path = out_dir.join("records.jsonl");
    let summary_path = out_dir.join("summary.json");
    write_jsonl(&outcomes_path, &outcome_lines)?;
    write_jsonl(&records_path, &record_lines)?;

    let records: Vec<EvaluationRecord> = record_lines.into_iter().map(|l| l.record).collect();
    let summary = summarize(&records);
    fs::write(&summary_path, serde_json::to_string_pretty(&summary).unwrap())?;

    manifest.finalize(
        &manifest_path,
        vec![
            outcomes_path.display().to_string(),
            records_path.display().to_string(),
            summary_path.display().to_string(),
        ],
    )?;

    Ok(RunArtifacts {
        outcomes_path,
        records_path,
        summary_path,
        manifest_path,
        summary,
    })
}
