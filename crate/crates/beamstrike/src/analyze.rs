//! The `analyze` command: tag successful adversarial samples, filter the
//! single-substitution strata, build the POS transition matrix, and emit the
//! figures plus their data sidecars.

use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};

use beamstrike_core::analysis::{
    build_transition_matrix, map_to_upos, pos_diff, qualifies_for_transition, PosMapping, Tagger,
    Upos,
};
use beamstrike_core::text::non_skip_count;
use beamstrike_core::tokenize;
use serde::Serialize;

use crate::figures::{
    pos_change_figure, transition_figure, victim_edit_figure, wsr_figure, WsrRow,
};
use crate::runner::{read_outcome_lines, OutcomeLine};
use crate::RunnerError;

#[derive(Debug, Clone, Serialize)]
pub struct AnalysisSummary {
    pub outcomes_read: usize,
    pub successes: usize,
    pub single_edit_successes: usize,
    pub length_preserved: usize,
    pub zero_tag_change: usize,
    pub one_tag_change: usize,
    pub transition_total: u64,
    pub tagger_warnings: usize,
}

pub struct AnalysisArtifacts {
    pub paths: Vec<PathBuf>,
    pub summary: AnalysisSummary,
}

/// Run the full analysis over the `outcomes.jsonl` files found in `in_dirs`.
pub fn run_analysis(
    in_dirs: &[PathBuf],
    out_dir: &Path,
    tagger: &dyn Tagger,
) -> Result<AnalysisArtifacts, RunnerError> {
    let mut lines: Vec<OutcomeLine> = Vec::new();
    for dir in in_dirs {
        let path = dir.join("outcomes.jsonl");
        let mut batch = read_outcome_lines(&path)?;
        lines.append(&mut batch);
    }
    let outcomes_read = lines.len();

    let successes: Vec<&OutcomeLine> = lines.iter().filter(|l| l.outcome.success).collect();
    if successes.is_empty() {
        return Err(RunnerError::NoSuccessfulSamples);
    }

    fs::create_dir_all(out_dir)?;
    let mapping = PosMapping::default();

    let mut wsr_rows: Vec<WsrRow> = Vec::new();
    let mut victim_hist: BTreeMap<String, BTreeMap<usize, u64>> = BTreeMap::new();
    let mut change_counts: BTreeMap<usize, u64> = BTreeMap::new();
    let mut matrix_samples: Vec<(Vec<Upos>, Vec<Upos>)> = Vec::new();
    let mut summary = AnalysisSummary {
        outcomes_read,
        successes: successes.len(),
        single_edit_successes: 0,
        length_preserved: 0,
        zero_tag_change: 0,
        one_tag_change: 0,
        transition_total: 0,
        tagger_warnings: 0,
    };

    for line in &successes {
        let doc = tokenize(&line.original_text, &line.id, line.gold_label)
            .map_err(|e| RunnerError::Other(format!("sample {:?}: {e}", line.id)))?;
        let edits = non_skip_count(&line.outcome.chosen_edits);
        wsr_rows.push(WsrRow {
            sample_id: line.id.clone(),
            task: line.task.clone(),
            victim: line.victim.clone(),
            wsr_percent: 100.0 * edits as f64 / doc.tokens.len() as f64,
        });
        *victim_hist
            .entry(line.victim.clone())
            .or_default()
            .entry(edits)
            .or_insert(0) += 1;

        // The POS strata only look at single-substitution samples.
        if edits != 1 {
            continue;
        }
        summary.single_edit_successes += 1;

        let original_tags = penn_tags(tagger, &line.original_text, &line.id)?;
        let adversarial_tags = penn_tags(tagger, &line.outcome.adversarial_text, &line.id)?;
        let (orig_upos, warn_a) = map_to_upos(&original_tags, &mapping);
        let (adv_upos, warn_b) = map_to_upos(&adversarial_tags, &mapping);
        summary.tagger_warnings += warn_a + warn_b;

        let diff = pos_diff(&orig_upos, &adv_upos);
        if !diff.length_preserved {
            continue;
        }
        summary.length_preserved += 1;
        let changes = diff.changed_positions.len();
        *change_counts.entry(changes).or_insert(0) += 1;
        match changes {
            0 => summary.zero_tag_change += 1,
            1 => {
                summary.one_tag_change += 1;
                if qualifies_for_transition(edits, &diff) {
                    matrix_samples.push((orig_upos, adv_upos));
                }
            }
            _ => {}
        }
    }

    let matrix = build_transition_matrix(&matrix_samples)
        .map_err(|e| RunnerError::Other(e.to_string()))?;
    summary.transition_total = matrix.total();

    let mut paths = Vec::new();
    paths.extend(wsr_figure(&wsr_rows, out_dir)?);
    paths.extend(pos_change_figure(&change_counts, out_dir)?);
    paths.extend(transition_figure(&matrix, out_dir)?);
    paths.extend(victim_edit_figure(&victim_hist, out_dir)?);

    let summary_path = out_dir.join("analysis_summary.json");
    fs::write(&summary_path, serde_json::to_string_pretty(&summary).unwrap())?;
    paths.push(summary_path);

    Ok(AnalysisArtifacts { paths, summary })
}

fn penn_tags(tagger: &dyn Tagger, text: &str, id: &str) -> Result<Vec<String>, RunnerError> {
    let pairs = tagger
        .tag(text)
        .map_err(|e| RunnerError::Other(format!("sample {id:?}: {e}")))?;
    Ok(pairs.into_iter().map(|(_, tag)| tag).collect())
}
