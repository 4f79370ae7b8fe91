//! Per-sample and aggregate attack-quality metrics.
//!
//! A sample scores the product of three components in [0, 1]: confusion (did
//! the victim's decision flip), semantic similarity, and character similarity
//! (one minus length-normalized Levenshtein distance).

use alloc::string::{String, ToString};
use alloc::vec::Vec;
use core::fmt;

use serde::{Deserialize, Serialize};

use crate::beam::AttackOutcome;
use crate::text::{levenshtein, non_skip_count, TokenizedDocument};
use crate::victim::{predict_label, Victim};

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SimilarityError(pub String);

impl fmt::Display for SimilarityError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "similarity scorer failed: {}", self.0)
    }
}

impl core::error::Error for SimilarityError {}

/// Semantic similarity between an original and a modified text, in [0, 1].
/// Scoring a text against itself must return the scorer's maximum.
pub trait Similarity {
    fn score(&self, original: &str, modified: &str) -> Result<f64, SimilarityError>;
}

/// Deterministic fallback scorer: token multiset F1 overlap.
///
/// `score(x, x) == 1` and `score(x, "") == 0`; no learned model required.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct TokenF1Similarity;

impl Similarity for TokenF1Similarity {
    fn score(&self, original: &str, modified: &str) -> Result<f64, SimilarityError> {
        let a: Vec<&str> = original.split_whitespace().collect();
        let b: Vec<&str> = modified.split_whitespace().collect();
        if a.is_empty() && b.is_empty() {
            return Ok(1.0);
        }
        if a.is_empty() || b.is_empty() {
            return Ok(0.0);
        }
        let mut counts: alloc::collections::BTreeMap<&str, isize> = alloc::collections::BTreeMap::new();
        for w in &a {
            *counts.entry(w).or_insert(0) += 1;
        }
        let mut overlap = 0usize;
        for w in &b {
            if let Some(c) = counts.get_mut(w) {
                if *c > 0 {
                    *c -= 1;
                    overlap += 1;
                }
            }
        }
        Ok((2.0 * overlap as f64 / (a.len() + b.len()) as f64).clamp(0.0, 1.0))
    }
}

/// Character-level similarity: `1 - levenshtein / max(len)`, lengths in
/// characters. Both strings identical gives 1; total erasure gives 0.
pub fn character_score(original: &str, adversarial: &str) -> f64 {
    let dist = levenshtein(original, adversarial);
    let max_len = original.chars().count().max(adversarial.chars().count());
    if max_len == 0 {
        return 1.0;
    }
    (1.0 - dist as f64 / max_len as f64).clamp(0.0, 1.0)
}

/// The measured quality of one attacked sample.
///
/// `bodega` is exactly `confusion * semantic * character`. Records with
/// `valid == false` (victim or scorer unavailable during evaluation) are
/// excluded from aggregates.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EvaluationRecord {
    pub sample_id: String,
    pub valid: bool,
    pub confusion: u8,
    pub semantic: f64,
    pub character: f64,
    pub bodega: f64,
    pub wsr_percent: f64,
    /// Victim queries spent on the sample: attack total plus the one
    /// verification re-query.
    pub queries: u64,
    pub success_edits: usize,
    pub wall_time_s: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub note: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum EvalError {
    NoValidRecords,
}

impl fmt::Display for EvalError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            EvalError::NoValidRecords => write!(f, "no valid evaluation records"),
        }
    }
}

impl core::error::Error for EvalError {}

/// Score one attack outcome: re-query the victim on the adversarial text for
/// the confusion component, then compose the metrics.
///
/// A victim or similarity failure flags the record invalid instead of
/// erroring, so evaluation loops never abort.
pub fn evaluate_sample(
    doc: &TokenizedDocument,
    outcome: &AttackOutcome,
    victim: &dyn Victim,
    similarity: &dyn Similarity,
) -> EvaluationRecord {
    let mut valid = true;
    let mut note = None;

    let mut verification_queries = 0u64;
    let confusion = match victim.predict_proba(&[outcome.adversarial_text.as_str()]) {
        Ok(probs) => {
            verification_queries = 1;
            u8::from(predict_label(&probs[0]) != doc.gold_label)
        }
        Err(e) => {
            valid = false;
            note = Some(e.to_string());
            0
        }
    };

    let semantic = match similarity.score(&doc.raw_text, &outcome.adversarial_text) {
        Ok(s) => s.clamp(0.0, 1.0),
        Err(e) => {
            valid = false;
            note = Some(e.to_string());
            0.0
        }
    };

    let character = character_score(&doc.raw_text, &outcome.adversarial_text);
    let bodega = f64::from(confusion) * semantic * character;
    let success_edits = non_skip_count(&outcome.chosen_edits);
    let wsr_percent = 100.0 * success_edits as f64 / doc.tokens.len() as f64;

    EvaluationRecord {
        sample_id: doc.id.clone(),
        valid,
        confusion,
        semantic,
        character,
        bodega,
        wsr_percent,
        queries: outcome.queries.total + verification_queries,
        success_edits,
        wall_time_s: outcome.wall_time_s,
        note,
    }
}

/// Aggregate metrics over valid records, in the report column order:
/// BODEGA, confusion (success rate), semantic, character, queries.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Summary {
    pub bodega_mean: f64,
    pub success_rate: f64,
    pub semantic_mean: f64,
    pub character_mean: f64,
    pub queries_per_example: f64,
    /// BODEGA averaged only over samples whose decision flipped; `None`
    /// when nothing succeeded.
    pub bodega_mean_success_only: Option<f64>,
    pub samples: usize,
    pub valid_records: usize,
    pub invalid_records: usize,
    pub successes: usize,
}

/// Arithmetic means over the valid records.
pub fn aggregate(records: &[EvaluationRecord]) -> Result<Summary, EvalError> {
    let valid: Vec<&EvaluationRecord> = records.iter().filter(|r| r.valid).collect();
    if valid.is_empty() {
        return Err(EvalError::NoValidRecords);
    }
    let n = valid.len() as f64;
    let successes: Vec<&&EvaluationRecord> = valid.iter().filter(|r| r.confusion == 1).collect();
    let mean = |f: &dyn Fn(&EvaluationRecord) -> f64| valid.iter().map(|r| f(r)).sum::<f64>() / n;

    let bodega_mean_success_only = if successes.is_empty() {
        None
    } else {
        Some(successes.iter().map(|r| r.bodega).sum::<f64>() / successes.len() as f64)
    };

    Ok(Summary {
        bodega_mean: mean(&|r| r.bodega),
        success_rate: mean(&|r| f64::from(r.confusion)),
        semantic_mean: mean(&|r| r.semantic),
        character_mean: mean(&|r| r.character),
        queries_per_example: mean(&|r| r.queries as f64),
        bodega_mean_success_only,
        samples: records.len(),
        valid_records: valid.len(),
        invalid_records: records.len() - valid.len(),
        successes: successes.len(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::text::{tokenize, Edit};
    use crate::victim::{KeywordRuleVictim, QueryCounts};
    use alloc::vec;

    fn outcome_for(doc: &TokenizedDocument, text: &str, edits: Vec<Edit>) -> AttackOutcome {
        AttackOutcome {
            success: text != doc.raw_text,
            adversarial_text: text.to_string(),
            chosen_edits: edits,
            hypotheses: Vec::new(),
            queries: QueryCounts {
                importance: 3,
                expansion: 6,
                verification: 0,
                total: 9,
            },
            wall_time_s: 0.0,
            error: None,
        }
    }

    #[test]
    fn character_score_known_values() {
        assert_eq!(character_score("same", "same"), 1.0);
        // 1 - 3/7, frozen from the DP oracle.
        assert!((character_score("kitten", "sitting") - (1.0 - 3.0 / 7.0)).abs() < 1e-12);
        assert_eq!(character_score("ab", ""), 0.0);
    }

    #[test]
    fn failure_outcome_scores_zero_bodega() {
        let doc = tokenize("fake story", "d0", 1).unwrap();
        let victim = KeywordRuleVictim::new(["fake".to_string()]);
        let outcome = outcome_for(&doc, "fake story", vec![]);
        let record = evaluate_sample(&doc, &outcome, &victim, &TokenF1Similarity);
        assert!(record.valid);
        assert_eq!(record.confusion, 0);
        assert_eq!(record.character, 1.0);
        assert_eq!(record.semantic, 1.0);
        assert_eq!(record.bodega, 0.0);
        assert_eq!(record.wsr_percent, 0.0);
        assert_eq!(record.queries, 10);
    }

    #[test]
    fn bodega_is_product_of_components() {
        let doc = tokenize("fake story", "d0", 1).unwrap();
        let victim = KeywordRuleVictim::new(["fake".to_string()]);
        let outcome = outcome_for(&doc, "true story", vec![Edit::substitute(0, "true")]);
        let record = evaluate_sample(&doc, &outcome, &victim, &TokenF1Similarity);
        assert_eq!(record.confusion, 1);
        assert_eq!(
            record.bodega,
            f64::from(record.confusion) * record.semantic * record.character
        );
        assert_eq!(record.wsr_percent, 50.0);
        assert_eq!(record.success_edits, 1);
    }

    #[test]
    fn published_row_sanity() {
        // con 1.00, sem 0.91, char 0.99 composes to ~0.90.
        let bodega: f64 = 1.00 * 0.91 * 0.99;
        assert!((bodega - 0.9009).abs() < 1e-12);
        assert!((bodega - 0.90).abs() < 0.005);
    }

    #[test]
    fn wsr_counts_edits_over_original_tokens() {
        let doc = tokenize("a b c d e f g h i j", "d0", 1).unwrap();
        let victim = KeywordRuleVictim::new(["a".to_string()]);
        let outcome = outcome_for(&doc, "x b c d e f g h i j", vec![Edit::substitute(0, "x")]);
        let record = evaluate_sample(&doc, &outcome, &victim, &TokenF1Similarity);
        assert_eq!(record.wsr_percent, 10.0);
    }

    #[test]
    fn aggregate_means_and_success_only_split() {
        let base = EvaluationRecord {
            sample_id: "s".to_string(),
            valid: true,
            confusion: 1,
            semantic: 1.0,
            character: 1.0,
            bodega: 0.2,
            wsr_percent: 0.0,
            queries: 10,
            success_edits: 1,
            wall_time_s: 0.0,
            note: None,
        };
        let mut second = base.clone();
        second.bodega = 0.6;
        let summary = aggregate(&[base.clone(), second]).unwrap();
        assert!((summary.bodega_mean - 0.4).abs() < 1e-12);
        assert_eq!(summary.successes, 2);

        // Mean of products differs from product of means.
        let rec = |sem: f64, ch: f64| EvaluationRecord {
            semantic: sem,
            character: ch,
            bodega: sem * ch,
            ..base.clone()
        };
        let records = [rec(0.5, 1.0), rec(1.0, 0.5)];
        let summary = aggregate(&records).unwrap();
        let product_of_means = summary.success_rate * summary.semantic_mean * summary.character_mean;
        assert!((summary.bodega_mean - 0.5).abs() < 1e-12);
        assert!((product_of_means - 0.5625).abs() < 1e-12);
        assert!((summary.bodega_mean - product_of_means).abs() > 0.05);
    }

    #[test]
    fn aggregate_excludes_invalid_records() {
        let valid = EvaluationRecord {
            sample_id: "a".to_string(),
            valid: true,
            confusion: 0,
            semantic: 0.8,
            character: 0.9,
            bodega: 0.0,
            wsr_percent: 0.0,
            queries: 4,
            success_edits: 0,
            wall_time_s: 0.0,
            note: None,
        };
        let mut invalid = valid.clone();
        invalid.valid = false;
        let summary = aggregate(&[valid, invalid]).unwrap();
        assert_eq!(summary.valid_records, 1);
        assert_eq!(summary.invalid_records, 1);
        assert_eq!(summary.bodega_mean_success_only, None);

        assert_eq!(
            aggregate(&[]).unwrap_err(),
            EvalError::NoValidRecords
        );
    }

    #[test]
    fn token_f1_extremes() {
        let sim = TokenF1Similarity;
        assert_eq!(sim.score("a b c", "a b c").unwrap(), 1.0);
        assert_eq!(sim.score("a b c", "").unwrap(), 0.0);
        let half = sim.score("a b", "a x").unwrap();
        assert!((half - 0.5).abs() < 1e-12);
    }
}
