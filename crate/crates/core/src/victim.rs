//! The grey-box victim contract, query accounting, and the built-in
//! desk-scale victims used for testing and calibration.

use alloc::collections::{BTreeMap, BTreeSet};
use alloc::string::String;
use alloc::vec::Vec;
use core::fmt;
use core::sync::atomic::{AtomicU64, Ordering};

use serde::{Deserialize, Serialize};

use crate::text::MASK_TOKEN;

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum VictimError {
    /// Transport failure, bad schema, or malformed response from a victim.
    Unavailable(String),
}

impl fmt::Display for VictimError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            VictimError::Unavailable(detail) => write!(f, "victim unavailable: {detail}"),
        }
    }
}

impl core::error::Error for VictimError {}

/// A classifier under attack. Grey-box access: class probabilities are
/// observable, internals are not.
///
/// Implementations must be deterministic for identical inputs and must
/// return one probability vector of length `num_classes` per input text,
/// non-negative and summing to 1 (within 1e-6).
pub trait Victim {
    fn num_classes(&self) -> usize;

    /// Score a batch of texts. Does not touch any ledger; use
    /// [`score_batch`] for counted access.
    fn predict_proba(&self, texts: &[&str]) -> Result<Vec<Vec<f64>>, VictimError>;

    /// Predicted class per text: argmax with ties broken toward the lower
    /// class index.
    fn predict(&self, texts: &[&str]) -> Result<Vec<usize>, VictimError> {
        Ok(self
            .predict_proba(texts)?
            .iter()
            .map(|p| predict_label(p))
            .collect())
    }
}

/// Argmax over a probability vector, ties toward the lower class index.
pub fn predict_label(probs: &[f64]) -> usize {
    let mut best = 0usize;
    for (i, &p) in probs.iter().enumerate().skip(1) {
        if p > probs[best] {
            best = i;
        }
    }
    best
}

/// Attack phases that spend victim queries.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Phase {
    Importance,
    Expansion,
    Verification,
}

impl Phase {
    pub fn as_str(self) -> &'static str {
        match self {
            Phase::Importance => "importance",
            Phase::Expansion => "expansion",
            Phase::Verification => "verification",
        }
    }
}

/// Counts every individual text scored by a victim, broken down by phase.
/// Batches of n texts count as n queries. Safe for concurrent increments.
#[derive(Debug, Default)]
pub struct QueryLedger {
    importance: AtomicU64,
    expansion: AtomicU64,
    verification: AtomicU64,
}

impl QueryLedger {
    pub fn new() -> Self {
        QueryLedger::default()
    }

    pub fn record(&self, phase: Phase, texts: u64) {
        let counter = match phase {
            Phase::Importance => &self.importance,
            Phase::Expansion => &self.expansion,
            Phase::Verification => &self.verification,
        };
        counter.fetch_add(texts, Ordering::Relaxed);
    }

    pub fn total(&self) -> u64 {
        self.importance.load(Ordering::Relaxed)
            + self.expansion.load(Ordering::Relaxed)
            + self.verification.load(Ordering::Relaxed)
    }

    pub fn snapshot(&self) -> QueryCounts {
        let importance = self.importance.load(Ordering::Relaxed);
        let expansion = self.expansion.load(Ordering::Relaxed);
        let verification = self.verification.load(Ordering::Relaxed);
        QueryCounts {
            importance,
            expansion,
            verification,
            total: importance + expansion + verification,
        }
    }
}

/// Immutable snapshot of a [`QueryLedger`]. `total` always equals the sum of
/// the per-phase counts.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct QueryCounts {
    pub importance: u64,
    pub expansion: u64,
    pub verification: u64,
    pub total: u64,
}

/// Score `texts` against `victim`, charging the ledger one query per text.
pub fn score_batch(
    victim: &dyn Victim,
    texts: &[&str],
    ledger: &QueryLedger,
    phase: Phase,
) -> Result<Vec<Vec<f64>>, VictimError> {
    if texts.is_empty() {
        return Ok(Vec::new());
    }
    let probs = victim.predict_proba(texts)?;
    if probs.len() != texts.len() {
        return Err(VictimError::Unavailable(alloc::format!(
            "victim returned {} vectors for {} texts",
            probs.len(),
            texts.len()
        )));
    }
    ledger.record(phase, texts.len() as u64);
    Ok(probs)
}

fn sigmoid(x: f64) -> f64 {
    1.0 / (1.0 + libm::exp(-x))
}

/// Binary bag-of-words victim: class-1 probability is
/// `sigmoid(bias + sum of coefficients of present tokens)`.
///
/// Tokens absent from the vocabulary (including the mask token) carry zero
/// weight, so masking a word removes exactly its coefficient from the logit.
/// This analytic behavior is what the importance-ranker tests lean on.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LinearBagVictim {
    pub vocabulary: BTreeMap<String, f64>,
    pub bias: f64,
    #[serde(default = "default_mask_token")]
    pub mask_token: String,
}

fn default_mask_token() -> String {
    String::from(MASK_TOKEN)
}

impl LinearBagVictim {
    pub fn new(vocabulary: BTreeMap<String, f64>, bias: f64) -> Self {
        LinearBagVictim {
            vocabulary,
            bias,
            mask_token: default_mask_token(),
        }
    }

    /// Class-1 logit of a text.
    pub fn logit(&self, text: &str) -> f64 {
        let mut z = self.bias;
        for word in text.split_whitespace() {
            if word == self.mask_token {
                continue;
            }
            if let Some(coeff) = self.vocabulary.get(word) {
                z += coeff;
            }
        }
        z
    }
}

impl Victim for LinearBagVictim {
    fn num_classes(&self) -> usize {
        2
    }

    fn predict_proba(&self, texts: &[&str]) -> Result<Vec<Vec<f64>>, VictimError> {
        Ok(texts
            .iter()
            .map(|t| {
                let p1 = sigmoid(self.logit(t));
                alloc::vec![1.0 - p1, p1]
            })
            .collect())
    }
}

/// Rule victim: predicts class 1 only while every trigger word is present;
/// removing any trigger flips the label.
///
/// The class-1 probability degrades with the fraction of triggers present
/// (`0.4 * present/total` once any is missing) so beam search still sees a
/// gradient on multi-trigger texts.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct KeywordRuleVictim {
    pub triggers: BTreeSet<String>,
}

impl KeywordRuleVictim {
    pub fn new(triggers: impl IntoIterator<Item = String>) -> Self {
        KeywordRuleVictim {
            triggers: triggers.into_iter().collect(),
        }
    }

    fn class1_probability(&self, text: &str) -> f64 {
        if self.triggers.is_empty() {
            return 0.9;
        }
        let words: BTreeSet<&str> = text.split_whitespace().collect();
        let present = self
            .triggers
            .iter()
            .filter(|t| words.contains(t.as_str()))
            .count();
        if present == self.triggers.len() {
            0.9
        } else {
            0.4 * present as f64 / self.triggers.len() as f64
        }
    }
}

impl Victim for KeywordRuleVictim {
    fn num_classes(&self) -> usize {
        2
    }

    fn predict_proba(&self, texts: &[&str]) -> Result<Vec<Vec<f64>>, VictimError> {
        Ok(texts
            .iter()
            .map(|t| {
                let p1 = self.class1_probability(t);
                alloc::vec![1.0 - p1, p1]
            })
            .collect())
    }
}

/// Victim that answers a fixed probability vector for every text. Useful as
/// an unattackable opponent in query-accounting tests.
#[derive(Debug, Clone, PartialEq)]
pub struct ConstantVictim {
    pub probabilities: Vec<f64>,
}

impl Victim for ConstantVictim {
    fn num_classes(&self) -> usize {
        self.probabilities.len()
    }

    fn predict_proba(&self, texts: &[&str]) -> Result<Vec<Vec<f64>>, VictimError> {
        Ok(texts.iter().map(|_| self.probabilities.clone()).collect())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::string::ToString;
    use alloc::vec;

    fn fake_victim() -> LinearBagVictim {
        let mut vocab = BTreeMap::new();
        vocab.insert("fake".to_string(), 2.0);
        LinearBagVictim::new(vocab, 0.0)
    }

    #[test]
    fn linear_bag_matches_closed_form_sigmoid() {
        let v = fake_victim();
        let probs = v.predict_proba(&["fake news"]).unwrap();
        // sigmoid(2.0), frozen from the closed form 1/(1+e^-2).
        let expected = 0.8807970779778823;
        assert!((probs[0][1] - expected).abs() < 1e-12);
        assert!((probs[0][0] + probs[0][1] - 1.0).abs() < 1e-12);
    }

    #[test]
    fn linear_bag_empty_text_is_coin_flip() {
        let v = fake_victim();
        let probs = v.predict_proba(&[""]).unwrap();
        assert_eq!(probs[0], vec![0.5, 0.5]);
    }

    #[test]
    fn mask_token_carries_no_weight() {
        let mut vocab = BTreeMap::new();
        vocab.insert("[MASK]".to_string(), 5.0);
        vocab.insert("x".to_string(), 1.0);
        let v = LinearBagVictim::new(vocab, 0.0);
        assert_eq!(v.logit("[MASK] x"), 1.0);
    }

    #[test]
    fn ledger_counts_texts_not_batches() {
        let v = fake_victim();
        let ledger = QueryLedger::new();
        score_batch(&v, &["a", "b", "c"], &ledger, Phase::Expansion).unwrap();
        assert_eq!(ledger.total(), 3);
        score_batch(&v, &["d"], &ledger, Phase::Importance).unwrap();
        let snap = ledger.snapshot();
        assert_eq!(snap.expansion, 3);
        assert_eq!(snap.importance, 1);
        assert_eq!(snap.total, 4);
        assert_eq!(snap.total, snap.importance + snap.expansion + snap.verification);
    }

    #[test]
    fn predict_breaks_ties_toward_lower_class() {
        assert_eq!(predict_label(&[0.5, 0.5]), 0);
        assert_eq!(predict_label(&[0.2, 0.3, 0.3, 0.2]), 1);
        assert_eq!(predict_label(&[0.1, 0.9]), 1);
    }

    #[test]
    fn keyword_rule_flips_when_any_trigger_disappears() {
        let v = KeywordRuleVictim::new(["fake".to_string(), "hoax".to_string()]);
        assert_eq!(v.predict(&["a fake hoax story"]).unwrap(), vec![1]);
        assert_eq!(v.predict(&["a fake story"]).unwrap(), vec![0]);
        assert_eq!(v.predict(&["a story"]).unwrap(), vec![0]);
        // Gradient: more triggers present means higher class-1 probability.
        let p_one = v.class1_probability("fake story");
        let p_none = v.class1_probability("story");
        assert!(p_one > p_none);
        assert!(p_one < 0.5);
    }

    #[test]
    fn removing_a_token_shifts_logit_by_its_coefficient() {
        let mut vocab = BTreeMap::new();
        vocab.insert("fake".to_string(), 2.0);
        vocab.insert("news".to_string(), 0.5);
        let v = LinearBagVictim::new(vocab, 0.25);
        let full = v.logit("fake news");
        let without = v.logit("news");
        assert!((full - without - 2.0).abs() < 1e-12);
    }
}
