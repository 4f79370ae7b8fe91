//! The beam search over word edits.
//!
//! Search state is a frontier of partial adversarial texts. Each depth
//! expands every retained node at one token position with the provider's
//! substitutions plus DELETE and SKIP, scores all children against the
//! victim in a single batch, prunes back to the `k` children with the lowest
//! gold-class probability, and collects every pruned-in node whose predicted
//! label differs from the gold label. Once `h` label-flipping hypotheses
//! exist, the one most similar to the original text wins.

use alloc::collections::BTreeSet;
use alloc::format;
use alloc::string::{String, ToString};
use alloc::vec::Vec;
use core::fmt;

use serde::{Deserialize, Serialize};

use crate::bodega::{Similarity, SimilarityError};
use crate::candidates::{expand_position, CandidateProvider};
use crate::importance::{
    lime_importance, logit_importance_with_root, ImportanceError, ImportanceMethod, LimeConfig,
};
use crate::text::{apply_edits, non_skip_count, Edit, TokenizedDocument};
use crate::victim::{predict_label, score_batch, Phase, QueryCounts, QueryLedger, Victim};

/// How nodes choose the position to expand at each depth.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ExpansionPolicy {
    /// Every node at depth `d` expands the `d`-th most important position.
    /// Skipping consumes the position: the search moves on.
    FixedOrder,
    /// Each node expands its own most important position not yet consumed.
    /// Skipping does not consume, so a node may stall on a position.
    FreeOrder,
}

/// Search hyperparameters.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct AttackConfig {
    /// Beam width: nodes retained after each pruning pass.
    pub beam_size_k: usize,
    /// Substitution candidates requested per expanded position.
    pub branching_b: usize,
    /// Label-flipping hypotheses to collect before selecting the answer.
    pub hypothesis_count_h: usize,
    pub importance_method: ImportanceMethod,
    /// Maximum search depth; `None` means the document's token count.
    pub max_depth: Option<usize>,
    /// Hard budget on victim queries per attacked sample.
    pub max_queries: u64,
    pub expansion_policy: ExpansionPolicy,
    pub lime: LimeConfig,
}

impl Default for AttackConfig {
    fn default() -> Self {
        AttackConfig {
            beam_size_k: 10,
            branching_b: 10,
            hypothesis_count_h: 10,
            importance_method: ImportanceMethod::Logit,
            max_depth: None,
            max_queries: 20_000,
            expansion_policy: ExpansionPolicy::FixedOrder,
            lime: LimeConfig::default(),
        }
    }
}

impl AttackConfig {
    pub fn validate(&self) -> Result<(), AttackError> {
        if self.beam_size_k == 0 {
            return Err(AttackError::InvalidConfig("beam_size_k must be >= 1".to_string()));
        }
        if self.hypothesis_count_h == 0 {
            return Err(AttackError::InvalidConfig(
                "hypothesis_count_h must be >= 1".to_string(),
            ));
        }
        let per_depth = self.beam_size_k as u64 * (self.branching_b as u64 + 2);
        if self.max_queries < per_depth {
            return Err(AttackError::InvalidConfig(format!(
                "max_queries {} cannot cover one depth of k*(b+2) = {} queries",
                self.max_queries, per_depth
            )));
        }
        Ok(())
    }
}

/// One retained partial adversarial text.
#[derive(Debug, Clone, PartialEq)]
pub struct BeamNode {
    pub edits: Vec<Edit>,
    pub text: String,
    /// Victim's current probability for the gold label on `text`.
    pub gold_prob: f64,
    pub predicted_label: usize,
    /// Equals `edits.len()`, skip edits included.
    pub depth: usize,
    pub consumed_positions: BTreeSet<usize>,
}

impl BeamNode {
    fn non_skip_edits(&self) -> usize {
        non_skip_count(&self.edits)
    }
}

/// A label-flipping candidate, with the similarity it scored during final
/// selection.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Hypothesis {
    pub text: String,
    pub gold_prob: f64,
    pub similarity: f64,
    pub edits: Vec<Edit>,
}

/// The result of attacking one document.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AttackOutcome {
    pub success: bool,
    /// The selected adversarial text, or the original text on failure.
    pub adversarial_text: String,
    pub chosen_edits: Vec<Edit>,
    pub hypotheses: Vec<Hypothesis>,
    pub queries: QueryCounts,
    /// Filled in by the caller; not part of the persisted outcome so that
    /// identical runs serialize identically.
    #[serde(skip)]
    pub wall_time_s: f64,
    pub error: Option<String>,
}

impl AttackOutcome {
    fn failure(doc: &TokenizedDocument, queries: QueryCounts, error: Option<String>) -> Self {
        AttackOutcome {
            success: false,
            adversarial_text: doc.raw_text.clone(),
            chosen_edits: Vec::new(),
            hypotheses: Vec::new(),
            queries,
            wall_time_s: 0.0,
            error,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum AttackError {
    InvalidConfig(String),
    /// The success set handed to [`select_final`] was empty.
    EmptySuccessSet,
}

impl fmt::Display for AttackError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            AttackError::InvalidConfig(detail) => write!(f, "invalid attack config: {detail}"),
            AttackError::EmptySuccessSet => write!(f, "success set is empty"),
        }
    }
}

impl core::error::Error for AttackError {}

struct SuccessCandidate {
    text: String,
    gold_prob: f64,
    edits: Vec<Edit>,
    non_skip: usize,
}

/// Faults that abort the search for one sample but must not crash a run.
enum SearchFault {
    Victim(String),
    Similarity(String),
}

impl From<ImportanceError> for SearchFault {
    fn from(e: ImportanceError) -> Self {
        SearchFault::Victim(e.to_string())
    }
}

impl From<SimilarityError> for SearchFault {
    fn from(e: SimilarityError) -> Self {
        SearchFault::Similarity(e.to_string())
    }
}

/// Run the beam-search attack on one document.
///
/// Returns `Err` only for invalid configuration; victim or similarity
/// failures mid-search yield a failure outcome carrying the error note.
pub fn attack(
    doc: &TokenizedDocument,
    victim: &dyn Victim,
    provider: &dyn CandidateProvider,
    similarity: &dyn Similarity,
    config: &AttackConfig,
) -> Result<AttackOutcome, AttackError> {
    config.validate()?;
    let ledger = QueryLedger::new();
    match search(doc, victim, provider, similarity, config, &ledger) {
        Ok(outcome) => Ok(outcome),
        Err(SearchFault::Victim(note)) => Ok(AttackOutcome::failure(
            doc,
            ledger.snapshot(),
            Some(format!("victim unavailable: {note}")),
        )),
        Err(SearchFault::Similarity(note)) => Ok(AttackOutcome::failure(
            doc,
            ledger.snapshot(),
            Some(format!("similarity scorer failed: {note}")),
        )),
    }
}

fn search(
    doc: &TokenizedDocument,
    victim: &dyn Victim,
    provider: &dyn CandidateProvider,
    similarity: &dyn Similarity,
    config: &AttackConfig,
    ledger: &QueryLedger,
) -> Result<AttackOutcome, SearchFault> {
    let n = doc.tokens.len();

    // Importance phase. The logit ranker scores the unmodified text inside
    // its own batch, so the root probability costs nothing extra.
    let (ranking, root_prob) = match config.importance_method {
        ImportanceMethod::Logit => logit_importance_with_root(doc, victim, ledger)?,
        ImportanceMethod::Lime => {
            let probs = score_batch(victim, &[doc.raw_text.as_str()], ledger, Phase::Importance)
                .map_err(|e| SearchFault::Victim(e.to_string()))?;
            let root = probs[0]
                .get(doc.gold_label)
                .copied()
                .ok_or_else(|| SearchFault::Victim("gold label out of range".to_string()))?;
            let ranking = lime_importance(doc, victim, &config.lime, ledger)?;
            (ranking, root)
        }
    };

    let max_depth = match config.expansion_policy {
        ExpansionPolicy::FixedOrder => config.max_depth.unwrap_or(n).min(n),
        ExpansionPolicy::FreeOrder => config.max_depth.unwrap_or(n),
    };

    // The root never enters the success set (only pruned children are
    // checked), so its predicted label is a placeholder.
    let root = BeamNode {
        edits: Vec::new(),
        text: doc.raw_text.clone(),
        gold_prob: root_prob,
        predicted_label: doc.gold_label,
        depth: 0,
        consumed_positions: BTreeSet::new(),
    };

    let mut beam: Vec<BeamNode> = alloc::vec![root];
    let mut successes: Vec<SuccessCandidate> = Vec::new();

    for depth in 1..=max_depth {
        // Plan this depth's children: (parent index, edit, expansion order).
        let mut planned: Vec<(usize, Edit)> = Vec::new();
        for (parent_idx, node) in beam.iter().enumerate() {
            let position = match config.expansion_policy {
                ExpansionPolicy::FixedOrder => ranking.order[depth - 1],
                ExpansionPolicy::FreeOrder => {
                    match ranking
                        .order
                        .iter()
                        .copied()
                        .find(|p| !node.consumed_positions.contains(p))
                    {
                        Some(p) => p,
                        None => continue, // node has nothing left to edit
                    }
                }
            };
            let expansion =
                expand_position(doc, &node.edits, position, config.branching_b, provider)
                    .expect("expansion positions are always in range");
            for edit in expansion.options() {
                planned.push((parent_idx, edit));
            }
        }
        if planned.is_empty() {
            break;
        }
        if ledger.total() + planned.len() as u64 > config.max_queries {
            break;
        }

        let texts: Vec<String> = planned
            .iter()
            .map(|(parent_idx, edit)| {
                let parent = &beam[*parent_idx];
                let mut edits = parent.edits.clone();
                edits.push(edit.clone());
                apply_edits(doc, &edits).expect("planned edits are always valid")
            })
            .collect();
        let refs: Vec<&str> = texts.iter().map(String::as_str).collect();
        let probs = score_batch(victim, &refs, ledger, Phase::Expansion)
            .map_err(|e| SearchFault::Victim(e.to_string()))?;

        let mut children: Vec<(BeamNode, usize)> = Vec::with_capacity(planned.len());
        for (expansion_idx, (((parent_idx, edit), text), prob_vec)) in
            planned.into_iter().zip(texts).zip(&probs).enumerate()
        {
            let parent = &beam[parent_idx];
            let gold_prob = prob_vec
                .get(doc.gold_label)
                .copied()
                .ok_or_else(|| SearchFault::Victim("gold label out of range".to_string()))?;
            let mut edits = parent.edits.clone();
            let mut consumed = parent.consumed_positions.clone();
            let consumes = match config.expansion_policy {
                ExpansionPolicy::FixedOrder => true,
                ExpansionPolicy::FreeOrder => !edit.is_skip(),
            };
            if consumes {
                consumed.insert(edit.position);
            }
            edits.push(edit);
            children.push((
                BeamNode {
                    edits,
                    text,
                    gold_prob,
                    predicted_label: predict_label(prob_vec),
                    depth,
                    consumed_positions: consumed,
                },
                expansion_idx,
            ));
        }

        // Prune: lowest gold probability first, then fewer real edits, then
        // earlier expansion order. Fully deterministic.
        children.sort_by(|(a, ai), (b, bi)| {
            a.gold_prob
                .total_cmp(&b.gold_prob)
                .then_with(|| a.non_skip_edits().cmp(&b.non_skip_edits()))
                .then_with(|| ai.cmp(bi))
        });
        children.truncate(config.beam_size_k);
        beam = children.into_iter().map(|(node, _)| node).collect();

        for node in &beam {
            if node.predicted_label != doc.gold_label {
                push_success(&mut successes, node);
            }
        }
        if successes.len() >= config.hypothesis_count_h {
            break;
        }
    }

    if successes.is_empty() {
        return Ok(AttackOutcome::failure(doc, ledger.snapshot(), None));
    }

    // Score every hypothesis against the original and pick the most similar.
    let mut hypotheses: Vec<Hypothesis> = Vec::with_capacity(successes.len());
    for success in &successes {
        let sim = similarity.score(&doc.raw_text, &success.text)?;
        hypotheses.push(Hypothesis {
            text: success.text.clone(),
            gold_prob: success.gold_prob,
            similarity: sim.clamp(0.0, 1.0),
            edits: success.edits.clone(),
        });
    }
    let chosen = select_index(
        hypotheses
            .iter()
            .map(|h| (h.text.as_str(), h.gold_prob, h.similarity)),
    )
    .expect("hypotheses are non-empty");

    Ok(AttackOutcome {
        success: true,
        adversarial_text: hypotheses[chosen].text.clone(),
        chosen_edits: hypotheses[chosen].edits.clone(),
        hypotheses,
        queries: ledger.snapshot(),
        wall_time_s: 0.0,
        error: None,
    })
}

/// Insert a success, deduplicating by adversarial text. A duplicate replaces
/// the stored entry only if it reaches the same text with fewer real edits.
fn push_success(successes: &mut Vec<SuccessCandidate>, node: &BeamNode) {
    let non_skip = node.non_skip_edits();
    if let Some(existing) = successes.iter_mut().find(|s| s.text == node.text) {
        if non_skip < existing.non_skip {
            existing.gold_prob = node.gold_prob;
            existing.edits = node.edits.clone();
            existing.non_skip = non_skip;
        }
        return;
    }
    successes.push(SuccessCandidate {
        text: node.text.clone(),
        gold_prob: node.gold_prob,
        edits: node.edits.clone(),
        non_skip,
    });
}

/// Index of the winner among `(text, gold_prob, similarity)` triples:
/// highest similarity, then lowest gold probability, then lexicographically
/// smallest text.
fn select_index<'a, I>(candidates: I) -> Option<usize>
where
    I: IntoIterator<Item = (&'a str, f64, f64)>,
{
    let mut best: Option<(usize, &str, f64, f64)> = None;
    for (idx, (text, gold_prob, sim)) in candidates.into_iter().enumerate() {
        let better = match &best {
            None => true,
            Some((_, btext, bprob, bsim)) => sim
                .total_cmp(bsim)
                .then(bprob.total_cmp(&gold_prob))
                .then(btext.cmp(&text))
                .is_gt(),
        };
        if better {
            best = Some((idx, text, gold_prob, sim));
        }
    }
    best.map(|(idx, ..)| idx)
}

/// Pick the final adversarial text from label-flipping candidates by
/// semantic similarity to the original.
pub fn select_final(
    successes: &[(String, f64)],
    original: &str,
    similarity: &dyn Similarity,
) -> Result<String, AttackError> {
    if successes.is_empty() {
        return Err(AttackError::EmptySuccessSet);
    }
    let mut sims = Vec::with_capacity(successes.len());
    for (text, _) in successes {
        let s = similarity
            .score(original, text)
            .map_err(|e| AttackError::InvalidConfig(e.to_string()))?;
        sims.push(s.clamp(0.0, 1.0));
    }
    let idx = select_index(
        successes
            .iter()
            .zip(&sims)
            .map(|((text, prob), sim)| (text.as_str(), *prob, *sim)),
    )
    .expect("non-empty success set");
    Ok(successes[idx].0.clone())
}
