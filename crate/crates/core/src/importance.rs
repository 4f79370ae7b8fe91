//! Word importance ranking: which token positions most influence the
//! victim's belief in the gold label.
//!
//! Two rankers are provided. The logit ranker masks one token at a time and
//! measures the drop in gold-class log-odds. The LIME ranker fits a weighted
//! ridge surrogate over random token-drop perturbations and reads the
//! per-token coefficients.

use alloc::string::String;
use alloc::vec;
use alloc::vec::Vec;
use core::fmt;

use rand_chacha::ChaCha8Rng;
use rand_core::{RngCore, SeedableRng};
use serde::{Deserialize, Serialize};

use crate::text::{apply_edits, Edit, TokenizedDocument, MASK_TOKEN};
use crate::victim::{score_batch, Phase, QueryLedger, Victim, VictimError};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ImportanceMethod {
    Logit,
    Lime,
}

impl fmt::Display for ImportanceMethod {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.pad(match self {
            ImportanceMethod::Logit => "logit",
            ImportanceMethod::Lime => "lime",
        })
    }
}

/// Per-position importance scores and the induced visit order.
///
/// `order` is all token positions sorted by descending score, ties broken
/// toward the lower position index. `used_fallback` is set when a LIME
/// ranking had to fall back to the logit method (singular surrogate).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ImportanceRanking {
    pub scores: Vec<f64>,
    pub order: Vec<usize>,
    pub method: ImportanceMethod,
    pub queries_used: u64,
    pub used_fallback: bool,
}

/// Sampling and surrogate parameters for the LIME ranker.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct LimeConfig {
    pub num_samples: usize,
    pub kernel_width_factor: f64,
    pub surrogate_regularization: f64,
    pub rng_seed: u64,
}

impl Default for LimeConfig {
    fn default() -> Self {
        LimeConfig {
            num_samples: 500,
            kernel_width_factor: 0.25,
            surrogate_regularization: 1.0,
            rng_seed: 0,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum ImportanceError {
    Victim(VictimError),
    /// The document has too few tokens for the requested ranker.
    TooFewTokens { needed: usize, got: usize },
    /// `num_samples` must be at least twice the token count.
    TooFewSamples { needed: usize, got: usize },
    /// Gold label index not covered by the victim's classes.
    GoldLabelOutOfRange { gold_label: usize, num_classes: usize },
}

impl fmt::Display for ImportanceError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ImportanceError::Victim(e) => write!(f, "{e}"),
            ImportanceError::TooFewTokens { needed, got } => {
                write!(f, "ranking needs at least {needed} tokens, got {got}")
            }
            ImportanceError::TooFewSamples { needed, got } => {
                write!(f, "lime needs at least {needed} samples for this document, got {got}")
            }
            ImportanceError::GoldLabelOutOfRange {
                gold_label,
                num_classes,
            } => write!(f, "gold label {gold_label} out of range for {num_classes} classes"),
        }
    }
}

impl core::error::Error for ImportanceError {}

impl From<VictimError> for ImportanceError {
    fn from(e: VictimError) -> Self {
        ImportanceError::Victim(e)
    }
}

const PROB_CLAMP: f64 = 1e-12;

/// Gold-class log-odds of a probability, clamped away from 0 and 1.
fn log_odds(p: f64) -> f64 {
    let p = p.clamp(PROB_CLAMP, 1.0 - PROB_CLAMP);
    libm::log(p / (1.0 - p))
}

fn gold_prob(probs: &[f64], gold: usize, classes: usize) -> Result<f64, ImportanceError> {
    probs
        .get(gold)
        .copied()
        .ok_or(ImportanceError::GoldLabelOutOfRange {
            gold_label: gold,
            num_classes: classes,
        })
}

/// Positions sorted by descending score; ties go to the lower index.
pub fn rank_positions(scores: &[f64]) -> Vec<usize> {
    let mut order: Vec<usize> = (0..scores.len()).collect();
    order.sort_by(|&a, &b| scores[b].total_cmp(&scores[a]).then(a.cmp(&b)));
    order
}

/// Logit-based importance: score of token `i` is the gold-class log-odds of
/// the original text minus the log-odds with token `i` masked.
///
/// Costs exactly `token_count + 1` victim queries.
pub fn logit_importance(
    doc: &TokenizedDocument,
    victim: &dyn Victim,
    ledger: &QueryLedger,
) -> Result<ImportanceRanking, ImportanceError> {
    logit_importance_with_root(doc, victim, ledger).map(|(ranking, _)| ranking)
}

/// As [`logit_importance`], also returning the gold-class probability of the
/// unmodified text (scored inside the same query batch).
pub(crate) fn logit_importance_with_root(
    doc: &TokenizedDocument,
    victim: &dyn Victim,
    ledger: &QueryLedger,
) -> Result<(ImportanceRanking, f64), ImportanceError> {
    let n = doc.tokens.len();
    if n == 0 {
        return Err(ImportanceError::TooFewTokens { needed: 1, got: 0 });
    }

    let mut texts: Vec<String> = Vec::with_capacity(n + 1);
    texts.push(doc.raw_text.clone());
    for i in 0..n {
        let masked = apply_edits(doc, &[Edit::substitute(i, MASK_TOKEN)])
            .expect("mask position is always in range");
        texts.push(masked);
    }
    let refs: Vec<&str> = texts.iter().map(String::as_str).collect();
    let probs = score_batch(victim, &refs, ledger, Phase::Importance)?;

    let classes = victim.num_classes();
    let original = gold_prob(&probs[0], doc.gold_label, classes)?;
    let base = log_odds(original);
    let mut scores = Vec::with_capacity(n);
    for masked in &probs[1..] {
        let p = gold_prob(masked, doc.gold_label, classes)?;
        scores.push(base - log_odds(p));
    }

    let order = rank_positions(&scores);
    Ok((
        ImportanceRanking {
            scores,
            order,
            method: ImportanceMethod::Logit,
            queries_used: n as u64 + 1,
            used_fallback: false,
        },
        original,
    ))
}

/// LIME importance: fit a weighted ridge surrogate to the victim's gold-class
/// probability over random token-drop masks; a token's score is its surrogate
/// coefficient.
///
/// Deterministic given `config.rng_seed`. Costs `config.num_samples` victim
/// queries, plus a logit-ranking fallback if the surrogate is singular.
pub fn lime_importance(
    doc: &TokenizedDocument,
    victim: &dyn Victim,
    config: &LimeConfig,
    ledger: &QueryLedger,
) -> Result<ImportanceRanking, ImportanceError> {
    let n = doc.tokens.len();
    if n < 2 {
        return Err(ImportanceError::TooFewTokens { needed: 2, got: n });
    }
    if config.num_samples < 2 * n {
        return Err(ImportanceError::TooFewSamples {
            needed: 2 * n,
            got: config.num_samples,
        });
    }

    let mut rng = ChaCha8Rng::seed_from_u64(config.rng_seed);
    let samples = config.num_samples;

    // Each sample keeps token i with probability 0.5.
    let mut masks: Vec<Vec<bool>> = Vec::with_capacity(samples);
    let mut texts: Vec<String> = Vec::with_capacity(samples);
    let mut drops: Vec<Edit> = Vec::with_capacity(n);
    for _ in 0..samples {
        let mask: Vec<bool> = (0..n).map(|_| rng.next_u32() & 1 == 1).collect();
        drops.clear();
        for (i, &kept) in mask.iter().enumerate() {
            if !kept {
                drops.push(Edit::delete(i));
            }
        }
        let text = apply_edits(doc, &drops).expect("drop positions are always in range");
        masks.push(mask);
        texts.push(text);
    }

    let refs: Vec<&str> = texts.iter().map(String::as_str).collect();
    let probs = score_batch(victim, &refs, ledger, Phase::Importance)?;
    let classes = victim.num_classes();
    let mut targets = Vec::with_capacity(samples);
    for p in &probs {
        targets.push(gold_prob(p, doc.gold_label, classes)?);
    }

    // Exponential kernel over cosine distance from the all-ones mask.
    let width = config.kernel_width_factor * libm::sqrt(n as f64);
    let weights: Vec<f64> = masks
        .iter()
        .map(|mask| {
            let kept = mask.iter().filter(|&&k| k).count() as f64;
            let distance = 1.0 - libm::sqrt(kept / n as f64);
            libm::exp(-(distance * distance) / (width * width))
        })
        .collect();

    match fit_ridge_surrogate(&masks, &targets, &weights, config.surrogate_regularization) {
        Some(coefficients) => {
            let order = rank_positions(&coefficients);
            Ok(ImportanceRanking {
                scores: coefficients,
                order,
                method: ImportanceMethod::Lime,
                queries_used: samples as u64,
                used_fallback: false,
            })
        }
        None => {
            // Singular surrogate: fall back to the logit ranking but keep the
            // record honest about method and query cost.
            let (logit, _) = logit_importance_with_root(doc, victim, ledger)?;
            Ok(ImportanceRanking {
                scores: logit.scores,
                order: logit.order,
                method: ImportanceMethod::Lime,
                queries_used: samples as u64 + logit.queries_used,
                used_fallback: true,
            })
        }
    }
}

/// Weighted ridge regression of `targets` on binary `masks` plus intercept.
/// Returns the per-token coefficients (intercept excluded), or `None` if the
/// normal equations are singular.
fn fit_ridge_surrogate(
    masks: &[Vec<bool>],
    targets: &[f64],
    weights: &[f64],
    regularization: f64,
) -> Option<Vec<f64>> {
    let n = masks[0].len();
    let dim = n + 1; // token presences + intercept

    // Normal equations A beta = rhs with A = X'WX + lambda I (intercept
    // unpenalized), rhs = X'Wy. X rows are [mask, 1].
    let mut a = vec![0.0f64; dim * dim];
    let mut rhs = vec![0.0f64; dim];

    for ((mask, &y), &w) in masks.iter().zip(targets).zip(weights) {
        for i in 0..dim {
            let xi = if i < n {
                if mask[i] {
                    1.0
                } else {
                    0.0
                }
            } else {
                1.0
            };
            if xi == 0.0 {
                continue;
            }
            rhs[i] += w * xi * y;
            for j in i..dim {
                let xj = if j < n {
                    if mask[j] {
                        1.0
                    } else {
                        0.0
                    }
                } else {
                    1.0
                };
                a[i * dim + j] += w * xi * xj;
            }
        }
    }
    // Mirror the upper triangle and add the ridge.
    for i in 0..dim {
        for j in 0..i {
            a[i * dim + j] = a[j * dim + i];
        }
    }
    for i in 0..n {
        a[i * dim + i] += regularization;
    }

    solve_dense(&mut a, &mut rhs, dim)?;
    rhs.truncate(n);
    Some(rhs)
}

/// In-place Gaussian elimination with partial pivoting on a row-major
/// `n x n` system. Returns `None` for a (numerically) singular matrix.
fn solve_dense(a: &mut [f64], b: &mut [f64], n: usize) -> Option<()> {
    const PIVOT_EPS: f64 = 1e-12;
    for col in 0..n {
        let mut pivot = col;
        for row in (col + 1)..n {
            if libm::fabs(a[row * n + col]) > libm::fabs(a[pivot * n + col]) {
                pivot = row;
            }
        }
        if libm::fabs(a[pivot * n + col]) < PIVOT_EPS {
            return None;
        }
        if pivot != col {
            for j in 0..n {
                a.swap(col * n + j, pivot * n + j);
            }
            b.swap(col, pivot);
        }
        let diag = a[col * n + col];
        for row in (col + 1)..n {
            let factor = a[row * n + col] / diag;
            if factor == 0.0 {
                continue;
            }
            for j in col..n {
                a[row * n + j] -= factor * a[col * n + j];
            }
            b[row] -= factor * b[col];
        }
    }
    for col in (0..n).rev() {
        let mut sum = b[col];
        for j in (col + 1)..n {
            sum -= a[col * n + j] * b[j];
        }
        b[col] = sum / a[col * n + col];
    }
    Some(())
}
