//! Core algorithms for beam-search word-level adversarial attacks on text
//! classifiers, plus the metrics used to evaluate them.
//!
//! Everything in this crate is pure computation over immutable inputs: no IO,
//! no clocks, no global state. The companion `beamstrike` crate supplies the
//! CLI, file formats, and RPC adapters for external models.
//!
//! The crate is `no_std` + `alloc` so the search engine can be embedded
//! anywhere a heap exists.

#![no_std]

extern crate alloc;

#[cfg(test)]
extern crate std;

pub mod analysis;
pub mod beam;
pub mod bodega;
pub mod candidates;
pub mod importance;
pub mod text;
pub mod victim;

pub use beam::{attack, select_final, AttackConfig, AttackError, AttackOutcome, ExpansionPolicy};
pub use bodega::{aggregate, character_score, evaluate_sample, EvaluationRecord, Similarity};
pub use candidates::{expand_position, CandidateProvider, ExpansionSet, TableProvider};
pub use importance::{lime_importance, logit_importance, ImportanceMethod, ImportanceRanking, LimeConfig};
pub use text::{apply_edits, detokenize, levenshtein, tokenize, Edit, EditKind, Token, TokenizedDocument, MASK_TOKEN};
pub use victim::{predict_label, score_batch, LinearBagVictim, KeywordRuleVictim, Phase, QueryCounts, QueryLedger, Victim};
