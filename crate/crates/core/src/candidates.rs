//! Replacement candidates for a masked position, plus the delete/skip
//! options every expansion carries.

use alloc::collections::BTreeMap;
use alloc::string::String;
use alloc::vec::Vec;
use core::fmt;

use crate::text::{apply_edits, Edit, TextError, TokenizedDocument, MASK_TOKEN};

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum ProviderError {
    Failure(String),
}

impl fmt::Display for ProviderError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ProviderError::Failure(detail) => write!(f, "candidate provider failure: {detail}"),
        }
    }
}

impl core::error::Error for ProviderError {}

/// Source of replacement words for a masked position.
///
/// Contract: at most `limit` entries, no duplicates, never the mask token,
/// never `original_word` itself. Must be deterministic within a process run.
pub trait CandidateProvider {
    fn top_candidates(
        &self,
        text_with_mask: &str,
        original_word: &str,
        limit: usize,
    ) -> Result<Vec<String>, ProviderError>;
}

/// Trim, drop empties and the mask token, drop the original word, dedupe
/// preserving first occurrence, and truncate to `limit`. Shared by every
/// provider implementation.
pub fn sanitize_candidates<I>(raw: I, original_word: &str, limit: usize) -> Vec<String>
where
    I: IntoIterator,
    I::Item: AsRef<str>,
{
    let mut out: Vec<String> = Vec::new();
    for item in raw {
        if out.len() == limit {
            break;
        }
        let trimmed = item.as_ref().trim();
        if trimmed.is_empty() || trimmed == MASK_TOKEN || trimmed == original_word {
            continue;
        }
        if out.iter().any(|seen| seen == trimmed) {
            continue;
        }
        out.push(String::from(trimmed));
    }
    out
}

/// Deterministic lookup-table provider: exact-match lists per word, with a
/// global fallback list for words not in the table. The desk-scale stand-in
/// for a masked language model.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct TableProvider {
    lookup: BTreeMap<String, Vec<String>>,
    fallback: Vec<String>,
}

impl TableProvider {
    pub fn new(lookup: BTreeMap<String, Vec<String>>, fallback: Vec<String>) -> Self {
        TableProvider { lookup, fallback }
    }
}

impl CandidateProvider for TableProvider {
    fn top_candidates(
        &self,
        _text_with_mask: &str,
        original_word: &str,
        limit: usize,
    ) -> Result<Vec<String>, ProviderError> {
        let raw = self
            .lookup
            .get(original_word)
            .unwrap_or(&self.fallback)
            .iter()
            .map(String::as_str);
        Ok(sanitize_candidates(raw, original_word, limit))
    }
}

/// The options generated for one position: provider substitutions in order,
/// then DELETE, then SKIP.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ExpansionSet {
    pub position: usize,
    pub substitutions: Vec<String>,
    pub include_delete: bool,
    pub include_skip: bool,
}

impl ExpansionSet {
    /// Total number of expansion options.
    pub fn len(&self) -> usize {
        self.substitutions.len()
            + usize::from(self.include_delete)
            + usize::from(self.include_skip)
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// Options in expansion order: substitutions, DELETE, SKIP.
    pub fn options(&self) -> impl Iterator<Item = Edit> + '_ {
        let position = self.position;
        self.substitutions
            .iter()
            .map(move |s| Edit::substitute(position, s.clone()))
            .chain(self.include_delete.then(|| Edit::delete(position)))
            .chain(self.include_skip.then(|| Edit::skip(position)))
    }
}

/// Mask `position` within the partially edited document, ask the provider for
/// up to `branching` substitutions, and append the DELETE and SKIP options.
///
/// A provider failure degrades to an expansion with no substitutions; it
/// never propagates.
pub fn expand_position(
    doc: &TokenizedDocument,
    existing_edits: &[Edit],
    position: usize,
    branching: usize,
    provider: &dyn CandidateProvider,
) -> Result<ExpansionSet, TextError> {
    if position >= doc.tokens.len() {
        return Err(TextError::PositionOutOfRange {
            position,
            token_count: doc.tokens.len(),
        });
    }

    let original_word = doc.tokens[position].surface.as_str();
    let substitutions = if branching == 0 {
        Vec::new()
    } else {
        let mut edits: Vec<Edit> = existing_edits.to_vec();
        edits.push(Edit::substitute(position, MASK_TOKEN));
        let text_with_mask = apply_edits(doc, &edits)?;
        match provider.top_candidates(&text_with_mask, original_word, branching) {
            Ok(raw) => sanitize_candidates(raw, original_word, branching),
            Err(_) => Vec::new(),
        }
    };

    Ok(ExpansionSet {
        position,
        substitutions,
        include_delete: true,
        include_skip: true,
    })
}
