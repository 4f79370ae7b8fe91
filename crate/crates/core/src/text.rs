//! Tokenization, the word-level edit model, and character distance.
//!
//! Attacks operate on whitespace-delimited words with punctuation attached;
//! every inter-token separator is preserved so that detokenizing an unedited
//! document reproduces the original text byte for byte.

use alloc::string::String;
use alloc::vec;
use alloc::vec::Vec;
use core::fmt;
use core::mem;

use serde::{Deserialize, Serialize};

/// The literal mask marker understood by built-in victims and providers.
pub const MASK_TOKEN: &str = "[MASK]";

/// One whitespace-delimited word, with its position in the original text.
///
/// `char_start`/`char_end` are character (not byte) offsets into the raw
/// text; `preceding_separator` is the whitespace run in front of the token
/// (empty for a token at the start of the document).
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Token {
    pub surface: String,
    pub char_start: usize,
    pub char_end: usize,
    pub preceding_separator: String,
}

/// A document prepared for attack: the raw text, its token sequence, and the
/// label the victim is supposed to assign.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct TokenizedDocument {
    pub id: String,
    pub raw_text: String,
    pub tokens: Vec<Token>,
    pub gold_label: usize,
    /// Whitespace after the final token, kept so round-trips are exact.
    pub trailing_separator: String,
}

impl TokenizedDocument {
    pub fn token_count(&self) -> usize {
        self.tokens.len()
    }
}

/// What an edit does to its token position.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum EditKind {
    Substitute,
    Delete,
    Skip,
}

/// A single word-level modification. `replacement` is empty unless the kind
/// is `Substitute`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Edit {
    pub position: usize,
    pub kind: EditKind,
    #[serde(default)]
    pub replacement: String,
}

impl Edit {
    pub fn substitute(position: usize, replacement: impl Into<String>) -> Self {
        Edit {
            position,
            kind: EditKind::Substitute,
            replacement: replacement.into(),
        }
    }

    pub fn delete(position: usize) -> Self {
        Edit {
            position,
            kind: EditKind::Delete,
            replacement: String::new(),
        }
    }

    pub fn skip(position: usize) -> Self {
        Edit {
            position,
            kind: EditKind::Skip,
            replacement: String::new(),
        }
    }

    pub fn is_skip(&self) -> bool {
        self.kind == EditKind::Skip
    }
}

/// Number of edits in `edits` that actually modify the text.
pub fn non_skip_count(edits: &[Edit]) -> usize {
    edits.iter().filter(|e| !e.is_skip()).count()
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum TextError {
    /// The input contained nothing but whitespace.
    EmptyDocument,
    /// An edit referenced a token index past the end of the document.
    PositionOutOfRange { position: usize, token_count: usize },
    /// Two non-skip edits targeted the same token position.
    ConflictingEdits { position: usize },
}

impl fmt::Display for TextError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            TextError::EmptyDocument => write!(f, "document is empty or all whitespace"),
            TextError::PositionOutOfRange {
                position,
                token_count,
            } => write!(
                f,
                "edit position {position} out of range for {token_count} tokens"
            ),
            TextError::ConflictingEdits { position } => {
                write!(f, "multiple non-skip edits at position {position}")
            }
        }
    }
}

impl core::error::Error for TextError {}

/// Split `raw_text` on Unicode whitespace, keeping punctuation attached to
/// its word and recording every separator run.
pub fn tokenize(raw_text: &str, id: &str, gold_label: usize) -> Result<TokenizedDocument, TextError> {
    if raw_text.trim().is_empty() {
        return Err(TextError::EmptyDocument);
    }

    let mut tokens = Vec::new();
    let mut pending_sep = String::new();
    let mut current = String::new();
    let mut current_sep = String::new();
    let mut current_start = 0usize;
    let mut char_idx = 0usize;

    for ch in raw_text.chars() {
        if ch.is_whitespace() {
            if !current.is_empty() {
                tokens.push(Token {
                    surface: mem::take(&mut current),
                    char_start: current_start,
                    char_end: char_idx,
                    preceding_separator: mem::take(&mut current_sep),
                });
            }
            pending_sep.push(ch);
        } else {
            if current.is_empty() {
                current_start = char_idx;
                current_sep = mem::take(&mut pending_sep);
            }
            current.push(ch);
        }
        char_idx += 1;
    }
    if !current.is_empty() {
        tokens.push(Token {
            surface: current,
            char_start: current_start,
            char_end: char_idx,
            preceding_separator: current_sep,
        });
    }

    Ok(TokenizedDocument {
        id: String::from(id),
        raw_text: String::from(raw_text),
        tokens,
        gold_label,
        trailing_separator: pending_sep,
    })
}

/// Reassemble the unedited document. Always equals `raw_text`.
pub fn detokenize(doc: &TokenizedDocument) -> String {
    let mut out = String::with_capacity(doc.raw_text.len());
    for tok in &doc.tokens {
        out.push_str(&tok.preceding_separator);
        out.push_str(&tok.surface);
    }
    out.push_str(&doc.trailing_separator);
    out
}

enum Action<'a> {
    Keep,
    Substitute(&'a str),
    Delete,
}

/// Apply a list of edits and detokenize the result.
///
/// Substitutions swap the surface form in place, deletions remove the token
/// together with its separator (the first surviving token inherits the
/// document's leading whitespace so no doubled gap appears), and skips are
/// no-op markers.
pub fn apply_edits(doc: &TokenizedDocument, edits: &[Edit]) -> Result<String, TextError> {
    let n = doc.tokens.len();
    let mut actions: Vec<Action> = (0..n).map(|_| Action::Keep).collect();

    for edit in edits {
        if edit.position >= n {
            return Err(TextError::PositionOutOfRange {
                position: edit.position,
                token_count: n,
            });
        }
        match edit.kind {
            EditKind::Skip => {}
            EditKind::Substitute | EditKind::Delete => {
                if !matches!(actions[edit.position], Action::Keep) {
                    return Err(TextError::ConflictingEdits {
                        position: edit.position,
                    });
                }
                actions[edit.position] = match edit.kind {
                    EditKind::Substitute => Action::Substitute(&edit.replacement),
                    _ => Action::Delete,
                };
            }
        }
    }

    let mut out = String::with_capacity(doc.raw_text.len());
    let mut first_kept = true;
    for (i, tok) in doc.tokens.iter().enumerate() {
        let surface = match &actions[i] {
            Action::Delete => continue,
            Action::Keep => tok.surface.as_str(),
            Action::Substitute(replacement) => replacement,
        };
        if first_kept {
            // Leading whitespace of the document, not of this token.
            out.push_str(&doc.tokens[0].preceding_separator);
            first_kept = false;
        } else {
            out.push_str(&tok.preceding_separator);
        }
        out.push_str(surface);
    }
    out.push_str(&doc.trailing_separator);
    Ok(out)
}

/// Character-level Levenshtein distance with unit costs.
pub fn levenshtein(a: &str, b: &str) -> usize {
    let a_chars: Vec<char> = a.chars().collect();
    let b_chars: Vec<char> = b.chars().collect();
    if a_chars.is_empty() {
        return b_chars.len();
    }
    if b_chars.is_empty() {
        return a_chars.len();
    }

    let mut prev: Vec<usize> = (0..=b_chars.len()).collect();
    let mut cur = vec![0usize; b_chars.len() + 1];

    for (i, &ca) in a_chars.iter().enumerate() {
        cur[0] = i + 1;
        for (j, &cb) in b_chars.iter().enumerate() {
            let cost = usize::from(ca != cb);
            cur[j + 1] = (prev[j + 1] + 1).min(cur[j] + 1).min(prev[j] + cost);
        }
        mem::swap(&mut prev, &mut cur);
    }
    prev[b_chars.len()]
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::string::ToString;

    #[test]
    fn tokenize_keeps_punctuation_attached() {
        let doc = tokenize("Rage Against the Machine stopped being together.", "d0", 1).unwrap();
        assert_eq!(doc.tokens.len(), 7);
        assert_eq!(doc.tokens[6].surface, "together.");
    }

    #[test]
    fn tokenize_preserves_separators() {
        let doc = tokenize("a  b", "d0", 0).unwrap();
        assert_eq!(doc.tokens.len(), 2);
        assert_eq!(doc.tokens[1].preceding_separator, "  ");
        assert_eq!(detokenize(&doc), "a  b");
    }

    #[test]
    fn tokenize_rejects_whitespace_only() {
        assert_eq!(tokenize("   \t\n", "d0", 0), Err(TextError::EmptyDocument));
        assert_eq!(tokenize("", "d0", 0), Err(TextError::EmptyDocument));
    }

    #[test]
    fn tokenize_records_char_offsets() {
        let doc = tokenize(" ab  cd", "d0", 0).unwrap();
        assert_eq!(doc.tokens[0].char_start, 1);
        assert_eq!(doc.tokens[0].char_end, 3);
        assert_eq!(doc.tokens[1].char_start, 5);
        assert_eq!(doc.tokens[1].char_end, 7);
        assert_eq!(doc.tokens[0].preceding_separator, " ");
    }

    #[test]
    fn apply_substitute() {
        let doc = tokenize("a b c", "d0", 0).unwrap();
        let out = apply_edits(&doc, &[Edit::substitute(1, "x")]).unwrap();
        assert_eq!(out, "a x c");
    }

    #[test]
    fn apply_delete_collapses_separator() {
        let doc = tokenize("a b c", "d0", 0).unwrap();
        assert_eq!(apply_edits(&doc, &[Edit::delete(1)]).unwrap(), "a c");
        assert_eq!(apply_edits(&doc, &[Edit::delete(0)]).unwrap(), "b c");
        assert_eq!(apply_edits(&doc, &[Edit::delete(2)]).unwrap(), "a b");
    }

    #[test]
    fn apply_skip_is_identity() {
        let doc = tokenize("a b c", "d0", 0).unwrap();
        let out = apply_edits(&doc, &[Edit::skip(0), Edit::substitute(2, "z")]).unwrap();
        assert_eq!(out, "a b z");
    }

    #[test]
    fn apply_no_edits_round_trips() {
        let raw = "  leading and trailing\tkept \n";
        let doc = tokenize(raw, "d0", 0).unwrap();
        assert_eq!(apply_edits(&doc, &[]).unwrap(), raw);
    }

    #[test]
    fn apply_rejects_out_of_range() {
        let doc = tokenize("a b", "d0", 0).unwrap();
        assert_eq!(
            apply_edits(&doc, &[Edit::delete(2)]),
            Err(TextError::PositionOutOfRange {
                position: 2,
                token_count: 2
            })
        );
    }

    #[test]
    fn apply_rejects_conflicting_edits() {
        let doc = tokenize("a b", "d0", 0).unwrap();
        let err = apply_edits(&doc, &[Edit::delete(1), Edit::substitute(1, "x")]);
        assert_eq!(err, Err(TextError::ConflictingEdits { position: 1 }));
        // A skip plus one non-skip edit at the same position is allowed.
        let ok = apply_edits(&doc, &[Edit::skip(1), Edit::substitute(1, "x")]);
        assert_eq!(ok.unwrap(), "a x");
    }

    #[test]
    fn delete_reduces_token_count_by_one() {
        let doc = tokenize("one two three four", "d0", 0).unwrap();
        for pos in 0..4 {
            let out = apply_edits(&doc, &[Edit::delete(pos)]).unwrap();
            let redone = tokenize(&out, "d1", 0).unwrap();
            assert_eq!(redone.tokens.len(), doc.tokens.len() - 1);
        }
    }

    #[test]
    fn levenshtein_known_values() {
        assert_eq!(levenshtein("abc", "abc"), 0);
        // Frozen from the full-table DP oracle in tests/text_props.rs.
        assert_eq!(levenshtein("kitten", "sitting"), 3);
        assert_eq!(levenshtein("", "abc"), 3);
        assert_eq!(levenshtein("abc", ""), 3);
        assert_eq!(levenshtein("flaw", "lawn"), 2);
    }

    #[test]
    fn edit_serde_shape() {
        let e = Edit::substitute(3, "word");
        let json = serde_json::to_string(&e).unwrap();
        assert_eq!(
            json,
            "{\"position\":3,\"kind\":\"substitute\",\"replacement\":\"word\"}"
        );
        let back: Edit = serde_json::from_str(&json).unwrap();
        assert_eq!(back, e);
        assert_eq!(
            serde_json::to_string(&Edit::delete(0)).unwrap(),
            "{\"position\":0,\"kind\":\"delete\",\"replacement\":\"\"}".to_string()
        );
    }
}
