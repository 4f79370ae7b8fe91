//! Structural analysis of successful adversarial samples: POS tagging
//! support, Penn-to-UPOS mapping, change filtering, the tag transition
//! matrix, and the density math behind the WSR plots.

use alloc::collections::BTreeMap;
use alloc::string::{String, ToString};
use alloc::vec::Vec;
use core::fmt;

use serde::{Deserialize, Serialize};

/// The 17-tag Universal Dependencies part-of-speech inventory.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum Upos {
    #[serde(rename = "ADJ")]
    Adj,
    #[serde(rename = "ADP")]
    Adp,
    #[serde(rename = "ADV")]
    Adv,
    #[serde(rename = "AUX")]
    Aux,
    #[serde(rename = "CCONJ")]
    Cconj,
    #[serde(rename = "DET")]
    Det,
    #[serde(rename = "INTJ")]
    Intj,
    #[serde(rename = "NOUN")]
    Noun,
    #[serde(rename = "NUM")]
    Num,
    #[serde(rename = "PART")]
    Part,
    #[serde(rename = "PRON")]
    Pron,
    #[serde(rename = "PROPN")]
    Propn,
    #[serde(rename = "PUNCT")]
    Punct,
    #[serde(rename = "SCONJ")]
    Sconj,
    #[serde(rename = "SYM")]
    Sym,
    #[serde(rename = "VERB")]
    Verb,
    #[serde(rename = "X")]
    X,
}

pub const UPOS_COUNT: usize = 17;

impl Upos {
    pub const ALL: [Upos; UPOS_COUNT] = [
        Upos::Adj,
        Upos::Adp,
        Upos::Adv,
        Upos::Aux,
        Upos::Cconj,
        Upos::Det,
        Upos::Intj,
        Upos::Noun,
        Upos::Num,
        Upos::Part,
        Upos::Pron,
        Upos::Propn,
        Upos::Punct,
        Upos::Sconj,
        Upos::Sym,
        Upos::Verb,
        Upos::X,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            Upos::Adj => "ADJ",
            Upos::Adp => "ADP",
            Upos::Adv => "ADV",
            Upos::Aux => "AUX",
            Upos::Cconj => "CCONJ",
            Upos::Det => "DET",
            Upos::Intj => "INTJ",
            Upos::Noun => "NOUN",
            Upos::Num => "NUM",
            Upos::Part => "PART",
            Upos::Pron => "PRON",
            Upos::Propn => "PROPN",
            Upos::Punct => "PUNCT",
            Upos::Sconj => "SCONJ",
            Upos::Sym => "SYM",
            Upos::Verb => "VERB",
            Upos::X => "X",
        }
    }

    fn index(self) -> usize {
        Upos::ALL.iter().position(|&u| u == self).unwrap()
    }
}

impl fmt::Display for Upos {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

/// The Penn Treebank tag inventory and its UPOS grouping.
pub const PENN_TO_UPOS: &[(&str, Upos)] = &[
    ("ADD", Upos::X),
    ("AFX", Upos::X),
    ("CC", Upos::Cconj),
    ("CD", Upos::Num),
    ("DT", Upos::Det),
    ("EX", Upos::Pron),
    ("FW", Upos::X),
    ("HYPH", Upos::Punct),
    ("IN", Upos::Adp),
    ("JJ", Upos::Adj),
    ("JJR", Upos::Adj),
    ("JJS", Upos::Adj),
    ("LS", Upos::X),
    ("MD", Upos::Aux),
    ("NFP", Upos::Punct),
    ("NN", Upos::Noun),
    ("NNP", Upos::Propn),
    ("NNPS", Upos::Propn),
    ("NNS", Upos::Noun),
    ("PDT", Upos::Det),
    ("POS", Upos::Part),
    ("PRP", Upos::Pron),
    ("PRP$", Upos::Pron),
    ("RB", Upos::Adv),
    ("RBR", Upos::Adv),
    ("RBS", Upos::Adv),
    ("RP", Upos::Part),
    ("SYM", Upos::Sym),
    ("TO", Upos::Part),
    ("UH", Upos::Intj),
    ("VB", Upos::Verb),
    ("VBD", Upos::Verb),
    ("VBG", Upos::Verb),
    ("VBN", Upos::Verb),
    ("VBP", Upos::Verb),
    ("VBZ", Upos::Verb),
    ("WDT", Upos::Det),
    ("WP", Upos::Pron),
    ("WP$", Upos::Pron),
    ("WRB", Upos::Adv),
    ("XX", Upos::X),
    ("-LRB-", Upos::Punct),
    ("-RRB-", Upos::Punct),
    (".", Upos::Punct),
    (",", Upos::Punct),
    (":", Upos::Punct),
    ("``", Upos::Punct),
    ("''", Upos::Punct),
    ("\"", Upos::Punct),
    ("$", Upos::Sym),
];

/// Lookup table from fine-grained Penn tags to the 17 UPOS tags. Unknown
/// tags map to `X` and are counted as warnings.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PosMapping {
    table: BTreeMap<String, Upos>,
}

impl Default for PosMapping {
    fn default() -> Self {
        PosMapping {
            table: PENN_TO_UPOS
                .iter()
                .map(|(penn, upos)| (penn.to_string(), *upos))
                .collect(),
        }
    }
}

impl PosMapping {
    pub fn len(&self) -> usize {
        self.table.len()
    }

    pub fn is_empty(&self) -> bool {
        self.table.is_empty()
    }

    pub fn lookup(&self, penn: &str) -> Option<Upos> {
        self.table.get(penn).copied()
    }
}

/// Elementwise Penn-to-UPOS conversion. Returns the tags plus the number of
/// unknown inputs that fell back to `X`.
pub fn map_to_upos(penn_tags: &[String], mapping: &PosMapping) -> (Vec<Upos>, usize) {
    let mut warnings = 0usize;
    let tags = penn_tags
        .iter()
        .map(|t| match mapping.lookup(t) {
            Some(u) => u,
            None => {
                warnings += 1;
                Upos::X
            }
        })
        .collect();
    (tags, warnings)
}

/// Outcome of comparing two UPOS sequences.
///
/// `changed_positions` is only populated when the sequences have equal
/// length; a length change (for example a URL collapsing to a period) makes
/// positionwise comparison meaningless.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct PosDiff {
    pub length_preserved: bool,
    pub changed_positions: Vec<usize>,
}

pub fn pos_diff(original_tags: &[Upos], adversarial_tags: &[Upos]) -> PosDiff {
    if original_tags.len() != adversarial_tags.len() {
        return PosDiff {
            length_preserved: false,
            changed_positions: Vec::new(),
        };
    }
    let changed_positions = original_tags
        .iter()
        .zip(adversarial_tags)
        .enumerate()
        .filter(|(_, (a, b))| a != b)
        .map(|(i, _)| i)
        .collect();
    PosDiff {
        length_preserved: true,
        changed_positions,
    }
}

/// Whether a sample enters the transition-matrix stratum: exactly one real
/// edit, tag-sequence length preserved, and exactly one tag change.
pub fn qualifies_for_transition(non_skip_edits: usize, diff: &PosDiff) -> bool {
    non_skip_edits == 1 && diff.length_preserved && diff.changed_positions.len() == 1
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum AnalysisError {
    /// A sample fed to the transition matrix was not a qualifying
    /// single-tag-change sample.
    DisqualifiedSample { index: usize, reason: String },
}

impl fmt::Display for AnalysisError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            AnalysisError::DisqualifiedSample { index, reason } => {
                write!(f, "sample {index} disqualified: {reason}")
            }
        }
    }
}

impl core::error::Error for AnalysisError {}

/// Counts of UPOS-to-UPOS changes over qualifying samples. The diagonal is
/// structurally zero: a transition requires a tag change.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TransitionMatrix {
    counts: [[u64; UPOS_COUNT]; UPOS_COUNT],
}

impl Default for TransitionMatrix {
    fn default() -> Self {
        TransitionMatrix {
            counts: [[0; UPOS_COUNT]; UPOS_COUNT],
        }
    }
}

impl TransitionMatrix {
    pub fn count(&self, from: Upos, to: Upos) -> u64 {
        self.counts[from.index()][to.index()]
    }

    pub fn total(&self) -> u64 {
        self.counts.iter().flatten().sum()
    }

    /// All `(from, to, count)` cells with a nonzero count, in UPOS order.
    pub fn nonzero_cells(&self) -> Vec<(Upos, Upos, u64)> {
        let mut cells = Vec::new();
        for from in Upos::ALL {
            for to in Upos::ALL {
                let c = self.count(from, to);
                if c > 0 {
                    cells.push((from, to, c));
                }
            }
        }
        cells
    }

    /// Row-normalized counts: each row sums to 1 unless it is empty.
    pub fn row_normalized(&self, from: Upos, to: Upos) -> f64 {
        let row_sum: u64 = self.counts[from.index()].iter().sum();
        if row_sum == 0 {
            0.0
        } else {
            self.count(from, to) as f64 / row_sum as f64
        }
    }
}

/// Fold qualifying `(original_tags, adversarial_tags)` pairs into the
/// transition matrix. Every pair must be length-preserving with exactly one
/// changed position.
pub fn build_transition_matrix(
    samples: &[(Vec<Upos>, Vec<Upos>)],
) -> Result<TransitionMatrix, AnalysisError> {
    let mut matrix = TransitionMatrix::default();
    for (index, (orig, adv)) in samples.iter().enumerate() {
        let diff = pos_diff(orig, adv);
        if !diff.length_preserved {
            return Err(AnalysisError::DisqualifiedSample {
                index,
                reason: "tag sequence length changed".to_string(),
            });
        }
        if diff.changed_positions.len() != 1 {
            return Err(AnalysisError::DisqualifiedSample {
                index,
                reason: alloc::format!(
                    "expected exactly one tag change, found {}",
                    diff.changed_positions.len()
                ),
            });
        }
        let pos = diff.changed_positions[0];
        matrix.counts[orig[pos].index()][adv[pos].index()] += 1;
    }
    Ok(matrix)
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TaggerError(pub String);

impl fmt::Display for TaggerError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "tagger failed: {}", self.0)
    }
}

impl core::error::Error for TaggerError {}

/// A part-of-speech tagger emitting Penn Treebank tags. The tagger owns its
/// own tokenization (which may split differently from the attack tokenizer);
/// it must emit exactly one tag per emitted token, deterministically.
pub trait Tagger {
    fn tag(&self, text: &str) -> Result<Vec<(String, String)>, TaggerError>;
}

/// Deterministic rule-based Penn tagger so analysis runs without any
/// external model: a closed-class lexicon, suffix heuristics, and simple
/// shape rules (URLs, numbers, hashtags, punctuation splitting).
#[derive(Debug, Clone, Copy, Default)]
pub struct RuleTagger;

impl Tagger for RuleTagger {
    fn tag(&self, text: &str) -> Result<Vec<(String, String)>, TaggerError> {
        let mut out = Vec::new();
        for word in text.split_whitespace() {
            for piece in split_pieces(word) {
                let tag = tag_piece(&piece);
                out.push((piece, tag.to_string()));
            }
        }
        Ok(out)
    }
}

fn is_url_or_email(word: &str) -> bool {
    word.starts_with("http://")
        || word.starts_with("https://")
        || word.starts_with("www.")
        || (word.contains('@') && word.contains('.') && !word.starts_with('@'))
}

fn is_hashtag_or_mention(word: &str) -> bool {
    (word.starts_with('#') || word.starts_with('@'))
        && word.len() > 1
        && word.chars().skip(1).any(|c| c.is_alphanumeric())
}

/// Split leading and trailing punctuation runs into their own pieces, keeping
/// URLs, numbers, hashtags, and mentions whole.
fn split_pieces(word: &str) -> Vec<String> {
    if is_url_or_email(word) || is_hashtag_or_mention(word) {
        return alloc::vec![word.to_string()];
    }
    let chars: Vec<char> = word.chars().collect();
    let mut start = 0usize;
    let mut end = chars.len();
    let mut leading: Vec<String> = Vec::new();
    let mut trailing: Vec<String> = Vec::new();

    while start < end && is_splittable_punct(chars[start]) {
        leading.push(chars[start].to_string());
        start += 1;
    }
    while end > start && is_splittable_punct(chars[end - 1]) {
        trailing.push(chars[end - 1].to_string());
        end -= 1;
    }
    trailing.reverse();

    let mut pieces = leading;
    if start < end {
        pieces.push(chars[start..end].iter().collect());
    }
    pieces.extend(trailing);
    pieces
}

fn is_splittable_punct(c: char) -> bool {
    matches!(
        c,
        '.' | ',' | ':' | ';' | '!' | '?' | '"' | '(' | ')' | '[' | ']' | '{' | '}'
            | '\u{201c}' | '\u{201d}' | '\u{2018}' | '\u{2019}' | '\u{2026}'
    )
}

fn tag_piece(piece: &str) -> &'static str {
    if is_url_or_email(piece) {
        return "ADD";
    }
    if is_hashtag_or_mention(piece) {
        return "NNP";
    }
    if let Some(tag) = punct_tag(piece) {
        return tag;
    }
    if is_numeric(piece) {
        return "CD";
    }
    let lower: String = piece.to_lowercase();
    if let Some(tag) = lexicon_tag(&lower) {
        return tag;
    }
    if let Some(tag) = suffix_tag(&lower) {
        return tag;
    }
    if piece.chars().next().is_some_and(|c| c.is_uppercase()) {
        return "NNP";
    }
    "NN"
}

fn punct_tag(piece: &str) -> Option<&'static str> {
    if piece.chars().all(|c| !c.is_alphanumeric()) && !piece.is_empty() {
        return Some(match piece {
            "." | "!" | "?" | "\u{2026}" => ".",
            "," => ",",
            ":" | ";" | "--" | "..." => ":",
            "-" => "HYPH",
            "(" | "[" | "{" => "-LRB-",
            ")" | "]" | "}" => "-RRB-",
            "\u{201c}" | "\u{2018}" | "``" => "``",
            "\u{201d}" | "\u{2019}" | "''" | "'" => "''",
            "\"" => "\"",
            "$" | "€" | "£" => "$",
            "#" | "@" | "%" | "&" | "+" | "=" | "*" | "/" | "\\" | "^" | "~" | "|" | "<"
            | ">" => "SYM",
            _ => "NFP",
        });
    }
    None
}

fn is_numeric(piece: &str) -> bool {
    let mut digits = 0usize;
    for c in piece.chars() {
        if c.is_ascii_digit() {
            digits += 1;
        } else if !matches!(c, '.' | ',' | '-' | '%' | '+') {
            return false;
        }
    }
    digits > 0
}

fn lexicon_tag(lower: &str) -> Option<&'static str> {
    Some(match lower {
        "the" | "a" | "an" | "this" | "that" | "these" | "those" | "each" | "every" | "some"
        | "any" | "no" | "all" | "both" => "DT",
        "and" | "or" | "but" | "nor" | "yet" | "so" => "CC",
        "in" | "on" | "of" | "at" | "by" | "with" | "from" | "for" | "into" | "onto" | "over"
        | "under" | "about" | "against" | "between" | "through" | "during" | "without"
        | "within" | "upon" | "among" | "after" | "before" | "above" | "below" | "off"
        | "near" | "because" | "although" | "though" | "while" | "if" | "unless" | "since"
        | "as" => "IN",
        "to" => "TO",
        "will" | "would" | "can" | "could" | "may" | "might" | "must" | "shall" | "should" => {
            "MD"
        }
        "i" | "you" | "he" | "she" | "it" | "we" | "they" | "me" | "him" | "us" | "them"
        | "myself" | "yourself" | "himself" | "herself" | "itself" | "ourselves"
        | "themselves" => "PRP",
        "my" | "your" | "his" | "her" | "its" | "our" | "their" | "hers" | "mine" | "yours"
        | "theirs" => "PRP$",
        "there" => "EX",
        "which" => "WDT",
        "who" | "whom" | "what" => "WP",
        "whose" => "WP$",
        "when" | "where" | "why" | "how" => "WRB",
        "not" | "never" | "very" | "too" | "also" | "just" | "still" | "only" | "quite"
        | "rather" | "almost" | "always" | "often" | "now" | "then" | "here" => "RB",
        "oh" | "wow" | "hey" | "hmm" | "ouch" | "ah" => "UH",
        "is" | "has" | "does" => "VBZ",
        "are" | "am" | "have" | "do" => "VBP",
        "was" | "were" | "had" | "did" => "VBD",
        "be" => "VB",
        "been" => "VBN",
        "being" => "VBG",
        "one" | "two" | "three" | "four" | "five" | "six" | "seven" | "eight" | "nine"
        | "ten" | "hundred" | "thousand" | "million" | "billion" => "CD",
        _ => return None,
    })
}

fn suffix_tag(lower: &str) -> Option<&'static str> {
    let n = lower.len();
    let rule = [
        ("ly", 3, "RB"),
        ("ing", 5, "VBG"),
        ("ed", 4, "VBD"),
        ("tion", 5, "NN"),
        ("sion", 5, "NN"),
        ("ment", 5, "NN"),
        ("ness", 5, "NN"),
        ("ship", 5, "NN"),
        ("ity", 4, "NN"),
        ("ous", 4, "JJ"),
        ("ful", 4, "JJ"),
        ("ish", 4, "JJ"),
        ("ive", 4, "JJ"),
        ("able", 5, "JJ"),
        ("ible", 5, "JJ"),
        ("ical", 5, "JJ"),
        ("est", 5, "JJS"),
        ("er", 4, "NN"),
        ("s", 4, "NNS"),
    ];
    for (suffix, min_len, tag) in rule {
        if n >= min_len && lower.ends_with(suffix) {
            if suffix == "s" && lower.ends_with("ss") {
                continue;
            }
            return Some(tag);
        }
    }
    None
}

/// Scott's-rule bandwidth for a one-dimensional Gaussian KDE.
pub fn scott_bandwidth(values: &[f64]) -> f64 {
    let n = values.len();
    if n < 2 {
        return 1.0;
    }
    let mean = values.iter().sum::<f64>() / n as f64;
    let var = values.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / (n as f64 - 1.0);
    let sd = libm::sqrt(var);
    if sd <= 0.0 {
        1.0
    } else {
        sd * libm::pow(n as f64, -0.2)
    }
}

/// Gaussian kernel density estimate evaluated on an even grid spanning the
/// data plus three bandwidths of margin.
pub fn kde_curve(values: &[f64], points: usize) -> Vec<(f64, f64)> {
    if values.is_empty() || points == 0 {
        return Vec::new();
    }
    let bandwidth = scott_bandwidth(values);
    let min = values.iter().copied().fold(f64::INFINITY, f64::min);
    let max = values.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let lo = min - 3.0 * bandwidth;
    let hi = max + 3.0 * bandwidth;
    let n = values.len() as f64;
    let norm = 1.0 / (n * bandwidth * libm::sqrt(2.0 * core::f64::consts::PI));

    (0..points)
        .map(|i| {
            let x = lo + (hi - lo) * i as f64 / (points.max(2) - 1) as f64;
            let density: f64 = values
                .iter()
                .map(|v| {
                    let z = (x - v) / bandwidth;
                    libm::exp(-0.5 * z * z)
                })
                .sum::<f64>()
                * norm;
            (x, density)
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::vec;

    #[test]
    fn mapping_covers_paper_inventory() {
        let mapping = PosMapping::default();
        assert_eq!(mapping.len(), PENN_TO_UPOS.len());
        for (penn, expected) in PENN_TO_UPOS {
            assert_eq!(mapping.lookup(penn), Some(*expected), "missing {penn}");
        }
    }

    #[test]
    fn known_mappings() {
        let mapping = PosMapping::default();
        assert_eq!(mapping.lookup("NN"), Some(Upos::Noun));
        assert_eq!(mapping.lookup("ADD"), Some(Upos::X));
        assert_eq!(mapping.lookup("$"), Some(Upos::Sym));
        assert_eq!(mapping.lookup("PRP$"), Some(Upos::Pron));
        assert_eq!(mapping.lookup("-LRB-"), Some(Upos::Punct));
    }

    #[test]
    fn unknown_tags_warn_and_map_to_x() {
        let mapping = PosMapping::default();
        let tags = vec!["NN".to_string(), "WAT".to_string()];
        let (upos, warnings) = map_to_upos(&tags, &mapping);
        assert_eq!(upos, vec![Upos::Noun, Upos::X]);
        assert_eq!(warnings, 1);
    }

    #[test]
    fn pos_diff_positions_and_length() {
        let same = vec![Upos::Noun, Upos::Verb];
        assert_eq!(
            pos_diff(&same, &same),
            PosDiff {
                length_preserved: true,
                changed_positions: vec![]
            }
        );
        let changed = vec![Upos::Propn, Upos::Verb];
        assert_eq!(
            pos_diff(&same, &changed),
            PosDiff {
                length_preserved: true,
                changed_positions: vec![0]
            }
        );
        // A URL collapsing five tags to one breaks length preservation.
        let orig = vec![Upos::Noun, Upos::Punct, Upos::Propn, Upos::Punct, Upos::X];
        let adv = vec![Upos::Punct];
        let diff = pos_diff(&orig, &adv);
        assert!(!diff.length_preserved);
        assert!(diff.changed_positions.is_empty());
    }

    #[test]
    fn diff_change_count_is_symmetric() {
        let a = vec![Upos::Noun, Upos::Verb, Upos::Adj];
        let b = vec![Upos::Propn, Upos::Verb, Upos::Adv];
        assert_eq!(
            pos_diff(&a, &b).changed_positions.len(),
            pos_diff(&b, &a).changed_positions.len()
        );
    }

    #[test]
    fn transition_matrix_counts_conserve_samples() {
        let samples = vec![
            (vec![Upos::Propn, Upos::Verb], vec![Upos::Noun, Upos::Verb]),
            (vec![Upos::Propn], vec![Upos::Noun]),
            (vec![Upos::Sym, Upos::Adj], vec![Upos::Punct, Upos::Adj]),
        ];
        let matrix = build_transition_matrix(&samples).unwrap();
        assert_eq!(matrix.total(), 3);
        assert_eq!(matrix.count(Upos::Propn, Upos::Noun), 2);
        assert_eq!(matrix.count(Upos::Sym, Upos::Punct), 1);
        assert_eq!(matrix.nonzero_cells().len(), 2);
        for tag in Upos::ALL {
            assert_eq!(matrix.count(tag, tag), 0);
        }
        assert!((matrix.row_normalized(Upos::Propn, Upos::Noun) - 1.0).abs() < 1e-12);
    }

    #[test]
    fn empty_input_builds_zero_matrix() {
        let matrix = build_transition_matrix(&[]).unwrap();
        assert_eq!(matrix.total(), 0);
        assert!(matrix.nonzero_cells().is_empty());
    }

    #[test]
    fn disqualified_samples_are_rejected() {
        let two_changes = vec![(
            vec![Upos::Noun, Upos::Verb],
            vec![Upos::Propn, Upos::Adj],
        )];
        assert!(matches!(
            build_transition_matrix(&two_changes),
            Err(AnalysisError::DisqualifiedSample { index: 0, .. })
        ));
        let length_change = vec![(vec![Upos::Noun, Upos::Verb], vec![Upos::Noun])];
        assert!(build_transition_matrix(&length_change).is_err());
    }

    #[test]
    fn qualifying_filter_is_the_three_way_intersection() {
        let one_change = PosDiff {
            length_preserved: true,
            changed_positions: vec![3],
        };
        assert!(qualifies_for_transition(1, &one_change));
        assert!(!qualifies_for_transition(2, &one_change));
        assert!(!qualifies_for_transition(
            1,
            &PosDiff {
                length_preserved: false,
                changed_positions: vec![]
            }
        ));
        assert!(!qualifies_for_transition(
            1,
            &PosDiff {
                length_preserved: true,
                changed_positions: vec![1, 2]
            }
        ));
    }

    #[test]
    fn rule_tagger_handles_shapes() {
        let tagger = RuleTagger;
        let tags = tagger
            .tag("The quick dogs ran http://t.co/x into #chaos 42 times.")
            .unwrap();
        let pairs: Vec<(&str, &str)> = tags
            .iter()
            .map(|(w, t)| (w.as_str(), t.as_str()))
            .collect();
        assert!(pairs.contains(&("The", "DT")));
        assert!(pairs.contains(&("dogs", "NNS")));
        assert!(pairs.contains(&("http://t.co/x", "ADD")));
        assert!(pairs.contains(&("#chaos", "NNP")));
        assert!(pairs.contains(&("42", "CD")));
        assert!(pairs.contains(&(".", ".")));
        // Deterministic per input.
        assert_eq!(tags, tagger.tag("The quick dogs ran http://t.co/x into #chaos 42 times.").unwrap());
    }

    #[test]
    fn rule_tagger_splits_attached_punctuation() {
        let tagger = RuleTagger;
        let tags = tagger.tag("\"together.\"").unwrap();
        let words: Vec<&str> = tags.iter().map(|(w, _)| w.as_str()).collect();
        assert_eq!(words, vec!["\"", "together", ".", "\""]);
    }

    #[test]
    fn kde_has_plausible_mass() {
        let values = vec![1.0, 2.0, 2.5, 3.0, 10.0];
        let curve = kde_curve(&values, 128);
        assert_eq!(curve.len(), 128);
        // Riemann sum of the density should be close to 1.
        let dx = curve[1].0 - curve[0].0;
        let mass: f64 = curve.iter().map(|(_, d)| d * dx).sum();
        assert!((mass - 1.0).abs() < 0.05, "mass {mass}");
        assert!(curve.iter().all(|(_, d)| *d >= 0.0));
    }

    #[test]
    fn scott_bandwidth_degenerate_inputs() {
        assert_eq!(scott_bandwidth(&[1.0]), 1.0);
        assert_eq!(scott_bandwidth(&[2.0, 2.0, 2.0]), 1.0);
        assert!(scott_bandwidth(&[1.0, 2.0, 3.0, 4.0]) > 0.0);
    }
}
