//! Shared tokenizer and stopword filter.
//!
//! Every component that turns claim text into terms (specialization trees,
//! the TF-IDF baseline and the search index) goes through [`analyze_token`],
//! so query words and index terms always agree.

use std::collections::HashSet;
use std::sync::OnceLock;

/// Version of [`STOPWORDS`]; bump whenever the list changes.
pub const STOPWORDS_VERSION: u32 = 1;

/// Common English function words plus claim boilerplate.
///
/// `is`, `more` and `such` are deliberately absent: they carry the
/// refinement wording of claims and are retained in specialization nodes.
pub const STOPWORDS: &[&str] = &[
    // pronouns and determiners
    "i",
    "me",
    "my",
    "myself",
    "we",
    "our",
    "ours",
    "ourselves",
    "you",
    "your",
    "yours",
    "yourself",
    "yourselves",
    "he",
    "him",
    "his",
    "himself",
    "she",
    "her",
    "hers",
    "herself",
    "it",
    "its",
    "itself",
    "they",
    "them",
    "their",
    "theirs",
    "themselves",
    "what",
    "which",
    "who",
    "whom",
    "this",
    "that",
    "these",
    "those",
    "a",
    "an",
    "the",
    "each",
    "every",
    "either",
    "neither",
    "any",
    "all",
    "both",
    "few",
    "most",
    "other",
    "some",
    "own",
    "same",
    // auxiliaries
    "am",
    "are",
    "was",
    "were",
    "be",
    "been",
    "being",
    "have",
    "has",
    "had",
    "having",
    "do",
    "does",
    "did",
    "doing",
    "can",
    "could",
    "will",
    "would",
    "shall",
    "should",
    "may",
    "might",
    "must",
    // conjunctions, prepositions, adverbs
    "and",
    "but",
    "if",
    "or",
    "because",
    "as",
    "until",
    "while",
    "of",
    "at",
    "by",
    "for",
    "with",
    "about",
    "against",
    "between",
    "into",
    "through",
    "during",
    "before",
    "after",
    "above",
    "below",
    "to",
    "from",
    "up",
    "down",
    "in",
    "out",
    "on",
    "off",
    "over",
    "under",
    "again",
    "further",
    "then",
    "once",
    "here",
    "there",
    "when",
    "where",
    "why",
    "how",
    "no",
    "nor",
    "not",
    "only",
    "so",
    "than",
    "too",
    "very",
    "just",
    "now",
    "s",
    "t",
    "towards",
    "toward",
    "upon",
    "via",
    "within",
    "without",
    "thereof",
    "therein",
    "thereby",
    "wherein",
    "whereby",
    "whereof",
    // claim boilerplate
    "characterized",
    "characterised",
    "comprising",
    "comprises",
    "comprise",
    "provide",
    "provides",
    "provided",
    "said",
];

fn stopword_set() -> &'static HashSet<&'static str> {
    static SET: OnceLock<HashSet<&'static str>> = OnceLock::new();
    SET.get_or_init(|| STOPWORDS.iter().copied().collect())
}

pub fn is_stopword(word: &str) -> bool {
    stopword_set().contains(word)
}

/// Splits raw text into lowercase alphanumeric runs.
pub fn split_words(text: &str) -> impl Iterator<Item = String> + '_ {
    text.split(|c: char| !c.is_alphanumeric())
        .filter(|w| !w.is_empty())
        .map(str::to_lowercase)
}

fn keep(word: &str) -> bool {
    !is_stopword(word) && !word.chars().all(|c| c.is_numeric())
}

/// Index terms of one parser token: its alphanumeric pieces, lowercased,
/// minus stopwords and numerals. Punctuation tokens produce nothing.
pub fn analyze_token(token: &str) -> impl Iterator<Item = String> + '_ {
    split_words(token).filter(|w| keep(w))
}

/// Index terms of free text.
pub fn analyze(text: &str) -> Vec<String> {
    split_words(text).filter(|w| keep(w)).collect()
}

/// Penn Treebank tags for punctuation and bracket tokens.
pub fn is_punctuation_tag(tag: &str) -> bool {
    matches!(
        tag,
        "," | "."
            | ":"
            | "``"
            | "''"
            | "-LRB-"
            | "-RRB-"
            | "-LCB-"
            | "-RCB-"
            | "-LSB-"
            | "-RSB-"
            | "HYPH"
            | "NFP"
    )
}

/// Content words of a POS-tagged token sequence, in their original case.
/// Lowercasing them gives exactly the [`analyze_token`] terms. Cardinal
/// numbers (`CD`) are dropped whatever their spelling ("one or more").
pub fn filter_stopwords<'a, I>(tokens: I) -> Vec<String>
where
    I: IntoIterator<Item = (&'a str, &'a str)>,
{
    tokens
        .into_iter()
        .filter(|(_, pos)| *pos != "CD" && !is_punctuation_tag(pos))
        .flat_map(|(token, _)| token.split(|c: char| !c.is_alphanumeric()))
        .filter(|w| !w.is_empty() && keep(&w.to_lowercase()))
        .map(str::to_string)
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn tagged<'a>(pairs: &'a [(&'a str, &'a str)]) -> Vec<String> {
        filter_stopwords(pairs.iter().copied())
    }

    #[test]
    fn preceding_claims_phrase() {
        let pairs = [
            ("Method", "NN"),
            ("according", "VBG"),
            ("to", "TO"),
            ("one", "CD"),
            ("or", "CC"),
            ("more", "JJR"),
            ("of", "IN"),
            ("the", "DT"),
            ("preceding", "VBG"),
            ("claims", "NNS"),
            ("25", "CD"),
            ("to", "TO"),
            ("36", "CD"),
        ];
        assert_eq!(
            tagged(&pairs),
            ["Method", "according", "more", "preceding", "claims"]
        );
    }

    #[test]
    fn all_stopwords() {
        assert!(tagged(&[("of", "IN"), ("the", "DT")]).is_empty());
    }

    #[test]
    fn coordination_drops_conjunction() {
        let pairs = [
            ("quadratic", "JJ"),
            ("or", "CC"),
            ("linear", "JJ"),
            ("programming", "NN"),
        ];
        assert_eq!(tagged(&pairs), ["quadratic", "linear", "programming"]);
    }

    #[test]
    fn punctuation_and_numerals_removed() {
        assert!(tagged(&[(",", ","), (".", "."), ("-LRB-", "-LRB-"), ("12", "NN")]).is_empty());
        assert_eq!(
            analyze("pump, 12 valves; -- 3.5 mm"),
            ["pump", "valves", "mm"]
        );
    }

    #[test]
    fn hyphenated_tokens_split() {
        assert_eq!(
            analyze("light-emitting Diode"),
            ["light", "emitting", "diode"]
        );
        assert_eq!(tagged(&[("The", "DT"), ("Diode", "NN")]), ["Diode"]);
        assert_eq!(tagged(&[("light-emitting", "JJ")]), ["light", "emitting"]);
    }

    #[test]
    fn nominal_one_is_kept() {
        assert_eq!(
            tagged(&[("an", "DT"), ("optimum", "JJ"), ("one", "NN")]),
            ["optimum", "one"]
        );
    }
}
