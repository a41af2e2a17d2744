//! TF-IDF keyword baseline.
//!
//! Each distinct term of a document's claims scores
//! `tf(term) × ln(num_docs / (doc_freq + 1))`; the top `k` become an
//! unboosted query.

use std::collections::{BTreeMap, HashMap, HashSet};

use crate::corpus::{ClaimDocument, Corpus};
use crate::scoring::QuerySpec;
use crate::text::analyze;

/// Keyword count of the baseline system.
pub const DEFAULT_KEYWORDS: usize = 70;

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct CollectionStats {
    pub num_docs: usize,
    pub doc_freq: HashMap<String, usize>,
}

impl CollectionStats {
    pub fn from_corpus(corpus: &Corpus) -> Self {
        let mut stats = CollectionStats::default();
        for doc in corpus.processed_documents() {
            stats.add_document(doc);
        }
        stats
    }

    pub fn add_document(&mut self, doc: &ClaimDocument) {
        self.num_docs += 1;
        let distinct: HashSet<String> = analyze(&doc.claims_text()).into_iter().collect();
        for term in distinct {
            *self.doc_freq.entry(term).or_default() += 1;
        }
    }

    pub fn doc_freq(&self, term: &str) -> usize {
        self.doc_freq.get(term).copied().unwrap_or(0)
    }

    pub fn idf(&self, term: &str) -> f64 {
        (self.num_docs as f64 / (self.doc_freq(term) as f64 + 1.0)).ln()
    }
}

/// Terms with their baseline scores, best first (ties lexicographic).
pub fn scored_terms(doc: &ClaimDocument, stats: &CollectionStats) -> Vec<(String, f64)> {
    let mut tf: BTreeMap<String, usize> = BTreeMap::new();
    for term in analyze(&doc.claims_text()) {
        *tf.entry(term).or_default() += 1;
    }
    let mut scored: Vec<(String, f64)> = tf
        .into_iter()
        .map(|(term, count)| {
            let score = count as f64 * stats.idf(&term);
            (term, score)
        })
        .collect();
    scored.sort_by(|a, b| b.1.total_cmp(&a.1).then_with(|| a.0.cmp(&b.0)));
    scored
}

pub fn tfidf_keywords(doc: &ClaimDocument, stats: &CollectionStats, k: usize) -> QuerySpec {
    QuerySpec::unboosted(scored_terms(doc, stats).into_iter().take(k).map(|(t, _)| t))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::corpus::Claim;
    use proptest::prelude::*;

    fn doc(id: &str, text: &str) -> ClaimDocument {
        ClaimDocument::new(
            id,
            None,
            "en",
            vec![Claim {
                num: 1,
                text: text.into(),
            }],
        )
        .unwrap()
    }

    fn corpus(docs: Vec<ClaimDocument>) -> Corpus {
        Corpus::from_documents(docs).unwrap()
    }

    #[test]
    fn rare_term_beats_common_term_at_equal_tf() {
        let target = doc(
            "D1",
            "zeolite zeolite zeolite zeolite binder binder binder binder",
        );
        let c = corpus(vec![
            target.clone(),
            doc("D2", "binder"),
            doc("D3", "resin"),
        ]);
        let stats = CollectionStats::from_corpus(&c);
        let scored = scored_terms(&target, &stats);
        assert_eq!(scored[0].0, "zeolite");
        assert!((scored[0].1 - 4.0 * (1.5f64).ln()).abs() < 1e-12);
        assert!((scored[0].1 - 1.62).abs() < 0.01);
        assert_eq!(scored[1], ("binder".to_string(), 0.0));
    }

    #[test]
    fn ubiquitous_term_never_ahead_of_positive_idf() {
        let target = doc("D1", "pump pump pump pump pump valve");
        let c = corpus(vec![
            target.clone(),
            doc("D2", "pump"),
            doc("D3", "pump seal"),
        ]);
        let stats = CollectionStats::from_corpus(&c);
        assert!(stats.idf("pump") <= 0.0);
        let q = tfidf_keywords(&target, &stats, 70);
        assert_eq!(q.words().collect::<Vec<_>>(), ["valve", "pump"]);
    }

    #[test]
    fn fewer_terms_than_k() {
        let target = doc("D1", "A pump with a valve.");
        let stats = CollectionStats::from_corpus(&corpus(vec![target.clone()]));
        let q = tfidf_keywords(&target, &stats, DEFAULT_KEYWORDS);
        assert_eq!(q.len(), 2);
        assert!(q.terms.iter().all(|t| t.boost == 1.0));
    }

    proptest! {
        #[test]
        fn bounded_and_deterministic(texts in prop::collection::vec("[a-e]{1,2}( [a-e]{1,2}){0,8}", 1..6), k in 1usize..10) {
            let docs: Vec<_> = texts.iter().enumerate().map(|(i, t)| doc(&format!("D{i}"), t)).collect();
            let stats = CollectionStats::from_corpus(&corpus(docs.clone()));
            let q1 = tfidf_keywords(&docs[0], &stats, k);
            let q2 = tfidf_keywords(&docs[0], &stats, k);
            prop_assert!(q1.len() <= k);
            prop_assert_eq!(q1, q2);
        }

        #[test]
        fn idf_response_to_document_removal(texts in prop::collection::vec("[a-d]( [a-d]){0,5}", 2..6), term in "[a-d]", pick in any::<prop::sample::Index>()) {
            let docs: Vec<_> = texts.iter().enumerate().map(|(i, t)| doc(&format!("D{i}"), t)).collect();
            let full = CollectionStats::from_corpus(&corpus(docs.clone()));
            let victim = pick.index(docs.len());
            let contains = analyze(&docs[victim].claims_text()).contains(&term);
            let mut fewer = docs.clone();
            fewer.remove(victim);
            let reduced = CollectionStats::from_corpus(&corpus(fewer));
            if !contains {
                // N shrinks with df fixed: ln(N/(df+1)) can only go down.
                prop_assert!(reduced.idf(&term) < full.idf(&term));
            } else if full.doc_freq(&term) < full.num_docs {
                prop_assert!(reduced.idf(&term) >= full.idf(&term) - 1e-12);
            }
        }
    }
}
